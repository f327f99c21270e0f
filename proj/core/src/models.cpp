#include "kmlab/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "kmlab/detail/keyvalue.hpp"
#include "kmlab/rng.hpp"

namespace kmlab {

namespace {

constexpr long long kMonteCarloChunk = 65536;
constexpr long long kRejectionStall = 1000000;

// lower Cholesky factor of a d x d SPD matrix
std::vector<double> cholesky(std::span<const double> a, int d) {
  std::vector<double> L(static_cast<std::size_t>(d) * d, 0.0);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a[static_cast<std::size_t>(i) * d + j];
      for (int t = 0; t < j; ++t)
        s -= L[static_cast<std::size_t>(i) * d + t] * L[static_cast<std::size_t>(j) * d + t];
      if (i == j) {
        if (s <= 0.0) throw InputError("covariance matrix is not positive definite");
        L[static_cast<std::size_t>(i) * d + i] = std::sqrt(s);
      } else {
        L[static_cast<std::size_t>(i) * d + j] = s / L[static_cast<std::size_t>(j) * d + j];
      }
    }
  }
  return L;
}

// eigenvalue range of a symmetric matrix by cyclic Jacobi sweeps
std::pair<double, double> symmetric_eigen_range(std::span<const double> matrix, int d) {
  std::vector<double> a(matrix.begin(), matrix.end());
  auto at = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * d + j]; };
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) off += at(i, j) * at(i, j);
    if (off < 1e-24) break;
    for (int p = 0; p < d; ++p) {
      for (int q = p + 1; q < d; ++q) {
        if (at(p, q) == 0.0) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * at(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int i = 0; i < d; ++i) {
          const double aip = at(i, p), aiq = at(i, q);
          at(i, p) = c * aip - s * aiq;
          at(i, q) = s * aip + c * aiq;
        }
        for (int i = 0; i < d; ++i) {
          const double api = at(p, i), aqi = at(q, i);
          at(p, i) = c * api - s * aqi;
          at(q, i) = s * api + c * aqi;
        }
      }
    }
  }
  double lo = a[0], hi = a[0];
  for (int i = 0; i < d; ++i) {
    lo = std::min(lo, at(i, i));
    hi = std::max(hi, at(i, i));
  }
  return {lo, hi};
}

double minimax_codebook_B(const Codebook& c) {
  double B = std::numeric_limits<double>::infinity();
  for (int i = 0; i < c.k(); ++i)
    for (int j = i + 1; j < c.k(); ++j)
      B = std::min(B, std::sqrt(squared_distance(c.point(i), c.point(j))));
  return B;
}

const MinimaxParams& require_concrete(const MinimaxParams& params) {
  if (!params.concrete())
    throw InputError("minimax model: sign vector not materialized; concretize first");
  return params;
}

// one draw from the family, appended to coords; returns the latent label
int draw_point(const FiniteDistribution& dist, Rng& rng, std::vector<double>& coords) {
  const std::size_t idx = rng.weighted_index(dist.weights, 1.0);
  const auto p = dist.point(idx);
  coords.insert(coords.end(), p.begin(), p.end());
  return static_cast<int>(idx);
}

struct TgmmSampler {
  const TruncatedGmmParams& params;
  std::vector<std::vector<double>> factors;  // per component Cholesky
  long long accepted = 0;
  long long rejected = 0;

  explicit TgmmSampler(const TruncatedGmmParams& p) : params(p) {
    for (int j = 0; j < p.k; ++j) factors.push_back(cholesky(p.covariance(j), p.d));
  }

  int draw(Rng& rng, std::vector<double>& coords) {
    const int d = params.d;
    std::vector<double> z(d), x(d);
    const int comp = static_cast<int>(rng.weighted_index(params.weights, 1.0));
    long long stall = 0;
    while (true) {
      for (int t = 0; t < d; ++t) z[t] = rng.normal();
      const auto m = params.mean(comp);
      const auto& L = factors[comp];
      double norm_sq = 0.0;
      for (int i = 0; i < d; ++i) {
        double v = m[i];
        for (int j = 0; j <= i; ++j) v += L[static_cast<std::size_t>(i) * d + j] * z[j];
        x[i] = v;
        norm_sq += v * v;
      }
      if (norm_sq <= params.truncation_radius * params.truncation_radius) {
        ++accepted;
        coords.insert(coords.end(), x.begin(), x.end());
        return comp;
      }
      ++rejected;
      if (++stall > kRejectionStall)
        throw InputError("truncated GMM sampler: rejection stall, truncation too tight");
    }
  }
};

int draw_point(const MinimaxParams& params, Rng& rng, std::vector<double>& coords) {
  const int cell = static_cast<int>(rng.index(static_cast<std::size_t>(params.k)));
  const bool positive = rng.bernoulli((1.0 + params.sigma[cell] * params.delta) / 2.0);
  const double magnitude = rng.uniform() * params.rho();
  const auto z = params.center(cell);
  coords.push_back(z[0] + (positive ? magnitude : -magnitude));
  for (int t = 1; t < params.d; ++t) coords.push_back(z[t]);
  return cell;
}

}  // namespace

void TruncatedGmmParams::validate() const {
  if (k < 1 || d < 1) throw InputError("tgmm: k and d must be positive");
  if (means.size() != static_cast<std::size_t>(k) * d) throw InputError("tgmm: means size mismatch");
  if (covariances.size() != static_cast<std::size_t>(k) * d * d)
    throw InputError("tgmm: covariances size mismatch");
  if (weights.size() != static_cast<std::size_t>(k)) throw InputError("tgmm: weights size mismatch");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw InputError("tgmm: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InputError("tgmm: weights must sum to 1");
  double max_mean = 0.0;
  for (int j = 0; j < k; ++j) max_mean = std::max(max_mean, norm(mean(j)));
  if (truncation_radius < 2.0 * max_mean)
    throw InputError("tgmm: truncation radius must be at least twice the largest mean norm");
  for (int j = 0; j < k; ++j) cholesky(covariance(j), d);  // SPD check
}

double TruncatedGmmParams::sigma_max() const {
  double hi = 0.0;
  for (int j = 0; j < k; ++j) hi = std::max(hi, symmetric_eigen_range(covariance(j), d).second);
  return std::sqrt(hi);
}

double TruncatedGmmParams::sigma_min() const {
  double lo = std::numeric_limits<double>::infinity();
  for (int j = 0; j < k; ++j) lo = std::min(lo, symmetric_eigen_range(covariance(j), d).first);
  return std::sqrt(lo);
}

double TruncatedGmmParams::min_mean_gap() const {
  double gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) gap = std::min(gap, std::sqrt(squared_distance(mean(i), mean(j))));
  return gap;
}

Codebook TruncatedGmmParams::means_codebook() const {
  Codebook c;
  c.dim = d;
  c.coords = means;
  return c;
}

TruncatedGmmParams TruncatedGmmParams::isotropic(int k, int d, std::vector<double> means,
                                                 double sigma_std, std::vector<double> weights,
                                                 double truncation_radius) {
  TruncatedGmmParams p;
  p.k = k;
  p.d = d;
  p.means = std::move(means);
  p.weights = std::move(weights);
  p.truncation_radius = truncation_radius;
  p.covariances.assign(static_cast<std::size_t>(k) * d * d, 0.0);
  for (int j = 0; j < k; ++j)
    for (int t = 0; t < d; ++t)
      p.covariances[(static_cast<std::size_t>(j) * d + t) * d + t] = sigma_std * sigma_std;
  p.validate();
  return p;
}

double tgmm_c1_constant(int k, int d, double eta, double theta_min) {
  return std::sqrt(k * std::pow(2.0, d + 2) / ((1.0 - eta) * theta_min));
}

bool tgmm_mean_capture_regime(const TruncatedGmmParams& params, double eta) {
  const double theta_min = *std::min_element(params.weights.begin(), params.weights.end());
  const double c1 = tgmm_c1_constant(params.k, params.d, eta, theta_min);
  return params.sigma_max() / params.min_mean_gap() <= 1.0 / (16.0 * c1 * std::sqrt(params.d));
}

double MinimaxParams::spacing() const {
  return 3.0 * M / (4.0 * std::pow(static_cast<double>(k), 1.0 / static_cast<double>(d)));
}

Codebook MinimaxParams::optimal_codebook() const {
  require_concrete(*this);
  Codebook c;
  c.dim = d;
  c.coords = centers;
  const double offset = delta * rho() / 2.0;
  for (int i = 0; i < k; ++i) c.coords[static_cast<std::size_t>(i) * d] += sigma[i] * offset;
  return c;
}

double MinimaxParams::optimal_distortion() const {
  const double r = rho();
  return r * r / 3.0 - delta * delta * r * r / 4.0;
}

void MinimaxParams::validate() const {
  if (k < 1 || d < 1) throw InputError("minimax: k and d must be positive");
  if (!(M > 0.0)) throw InputError("minimax: M must be positive");
  if (!(delta > 0.0 && delta <= 1.0)) throw InputError("minimax: delta must lie in (0, 1]");
  if (!sigma.empty()) {
    if (sigma.size() != static_cast<std::size_t>(k)) throw InputError("minimax: sigma size mismatch");
    for (int s : sigma)
      if (s != 1 && s != -1) throw InputError("minimax: sigma entries must be +1 or -1");
  }
  if (centers.size() != static_cast<std::size_t>(k) * d)
    throw InputError("minimax: centers size mismatch");
  const double Delta = spacing();
  for (int i = 0; i < k; ++i) {
    if (norm(center(i)) > M - Delta / 8.0 + 1e-9)
      throw InputError("minimax: center outside B(0, M - Delta/8)");
    for (int j = i + 1; j < k; ++j) {
      if (std::sqrt(squared_distance(center(i), center(j))) < Delta - 1e-9)
        throw InputError("minimax: centers closer than Delta");
    }
  }
}

std::vector<double> minimax_centers(int k, int d, double M) {
  if (k < 1 || d < 1) throw InputError("minimax_centers: k and d must be positive");
  const double Delta = 3.0 * M / (4.0 * std::pow(static_cast<double>(k), 1.0 / d));
  const int per_axis = static_cast<int>(std::ceil(std::pow(static_cast<double>(k), 1.0 / d) - 1e-9));
  std::vector<double> centers;
  centers.reserve(static_cast<std::size_t>(k) * d);
  std::vector<int> idx(d, 0);
  for (int taken = 0; taken < k; ++taken) {
    for (int t = 0; t < d; ++t)
      centers.push_back((idx[t] - (per_axis - 1) / 2.0) * Delta);
    int t = d - 1;
    while (t >= 0 && ++idx[t] == per_axis) idx[t--] = 0;
    if (t < 0 && taken + 1 < k) throw InputError("minimax_centers: lattice exhausted");
  }
  // verify the packing
  for (int i = 0; i < k; ++i) {
    double norm_sq = 0.0;
    for (int t = 0; t < d; ++t) {
      const double v = centers[static_cast<std::size_t>(i) * d + t];
      norm_sq += v * v;
    }
    if (std::sqrt(norm_sq) > M - Delta / 8.0)
      throw InputError("minimax_centers: packing failure, center outside the ball");
  }
  return centers;
}

MinimaxParams make_minimax(int k, int d, double M, std::vector<int> sigma, double delta) {
  MinimaxParams p;
  p.k = k;
  p.d = d;
  p.M = M;
  p.sigma = std::move(sigma);
  p.delta = delta;
  p.centers = minimax_centers(k, d, M);
  p.validate();
  return p;
}

double minimax_true_gap(std::span<const int> sigma, std::span<const int> sigma_prime,
                        const MinimaxParams& params) {
  if (sigma.size() != sigma_prime.size() || sigma.size() != static_cast<std::size_t>(params.k))
    throw InputError("minimax_true_gap: sign vector length mismatch");
  int hamming = 0;
  for (std::size_t i = 0; i < sigma.size(); ++i) hamming += sigma[i] != sigma_prime[i];
  const double r = params.rho();
  return params.delta * params.delta * r * r / params.k * hamming;
}

double minimax_exact_distortion(const MinimaxParams& params, const Codebook& codebook) {
  require_concrete(params);
  if (codebook.dim != params.d) throw InputError("minimax_exact_distortion: dimension mismatch");
  const double r = params.rho();
  std::vector<double> endpoint(params.d);
  double total = 0.0;
  for (int i = 0; i < params.k; ++i) {
    const auto z = params.center(i);
    std::copy(z.begin(), z.end(), endpoint.begin());
    endpoint[0] = z[0] - r;
    const int j_low = assign(endpoint, codebook);
    endpoint[0] = z[0] + r;
    const int j_high = assign(endpoint, codebook);
    if (j_low != j_high)
      throw IntervalSplitError("segment " + std::to_string(i) +
                               " split across cells; use Monte-Carlo");
    const auto c = codebook.point(j_low);
    const double u = c[0] - z[0];
    double ortho_sq = 0.0;
    for (int t = 1; t < params.d; ++t) {
      const double v = c[t] - z[t];
      ortho_sq += v * v;
    }
    total += (r * r / 3.0 - u * params.sigma[i] * params.delta * r + u * u + ortho_sq) / params.k;
  }
  return total;
}

SampleWithTruth sample_finite(const FiniteDistribution& dist, long long n, std::uint64_t seed,
                              std::optional<int> truth_k) {
  dist.validate();
  if (n < 1) throw InputError("sample_finite: n must be >= 1");
  Rng rng(seed);
  SampleWithTruth out;
  out.dataset.dim = dist.dim;
  out.dataset.enclosing_radius = dist.enclosing_radius;
  out.dataset.coords.reserve(static_cast<std::size_t>(n) * dist.dim);
  out.dataset.labels.reserve(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) {
    out.dataset.labels.push_back(draw_point(dist, rng, out.dataset.coords));
  }
  if (truth_k) {
    try {
      const StationaryReport report = stationary_report(dist, *truth_k);
      out.truth = GroundTruth{report.optimal.front(), report.r_star, report.B, report.p_min};
    } catch (const InputError&) {
      // enumeration infeasible: leave the truth empty
    }
  }
  return out;
}

SampleWithTruth sample_truncated_gmm(const TruncatedGmmParams& params, long long n,
                                     std::uint64_t seed) {
  params.validate();
  if (n < 1) throw InputError("sample_truncated_gmm: n must be >= 1");
  Rng rng(seed);
  TgmmSampler sampler(params);
  SampleWithTruth out;
  out.dataset.dim = params.d;
  out.dataset.enclosing_radius = params.truncation_radius;
  out.dataset.coords.reserve(static_cast<std::size_t>(n) * params.d);
  out.dataset.labels.reserve(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) {
    out.dataset.labels.push_back(sampler.draw(rng, out.dataset.coords));
  }
  out.rejection_rate = sampler.rejected > 0
                           ? static_cast<double>(sampler.rejected) /
                                 static_cast<double>(sampler.accepted + sampler.rejected)
                           : 0.0;
  return out;
}

SampleWithTruth sample_minimax(const MinimaxParams& params, long long n, std::uint64_t seed) {
  if (n < 1) throw InputError("sample_minimax: n must be >= 1");
  MinimaxParams concrete = params;
  Rng rng(seed);
  if (!concrete.concrete()) {
    concrete.sigma.resize(params.k);
    for (int i = 0; i < params.k; ++i) concrete.sigma[i] = rng.bernoulli(0.5) ? 1 : -1;
  }
  concrete.validate();
  SampleWithTruth out;
  out.dataset.dim = concrete.d;
  out.dataset.enclosing_radius = concrete.M;
  out.dataset.coords.reserve(static_cast<std::size_t>(n) * concrete.d);
  out.dataset.labels.reserve(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) {
    out.dataset.labels.push_back(draw_point(concrete, rng, out.dataset.coords));
  }
  const Codebook optimal = concrete.optimal_codebook();
  out.truth = GroundTruth{optimal, concrete.optimal_distortion(), minimax_codebook_B(optimal),
                          1.0 / concrete.k};
  return out;
}

double Model::bounding_radius() const {
  if (const auto* f = as_finite()) return f->enclosing_radius;
  if (const auto* g = as_tgmm()) return g->truncation_radius;
  return as_minimax()->M;
}

Model load_model(std::istream& in) {
  const auto entries = detail::parse_keyvalue(in);
  auto find = [&](const std::string& key) -> const std::string* {
    for (const auto& [k, v] : entries)
      if (k == key) return &v;
    return nullptr;
  };
  auto require = [&](const std::string& key) -> const std::string& {
    const auto* v = find(key);
    if (!v) throw InputError("model spec: missing key " + key);
    return *v;
  };

  Model model;
  if (const auto* name = find("name")) model.name = *name;
  if (const auto* seed = find("seed")) model.default_seed = std::stoull(*seed);
  if (const auto* n = find("n")) model.default_n = std::stoll(*n);

  const std::string family = require("family");
  if (family == "finite") {
    FiniteDistribution dist;
    dist.dim = std::stoi(require("d"));
    dist.support = detail::parse_points(require("points"), dist.dim);
    const std::size_t r = dist.support.size() / dist.dim;
    if (const auto* w = find("weights")) {
      dist.weights = detail::parse_doubles(*w);
    } else {
      dist.weights.assign(r, 1.0 / static_cast<double>(r));
    }
    double max_norm = 0.0;
    for (std::size_t i = 0; i < r; ++i)
      max_norm = std::max(max_norm, norm({dist.support.data() + i * dist.dim,
                                          static_cast<std::size_t>(dist.dim)}));
    dist.enclosing_radius = find("M") ? std::stod(*find("M")) : max_norm;
    dist.validate();
    model.family = std::move(dist);
  } else if (family == "tgmm") {
    const int k = std::stoi(require("k"));
    const int d = std::stoi(require("d"));
    auto means = detail::parse_points(require("means"), d);
    if (means.size() != static_cast<std::size_t>(k) * d)
      throw InputError("model spec: means count differs from k");
    std::vector<double> weights;
    if (const auto* w = find("weights")) {
      weights = detail::parse_doubles(*w);
    } else {
      weights.assign(k, 1.0 / k);
    }
    const double sigma_std = std::stod(require("sigma"));  // per-component std, Sigma = sigma^2 I
    const double M = std::stod(require("M"));
    model.family =
        TruncatedGmmParams::isotropic(k, d, std::move(means), sigma_std, std::move(weights), M);
  } else if (family == "minimax") {
    const int k = std::stoi(require("k"));
    const int d = std::stoi(require("d"));
    const double M = std::stod(require("M"));
    std::vector<int> sigma;
    if (const auto* s = find("sigma")) {
      if (*s != "random") {
        std::istringstream ss(*s);
        std::string token;
        while (ss >> token) {
          if (token == "+" || token == "+1") sigma.push_back(1);
          else if (token == "-" || token == "-1") sigma.push_back(-1);
          else throw InputError("model spec: sigma tokens must be +/-");
        }
      }
    }
    const std::string delta_spec = require("delta");
    MinimaxParams params;
    if (delta_spec == "auto") {
      params = make_minimax(k, d, M, std::move(sigma), 1.0);
      params.delta_per_n = true;
    } else {
      params = make_minimax(k, d, M, std::move(sigma), std::stod(delta_spec));
    }
    model.family = std::move(params);
  } else {
    throw InputError("model spec: unknown family " + family);
  }
  return model;
}

Model load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open model spec: " + path);
  Model model = load_model(in);
  if (model.name.empty()) model.name = path;
  return model;
}

Model concretize(const Model& model, long long n, std::uint64_t seed) {
  Model out = model;
  if (auto* params = std::get_if<MinimaxParams>(&out.family)) {
    if (params->delta_per_n) {
      params->delta = std::min(1.0, std::sqrt(static_cast<double>(params->k)) /
                                        (2.0 * std::sqrt(static_cast<double>(n))));
      params->delta_per_n = false;
    }
    if (!params->concrete()) {
      Rng rng(mix_seed(seed, 0xC0FFEE));
      params->sigma.resize(params->k);
      for (int i = 0; i < params->k; ++i) params->sigma[i] = rng.bernoulli(0.5) ? 1 : -1;
    }
    params->validate();
  }
  return out;
}

SampleWithTruth sample(const Model& model, long long n, std::uint64_t seed) {
  if (const auto* f = model.as_finite()) return sample_finite(*f, n, seed);
  if (const auto* g = model.as_tgmm()) return sample_truncated_gmm(*g, n, seed);
  return sample_minimax(*model.as_minimax(), n, seed);
}

std::optional<double> exact_distortion(const Model& model, const Codebook& codebook) {
  if (const auto* f = model.as_finite()) return finite_distortion(*f, codebook);
  if (const auto* m = model.as_minimax()) {
    require_concrete(*m);
    try {
      return minimax_exact_distortion(*m, codebook);
    } catch (const IntervalSplitError&) {
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::optional<GroundTruth> ground_truth(const Model& model, int k) {
  if (const auto* f = model.as_finite()) {
    try {
      const StationaryReport report = stationary_report(*f, k);
      return GroundTruth{report.optimal.front(), report.r_star, report.B, report.p_min};
    } catch (const InputError&) {
      return std::nullopt;
    }
  }
  if (const auto* m = model.as_minimax()) {
    if (k != m->k) return std::nullopt;
    require_concrete(*m);
    const Codebook optimal = m->optimal_codebook();
    return GroundTruth{optimal, m->optimal_distortion(), minimax_codebook_B(optimal), 1.0 / m->k};
  }
  return std::nullopt;
}

DistortionEstimate population_distortion(const Model& model, const Codebook& codebook,
                                         long long n_mc, std::uint64_t seed) {
  if (const auto exact = exact_distortion(model, codebook)) {
    return {*exact, 0.0, 0};
  }
  if (n_mc < 2) throw InputError("population_distortion: n_mc must be >= 2");

  // fixed-size substream chunks: the result is independent of how chunks
  // would be distributed over workers
  double sum = 0.0, sum_sq = 0.0;
  std::vector<double> coords;
  const TgmmSampler* unused = nullptr;
  (void)unused;
  long long done = 0;
  for (long long chunk = 0; done < n_mc; ++chunk) {
    const long long count = std::min(kMonteCarloChunk, n_mc - done);
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(chunk)));
    coords.clear();
    if (const auto* f = model.as_finite()) {
      for (long long i = 0; i < count; ++i) draw_point(*f, rng, coords);
    } else if (const auto* g = model.as_tgmm()) {
      TgmmSampler sampler(*g);
      for (long long i = 0; i < count; ++i) sampler.draw(rng, coords);
    } else {
      const auto& m = require_concrete(*model.as_minimax());
      for (long long i = 0; i < count; ++i) draw_point(m, rng, coords);
    }
    const int d = codebook.dim;
    for (long long i = 0; i < count; ++i) {
      const double g = gamma_contrast(
          codebook, {coords.data() + static_cast<std::size_t>(i) * d, static_cast<std::size_t>(d)});
      sum += g;
      sum_sq += g * g;
    }
    done += count;
  }
  const double mean = sum / static_cast<double>(n_mc);
  const double var = std::max(0.0, (sum_sq - sum * mean) / static_cast<double>(n_mc - 1));
  return {mean, std::sqrt(var / static_cast<double>(n_mc)), n_mc};
}

std::optional<Codebook> reference_codebook(const Model& model, Reference ref, int k) {
  if (const auto* g = model.as_tgmm()) {
    if (ref == Reference::bayes_means) return g->means_codebook();
    return std::nullopt;
  }
  if (const auto* m = model.as_minimax()) {
    if (k != m->k) return std::nullopt;
    require_concrete(*m);
    // component means coincide with the optimal codebook for this family
    return m->optimal_codebook();
  }
  if (ref == Reference::optimal_codebook) {
    if (const auto truth = ground_truth(model, k)) return truth->optimal;
  }
  return std::nullopt;
}

PopulationClassifRisk classif_risk_population(const Model& model, const Codebook& codebook,
                                              Reference ref, long long n_mc, std::uint64_t seed) {
  const auto reference = reference_codebook(model, ref, codebook.k());
  if (!reference) throw InputError("classif_risk_population: reference unavailable for model");
  const int k = std::max(codebook.k(), reference->k());
  std::vector<std::vector<double>> confusion(k, std::vector<double>(k, 0.0));

  PopulationClassifRisk risk;
  if (const auto* f = model.as_finite()) {
    // exact summation over the support
    for (std::size_t i = 0; i < f->size(); ++i) {
      const auto x = f->point(i);
      confusion[assign(x, codebook)][assign(x, *reference)] += f->weights[i];
    }
    risk.matching = best_label_matching(confusion);
    double agree = 0.0;
    for (int j = 0; j < k; ++j) agree += confusion[risk.matching[j]][j];
    risk.value = 1.0 - agree;
    risk.std_error = 0.0;
    return risk;
  }

  if (n_mc < 2) throw InputError("classif_risk_population: n_mc must be >= 2");
  std::vector<double> coords;
  long long done = 0;
  for (long long chunk = 0; done < n_mc; ++chunk) {
    const long long count = std::min(kMonteCarloChunk, n_mc - done);
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(chunk)));
    coords.clear();
    if (const auto* g = model.as_tgmm()) {
      TgmmSampler sampler(*g);
      for (long long i = 0; i < count; ++i) sampler.draw(rng, coords);
    } else {
      const auto& m = require_concrete(*model.as_minimax());
      for (long long i = 0; i < count; ++i) draw_point(m, rng, coords);
    }
    const int d = codebook.dim;
    for (long long i = 0; i < count; ++i) {
      const std::span<const double> x{coords.data() + static_cast<std::size_t>(i) * d,
                                      static_cast<std::size_t>(d)};
      confusion[assign(x, codebook)][assign(x, *reference)] += 1.0;
    }
    done += count;
  }
  risk.matching = best_label_matching(confusion);
  double agree = 0.0;
  for (int j = 0; j < k; ++j) agree += confusion[risk.matching[j]][j];
  risk.value = 1.0 - agree / static_cast<double>(n_mc);
  risk.std_error = std::sqrt(std::max(0.0, risk.value * (1.0 - risk.value)) /
                             static_cast<double>(n_mc));
  return risk;
}

}  // namespace kmlab
