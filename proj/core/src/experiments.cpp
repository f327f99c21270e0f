#include "kmlab/experiments.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include "kmlab/detail/keyvalue.hpp"
#include "kmlab/margin.hpp"
#include "kmlab/rng.hpp"

namespace kmlab {

namespace {

// shortest round-trip decimal form, locale-free
std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Index-addressed parallel loop: every task writes only its own slot, so
// results do not depend on the scheduling.
void parallel_for(int threads, std::size_t count, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int workers = std::min<std::size_t>(threads, count);
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= count) break;
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe aggregate(std::span<const double> values) {
  const std::size_t n = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double se = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
  return {mean, se};
}

double f_for(const ExperimentConfig& config, double p_min, long long n) {
  if (config.f_rule == FRule::fixed) return config.fixed_f;
  return std::sqrt(p_min * static_cast<double>(n));
}

bool within_cor5_hypotheses(const Model& model) {
  const auto* g = model.as_tgmm();
  if (!g || g->k != 2) return false;
  for (double w : g->weights) {
    if (std::abs(w - 1.0 / g->k) > 1e-12) return false;
  }
  // equal spherical covariances
  const auto first = g->covariance(0);
  for (int j = 0; j < g->k; ++j) {
    const auto cov = g->covariance(j);
    for (int a = 0; a < g->d; ++a) {
      for (int b = 0; b < g->d; ++b) {
        const double v = cov[static_cast<std::size_t>(a) * g->d + b];
        if (a == b) {
          if (std::abs(v - first[0]) > 1e-12) return false;
        } else if (v != 0.0) {
          return false;
        }
      }
    }
  }
  return true;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (k < 1) throw InputError("experiment config: k must be >= 1");
  if (n_grid.empty()) throw InputError("experiment config: empty n grid");
  for (std::size_t i = 1; i < n_grid.size(); ++i) {
    if (n_grid[i] <= n_grid[i - 1])
      throw InputError("experiment config: n grid must be strictly increasing");
  }
  if (replicates < 1) throw InputError("experiment config: replicates must be >= 1");
  if (restarts < 1) throw InputError("experiment config: restarts must be >= 1");
  if (f_rule == FRule::fixed && !(fixed_f >= 0.0))
    throw InputError("experiment config: fixed f must be nonnegative");
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open experiment config: " + path);
  const auto entries = detail::parse_keyvalue(in);

  ExperimentConfig config;
  bool have_model = false;
  for (const auto& [key, value] : entries) {
    if (key == "model") {
      const auto resolved = std::filesystem::path(path).parent_path() / value;
      config.model = load_model_file(resolved.string());
      have_model = true;
    } else if (key == "k") {
      config.k = std::stoi(value);
    } else if (key == "n_grid") {
      config.n_grid.clear();
      for (double v : detail::parse_doubles(value)) config.n_grid.push_back(static_cast<long long>(v));
    } else if (key == "replicates") {
      config.replicates = std::stoi(value);
    } else if (key == "restarts") {
      config.restarts = std::stoi(value);
    } else if (key == "base_seed") {
      config.base_seed = std::stoull(value);
    } else if (key == "n_mc") {
      config.n_mc = std::stoll(value);
    } else if (key == "f_rule") {
      if (value == "sqrt_pmin_n") config.f_rule = FRule::sqrt_pmin_n;
      else if (value == "fixed") config.f_rule = FRule::fixed;
      else throw InputError("experiment config: f_rule must be sqrt_pmin_n or fixed");
    } else if (key == "f") {
      config.fixed_f = std::stod(value);
    } else if (key == "threads") {
      config.threads = std::stoi(value);
    } else {
      throw InputError("experiment config: unknown key " + key);
    }
  }
  if (!have_model) throw InputError("experiment config: missing model");
  config.validate();
  return config;
}

std::uint64_t replicate_seed(std::uint64_t base_seed, long long n, int rep) {
  return mix_seed(base_seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(rep));
}

std::vector<RateRow> rate_study(const ExperimentConfig& config) {
  config.validate();
  struct Cell {
    double excess = 0.0;
    double clusterable = 0.0;
  };
  const std::size_t reps = static_cast<std::size_t>(config.replicates);
  std::vector<Cell> cells(config.n_grid.size() * reps);

  // finite supports have an n-independent ground truth; compute it once
  std::optional<GroundTruth> static_truth;
  if (config.model.as_finite()) {
    static_truth = ground_truth(config.model, config.k);
    if (!static_truth) throw InputError("rate_study: model without ground truth");
  }

  parallel_for(config.threads, cells.size(), [&](std::size_t task) {
    const std::size_t grid_idx = task / reps;
    const int rep = static_cast<int>(task % reps);
    const long long n = config.n_grid[grid_idx];
    const std::uint64_t seed = replicate_seed(config.base_seed, n, rep);

    const Model model = concretize(config.model, n, mix_seed(seed, 1));
    std::optional<GroundTruth> truth =
        static_truth ? static_truth : ground_truth(model, config.k);
    if (!truth) throw InputError("rate_study: model without ground truth");

    const SampleWithTruth s = sample(model, n, mix_seed(seed, 2));
    const LloydResult fit =
        multi_start_erm(s.dataset, config.k, config.restarts, mix_seed(seed, 3));
    const DistortionEstimate pop =
        population_distortion(model, fit.codebook, config.n_mc, mix_seed(seed, 4));
    cells[task].excess = pop.value - truth->optimal_distortion;

    const double f = f_for(config, truth->p_min, n);
    bool clusterable = false;
    try {
      clusterable = f_clusterability_check(s.dataset, fit.codebook, f);
    } catch (const InputError&) {
      clusterable = false;  // empty cell: not clusterable
    }
    cells[task].clusterable = clusterable ? 1.0 : 0.0;
  });

  std::vector<RateRow> rows;
  rows.reserve(config.n_grid.size());
  for (std::size_t g = 0; g < config.n_grid.size(); ++g) {
    std::vector<double> excess(reps), clusterable(reps);
    for (std::size_t r = 0; r < reps; ++r) {
      excess[r] = cells[g * reps + r].excess;
      clusterable[r] = cells[g * reps + r].clusterable;
    }
    const MeanSe e = aggregate(excess);
    const MeanSe c = aggregate(clusterable);
    RateRow row;
    row.n = config.n_grid[g];
    row.replicates = config.replicates;
    row.base_seed = config.base_seed;
    row.mean_excess_distortion = e.mean;
    row.std_error = e.se;
    row.has_excess = true;
    row.clusterable_fraction = c.mean;
    row.has_clusterable = true;
    rows.push_back(row);
  }
  return rows;
}

std::vector<RateRow> classif_study(const ExperimentConfig& config) {
  config.validate();
  if (!reference_codebook(config.model, Reference::bayes_means, config.k))
    throw InputError("classif_study: model does not expose a Bayes (means) partition");
  const bool warn = !within_cor5_hypotheses(config.model);

  const std::size_t reps = static_cast<std::size_t>(config.replicates);
  std::vector<double> risks(config.n_grid.size() * reps);

  parallel_for(config.threads, risks.size(), [&](std::size_t task) {
    const std::size_t grid_idx = task / reps;
    const int rep = static_cast<int>(task % reps);
    const long long n = config.n_grid[grid_idx];
    const std::uint64_t seed = replicate_seed(config.base_seed, n, rep);

    const Model model = concretize(config.model, n, mix_seed(seed, 1));
    const SampleWithTruth s = sample(model, n, mix_seed(seed, 2));
    const LloydResult fit =
        multi_start_erm(s.dataset, config.k, config.restarts, mix_seed(seed, 3));
    risks[task] = classif_risk_population(model, fit.codebook, Reference::bayes_means,
                                          config.n_mc, mix_seed(seed, 5))
                      .value;
  });

  std::vector<RateRow> rows;
  rows.reserve(config.n_grid.size());
  for (std::size_t g = 0; g < config.n_grid.size(); ++g) {
    const MeanSe r = aggregate({risks.data() + g * reps, reps});
    RateRow row;
    row.n = config.n_grid[g];
    row.replicates = config.replicates;
    row.base_seed = config.base_seed;
    row.mean_classif_risk = r.mean;
    row.std_error_classif = r.se;
    row.has_classif = true;
    row.warning = warn;
    rows.push_back(row);
  }
  return rows;
}

std::vector<RateRow> clusterability_study(const ExperimentConfig& config) {
  config.validate();
  const std::size_t reps = static_cast<std::size_t>(config.replicates);
  std::vector<double> passes(config.n_grid.size() * reps);

  std::optional<GroundTruth> static_truth;
  if (config.model.as_finite()) {
    static_truth = ground_truth(config.model, config.k);
  }
  if (config.f_rule == FRule::sqrt_pmin_n && config.model.as_finite() && !static_truth)
    throw InputError("clusterability_study: ground-truth p_min unavailable");

  parallel_for(config.threads, passes.size(), [&](std::size_t task) {
    const std::size_t grid_idx = task / reps;
    const int rep = static_cast<int>(task % reps);
    const long long n = config.n_grid[grid_idx];
    const std::uint64_t seed = replicate_seed(config.base_seed, n, rep);

    const Model model = concretize(config.model, n, mix_seed(seed, 1));
    std::optional<GroundTruth> truth =
        static_truth ? static_truth : ground_truth(model, config.k);
    if (config.f_rule == FRule::sqrt_pmin_n && !truth)
      throw InputError("clusterability_study: ground-truth p_min unavailable");

    const SampleWithTruth s = sample(model, n, mix_seed(seed, 2));
    const LloydResult fit =
        multi_start_erm(s.dataset, config.k, config.restarts, mix_seed(seed, 3));
    const double f = f_for(config, truth ? truth->p_min : 0.0, n);
    bool pass = false;
    try {
      pass = f_clusterability_check(s.dataset, fit.codebook, f);
    } catch (const InputError&) {
      pass = false;
    }
    passes[task] = pass ? 1.0 : 0.0;
  });

  std::vector<RateRow> rows;
  rows.reserve(config.n_grid.size());
  for (std::size_t g = 0; g < config.n_grid.size(); ++g) {
    const MeanSe frac = aggregate({passes.data() + g * reps, reps});
    RateRow row;
    row.n = config.n_grid[g];
    row.replicates = config.replicates;
    row.base_seed = config.base_seed;
    row.clusterable_fraction = frac.mean;
    row.has_clusterable = true;
    rows.push_back(row);
  }
  return rows;
}

namespace {

struct ColumnView {
  double mean = 0.0;
  double se = 0.0;
  bool present = false;
};

ColumnView column_of(const RateRow& row, const std::string& column) {
  if (column == "mean_excess_distortion")
    return {row.mean_excess_distortion, row.std_error, row.has_excess};
  if (column == "mean_classif_risk")
    return {row.mean_classif_risk, row.std_error_classif, row.has_classif};
  if (column == "clusterable_fraction")
    return {row.clusterable_fraction, 0.0, row.has_clusterable};
  throw InputError("unknown CSV column: " + column);
}

}  // namespace

SlopeFit fit_loglog_slope(std::span<const RateRow> rows, const std::string& column) {
  SlopeFit fit;
  std::vector<double> x, y, rel_se;
  for (const auto& row : rows) {
    const ColumnView v = column_of(row, column);
    if (!v.present || !(v.mean > 0.0)) {
      fit.excluded_n.push_back(row.n);
      continue;
    }
    x.push_back(std::log(static_cast<double>(row.n)));
    y.push_back(std::log(v.mean));
    rel_se.push_back(v.se / v.mean);
  }
  fit.rows_used = static_cast<int>(x.size());
  if (fit.rows_used < 3)
    throw InputError("fit_loglog_slope: need at least 3 rows with positive means");

  double x_bar = 0.0, y_bar = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    x_bar += x[i];
    y_bar += y[i];
  }
  x_bar /= static_cast<double>(x.size());
  y_bar /= static_cast<double>(y.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - x_bar) * (x[i] - x_bar);
    sxy += (x[i] - x_bar) * (y[i] - y_bar);
  }
  fit.slope = sxy / sxx;
  fit.intercept = y_bar - fit.slope * x_bar;
  // normal-approximation band propagated from the replicate standard errors
  double var = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = (x[i] - x_bar) / sxx;
    var += w * w * rel_se[i] * rel_se[i];
  }
  fit.half_band = 1.96 * std::sqrt(var);
  return fit;
}

std::string to_csv(std::span<const RateRow> rows) {
  std::ostringstream out;
  out << "n,replicates,base_seed,mean_excess_distortion,std_error,mean_classif_risk,"
         "std_error_classif,clusterable_fraction\n";
  for (const auto& row : rows) {
    out << row.n << ',' << row.replicates << ',' << row.base_seed << ',';
    if (row.has_excess) out << format_double(row.mean_excess_distortion);
    out << ',';
    if (row.has_excess) out << format_double(row.std_error);
    out << ',';
    if (row.has_classif) out << format_double(row.mean_classif_risk);
    out << ',';
    if (row.has_classif) out << format_double(row.std_error_classif);
    out << ',';
    if (row.has_clusterable) out << format_double(row.clusterable_fraction);
    out << '\n';
  }
  return out.str();
}

std::vector<RateRow> parse_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw InputError("CSV: missing header");
  if (header.rfind("n,replicates,base_seed,", 0) != 0)
    throw InputError("CSV: unexpected header: " + header);

  std::vector<RateRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    while (fields.size() < 8) fields.emplace_back();
    RateRow row;
    row.n = std::stoll(fields[0]);
    row.replicates = std::stoi(fields[1]);
    row.base_seed = std::stoull(fields[2]);
    if (!fields[3].empty()) {
      row.mean_excess_distortion = std::stod(fields[3]);
      row.std_error = std::stod(fields[4]);
      row.has_excess = true;
    }
    if (!fields[5].empty()) {
      row.mean_classif_risk = std::stod(fields[5]);
      row.std_error_classif = fields[6].empty() ? 0.0 : std::stod(fields[6]);
      row.has_classif = true;
    }
    if (!fields[7].empty()) {
      row.clusterable_fraction = std::stod(fields[7]);
      row.has_clusterable = true;
    }
    rows.push_back(row);
  }
  return rows;
}

void write_svg_loglog(std::ostream& out, std::span<const RateRow> rows, const std::string& column,
                      const std::string& title) {
  constexpr int width = 640, height = 480, margin = 60;
  std::vector<std::pair<double, double>> pts;
  for (const auto& row : rows) {
    const ColumnView v = column_of(row, column);
    if (v.present && v.mean > 0.0)
      pts.emplace_back(std::log10(static_cast<double>(row.n)), std::log10(v.mean));
  }
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
      << title << "</text>\n";
  if (pts.size() >= 2) {
    double x0 = pts.front().first, x1 = pts.front().first;
    double y0 = pts.front().second, y1 = pts.front().second;
    for (const auto& [px, py] : pts) {
      x0 = std::min(x0, px);
      x1 = std::max(x1, px);
      y0 = std::min(y0, py);
      y1 = std::max(y1, py);
    }
    if (x1 == x0) x1 = x0 + 1.0;
    if (y1 == y0) y1 = y0 + 1.0;
    auto sx = [&](double v) {
      return margin + (v - x0) / (x1 - x0) * (width - 2 * margin);
    };
    auto sy = [&](double v) {
      return height - margin - (v - y0) / (y1 - y0) * (height - 2 * margin);
    };
    out << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
        << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
        << height - margin << "\" stroke=\"black\"/>\n";
    out << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (const auto& [px, py] : pts) out << format_double(sx(px)) << ',' << format_double(sy(py)) << ' ';
    out << "\"/>\n";
    for (const auto& [px, py] : pts) {
      out << "<circle cx=\"" << format_double(sx(px)) << "\" cy=\"" << format_double(sy(py))
          << "\" r=\"3\" fill=\"steelblue\"/>\n";
    }
    out << "<text x=\"" << width / 2 << "\" y=\"" << height - 16
        << "\" text-anchor=\"middle\" font-size=\"12\">log10 n</text>\n";
    out << "<text x=\"16\" y=\"" << height / 2 << "\" font-size=\"12\" transform=\"rotate(-90 16 "
        << height / 2 << ")\">log10 " << column << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace kmlab
