#include "kmlab/dataset.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace kmlab {

namespace {

constexpr double kRadiusSlack = 1e-9;

void format_double(std::ostream& out, double v) {
  std::ostringstream tmp;
  tmp.precision(17);
  tmp << v;
  out << tmp.str();
}

}  // namespace

void Dataset::push_back(std::span<const double> x) {
  if (static_cast<int>(x.size()) != dim) throw InputError("point dimension mismatch");
  coords.insert(coords.end(), x.begin(), x.end());
}

Codebook Codebook::from_rows(const std::vector<std::vector<double>>& rows) {
  Codebook c;
  if (rows.empty()) throw InputError("codebook needs at least one codepoint");
  c.dim = static_cast<int>(rows.front().size());
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != c.dim) throw InputError("ragged codebook rows");
    c.coords.insert(c.coords.end(), r.begin(), r.end());
  }
  return c;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

int assign(std::span<const double> x, const Codebook& codebook) {
  if (static_cast<int>(x.size()) != codebook.dim)
    throw InputError("assign: point dimension does not match codebook");
  const int k = codebook.k();
  int best = 0;
  double best_d = squared_distance(x, codebook.point(0));
  for (int j = 1; j < k; ++j) {
    const double d = squared_distance(x, codebook.point(j));
    if (d < best_d) {  // strict: ties stay with the lowest index
      best_d = d;
      best = j;
    }
  }
  return best;
}

Assignment partition(const Dataset& data, const Codebook& codebook) {
  if (data.dim != codebook.dim && data.size() > 0)
    throw InputError("partition: dimension mismatch");
  Assignment a;
  a.k = codebook.k();
  a.cells.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) a.cells[i] = assign(data.point(i), codebook);
  return a;
}

ValidationReport validate_dataset(const Dataset& data) {
  ValidationReport report;
  if (data.dim <= 0) {
    return {false, 0.0, "dimension must be positive"};
  }
  if (data.coords.size() % static_cast<std::size_t>(data.dim) != 0) {
    return {false, 0.0, "coordinate count is not a multiple of the dimension"};
  }
  if (data.labeled() && data.labels.size() != data.size()) {
    return {false, 0.0, "label count differs from point count"};
  }
  double max_norm = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.point(i)) {
      if (!std::isfinite(v)) {
        return {false, max_norm, "non-finite coordinate in point " + std::to_string(i)};
      }
    }
    max_norm = std::max(max_norm, norm(data.point(i)));
  }
  report.max_norm = max_norm;
  if (data.enclosing_radius > 0.0 && max_norm > data.enclosing_radius + kRadiusSlack) {
    report.ok = false;
    report.message = "point outside the enclosing ball (max norm " + std::to_string(max_norm) +
                     " > M = " + std::to_string(data.enclosing_radius) + ")";
    return report;
  }
  return report;
}

Dataset read_dataset(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw InputError("dataset file: missing header line");

  Dataset data;
  long long n = -1;
  bool labeled = false;
  bool have_radius = false;
  std::istringstream hs(header);
  std::string token;
  while (hs >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw InputError("dataset header: expected key=value, got " + token);
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    try {
      if (key == "d") {
        data.dim = std::stoi(value);
      } else if (key == "n") {
        n = std::stoll(value);
      } else if (key == "M") {
        data.enclosing_radius = std::stod(value);
        have_radius = true;
      } else if (key == "labeled") {
        labeled = std::stoi(value) != 0;
      } else {
        throw InputError("dataset header: unknown key " + key);
      }
    } catch (const std::logic_error&) {
      throw InputError("dataset header: bad value for " + key);
    }
  }
  if (data.dim <= 0 || n < 0) throw InputError("dataset header must set d and n");

  data.coords.reserve(static_cast<std::size_t>(n) * data.dim);
  if (labeled) data.labels.reserve(static_cast<std::size_t>(n));
  std::string line;
  long long read = 0;
  while (read < n && std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    for (int j = 0; j < data.dim; ++j) {
      double v;
      if (!(ls >> v)) throw InputError("dataset: short point line " + std::to_string(read));
      data.coords.push_back(v);
    }
    if (labeled) {
      int label;
      if (!(ls >> label)) throw InputError("dataset: missing label on line " + std::to_string(read));
      data.labels.push_back(label);
    }
    double extra;
    if (ls >> extra) throw InputError("dataset: trailing values on line " + std::to_string(read));
    ++read;
  }
  if (read != n) throw InputError("dataset: expected " + std::to_string(n) + " points, found " +
                                  std::to_string(read));

  auto report = validate_dataset(data);
  if (!report.ok) throw InputError("dataset: " + report.message);
  if (!have_radius) data.enclosing_radius = report.max_norm;
  return data;
}

Dataset read_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open dataset file: " + path);
  return read_dataset(in);
}

void write_dataset(std::ostream& out, const Dataset& data) {
  out << "d=" << data.dim << " n=" << data.size();
  out << " M=";
  format_double(out, data.enclosing_radius);
  out << " labeled=" << (data.labeled() ? 1 : 0) << "\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto p = data.point(i);
    for (int j = 0; j < data.dim; ++j) {
      if (j) out << ' ';
      format_double(out, p[j]);
    }
    if (data.labeled()) out << ' ' << data.labels[i];
    out << "\n";
  }
}

void write_dataset_file(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write dataset file: " + path);
  write_dataset(out, data);
}

}  // namespace kmlab
