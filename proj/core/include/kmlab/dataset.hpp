#pragma once

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kmlab {

// Raised for malformed files, invalid arguments and guarded instance sizes.
// The command line tool maps it to the "input error" exit code.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// n points in R^d stored row-major, with optional latent labels and an
// enclosing radius M: every point must satisfy |x| <= M (up to 1e-9 slack).
struct Dataset {
  std::vector<double> coords;
  std::vector<int> labels;  // empty, or one label in [0,k) per point
  int dim = 0;
  double enclosing_radius = 0.0;

  std::size_t size() const { return dim > 0 ? coords.size() / static_cast<std::size_t>(dim) : 0; }
  bool labeled() const { return !labels.empty(); }
  std::span<const double> point(std::size_t i) const {
    return {coords.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
  void push_back(std::span<const double> x);
};

// Ordered k-tuple of codepoints in R^d. Codepoints need not be distinct;
// operations define their own behavior on degenerate codebooks.
struct Codebook {
  std::vector<double> coords;
  int dim = 0;

  int k() const { return dim > 0 ? static_cast<int>(coords.size()) / dim : 0; }
  std::span<const double> point(int j) const {
    return {coords.data() + static_cast<std::size_t>(j) * dim, static_cast<std::size_t>(dim)};
  }
  std::span<double> mutable_point(int j) {
    return {coords.data() + static_cast<std::size_t>(j) * dim, static_cast<std::size_t>(dim)};
  }
  static Codebook from_rows(const std::vector<std::vector<double>>& rows);
};

// Per-point cell index under the tessellation convention (lowest index wins
// on ties).
struct Assignment {
  std::vector<int> cells;
  int k = 0;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

double squared_distance(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> x);

// Smallest j minimizing |x - c_j|. Ties are broken deterministically to the
// lowest index; comparisons are exact on doubles.
int assign(std::span<const double> x, const Codebook& codebook);

Assignment partition(const Dataset& data, const Codebook& codebook);

struct ValidationReport {
  bool ok = true;
  double max_norm = 0.0;
  std::string message;
};

// Checks the Dataset invariants. Reports the maximum point norm so callers
// can auto-set the enclosing radius when a file omits it.
ValidationReport validate_dataset(const Dataset& data);

// Text format: first line "d=<int> n=<int> [M=<float>] [labeled=0|1]", then
// one point per line, space-separated, label appended last when labeled=1.
Dataset read_dataset(std::istream& in);
Dataset read_dataset_file(const std::string& path);
void write_dataset(std::ostream& out, const Dataset& data);
void write_dataset_file(const std::string& path, const Dataset& data);

}  // namespace kmlab
