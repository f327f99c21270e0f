#pragma once

#include <algorithm>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "kmlab/dataset.hpp"

namespace kmlab::detail {

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

// `key = value` lines; blank lines and '#' comments ignored. Values keep
// internal spaces.
inline std::vector<std::pair<std::string, std::string>> parse_keyvalue(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError("config: expected key = value, got: " + line);
    entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return entries;
}

inline std::vector<double> parse_doubles(const std::string& value) {
  std::vector<double> out;
  std::istringstream in(value);
  double v;
  while (in >> v) out.push_back(v);
  if (!in.eof()) throw InputError("config: bad numeric list: " + value);
  return out;
}

// semicolon-separated points, space-separated coordinates
inline std::vector<double> parse_points(const std::string& value, int dim) {
  std::vector<double> out;
  std::string part;
  std::istringstream in(value);
  while (std::getline(in, part, ';')) {
    const auto coords = parse_doubles(part);
    if (static_cast<int>(coords.size()) != dim)
      throw InputError("config: point with wrong dimension: " + part);
    out.insert(out.end(), coords.begin(), coords.end());
  }
  return out;
}

}  // namespace kmlab::detail
