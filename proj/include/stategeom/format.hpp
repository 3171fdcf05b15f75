#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "stategeom/common.hpp"

namespace stategeom {

// Fixed 17-significant-digit scientific notation; keeps golden files
// bit-stable.
inline std::string fmt_sci17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", v);
  return buf;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::string to_csv() const {
    std::ostringstream os;
    for (size_t c = 0; c < header.size(); ++c) {
      if (c) os << ',';
      os << header[c];
    }
    os << '\n';
    for (const auto& row : rows) {
      for (size_t c = 0; c < row.size(); ++c) {
        if (c) os << ',';
        os << fmt_sci17(row[c]);
      }
      os << '\n';
    }
    return os.str();
  }

  std::string to_json() const {
    std::ostringstream os;
    os << "{\"header\":[";
    for (size_t c = 0; c < header.size(); ++c) {
      if (c) os << ',';
      os << '"' << header[c] << '"';
    }
    os << "],\"rows\":[";
    for (size_t r = 0; r < rows.size(); ++r) {
      if (r) os << ',';
      os << '[';
      for (size_t c = 0; c < rows[r].size(); ++c) {
        if (c) os << ',';
        os << fmt_sci17(rows[r][c]);
      }
      os << ']';
    }
    os << "]}\n";
    return os.str();
  }
};

// Flat key = value run configuration. Unknown keys are rejected up front;
// command-line flags override file entries.
class RunConfig {
 public:
  void set(const std::string& key, const std::string& value) { kv_[key] = value; }
  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string str(const std::string& key, const std::string& fallback = "") const {
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
  }

  double num(const std::string& key, double fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    try {
      size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw Error(errc::config, "key '" + key + "' is not a number: " + it->second);
    }
  }

  int integer(const std::string& key, int fallback) const {
    const double v = num(key, fallback);
    return static_cast<int>(v);
  }

  void validate(const std::set<std::string>& known) const {
    for (const auto& [k, v] : kv_) {
      (void)v;
      if (!known.count(k)) throw Error(errc::config, "unknown config key: " + k);
    }
  }

  const std::map<std::string, std::string>& entries() const { return kv_; }

  std::string serialize() const {
    std::ostringstream os;
    for (const auto& [k, v] : kv_) os << k << " = " << v << "\n";
    return os.str();
  }

 private:
  std::map<std::string, std::string> kv_;
};

namespace detail {
inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}
}  // namespace detail

inline RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw Error(errc::config, "config line is not 'key = value': " + t);
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string val = detail::trim(t.substr(eq + 1));
    if (key.empty()) throw Error(errc::config, "empty config key");
    cfg.set(key, val);
  }
  return cfg;
}

inline RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(errc::config, "cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// "name=v,name=v" against a declared parameter-name order.
inline RVec parse_point(const std::string& text, const std::vector<std::string>& names) {
  RVec out = RVec::Zero(static_cast<Eigen::Index>(names.size()));
  std::vector<bool> seen(names.size(), false);
  for (const std::string& piece : split(text, ',')) {
    const std::string p = detail::trim(piece);
    if (p.empty()) continue;
    const auto eq = p.find('=');
    if (eq == std::string::npos) throw Error(errc::config, "expected name=value: " + p);
    const std::string name = detail::trim(p.substr(0, eq));
    size_t idx = names.size();
    for (size_t k = 0; k < names.size(); ++k)
      if (names[k] == name) idx = k;
    if (idx == names.size()) throw Error(errc::config, "unknown parameter: " + name);
    try {
      out[static_cast<Eigen::Index>(idx)] = std::stod(detail::trim(p.substr(eq + 1)));
    } catch (const std::exception&) {
      throw Error(errc::config, "bad value in point: " + p);
    }
    seen[idx] = true;
  }
  for (size_t k = 0; k < names.size(); ++k)
    if (!seen[k]) throw Error(errc::config, "missing parameter: " + names[k]);
  return out;
}

// Grid spec "name=lo:hi:count;name=v" -> list of points, last axis fastest.
inline std::vector<RVec> parse_grid(const std::string& text,
                                    const std::vector<std::string>& names) {
  const size_t n = names.size();
  std::vector<std::vector<double>> axes(n);
  std::vector<bool> seen(n, false);
  for (const std::string& piece : split(text, ';')) {
    const std::string p = detail::trim(piece);
    if (p.empty()) continue;
    const auto eq = p.find('=');
    if (eq == std::string::npos) throw Error(errc::config, "expected name=spec: " + p);
    const std::string name = detail::trim(p.substr(0, eq));
    size_t idx = n;
    for (size_t k = 0; k < n; ++k)
      if (names[k] == name) idx = k;
    if (idx == n) throw Error(errc::config, "unknown parameter: " + name);
    const std::string spec = detail::trim(p.substr(eq + 1));
    const auto parts = split(spec, ':');
    try {
      if (parts.size() == 1) {
        axes[idx] = {std::stod(parts[0])};
      } else if (parts.size() == 3) {
        const double lo = std::stod(parts[0]), hi = std::stod(parts[1]);
        const int count = std::stoi(parts[2]);
        if (count < 1) throw std::invalid_argument("count");
        axes[idx].resize(count);
        for (int m = 0; m < count; ++m)
          axes[idx][m] = count == 1 ? lo : lo + (hi - lo) * m / (count - 1);
      } else {
        throw std::invalid_argument("spec");
      }
    } catch (const std::exception&) {
      throw Error(errc::config, "bad grid spec: " + p);
    }
    seen[idx] = true;
  }
  for (size_t k = 0; k < n; ++k)
    if (!seen[k]) throw Error(errc::config, "missing grid axis: " + names[k]);
  std::vector<RVec> points;
  std::vector<size_t> cursor(n, 0);
  while (true) {
    RVec p(static_cast<Eigen::Index>(n));
    for (size_t k = 0; k < n; ++k) p[static_cast<Eigen::Index>(k)] = axes[k][cursor[k]];
    points.push_back(p);
    size_t k = n;
    while (k > 0) {
      --k;
      if (++cursor[k] < axes[k].size()) break;
      cursor[k] = 0;
      if (k == 0) return points;
    }
  }
}

inline std::vector<double> parse_alpha_list(const std::string& text) {
  std::vector<double> out;
  for (const std::string& piece : split(text, ',')) {
    const std::string p = detail::trim(piece);
    if (p.empty()) continue;
    try {
      out.push_back(std::stod(p));
    } catch (const std::exception&) {
      throw Error(errc::config, "bad alpha value: " + p);
    }
  }
  if (out.empty()) throw Error(errc::config, "empty alpha list");
  return out;
}

}  // namespace stategeom
