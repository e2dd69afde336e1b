#pragma once
// Run configuration: INI file with nested sections, validated before any computation.
//
//   [curve]            f = -1, 0, 0, 0, 0, 1   (coefficients of f, constant term first)
//   [curve.expect]     genus, punctures        (optional model expectations)
//   [group] n; [chart] seed attempts jet_order depth slack; [kernels] K slack cap
//   [verify] suites; [verify.<suite>] per-suite depths; [hitchin] ...; [output] report cache_dir

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "dynr/error.hpp"
#include "dynr/rational.hpp"

namespace dynr {

/// Suites in report order.
inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"frame",         "projections", "dcybe",  "extended",
                                                 "szego",         "weak",        "r_bracket", "hitchin_weak",
                                                 "gauge",         "hamiltonians", "lax_pair"};
  return names;
}

struct Config {
  std::vector<Rational> f;
  std::optional<int> expect_genus, expect_punctures;
  int n = 2;
  uint64_t seed = 1;
  int attempts = 50, jet_order = 2, chart_depth = 0, chart_slack = 2;
  int K = 3, kernel_slack = 2, cap = 40;
  std::vector<std::string> suites = suite_names();
  int frame_samples = 10, projection_samples = 20;
  int szego_depth = 4, weak_depth = 3, weak_columns = 1;
  int r_bracket_kmax = 1, r_bracket_depth = 3;
  int hitchin_weak_kmax = 1, hitchin_weak_depth = -1;  // -1: K + 1
  int basis_bound = 6, lax_points = 5, lie_sign = -1;
  uint64_t lax_seed = 7;
  std::string report = "report.json", cache_dir = ".dynr-cache";

  /// Derived minimum precisions.
  int min_columns() const { return 2 * K + 1; }
  int probe_pole() const { return hitchin_weak_depth < 0 ? K + 1 : hitchin_weak_depth; }
  bool runs(const std::string& s) const { return std::find(suites.begin(), suites.end(), s) != suites.end(); }

  /// Canonical key = value listing; the cache key hashes this minus output paths.
  std::vector<std::pair<std::string, std::string>> echo(bool withOutput = true) const {
    std::vector<std::pair<std::string, std::string>> e;
    std::string fs;
    for (size_t i = 0; i < f.size(); ++i) fs += (i ? "," : "") + to_string(f[i]);
    e.emplace_back("curve.f", fs);
    if (expect_genus) e.emplace_back("curve.expect.genus", std::to_string(*expect_genus));
    if (expect_punctures) e.emplace_back("curve.expect.punctures", std::to_string(*expect_punctures));
    e.emplace_back("group.n", std::to_string(n));
    e.emplace_back("chart.seed", std::to_string(seed));
    e.emplace_back("chart.attempts", std::to_string(attempts));
    e.emplace_back("chart.jet_order", std::to_string(jet_order));
    e.emplace_back("chart.depth", std::to_string(chart_depth));
    e.emplace_back("chart.slack", std::to_string(chart_slack));
    e.emplace_back("kernels.K", std::to_string(K));
    e.emplace_back("kernels.slack", std::to_string(kernel_slack));
    e.emplace_back("kernels.cap", std::to_string(cap));
    e.emplace_back("derived.min_columns", std::to_string(min_columns()));
    e.emplace_back("derived.probe_pole", std::to_string(probe_pole()));
    e.emplace_back("derived.check_jet_order", std::to_string(jet_order - 1));
    if (!withOutput) return e;
    std::string ss;
    for (size_t i = 0; i < suites.size(); ++i) ss += (i ? "," : "") + suites[i];
    e.emplace_back("verify.suites", ss);
    e.emplace_back("verify.frame.samples", std::to_string(frame_samples));
    e.emplace_back("verify.projections.samples", std::to_string(projection_samples));
    e.emplace_back("verify.szego.depth", std::to_string(szego_depth));
    e.emplace_back("verify.weak.depth", std::to_string(weak_depth));
    e.emplace_back("verify.weak.columns", std::to_string(weak_columns));
    e.emplace_back("verify.r_bracket.kmax", std::to_string(r_bracket_kmax));
    e.emplace_back("verify.r_bracket.depth", std::to_string(r_bracket_depth));
    e.emplace_back("verify.hitchin_weak.kmax", std::to_string(hitchin_weak_kmax));
    e.emplace_back("verify.hitchin_weak.depth", std::to_string(probe_pole()));
    e.emplace_back("hitchin.basis_bound", std::to_string(basis_bound));
    e.emplace_back("hitchin.lax_points", std::to_string(lax_points));
    e.emplace_back("hitchin.lax_seed", std::to_string(lax_seed));
    e.emplace_back("hitchin.lie_sign", std::to_string(lie_sign));
    return e;
  }
};

namespace detail {

/// Boost's INI reader keeps "a.b" as one literal key; rebuild it as a nested path.
inline boost::property_tree::ptree nest_sections(const boost::property_tree::ptree& flat) {
  using boost::property_tree::ptree;
  ptree out;
  for (auto& [section, body] : flat) {
    if (body.empty()) {
      out.put(ptree::path_type(section, '.'), body.data());
      continue;
    }
    for (auto& [key, leaf] : body) {
      if (!leaf.empty()) throw Error(ErrorCode::ConfigError, "unexpected nesting under [" + section + "]");
      out.put(ptree::path_type(section + "." + key, '.'), leaf.data());
    }
  }
  return out;
}

inline void collect_keys(const boost::property_tree::ptree& t, const std::string& prefix, std::set<std::string>& out) {
  for (auto& [k, v] : t) {
    const std::string key = prefix.empty() ? k : prefix + "." + k;
    if (v.empty())
      out.insert(key);
    else
      collect_keys(v, key, out);
  }
}

}  // namespace detail

/// Parses and validates. Throws ErrorCode::ConfigError with the offending key.
inline Config parse_config(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree flat;
  try {
    pt::read_ini(in, flat);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::ConfigError, std::string("syntax: ") + e.what());
  }
  const pt::ptree t = detail::nest_sections(flat);
  std::set<std::string> keys;
  detail::collect_keys(t, "", keys);
  static const std::set<std::string> known = {
      "curve.f",           "curve.expect.genus",  "curve.expect.punctures", "group.n",
      "chart.seed",        "chart.attempts",      "chart.jet_order",        "chart.depth",
      "chart.slack",       "kernels.K",           "kernels.slack",          "kernels.cap",
      "verify.suites",     "verify.frame.samples", "verify.projections.samples", "verify.szego.depth",
      "verify.weak.depth", "verify.weak.columns", "verify.r_bracket.kmax",  "verify.r_bracket.depth",
      "verify.hitchin_weak.kmax", "verify.hitchin_weak.depth", "hitchin.basis_bound", "hitchin.lax_points",
      "hitchin.lax_seed",  "hitchin.lie_sign",    "output.report",          "output.cache_dir"};
  for (auto& k : keys)
    if (!known.count(k)) throw Error(ErrorCode::ConfigError, "unknown key " + k);

  auto path = [](const std::string& k) { return pt::ptree::path_type(k, '.'); };
  auto get_int = [&](const std::string& k, long dflt, long lo, long hi) -> long {
    auto v = t.get_optional<std::string>(path(k));
    if (!v) return dflt;
    long x;
    try {
      size_t used = 0;
      x = std::stol(boost::trim_copy(*v), &used);
      if (used != boost::trim_copy(*v).size()) throw std::invalid_argument(k);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigError, k + ": not an integer: '" + *v + "'");
    }
    if (x < lo || x > hi) throw Error(ErrorCode::ConfigError, k + ": " + std::to_string(x) + " outside [" + std::to_string(lo) + ", " +
                                            std::to_string(hi) + "]");
    return x;
  };

  Config c;
  auto f = t.get_optional<std::string>(path("curve.f"));
  if (!f) throw Error(ErrorCode::ConfigError, "curve.f: missing");
  std::vector<std::string> parts;
  boost::split(parts, *f, boost::is_any_of(", \t"), boost::token_compress_on);
  for (auto& p : parts) {
    if (p.empty()) continue;
    try {
      c.f.push_back(parse_rational(p));
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigError, "curve.f: bad coefficient '" + p + "'");
    }
  }
  while (!c.f.empty() && sgn(c.f.back()) == 0) c.f.pop_back();
  if (c.f.size() < 6) throw Error(ErrorCode::ConfigError, "curve.f: degree must be at least 5 for genus >= 2");
  if (t.get_optional<std::string>(path("curve.expect.genus")))
    c.expect_genus = static_cast<int>(get_int("curve.expect.genus", 0, 2, 100));
  if (t.get_optional<std::string>(path("curve.expect.punctures")))
    c.expect_punctures = static_cast<int>(get_int("curve.expect.punctures", 0, 1, 2));
  c.n = static_cast<int>(get_int("group.n", 2, 2, 8));
  c.seed = static_cast<uint64_t>(get_int("chart.seed", 1, 0, 1L << 62));
  c.attempts = static_cast<int>(get_int("chart.attempts", 50, 1, 100000));
  c.jet_order = static_cast<int>(get_int("chart.jet_order", 2, 1, 6));
  c.chart_depth = static_cast<int>(get_int("chart.depth", 0, 0, 64));
  c.chart_slack = static_cast<int>(get_int("chart.slack", 2, 0, 64));
  c.K = static_cast<int>(get_int("kernels.K", 3, 1, 16));
  c.kernel_slack = static_cast<int>(get_int("kernels.slack", 2, 0, 64));
  c.cap = static_cast<int>(get_int("kernels.cap", 40, 1, 512));
  if (c.cap < c.min_columns())
    throw Error(ErrorCode::ConfigError, "kernels.cap: " + std::to_string(c.cap) + " below the required " +
                      std::to_string(c.min_columns()) + " = 2K+1");
  if (auto s = t.get_optional<std::string>(path("verify.suites"))) {
    std::vector<std::string> names;
    boost::split(names, *s, boost::is_any_of(", \t"), boost::token_compress_on);
    std::vector<std::string> chosen;
    for (auto& nm : names) {
      if (nm.empty()) continue;
      if (nm == "all") {
        chosen = suite_names();
        break;
      }
      if (std::find(suite_names().begin(), suite_names().end(), nm) == suite_names().end())
        throw Error(ErrorCode::ConfigError, "verify.suites: unknown suite '" + nm + "'");
      chosen.push_back(nm);
    }
    if (chosen.empty()) throw Error(ErrorCode::ConfigError, "verify.suites: empty");
    c.suites.clear();
    for (auto& nm : suite_names())
      if (std::find(chosen.begin(), chosen.end(), nm) != chosen.end()) c.suites.push_back(nm);
  }
  c.frame_samples = static_cast<int>(get_int("verify.frame.samples", 10, 1, 1000));
  c.projection_samples = static_cast<int>(get_int("verify.projections.samples", 20, 1, 1000));
  c.szego_depth = static_cast<int>(get_int("verify.szego.depth", 4, 1, 32));
  c.weak_depth = static_cast<int>(get_int("verify.weak.depth", 3, 1, 32));
  c.weak_columns = static_cast<int>(get_int("verify.weak.columns", 1, 0, 32));
  c.r_bracket_kmax = static_cast<int>(get_int("verify.r_bracket.kmax", 1, 0, 16));
  c.r_bracket_depth = static_cast<int>(get_int("verify.r_bracket.depth", 3, 1, 32));
  c.hitchin_weak_kmax = static_cast<int>(get_int("verify.hitchin_weak.kmax", 1, 0, 16));
  c.hitchin_weak_depth = static_cast<int>(get_int("verify.hitchin_weak.depth", -1, -1, 32));
  c.basis_bound = static_cast<int>(get_int("hitchin.basis_bound", 6, 1, 32));
  c.lax_points = static_cast<int>(get_int("hitchin.lax_points", 5, 1, 100));
  c.lax_seed = static_cast<uint64_t>(get_int("hitchin.lax_seed", 7, 0, 1L << 62));
  c.lie_sign = static_cast<int>(get_int("hitchin.lie_sign", -1, -1, 1));
  if (c.lie_sign == 0) throw Error(ErrorCode::ConfigError, "hitchin.lie_sign: must be -1 or 1");
  c.report = t.get<std::string>(path("output.report"), c.report);
  c.cache_dir = t.get<std::string>(path("output.cache_dir"), c.cache_dir);
  return c;
}

inline Config parse_config_string(const std::string& s) {
  std::istringstream in(s);
  return parse_config(in);
}

}  // namespace dynr
