#pragma once
// Orchestration: chart, kernels, verifiers and Hamiltonian checks, with a disk cache of the workspace.

#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "dynr/config.hpp"
#include "dynr/frame.hpp"
#include "dynr/gauge.hpp"
#include "dynr/hitchin.hpp"
#include "dynr/serialize.hpp"
#include "dynr/yangbaxter.hpp"

namespace dynr {

enum class Verb { Certify, Solve, Verify, All };

inline const char* verb_name(Verb v) {
  switch (v) {
    case Verb::Certify: return "certify";
    case Verb::Solve: return "solve";
    case Verb::Verify: return "verify";
    case Verb::All: return "all";
  }
  return "?";
}

/// Exit codes: 0 all PASS, 1 any FAIL, 2 usage or configuration error, 3 inconclusive.
inline int exit_code(Status s) {
  switch (s) {
    case Status::Pass: return 0;
    case Status::Fail: return 1;
    case Status::Inconclusive: return 3;
  }
  return 1;
}

struct ReportBundle {
  Verb verb = Verb::All;
  std::vector<std::pair<std::string, std::string>> config;
  Json chart = Json::object();
  std::vector<IdentityReport> stages;   // curve model, chart certificate, kernel columns
  std::vector<IdentityReport> reports;  // selected verifier suites
  std::map<std::string, double> timings;  // per stage and per report; not part of the JSON report
  bool cache_hit = false;

  Status status() const {
    bool inconclusive = stages.empty() && reports.empty();
    for (auto* list : {&stages, &reports})
      for (auto& r : *list) {
        if (r.status() == Status::Fail) return Status::Fail;
        if (r.status() == Status::Inconclusive) inconclusive = true;
      }
    return inconclusive ? Status::Inconclusive : Status::Pass;
  }
};

inline Json bundle_json(const ReportBundle& b) {
  Json cfg = Json::object();
  for (auto& [k, v] : b.config) cfg[k] = v;
  Json stages = Json::array(), reps = Json::array();
  for (auto& r : b.stages) stages.push_back(io::report(r));
  for (auto& r : b.reports) reps.push_back(io::report(r));
  return {{"schema", kSchemaVersion}, {"kind", "report"},   {"verb", verb_name(b.verb)},
          {"config", cfg},            {"chart", b.chart},   {"stages", stages},
          {"reports", reps},          {"status", status_name(b.status())}, {"exit_code", exit_code(b.status())}};
}

inline std::string save_bundle(const ReportBundle& b) { return dump_json(bundle_json(b)); }

/// Parses a saved report; checks schema and kind.
inline Json load_bundle(const std::string& text) {
  Json j = parse_json(text);
  if (!j.is_object() || !j.contains("schema")) throw Error(ErrorCode::ParseError, "no schema field");
  if (!j["schema"].is_number_integer() || j["schema"].get<int>() != kSchemaVersion)
    throw Error(ErrorCode::SchemaMismatch, "schema " + j["schema"].dump() + ", expected " + std::to_string(kSchemaVersion));
  if (io::field<std::string>(j, "kind") != "report") throw Error(ErrorCode::SchemaMismatch, "not a report file");
  io::sub(j, "stages");
  io::sub(j, "reports");
  io::sub(j, "status");
  return j;
}

/// Hash of everything that determines the chart and the kernel columns.
inline std::string config_hash(const Config& c) {
  std::string s;
  for (auto& [k, v] : c.echo(false)) s += k + "=" + v + "\n";
  return sha256_hex(s);
}

struct PipelineOptions {
  std::string cache_dir;  // empty: no cache
  int jobs = 1;           // concurrent suites
  /// Optional hook applied to freshly built kernels (mutation testing).
  std::function<void(KernelSet&)> mutate;
};

namespace detail {

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Atomic write through a temporary file in the same directory.
inline void write_file(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  const auto tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Internal, "cannot write " + tmp);
    out << text;
  }
  std::filesystem::rename(tmp, p);
}

inline IdentityReport expectation_report(const Config& cfg, const CurveModel& X) {
  IdentityReport rep;
  rep.name = "curve_model";
  rep.window = "genus and puncture count";
  rep.record(!cfg.expect_genus || *cfg.expect_genus == X.genus(),
             "genus " + std::to_string(X.genus()) + " expected " + std::to_string(cfg.expect_genus.value_or(-1)));
  rep.record(!cfg.expect_punctures || *cfg.expect_punctures == X.punctures(),
             "punctures " + std::to_string(X.punctures()) + " expected " +
                 std::to_string(cfg.expect_punctures.value_or(-1)));
  rep.details["genus"] = std::to_string(X.genus());
  rep.details["punctures"] = std::to_string(X.punctures());
  return rep;
}

inline IdentityReport stage_error(const std::string& stage, const Error& e) {
  IdentityReport rep;
  rep.name = stage + "_error";
  rep.window = "stage " + stage;
  rep.record(false, e.what());
  rep.details["stage"] = stage;
  rep.details["error"] = error_name(e.code());
  return rep;
}

/// The negative control passes when the residual without the dynamical term is nonzero.
inline IdentityReport negative_control(const KernelSet& ks) {
  IdentityReport raw = dcybe_residual(ks, true);
  IdentityReport rep;
  rep.name = raw.name;
  rep.window = raw.window;
  rep.seconds = raw.seconds;
  if (raw.checked > 0) rep.record(raw.nonzero > 0, "dynamical term omitted yet residual vanished");
  rep.details["residual_nonzero"] = std::to_string(raw.nonzero) + " of " + std::to_string(raw.checked);
  rep.details["expectation"] = "nonzero residual";
  return rep;
}

using SuiteFn = std::function<std::vector<IdentityReport>(const KernelSet&)>;

inline std::vector<std::pair<std::string, SuiteFn>> suite_table(const Config& c) {
  std::vector<std::pair<std::string, SuiteFn>> t;
  t.emplace_back("frame", [c](const KernelSet& ks) {
    const BundleChart& ch = ks.chart();
    return std::vector<IdentityReport>{duality_check(ch), flatness_check(ch),
                                       connection_stability_check(ch, c.frame_samples, c.seed + 101)};
  });
  t.emplace_back("projections", [c](const KernelSet& ks) {
    return std::vector<IdentityReport>{projection_oracle_check(ks, c.projection_samples, c.seed + 202)};
  });
  t.emplace_back("dcybe", [](const KernelSet& ks) {
    return std::vector<IdentityReport>{dcybe_residual(ks), negative_control(ks)};
  });
  t.emplace_back("extended", [](const KernelSet& ks) {
    return std::vector<IdentityReport>{extended_dcybe_residual(ks), auxiliary_identity(ks)};
  });
  t.emplace_back("szego", [c](const KernelSet& ks) { return std::vector<IdentityReport>{szego_check(ks, c.szego_depth)}; });
  t.emplace_back("weak", [c](const KernelSet& ks) {
    return std::vector<IdentityReport>{weak_phi_psi(ks, c.weak_depth, c.weak_columns)};
  });
  t.emplace_back("r_bracket", [c](const KernelSet& ks) {
    return std::vector<IdentityReport>{r_bracket_lemma(ks, c.r_bracket_kmax, c.r_bracket_depth)};
  });
  t.emplace_back("hitchin_weak", [c](const KernelSet& ks) {
    return std::vector<IdentityReport>{hitchin_weak_identity(ks, c.hitchin_weak_kmax, c.probe_pole(), false),
                                       hitchin_weak_identity(ks, c.hitchin_weak_kmax, c.probe_pole(), true)};
  });
  t.emplace_back("gauge", [](const KernelSet& ks) {
    std::vector<IdentityReport> out;
    for (auto& spec : default_gauge_specs(ks.ell())) {
      GaugeResult g = gauge_transform(ks, spec);
      for (auto& r : g.relations) {
        IdentityReport q = r;
        q.name = "gauge:" + spec.name + ":" + r.name.substr(r.name.find('_') + 1);
        out.push_back(q);
      }
    }
    return out;
  });
  t.emplace_back("hamiltonians", [c](const KernelSet& ks) {
    HitchinOptions o;
    o.basisBound = c.basis_bound;
    o.lieSign = c.lie_sign;
    std::vector<IdentityReport> out{lax_pole_check(ks, lax_matrix(ks, std::max(o.laxCert, o.basisBound + 2)))};
    for (auto& r : commutativity_suite(ks, o)) out.push_back(r);
    return out;
  });
  t.emplace_back("lax_pair", [c](const KernelSet& ks) {
    return std::vector<IdentityReport>{lax_pair_check(ks, QuadraticFunctional{0, 0}, c.lax_points, c.lax_seed, c.lie_sign)};
  });
  return t;
}

}  // namespace detail

/// Chart and kernels for cfg, from the cache when a valid entry exists.
inline std::shared_ptr<KernelSet> obtain_workspace(const Config& cfg, const std::string& cacheDir, bool* hit) {
  const std::string hash = config_hash(cfg);
  std::filesystem::path file;
  *hit = false;
  if (!cacheDir.empty()) {
    file = std::filesystem::path(cacheDir) / ("workspace-" + hash.substr(0, 16) + ".json");
    if (std::filesystem::exists(file)) {
      try {
        Workspace w = load_workspace(detail::read_file(file));
        if (w.config_hash != hash) throw Error(ErrorCode::ParseError, "config hash mismatch");
        auto ks = restore_workspace(w);
        *hit = true;
        spdlog::info("workspace loaded from {}", file.string());
        return ks;
      } catch (const Error& e) {
        spdlog::warn("ignoring cache file {}: {}; recomputing", file.string(), e.what());
      } catch (const std::exception& e) {
        spdlog::warn("ignoring cache file {}: {}; recomputing", file.string(), e.what());
      }
    }
  }
  Poly f;
  f.c = cfg.f;
  CurveModel X(f);
  auto chart = search_chart(X, LieData(cfg.n), cfg.seed, cfg.attempts, cfg.jet_order, cfg.chart_depth, cfg.chart_slack);
  auto ks = std::make_shared<KernelSet>(chart, cfg.K, cfg.kernel_slack, cfg.cap);
  return ks;
}

/// Writes the workspace when its content changed (columns are extended lazily across runs).
inline void store_workspace(const Config& cfg, const KernelSet& ks, const std::string& cacheDir) {
  if (cacheDir.empty()) return;
  const std::string hash = config_hash(cfg);
  const auto file = std::filesystem::path(cacheDir) / ("workspace-" + hash.substr(0, 16) + ".json");
  const std::string text = save_workspace(capture_workspace(hash, cfg.f, ks, cfg.kernel_slack));
  if (std::filesystem::exists(file) && detail::read_file(file) == text) return;
  detail::write_file(file, text);
}

/// Runs the stages the verb asks for. Stage errors become FAIL reports tagged with the stage.
inline ReportBundle run_pipeline(const Config& cfg, Verb verb, const PipelineOptions& opt = {}) {
  ReportBundle b;
  b.verb = verb;
  b.config = cfg.echo();
  detail::Timer total;

  // certify
  std::shared_ptr<KernelSet> ks;
  {
    detail::Timer t;
    try {
      Poly f;
      f.c = cfg.f;
      CurveModel X(f);
      b.stages.push_back(detail::expectation_report(cfg, X));
      ks = obtain_workspace(cfg, opt.cache_dir, &b.cache_hit);
      if (opt.mutate) opt.mutate(*ks);
      const BundleChart& ch = ks->chart();
      b.chart = {{"certificate", io::certificate(ch.certificate())},
                 {"spec", ch.spec() ? io::spec(*ch.spec()) : Json()},
                 {"genus", X.genus()},
                 {"punctures", X.punctures()},
                 {"m", ch.m()},
                 {"jet_order", ch.jet_order()}};
      b.stages.push_back(chart_certificate_report(ch));
    } catch (const Error& e) {
      b.stages.push_back(detail::stage_error("certify", e));
    }
    b.timings["certify"] = t.seconds();
  }
  if (!ks || verb == Verb::Certify) {
    if (ks) store_workspace(cfg, *ks, opt.cache_dir);
    b.timings["total"] = total.seconds();
    return b;
  }

  // solve
  {
    detail::Timer t;
    try {
      if (!ks->ensure_columns(cfg.min_columns()))
        throw Error(ErrorCode::DepthExceeded, "column cap below " + std::to_string(cfg.min_columns()));
      b.stages.push_back(kernel_columns_check(*ks, cfg.K));
    } catch (const Error& e) {
      b.stages.push_back(detail::stage_error("solve", e));
      b.timings["total"] = total.seconds();
      return b;
    }
    b.timings["solve"] = t.seconds();
  }

  // verify
  if (verb == Verb::Verify || verb == Verb::All) {
    auto table = detail::suite_table(cfg);
    std::vector<std::pair<std::string, detail::SuiteFn>> chosen;
    for (auto& [name, fn] : table)
      if (cfg.runs(name)) chosen.emplace_back(name, fn);
    auto run_one = [&ks](const std::string& name, const detail::SuiteFn& fn) {
      detail::Timer t;
      std::vector<IdentityReport> out;
      try {
        out = fn(*ks);
      } catch (const Error& e) {
        out = {detail::stage_error("verify:" + name, e)};
      }
      return std::make_pair(out, t.seconds());
    };
    std::vector<std::pair<std::vector<IdentityReport>, double>> results(chosen.size());
    if (opt.jobs > 1) {
      std::vector<std::future<std::pair<std::vector<IdentityReport>, double>>> fut;
      size_t next = 0;
      while (next < chosen.size() || !fut.empty()) {
        // Launch in waves of `jobs`; results are placed by index, so the order is fixed.
        std::vector<size_t> idx;
        for (int j = 0; j < opt.jobs && next < chosen.size(); ++j, ++next) {
          idx.push_back(next);
          fut.push_back(std::async(std::launch::async, run_one, chosen[next].first, chosen[next].second));
        }
        for (size_t j = 0; j < idx.size(); ++j) results[idx[j]] = fut[j].get();
        fut.clear();
      }
    } else {
      for (size_t i = 0; i < chosen.size(); ++i) results[i] = run_one(chosen[i].first, chosen[i].second);
    }
    for (size_t i = 0; i < chosen.size(); ++i) {
      b.timings["suite:" + chosen[i].first] = results[i].second;
      for (auto& r : results[i].first) {
        b.timings["report:" + r.name] = r.seconds;
        b.reports.push_back(r);
      }
    }
  }
  store_workspace(cfg, *ks, opt.cache_dir);
  b.timings["total"] = total.seconds();
  return b;
}

inline Json timings_json(const ReportBundle& b) {
  Json t = Json::object();
  for (auto& [k, v] : b.timings) t[k] = v;
  return t;
}

}  // namespace dynr
