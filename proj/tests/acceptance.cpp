// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any criterion fails.

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "dynr/audit.hpp"
#include "dynr/pipeline.hpp"

using namespace dynr;
namespace fs = std::filesystem;

namespace {

const char* kD1 =
    "[curve]\nf = -1, 0, 0, 0, 0, 1\n[curve.expect]\ngenus = 2\npunctures = 1\n"
    "[group]\nn = 2\n[chart]\nseed = 1\nattempts = 50\njet_order = 2\n[kernels]\nK = 3\ncap = 40\n"
    "[verify.frame]\nsamples = 10\n[verify.projections]\nsamples = 20\n[hitchin]\nlax_points = 5\n";
const char* kD2 =
    "[curve]\nf = 1, 1, 0, 0, 0, 0, 1\n[curve.expect]\ngenus = 2\npunctures = 2\n"
    "[group]\nn = 2\n[chart]\nseed = 1\nattempts = 50\njet_order = 2\n[kernels]\nK = 3\ncap = 40\n"
    "[verify.frame]\nsamples = 10\n[verify.projections]\nsamples = 20\n";

struct Outcome {
  bool ok = true;
  std::string why;
  void require(bool cond, const std::string& what) {
    if (cond) return;
    ok = false;
    if (!why.empty()) why += "; ";
    why += what;
  }
};

const IdentityReport* find(const ReportBundle& b, const std::string& name) {
  for (auto* list : {&b.stages, &b.reports})
    for (auto& r : *list)
      if (r.name == name) return &r;
  return nullptr;
}

void require_pass(Outcome& o, const ReportBundle& b, const std::string& tag, const std::string& name) {
  const IdentityReport* r = find(b, name);
  if (!r) {
    o.require(false, tag + " " + name + " missing");
    return;
  }
  o.require(r->status() == Status::Pass, tag + " " + name + " " + status_name(r->status()));
  o.require(r->checked > 0, tag + " " + name + " empty window");
}

/// Independent oracle: gamma is the inverse Gram matrix of the trace form on the basis.
bool gamma_matches_sl2_casimir(const LieData& lie) {
  // basis order e, f, h: gamma = e(x)f + f(x)e + 1/2 h(x)h
  const Rational want[3][3] = {{0, 1, 0}, {1, 0, 0}, {0, 0, make_rational(1, 2)}};
  for (int p = 0; p < 3; ++p)
    for (int q = 0; q < 3; ++q)
      if (lie.gamma(p, q) != want[p][q]) return false;
  for (int p = 0; p < 3; ++p)
    for (int r = 0; r < 3; ++r) {
      Rational s(0);
      for (int q = 0; q < 3; ++q) s += want[p][q] * LieData::trace_product(lie.basis(q), lie.basis(r)).constant();
      if (s != Rational(p == r ? 1 : 0)) return false;
    }
  return true;
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  const fs::path cache = fs::temp_directory_path() / ("dynr-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(cache);
  PipelineOptions opt;
  opt.cache_dir = cache.string();

  const Config c1 = parse_config_string(kD1), c2 = parse_config_string(kD2);
  const auto t0 = std::chrono::steady_clock::now();
  const ReportBundle d1 = run_pipeline(c1, Verb::All, opt);
  const double d1Seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const ReportBundle d2 = run_pipeline(c2, Verb::All, opt);
  const std::vector<std::pair<std::string, const ReportBundle*>> both = {{"D1", &d1}, {"D2", &d2}};

  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria;

  criteria.emplace_back("D1 end to end under 10 minutes, complement dimension 3", [&] {
    Outcome o;
    o.require(d1.status() == Status::Pass, std::string("D1 bundle ") + status_name(d1.status()));
    o.require(d1Seconds < 600, "took " + std::to_string(d1Seconds) + " s");
    o.require(d1.chart["certificate"]["complement_dim"] == 3, "complement " + d1.chart["certificate"].dump());
    o.require(d1.chart["m"] == 3, "m is not 3");
    require_pass(o, d1, "D1", "chart_certificate");
    o.why += (o.why.empty() ? "" : "; ") + std::to_string(static_cast<int>(d1Seconds)) + " s";
    return o;
  });
  criteria.emplace_back("DCYBE exact zero on the required window; negative control nonzero", [&] {
    Outcome o;
    for (auto& [tag, b] : both) {
      require_pass(o, *b, tag, "dcybe");
      require_pass(o, *b, tag, "dcybe_negative_control");
      const IdentityReport* r = find(*b, "dcybe");
      const int ell = b->chart["punctures"].get<int>(), K = c1.K;
      // ell^3 puncture triples x (b, c) pairs with b + c <= K - 1 x a in [-K-1, K]
      const long need = static_cast<long>(ell) * ell * ell * (K * (K + 1) / 2) * (2 * K + 2);
      if (r) o.require(r->checked >= need && r->unknown == 0, tag + " dcybe window " + std::to_string(r->checked));
    }
    return o;
  });
  criteria.emplace_back("extended DCYBE and auxiliary identity in D1 and D2", [&] {
    Outcome o;
    for (auto& [tag, b] : both) {
      require_pass(o, *b, tag, "extended_dcybe");
      require_pass(o, *b, tag, "auxiliary_identity");
    }
    return o;
  });
  criteria.emplace_back("Szego slot globality and residue equal to gamma", [&] {
    Outcome o;
    for (auto& [tag, b] : both) require_pass(o, *b, tag, "szego");
    o.require(gamma_matches_sl2_casimir(LieData(2)), "gamma differs from e(x)f + f(x)e + 1/2 h(x)h");
    return o;
  });
  criteria.emplace_back("duality, flatness and connection stability on 10 sections", [&] {
    Outcome o;
    for (auto& [tag, b] : both) {
      require_pass(o, *b, tag, "duality");
      require_pass(o, *b, tag, "flatness");
      require_pass(o, *b, tag, "connection_stability");
    }
    o.require(c1.frame_samples >= 10, "fewer than 10 sections");
    return o;
  });
  criteria.emplace_back("kernel projections equal the direct decomposition on 20 random elements", [&] {
    Outcome o;
    for (auto& [tag, b] : both) require_pass(o, *b, tag, "projection_oracle");
    o.require(c1.projection_samples >= 20 && c2.projection_samples >= 20, "fewer than 20 samples");
    return o;
  });
  criteria.emplace_back("R-bracket lemma and Hitchin weak identity, probes with pole <= K+1", [&] {
    Outcome o;
    for (auto& [tag, b] : both) {
      require_pass(o, *b, tag, "r_bracket_lemma");
      require_pass(o, *b, tag, "hitchin_weak");
      require_pass(o, *b, tag, "hitchin_weak_extended");
    }
    o.require(c1.probe_pole() == c1.K + 1, "probe pole bound is not K+1");
    return o;
  });
  criteria.emplace_back("gauge covariance of all five rules for two transformations", [&] {
    Outcome o;
    for (auto& [tag, b] : both) {
      int specs = 0;
      for (auto& spec : default_gauge_specs(b->chart["punctures"].get<int>())) {
        ++specs;
        for (const char* rel : {"xi", "omega", "t", "r", "rho"})
          require_pass(o, *b, tag, "gauge:" + spec.name + ":" + rel);
      }
      o.require(specs >= 2, "fewer than two gauge transformations");
    }
    return o;
  });
  criteria.emplace_back("D2 Gaudin commutativity, Hamiltonian oracle and Casimir", [&] {
    Outcome o;
    require_pass(o, d2, "D2", "gaudin_commutativity");
    require_pass(o, d2, "D2", "gaudin_hamiltonian_oracle");
    require_pass(o, d2, "D2", "casimir");
    require_pass(o, d2, "D2", "hamiltonian_commutativity");
    return o;
  });
  criteria.emplace_back("Lax pair at 5 random rational points in D1", [&] {
    Outcome o;
    require_pass(o, d1, "D1", "lax_pair:z1^0");
    const IdentityReport* r = find(d1, "lax_pair:z1^0");
    if (r) o.require(r->details.count("sample_points") && r->details.at("sample_points") == "5", "sample count");
    return o;
  });
  criteria.emplace_back("window calculus oracle, report determinism, kernel mutation detected", [&] {
    Outcome o;
    WindowAudit audit = audit_window_calculus(20240611, 50);
    o.require(audit.pass() && audit.dags == 50, "window audit: " + std::to_string(audit.mismatches) + " mismatches");
    o.require(!audit_window_calculus(20240611, 50, 8, 6, 10, 1).pass(), "audit blind to overclaimed windows");
    ReportBundle again = run_pipeline(c1, Verb::All, opt);  // from the cache
    o.require(again.cache_hit, "second run did not use the cache");
    o.require(save_bundle(again) == save_bundle(d1), "D1 report bytes differ across runs");
    Config cm = c1;
    cm.suites = {"dcybe", "extended", "szego"};
    PipelineOptions mut;
    mut.mutate = [](KernelSet& ks) {
      LieVec delta(ks.dim());
      delta[0] = JetScalar(Rational(1));
      ks.perturb(0, 1, 0, 0, 1, delta);
    };
    ReportBundle m = run_pipeline(cm, Verb::Verify, mut);
    int failing = 0;
    for (auto& r : m.reports) failing += r.status() == Status::Fail;
    o.require(failing > 0, "mutated kernel passed every suite");
    o.why += (o.why.empty() ? "" : "; ") + std::to_string(audit.checked) + " coefficients audited, " +
             std::to_string(failing) + " reports fail under mutation";
    return o;
  });

  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.ok = false;
      o.why = e.what();
    }
    failed += !o.ok;
    std::printf("%s criterion %zu: %s%s%s\n", o.ok ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.why.empty() ? "" : " | ", o.why.c_str());
    std::fflush(stdout);
  }
  fs::remove_all(cache);
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
