#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <spdlog/sinks/ostream_sink.h>

#include "dynr/pipeline.hpp"

using namespace dynr;
namespace fs = std::filesystem;

namespace {

const char* kD1 =
    "[curve]\n"
    "f = -1, 0, 0, 0, 0, 1\n"
    "[curve.expect]\n"
    "genus = 2\n"
    "punctures = 1\n"
    "[kernels]\n"
    "K = 3\n"
    "[verify]\n"
    "suites = szego\n";

fs::path fresh_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("dynr-test-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const KernelSet& d1_kernels() {
  static std::shared_ptr<KernelSet> ks = [] {
    bool hit = false;
    auto k = obtain_workspace(parse_config_string(kD1), "", &hit);
    k->ensure_columns(7);
    return k;
  }();
  return *ks;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DYNR_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(Config, DefaultsAndNestedSections) {
  Config c = parse_config_string(
      "[curve]\nf = 1, 1, 0, 0, 0, 0, 1\n[verify.szego]\ndepth = 5\n[verify.hitchin_weak]\nkmax = 2\n"
      "[verify]\nsuites = dcybe, szego\n");
  EXPECT_EQ(c.f.size(), 7u);
  EXPECT_EQ(c.K, 3);
  EXPECT_EQ(c.jet_order, 2);
  EXPECT_EQ(c.szego_depth, 5);
  EXPECT_EQ(c.hitchin_weak_kmax, 2);
  EXPECT_EQ(c.probe_pole(), 4);
  EXPECT_EQ(c.min_columns(), 7);
  EXPECT_EQ(c.suites, (std::vector<std::string>{"dcybe", "szego"}));
  EXPECT_EQ(c.lie_sign, -1);
}

TEST(Config, RationalCoefficientsAndTrailingZeros) {
  Config c = parse_config_string("[curve]\nf = -1/2, 0, 0, 0, 0, 3/4, 0\n");
  ASSERT_EQ(c.f.size(), 6u);
  EXPECT_EQ(c.f[0], make_rational(-1, 2));
  EXPECT_EQ(c.f[5], make_rational(3, 4));
}

TEST(Config, RejectsInvalidInput) {
  auto code_of = [](const std::string& text) {
    try {
      parse_config_string(text);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Internal;
  };
  EXPECT_EQ(code_of("[chart]\nseed = 1\n"), ErrorCode::ConfigError);                       // no curve
  EXPECT_EQ(code_of("[curve]\nf = 1, 2, 3\n"), ErrorCode::ConfigError);                     // genus < 2
  EXPECT_EQ(code_of("[curve]\nf = -1,0,0,0,0,1\n[chart]\nsed = 1\n"), ErrorCode::ConfigError);  // typo key
  EXPECT_EQ(code_of("[curve]\nf = -1,0,0,0,0,1\n[kernels]\nK = x\n"), ErrorCode::ConfigError);
  EXPECT_EQ(code_of("[curve]\nf = -1,0,0,0,0,1\n[kernels]\nK = 3\ncap = 6\n"), ErrorCode::ConfigError);
  EXPECT_EQ(code_of("[curve]\nf = -1,0,0,0,0,1\n[chart]\njet_order = 0\n"), ErrorCode::ConfigError);
  EXPECT_EQ(code_of("[curve]\nf = -1,0,0,0,0,1\n[verify]\nsuites = nope\n"), ErrorCode::ConfigError);
  EXPECT_EQ(code_of("[curve]\nf = -1,0,a,0,0,1\n"), ErrorCode::ConfigError);
  EXPECT_EQ(code_of("[curve\nf = 1\n"), ErrorCode::ConfigError);
}

TEST(Config, HashIgnoresSuitesAndOutput) {
  Config a = parse_config_string(kD1);
  Config b = a;
  b.suites = {"dcybe"};
  b.report = "elsewhere.json";
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.seed = 2;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Serialize, RationalsAreFractionStrings) {
  EXPECT_EQ(io::rat(make_rational(-3, 4)), Json("-3/4"));
  EXPECT_EQ(io::rat(Rational(5)), Json("5/1"));
  EXPECT_EQ(io::rat(Json("6/8")), make_rational(3, 4));
  JetScalar s = JetScalar::from_terms(3, 2, {{{0, 0, 0}, Rational(2)}, {{1, 0, 1}, make_rational(-1, 3)}});
  EXPECT_EQ(io::jet(io::jet(s)), s);
  EXPECT_EQ(io::jet(io::jet(JetScalar(Rational(7)))), JetScalar(Rational(7)));
}

TEST(Serialize, WorkspaceRoundTrip) {
  const KernelSet& ks = d1_kernels();
  Workspace w = capture_workspace("abc", parse_config_string(kD1).f, ks, 2);
  const std::string text = save_workspace(w);
  Workspace back = load_workspace(text);
  EXPECT_EQ(save_workspace(back), text);
  auto restored = restore_workspace(back);
  for (int i = 0; i < ks.ell(); ++i)
    for (int e = -4; e <= 3; ++e)
      for (int f = 0; f <= 3; ++f) {
        Opt2 a = ks.r().at(i, i, e, f), b = restored->r().at(i, i, e, f);
        ASSERT_TRUE(a && b);
        EXPECT_TRUE(*a == *b) << e << "," << f;
      }
  EXPECT_EQ(restored->chart().certificate().complement_dim, 3);
}

TEST(Serialize, SchemaAndCorruptionErrors) {
  const std::string text = save_workspace(capture_workspace("abc", parse_config_string(kD1).f, d1_kernels(), 2));
  auto code_of = [](const std::string& t) {
    try {
      load_workspace(t);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Internal;
  };
  std::string bumped = text;
  bumped.replace(bumped.find("\"schema\": 1"), 11, "\"schema\": 2");
  EXPECT_EQ(code_of(bumped), ErrorCode::SchemaMismatch);
  EXPECT_EQ(code_of(text.substr(0, text.size() / 2)), ErrorCode::ParseError);
  std::string tampered = text;
  const size_t pos = tampered.find("\"1/1\"");
  ASSERT_NE(pos, std::string::npos);
  tampered.replace(pos, 5, "\"2/1\"");
  EXPECT_EQ(code_of(tampered), ErrorCode::ParseError);
}

TEST(Pipeline, SuiteFilterAndDeterminism) {
  Config c = parse_config_string(kD1);
  const fs::path dir = fresh_dir("det");
  PipelineOptions opt;
  opt.cache_dir = dir.string();
  ReportBundle a = run_pipeline(c, Verb::Verify, opt);
  ASSERT_EQ(a.reports.size(), 1u);
  EXPECT_EQ(a.reports[0].name, "szego");
  EXPECT_EQ(a.status(), Status::Pass);
  EXPECT_FALSE(a.cache_hit);
  ReportBundle b = run_pipeline(c, Verb::Verify, opt);
  EXPECT_TRUE(b.cache_hit);
  EXPECT_EQ(save_bundle(a), save_bundle(b));
  ReportBundle nc = run_pipeline(c, Verb::Verify, {});
  EXPECT_EQ(save_bundle(a), save_bundle(nc));
  fs::remove_all(dir);
}

TEST(Pipeline, CorruptedCacheIsRecomputedWithWarning) {
  Config c = parse_config_string(kD1);
  c.suites = {"dcybe"};
  const fs::path dir = fresh_dir("corrupt");
  PipelineOptions opt;
  opt.cache_dir = dir.string();
  ReportBundle first = run_pipeline(c, Verb::Verify, opt);
  fs::path file;
  for (auto& e : fs::directory_iterator(dir)) file = e.path();
  ASSERT_FALSE(file.empty());
  std::string text = slurp(file);
  text[text.size() / 2] ^= 1;
  std::ofstream(file, std::ios::binary) << text;

  std::ostringstream log;
  auto previous = spdlog::default_logger();
  spdlog::set_default_logger(
      std::make_shared<spdlog::logger>("capture", std::make_shared<spdlog::sinks::ostream_sink_mt>(log)));
  ReportBundle second = run_pipeline(c, Verb::Verify, opt);
  spdlog::set_default_logger(previous);

  EXPECT_FALSE(second.cache_hit);
  EXPECT_NE(log.str().find("[warning]"), std::string::npos) << log.str();
  EXPECT_NE(log.str().find("recomputing"), std::string::npos);
  EXPECT_EQ(save_bundle(first), save_bundle(second));
  EXPECT_EQ(load_workspace(slurp(file)).config_hash, config_hash(c));  // rewritten
  fs::remove_all(dir);
}

TEST(Pipeline, MutatedKernelFails) {
  Config c = parse_config_string(kD1);
  c.suites = {"dcybe"};
  PipelineOptions opt;
  opt.mutate = [](KernelSet& ks) {
    LieVec delta(ks.dim());
    delta[0] = JetScalar(Rational(1));
    ks.perturb(0, 1, 0, 0, 1, delta);
  };
  ReportBundle b = run_pipeline(c, Verb::Verify, opt);
  EXPECT_EQ(b.status(), Status::Fail);
  EXPECT_EQ(exit_code(b.status()), 1);
}

TEST(Pipeline, CertifyVerbAndStatusRules) {
  Config c = parse_config_string(kD1);
  ReportBundle b = run_pipeline(c, Verb::Certify, {});
  EXPECT_TRUE(b.reports.empty());
  ASSERT_EQ(b.stages.size(), 2u);
  EXPECT_EQ(b.status(), Status::Pass);
  EXPECT_EQ(b.chart["certificate"]["complement_dim"], 3);

  c.expect_genus = 3;
  EXPECT_EQ(run_pipeline(c, Verb::Certify, {}).status(), Status::Fail);

  // An empty certified window never passes.
  ReportBundle empty;
  IdentityReport r;
  r.name = "empty";
  empty.reports.push_back(r);
  EXPECT_EQ(empty.status(), Status::Inconclusive);
  EXPECT_EQ(exit_code(empty.status()), 3);
  EXPECT_EQ(std::string(status_name(r.status())), "FAIL-INCONCLUSIVE");
}

TEST(Pipeline, ReportFileRoundTrip) {
  Config c = parse_config_string(kD1);
  const std::string text = save_bundle(run_pipeline(c, Verb::Certify, {}));
  Json j = load_bundle(text);
  EXPECT_EQ(j["status"], "PASS");
  EXPECT_EQ(j["config"]["curve.f"], "-1/1,0/1,0/1,0/1,0/1,1/1");
  std::string bumped = text;
  bumped.replace(bumped.find("\"schema\": 1"), 11, "\"schema\": 9");
  try {
    load_bundle(bumped);
    FAIL() << "bumped schema accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SchemaMismatch);
  }
}

TEST(Cli, ExitCodes) {
  const fs::path dir = fresh_dir("cli");
  const fs::path cfg = dir / "d1.ini";
  std::ofstream(cfg) << kD1;
  const std::string common = "--config " + cfg.string() + " --cache-dir " + (dir / "cache").string();
  EXPECT_EQ(run_cli(""), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli("all"), 2);
  EXPECT_EQ(run_cli("verify " + common + " --suite nope"), 2);
  std::ofstream(dir / "bad.ini") << "[curve]\nf = 1, 2\n";
  EXPECT_EQ(run_cli("certify --config " + (dir / "bad.ini").string()), 2);
  const std::string out = (dir / "r.json").string();
  EXPECT_EQ(run_cli("certify " + common + " --out " + out), 0);
  EXPECT_EQ(run_cli("report --out " + out), 0);
  EXPECT_EQ(run_cli("report --out " + (dir / "missing.json").string()), 2);
  std::ofstream(dir / "g3.ini") << "[curve]\nf = -1,0,0,0,0,1\n[curve.expect]\ngenus = 3\n";
  EXPECT_EQ(run_cli("certify --no-cache --out " + out + " --config " + (dir / "g3.ini").string()), 1);
  EXPECT_EQ(run_cli("report --out " + out), 1);
  fs::remove_all(dir);
}
