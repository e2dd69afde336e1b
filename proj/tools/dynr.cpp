// Command-line front end: certify, solve, verify, report, all.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "dynr/pipeline.hpp"

namespace {

constexpr int kUsage = 2;

void print_summary(std::ostream& os, const dynr::Json& report) {
  std::vector<dynr::Json> all;
  for (auto& r : report.at("stages")) all.push_back(r);
  for (auto& r : report.at("reports")) all.push_back(r);
  for (auto& r : all) {
    char line[256];
    std::snprintf(line, sizeof line, "%-18s %-40s checked=%-6lld nonzero=%-4lld unknown=%lld",
                  r.at("status").get<std::string>().c_str(), r.at("name").get<std::string>().c_str(),
                  r.at("checked").get<long long>(), r.at("nonzero").get<long long>(), r.at("unknown").get<long long>());
    os << line << "\n";
    for (auto& s : r.at("samples")) os << "    " << s.get<std::string>() << "\n";
  }
  os << "overall: " << report.at("status").get<std::string>() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("dynr"));
  spdlog::set_pattern("[%l] %v");

  CLI::App app{"Dynamical r-matrix verifier for punctured Hitchin systems on hyperelliptic curves"};
  app.require_subcommand(1);
  std::string configPath, outPath, cacheDir, timingsPath;
  long long seed = -1;
  int jobs = 1;
  bool noCache = false, quiet = false;
  std::vector<std::string> suites;

  auto add_common = [&](CLI::App* sub, bool withSuite) {
    sub->add_option("--config", configPath, "configuration file (INI)")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "chart search seed (overrides chart.seed)")->check(CLI::NonNegativeNumber);
    sub->add_option("--out", outPath, "report file (overrides output.report)");
    sub->add_option("--cache-dir", cacheDir, "workspace cache directory (overrides output.cache_dir)");
    sub->add_flag("--no-cache", noCache, "neither read nor write the workspace cache");
    sub->add_option("--jobs", jobs, "suites run concurrently")->check(CLI::Range(1, 64));
    sub->add_option("--timings", timingsPath, "write wall-clock timings to this JSON file");
    sub->add_flag("--quiet", quiet, "only log warnings");
    if (withSuite)
      sub->add_option("--suite", suites, "suite to run; repeat or separate with commas")->delimiter(',');
  };
  auto* certify = app.add_subcommand("certify", "search and certify a chart");
  auto* solve = app.add_subcommand("solve", "certify, then solve the kernel columns");
  auto* verify = app.add_subcommand("verify", "certify, solve and run the verifier suites");
  auto* all = app.add_subcommand("all", "run every stage and every configured suite");
  auto* report = app.add_subcommand("report", "print a saved report and exit with its status");
  add_common(certify, false);
  add_common(solve, false);
  add_common(verify, true);
  add_common(all, true);
  report->add_option("--config", configPath, "configuration file naming the report")->check(CLI::ExistingFile);
  report->add_option("--out", outPath, "report file to read");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }
  if (quiet) spdlog::set_level(spdlog::level::warn);

  dynr::Config cfg;
  const bool haveConfig = !configPath.empty();
  if (haveConfig) {
    std::ifstream in(configPath);
    try {
      cfg = dynr::parse_config(in);
    } catch (const dynr::Error& e) {
      std::cerr << e.what() << "\n";
      return kUsage;
    }
  }
  if (!outPath.empty()) cfg.report = outPath;

  if (report->parsed()) {
    if (!haveConfig && outPath.empty()) {
      std::cerr << "report needs --out or --config\n";
      return kUsage;
    }
    std::ifstream in(cfg.report, std::ios::binary);
    if (!in) {
      std::cerr << "cannot read " << cfg.report << "\n";
      return kUsage;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    try {
      dynr::Json j = dynr::load_bundle(ss.str());
      print_summary(std::cout, j);
      return j.at("exit_code").get<int>();
    } catch (const dynr::Error& e) {
      std::cerr << e.what() << "\n";
      return kUsage;
    } catch (const std::exception& e) {
      std::cerr << "ParseError: " << e.what() << "\n";
      return kUsage;
    }
  }

  if (!haveConfig) {
    std::cerr << "--config is required\n";
    return kUsage;
  }
  if (seed >= 0) cfg.seed = static_cast<uint64_t>(seed);
  if (!cacheDir.empty()) cfg.cache_dir = cacheDir;
  if (!suites.empty()) {
    std::vector<std::string> chosen;
    for (auto& s : suites) {
      if (s == "all") {
        chosen = dynr::suite_names();
        break;
      }
      if (std::find(dynr::suite_names().begin(), dynr::suite_names().end(), s) == dynr::suite_names().end()) {
        std::cerr << "unknown suite '" << s << "'\n";
        return kUsage;
      }
      chosen.push_back(s);
    }
    cfg.suites.clear();
    for (auto& s : dynr::suite_names())
      if (std::find(chosen.begin(), chosen.end(), s) != chosen.end()) cfg.suites.push_back(s);
  }

  dynr::Verb verb = certify->parsed() ? dynr::Verb::Certify
                    : solve->parsed() ? dynr::Verb::Solve
                    : verify->parsed() ? dynr::Verb::Verify
                                       : dynr::Verb::All;
  dynr::PipelineOptions opt;
  opt.cache_dir = noCache ? std::string() : cfg.cache_dir;
  opt.jobs = jobs;
  spdlog::info("{}: config hash {}", dynr::verb_name(verb), dynr::config_hash(cfg).substr(0, 16));
  dynr::ReportBundle b = dynr::run_pipeline(cfg, verb, opt);
  const std::string text = dynr::save_bundle(b);
  try {
    dynr::detail::write_file(cfg.report, text);
    if (!timingsPath.empty()) dynr::detail::write_file(timingsPath, dynr::dump_json(dynr::timings_json(b)));
  } catch (const std::exception& e) {
    std::cerr << "cannot write output: " << e.what() << "\n";
    return kUsage;
  }
  print_summary(std::cout, dynr::parse_json(text));
  spdlog::info("report written to {} ({:.1f} s{})", cfg.report, b.timings["total"], b.cache_hit ? ", cached workspace" : "");
  return dynr::exit_code(b.status());
}
