#pragma once
// JSON workspace and report serialization. Rationals are "p/q" strings, objects are key-sorted,
// and every file carries a schema version.

#include <map>
#include <memory>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "dynr/chart.hpp"
#include "dynr/kernels.hpp"
#include "dynr/yangbaxter.hpp"
#include "json.hpp"

namespace dynr {

using Json = nlohmann::json;  // std::map backed, so keys are sorted on output

inline constexpr int kSchemaVersion = 1;

/// Lowercase hex SHA-256.
inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr))
    throw Error(ErrorCode::Internal, "sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

/// Byte-stable text form.
inline std::string dump_json(const Json& j) { return j.dump(1, ' ', true) + "\n"; }

inline Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

namespace io {

inline Json rat(const Rational& r) {
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}
inline Rational rat(const Json& j) {
  if (!j.is_string()) throw Error(ErrorCode::ParseError, "rational must be a string");
  try {
    return parse_rational(j.get<std::string>());
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, "bad rational " + j.get<std::string>());
  }
}

template <class T>
T field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(ErrorCode::ParseError, std::string("missing field ") + key);
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string(key) + ": " + e.what());
  }
}
inline const Json& sub(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(ErrorCode::ParseError, std::string("missing field ") + key);
  return j.at(key);
}

inline Json jet(const JetScalar& s) {
  Json terms = Json::object();
  for (auto& [e, c] : s.terms()) {
    std::string k;
    for (size_t i = 0; i < e.size(); ++i) k += (i ? "," : "") + std::to_string(e[i]);
    terms[k] = rat(c);
  }
  Json out = Json::object();
  out["vars"] = s.nvars();
  out["order"] = s.exact() ? Json("exact") : Json(s.order());
  out["terms"] = terms;
  return out;
}
inline JetScalar jet(const Json& j) {
  const int nvars = field<int>(j, "vars");
  const Json& o = sub(j, "order");
  const int order = o.is_string() ? kExactOrder : field<int>(j, "order");
  std::map<std::vector<int>, Rational> terms;
  for (auto& [k, v] : sub(j, "terms").items()) {
    std::vector<int> e;
    size_t pos = 0;
    while (pos <= k.size() && !k.empty()) {
      size_t comma = k.find(',', pos);
      try {
        e.push_back(std::stoi(k.substr(pos, comma - pos)));
      } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError, "bad exponent key " + k);
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (static_cast<int>(e.size()) != nvars) throw Error(ErrorCode::ParseError, "exponent arity " + k);
    terms[e] = rat(v);
  }
  if (nvars == 0) {
    JetScalar c = terms.empty() ? JetScalar() : JetScalar(terms.begin()->second);
    return order < kExactOrder ? c.truncated(order) : c;
  }
  return JetScalar::from_terms(nvars, order, terms);
}

inline Json lievec(const LieVec& v) {
  Json out = Json::array();
  for (int a = 0; a < v.dim(); ++a) out.push_back(jet(v[a]));
  return out;
}
inline LieVec lievec(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "vector must be an array");
  LieVec v(static_cast<int>(j.size()));
  for (size_t a = 0; a < j.size(); ++a) v[static_cast<int>(a)] = jet(j[a]);
  return v;
}

inline Json form(const GlobalFormVector& g) {
  Json out = Json::array();
  for (auto& c : g.coeffs) out.push_back(lievec(c));
  return out;
}
inline GlobalFormVector form(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "form must be an array");
  GlobalFormVector g;
  for (auto& c : j) g.coeffs.push_back(lievec(c));
  return g;
}

inline Json spec(const ChartSpec& s) {
  Json sig = Json::array(), eta = Json::array();
  for (auto& f : s.sigma0)
    sig.push_back({{"puncture", f.puncture}, {"row", f.row}, {"col", f.col}, {"coeff", rat(f.coeff)}, {"power", f.power}});
  for (auto& terms : s.eta) {
    Json t = Json::array();
    for (auto& e : terms)
      t.push_back({{"puncture", e.puncture}, {"basis", e.basis}, {"power", e.power}, {"coeff", rat(e.coeff)}});
    eta.push_back(t);
  }
  return {{"sigma0", sig}, {"eta", eta}};
}
inline ChartSpec spec(const Json& j) {
  ChartSpec s;
  for (auto& f : sub(j, "sigma0"))
    s.sigma0.push_back({field<int>(f, "puncture"), field<int>(f, "row"), field<int>(f, "col"), rat(sub(f, "coeff")),
                        field<int>(f, "power")});
  for (auto& terms : sub(j, "eta")) {
    std::vector<EtaTerm> t;
    for (auto& e : terms)
      t.push_back({field<int>(e, "puncture"), field<int>(e, "basis"), field<int>(e, "power"), rat(sub(e, "coeff"))});
    s.eta.push_back(t);
  }
  return s;
}

inline Json certificate(const Certificate& c) {
  return {{"depth", c.depth},
          {"h0_unknowns", c.h0_unknowns},
          {"h0_rank", c.h0_rank},
          {"complement_dim", c.complement_dim},
          {"expected_dim", c.expected_dim},
          {"eta_rank_gain", c.eta_rank_gain},
          {"eta_target", c.eta_target},
          {"kernel_unknowns", c.kernel_unknowns},
          {"kernel_rank", c.kernel_rank},
          {"pole_bound", c.pole_bound},
          {"passed", c.passed()}};
}
inline Certificate certificate(const Json& j) {
  Certificate c;
  c.depth = field<int>(j, "depth");
  c.h0_unknowns = field<int>(j, "h0_unknowns");
  c.h0_rank = field<int>(j, "h0_rank");
  c.complement_dim = field<int>(j, "complement_dim");
  c.expected_dim = field<int>(j, "expected_dim");
  c.eta_rank_gain = field<int>(j, "eta_rank_gain");
  c.eta_target = field<int>(j, "eta_target");
  c.kernel_unknowns = field<int>(j, "kernel_unknowns");
  c.kernel_rank = field<int>(j, "kernel_rank");
  c.pole_bound = field<int>(j, "pole_bound");
  return c;
}

/// Report entry. Wall-clock time is left out so that reports are byte-deterministic.
inline Json report(const IdentityReport& r) {
  Json details = Json::object();
  for (auto& [k, v] : r.details) details[k] = v;
  return {{"name", r.name},       {"status", status_name(r.status())},
          {"window", r.window},   {"checked", r.checked},
          {"unknown", r.unknown}, {"nonzero", r.nonzero},
          {"samples", r.samples}, {"details", details}};
}

}  // namespace io

/// Everything needed to rebuild a chart and its kernels without searching or solving.
struct Workspace {
  std::string config_hash;
  std::vector<Rational> f;
  int n = 2, jet_order = 2, K = 3, kernel_slack = 2, cap = 40;
  ChartSpec spec;
  Certificate certificate;
  std::vector<GlobalFormVector> coframe;
  std::map<int, GlobalFormVector> columns;
  int columns_solved = -1, column_pole_bound = -1;
};

inline Workspace capture_workspace(const std::string& configHash, const std::vector<Rational>& f, const KernelSet& ks,
                                   int kernelSlack) {
  const BundleChart& ch = ks.chart();
  if (!ch.spec()) throw Error(ErrorCode::Internal, "chart has no spec to save");
  Workspace w;
  w.config_hash = configHash;
  w.f = f;
  w.n = ch.lie().n();
  w.jet_order = ch.jet_order();
  w.K = ks.K();
  w.kernel_slack = kernelSlack;
  w.cap = ks.column_cap();
  w.spec = *ch.spec();
  w.certificate = ch.certificate();
  w.coframe = ch.omega();
  w.columns = ks.solved_columns(&w.columns_solved, &w.column_pole_bound);
  return w;
}

inline Json workspace_json(const Workspace& w) {
  Json fs = Json::array();
  for (auto& c : w.f) fs.push_back(io::rat(c));
  Json cof = Json::array();
  for (auto& g : w.coframe) cof.push_back(io::form(g));
  Json cols = Json::object();
  for (auto& [k, g] : w.columns) {
    char key[16];
    std::snprintf(key, sizeof key, "%06d", k);  // zero-padded so that string order is numeric order
    cols[key] = io::form(g);
  }
  Json payload = {{"config_hash", w.config_hash},
                  {"curve", fs},
                  {"n", w.n},
                  {"jet_order", w.jet_order},
                  {"chart", {{"spec", io::spec(w.spec)}, {"certificate", io::certificate(w.certificate)}}},
                  {"coframe", cof},
                  {"kernels",
                   {{"K", w.K},
                    {"slack", w.kernel_slack},
                    {"cap", w.cap},
                    {"solved", w.columns_solved},
                    {"pole_bound", w.column_pole_bound},
                    {"columns", cols}}}};
  return {{"schema", kSchemaVersion},
          {"kind", "workspace"},
          {"digest", sha256_hex(payload.dump())},
          {"payload", payload}};
}

inline std::string save_workspace(const Workspace& w) { return dump_json(workspace_json(w)); }

/// Throws SchemaMismatch on a version or kind mismatch and ParseError on malformed or tampered content.
inline Workspace load_workspace(const std::string& text) {
  const Json j = parse_json(text);
  if (!j.is_object() || !j.contains("schema")) throw Error(ErrorCode::ParseError, "no schema field");
  if (!j["schema"].is_number_integer() || j["schema"].get<int>() != kSchemaVersion)
    throw Error(ErrorCode::SchemaMismatch, "schema " + j["schema"].dump() + ", expected " + std::to_string(kSchemaVersion));
  if (io::field<std::string>(j, "kind") != "workspace") throw Error(ErrorCode::SchemaMismatch, "not a workspace file");
  const Json& p = io::sub(j, "payload");
  if (io::field<std::string>(j, "digest") != sha256_hex(p.dump()))
    throw Error(ErrorCode::ParseError, "digest mismatch");
  Workspace w;
  w.config_hash = io::field<std::string>(p, "config_hash");
  for (auto& c : io::sub(p, "curve")) w.f.push_back(io::rat(c));
  w.n = io::field<int>(p, "n");
  w.jet_order = io::field<int>(p, "jet_order");
  const Json& ch = io::sub(p, "chart");
  w.spec = io::spec(io::sub(ch, "spec"));
  w.certificate = io::certificate(io::sub(ch, "certificate"));
  for (auto& g : io::sub(p, "coframe")) w.coframe.push_back(io::form(g));
  const Json& k = io::sub(p, "kernels");
  w.K = io::field<int>(k, "K");
  w.kernel_slack = io::field<int>(k, "slack");
  w.cap = io::field<int>(k, "cap");
  w.columns_solved = io::field<int>(k, "solved");
  w.column_pole_bound = io::field<int>(k, "pole_bound");
  for (auto& [key, g] : io::sub(k, "columns").items()) {
    int idx;
    try {
      idx = std::stoi(key);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "bad column key " + key);
    }
    w.columns[idx] = io::form(g);
  }
  return w;
}

/// Rebuilds chart and kernels from a workspace; no search and no linear solves.
inline std::shared_ptr<KernelSet> restore_workspace(const Workspace& w) {
  Poly f;
  f.c = w.f;
  CurveModel X(f);
  LieData lie(w.n);
  const int m = (X.genus() - 1) * lie.dim();
  GroupElement hi = chart_sigma(lie, X.punctures(), w.spec, m, w.jet_order + 1);
  auto chart = std::make_shared<BundleChart>(X, lie, hi, w.jet_order, m, w.spec);
  chart->mutable_certificate() = w.certificate;
  if (static_cast<int>(w.coframe.size()) != m) throw Error(ErrorCode::ParseError, "coframe size");
  chart->set_omega(w.coframe);
  auto ks = std::make_shared<KernelSet>(chart, w.K, w.kernel_slack, w.cap);
  ks->preload(w.columns, w.columns_solved, w.column_pole_bound);
  return ks;
}

}  // namespace dynr
