#pragma once
// Soundness audit of the certified-window calculus.
//
// Random expression DAGs over truncated series are evaluated twice: once from leaves
// certified to N and once from the same leaves certified to N + extra. Every coefficient
// the low evaluation claims as certified must agree with the high evaluation.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dynr/laurent.hpp"

namespace dynr {

struct WindowAudit {
  int dags = 0;
  int nodes = 0;
  long checked = 0;
  long mismatches = 0;
  long uncovered = 0;
  std::vector<std::string> failures;
  bool pass() const { return mismatches == 0 && uncovered == 0 && checked > 0; }
};

namespace detail {

enum class DagOp { Leaf, Add, Sub, Mul, Scale, Invert, Derivative, Shift, Sqrt1 };

struct DagNode {
  DagOp op = DagOp::Leaf;
  int a = -1, b = -1, k = 0;
  Rational c;
  std::uint64_t leafSeed = 0;
  int leafLo = 0;
  bool leafExact = false;
};

constexpr int kAuditVars = 2;
constexpr int kAuditOrder = 2;

/// Coefficient of degree deg of a fixed infinite leaf series.
inline JetScalar leaf_coeff(std::uint64_t seed, int deg) {
  std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(deg + 1000));
  std::uniform_int_distribution<int> coef(-3, 3);
  std::map<std::vector<int>, Rational> terms;
  const auto& t = MonomialTable::get(kAuditVars, kAuditOrder);
  for (int i = 0; i < t.size(); ++i)
    if (int c = coef(rng)) terms[t.exps(i)] = make_rational(c, 1 + (i % 2));
  return JetScalar::from_terms(kAuditVars, kAuditOrder, terms);
}

inline Laurent<JetScalar> make_leaf(const DagNode& n, int cert) {
  const int hi = n.leafExact ? n.leafLo + 3 : cert;
  Laurent<JetScalar> s(0, n.leafLo, n.leafExact ? kExactDeg : cert, 0, JetScalar());
  for (int d = n.leafLo; d <= hi; ++d) s.set(d, leaf_coeff(n.leafSeed, d));
  // Unit leading coefficient so that inversion applies.
  const JetScalar lead = leaf_coeff(n.leafSeed, n.leafLo);
  s.set(n.leafLo, lead - lead.truncated(0) + JetScalar(Rational(static_cast<long>(1 + n.leafSeed % 3))));
  return s;
}

inline Laurent<JetScalar> apply_op(const DagNode& n, const std::vector<Laurent<JetScalar>>& v) {
  switch (n.op) {
    case DagOp::Add: return v[n.a] + v[n.b];
    case DagOp::Sub: return v[n.a] - v[n.b];
    case DagOp::Mul: return laurent_mul(v[n.a], v[n.b]);
    case DagOp::Scale: return laurent_scale(v[n.a], JetScalar(n.c));
    case DagOp::Invert: return series_invert(v[n.a]);
    case DagOp::Derivative: return v[n.a].derivative();
    case DagOp::Shift: return v[n.a].shifted(n.k);
    case DagOp::Sqrt1: {
      Laurent<JetScalar> one = Laurent<JetScalar>::monomial(0, 0, JetScalar(1));
      return series_sqrt(one + v[n.a].shifted(n.k));
    }
    case DagOp::Leaf: break;
  }
  throw Error(ErrorCode::Internal, "leaf has no operation");
}

/// Copy of s claiming `by` more certified degrees than it has. Used to test the audit itself.
inline Laurent<JetScalar> overclaim(const Laurent<JetScalar>& s, int by) {
  if (by == 0 || s.exact()) return s;
  Laurent<JetScalar> out(s.puncture(), s.lo(), s.certified_to() + by, s.weight(), s.zero());
  for (int d = s.lo(); d <= s.stored_hi(); ++d) out.set(d, s.at(d));
  return out;
}

}  // namespace detail

/// Runs the audit on `dags` random DAGs with up to `maxNodes` operation nodes each.
/// A nonzero `mutation` inflates the certified window of every product, which must be detected.
inline WindowAudit audit_window_calculus(std::uint64_t seed, int dags = 50, int maxNodes = 8, int baseCert = 6,
                                         int extra = 10, int mutation = 0) {
  using detail::DagNode;
  using detail::DagOp;
  WindowAudit out;
  std::mt19937_64 rng(seed);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  for (int g = 0; g < dags; ++g) {
    std::vector<DagNode> nodes;
    std::vector<Laurent<JetScalar>> low, high;
    const int leaves = pick(2, 3);
    for (int i = 0; i < leaves; ++i) {
      DagNode n;
      n.leafSeed = rng();
      n.leafLo = pick(-2, 1);
      n.leafExact = pick(0, 3) == 0;
      const int cert = baseCert + pick(-2, 2);
      nodes.push_back(n);
      low.push_back(detail::make_leaf(n, cert));
      high.push_back(detail::make_leaf(n, cert + extra));
    }
    const int ops = pick(3, maxNodes);
    int attempts = 0;
    for (int step = 0; step < ops && attempts < 200; ++attempts) {
      DagNode n;
      const int sz = static_cast<int>(nodes.size());
      n.op = static_cast<DagOp>(pick(1, 8));
      n.a = pick(0, sz - 1);
      n.b = pick(0, sz - 1);
      n.k = pick(-2, 2);
      n.c = make_rational(pick(-5, 5), pick(1, 4));
      if (n.op == DagOp::Sqrt1) {
        n.k = 1 - std::min(0, low[n.a].valuation());
        if (n.k > 4) continue;
      }
      Laurent<JetScalar> lo;
      try {
        lo = detail::apply_op(n, low);
        if (n.op == DagOp::Mul) lo = detail::overclaim(lo, mutation);
      } catch (const Error&) {
        continue;  // op not applicable at low precision
      }
      if (lo.window_empty()) continue;
      Laurent<JetScalar> hi;
      const std::string tag = "dag " + std::to_string(g) + " node " + std::to_string(sz);
      try {
        hi = detail::apply_op(n, high);
      } catch (const Error& e) {
        ++out.uncovered;
        out.failures.push_back(tag + ": high precision failed: " + e.what());
        continue;
      }
      const int top = lo.exact() ? lo.stored_hi() + 4 : lo.certified_to();
      for (int d = std::min(lo.lo(), hi.lo()); d <= top; ++d) {
        if (!hi.certified(d)) {
          ++out.uncovered;
          out.failures.push_back(tag + ": degree " + std::to_string(d) + " not covered");
          break;
        }
        ++out.checked;
        if (!(lo.at(d) == hi.at(d))) {
          ++out.mismatches;
          out.failures.push_back(tag + ": degree " + std::to_string(d) + " differs");
        }
      }
      nodes.push_back(n);
      low.push_back(std::move(lo));
      high.push_back(std::move(hi));
      ++step;
      ++out.nodes;
    }
    ++out.dags;
  }
  return out;
}

}  // namespace dynr
