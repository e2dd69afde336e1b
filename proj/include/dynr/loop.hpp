#pragma once
// Loop and form elements valued in sl_n, group loops, the residue pairing and adjoint actions.

#include <vector>

#include "dynr/lie.hpp"

namespace dynr {

using MatSeries = Laurent<Mat>;

/// One Laurent block of matrices per puncture; weight 0 is a loop, weight 1 a form.
class LieSeries {
 public:
  LieSeries() = default;
  explicit LieSeries(std::vector<MatSeries> blocks) : b_(std::move(blocks)) {}
  /// Zero element certified everywhere.
  static LieSeries zero(int n, int punctures, int weight = 0) {
    std::vector<MatSeries> b;
    for (int i = 0; i < punctures; ++i) b.emplace_back(i, 0, kExactDeg, weight, Mat(n));
    return LieSeries(std::move(b));
  }
  /// X z_i^k at a single puncture.
  static LieSeries monomial(int n, int punctures, int i, int k, const Mat& X, int weight = 0) {
    LieSeries s = zero(n, punctures, weight);
    s.b_[i] = MatSeries::monomial(i, k, X, weight);
    return s;
  }

  int punctures() const { return static_cast<int>(b_.size()); }
  int weight() const { return b_.empty() ? 0 : b_[0].weight(); }
  const MatSeries& operator[](int i) const { return b_[i]; }
  MatSeries& operator[](int i) { return b_[i]; }
  const std::vector<MatSeries>& blocks() const { return b_; }

  template <class F>
  LieSeries map_blocks(F f) const {
    std::vector<MatSeries> out;
    for (auto& blk : b_) out.push_back(f(blk));
    return LieSeries(std::move(out));
  }
  LieSeries truncated_jets(int order) const {
    return map_blocks([&](const MatSeries& s) { return s.map([&](const Mat& m) { return m.truncated(order); }); });
  }
  LieSeries derive(int var) const {
    return map_blocks([&](const MatSeries& s) { return s.map([&](const Mat& m) { return m.derive(var); }); });
  }
  LieSeries truncated(int certTo) const {
    return map_blocks([&](const MatSeries& s) { return s.truncated(certTo); });
  }
  LieSeries with_weight(int w) const {
    return map_blocks([&](const MatSeries& s) { return s.with_weight(w); });
  }
  friend LieSeries operator+(const LieSeries& a, const LieSeries& b) {
    std::vector<MatSeries> out;
    for (int i = 0; i < a.punctures(); ++i) out.push_back(a.b_[i] + b.b_[i]);
    return LieSeries(std::move(out));
  }
  friend LieSeries operator-(const LieSeries& a, const LieSeries& b) {
    std::vector<MatSeries> out;
    for (int i = 0; i < a.punctures(); ++i) out.push_back(a.b_[i] - b.b_[i]);
    return LieSeries(std::move(out));
  }
  friend LieSeries operator*(const LieSeries& a, const JetScalar& s) {
    return a.map_blocks([&](const MatSeries& blk) { return laurent_scale(blk, s); });
  }
  friend LieSeries operator*(const JetScalar& s, const LieSeries& a) { return a * s; }

  /// Lowest certified degree over punctures.
  int certified_to() const {
    int c = kExactDeg;
    for (auto& blk : b_) c = std::min(c, blk.certified_to());
    return c;
  }
  /// Largest pole order (0 if holomorphic everywhere on the stored coefficients).
  int pole_order() const {
    int p = 0;
    for (auto& blk : b_) {
      int v = blk.valuation();
      if (v < kExactDeg) p = std::max(p, -v);
    }
    return p;
  }

 private:
  std::vector<MatSeries> b_;
};

using LoopElement = LieSeries;
using FormElement = LieSeries;

/// G-valued loop with its inverse kept alongside.
struct GroupElement {
  std::vector<MatSeries> g, ginv;

  static GroupElement identity(int n, int punctures) {
    GroupElement e;
    for (int i = 0; i < punctures; ++i) {
      e.g.push_back(MatSeries::monomial(i, 0, Mat::identity(n)));
      e.ginv.push_back(MatSeries::monomial(i, 0, Mat::identity(n)));
    }
    return e;
  }
  int punctures() const { return static_cast<int>(g.size()); }
  GroupElement inverse() const { return {ginv, g}; }
  friend GroupElement operator*(const GroupElement& a, const GroupElement& b) {
    GroupElement c;
    for (int i = 0; i < a.punctures(); ++i) {
      c.g.push_back(laurent_mul(a.g[i], b.g[i]));
      c.ginv.push_back(laurent_mul(b.ginv[i], a.ginv[i]));
    }
    return c;
  }
  GroupElement truncated_jets(int order) const {
    GroupElement c;
    auto tr = [order](const MatSeries& s) { return s.map([&](const Mat& m) { return m.truncated(order); }); };
    for (int i = 0; i < punctures(); ++i) {
      c.g.push_back(tr(g[i]));
      c.ginv.push_back(tr(ginv[i]));
    }
    return c;
  }
  /// Largest pole order among the entries of g and g^-1.
  int pole_order() const {
    int p = 0;
    for (auto* v : {&g, &ginv})
      for (auto& blk : *v) {
        int val = blk.valuation();
        if (val < kExactDeg) p = std::max(p, -val);
      }
    return p;
  }
};

/// Ad(g) a = g a g^-1.
inline LieSeries ad_conjugate(const GroupElement& g, const LieSeries& a) {
  std::vector<MatSeries> out;
  for (int i = 0; i < a.punctures(); ++i)
    out.push_back(laurent_mul(laurent_mul(g.g[i], a[i]), g.ginv[i]));
  return LieSeries(std::move(out));
}

inline LieSeries bracket(const LieSeries& a, const LieSeries& b) {
  if (a.weight() + b.weight() > 1) throw Error(ErrorCode::BothForms, "bracket of two forms");
  std::vector<MatSeries> out;
  for (int i = 0; i < a.punctures(); ++i)
    out.push_back(laurent_mul_with(a[i], b[i], [](const Mat& x, const Mat& y) { return commutator(x, y); }));
  return LieSeries(std::move(out));
}

/// B(a, w) = sum_i res kappa(a_i, w_i); only the degree -1 coefficient is formed.
inline JetScalar pair_B(const LieSeries& a, const LieSeries& w) {
  if (a.weight() + w.weight() != 1) throw Error(ErrorCode::Internal, "pairing needs one loop and one form");
  JetScalar s;
  for (int i = 0; i < a.punctures(); ++i) {
    const MatSeries& x = a[i];
    const MatSeries& y = w[i];
    if (x.certified_to() < -1 - y.lo() || y.certified_to() < -1 - x.lo())
      throw Error(ErrorCode::WindowTooSmall, "pairing window at puncture " + std::to_string(i));
    for (int e = x.lo(); e <= x.stored_hi(); ++e) {
      const int f = -1 - e;
      if (f < y.lo() || f > y.stored_hi()) continue;
      s += LieData::trace_product(x.at(e), y.at(f));
    }
  }
  return s;
}

/// Coordinates of each coefficient: per puncture series of LieVec.
inline std::vector<Laurent<LieVec>> to_coords(const LieData& lie, const LieSeries& a) {
  std::vector<Laurent<LieVec>> out;
  for (int i = 0; i < a.punctures(); ++i)
    out.push_back(a[i].map([&](const Mat& m) { return m.n() ? lie.coords(m) : LieVec(lie.dim()); }));
  return out;
}

}  // namespace dynr
