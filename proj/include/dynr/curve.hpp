#pragma once
// Hyperelliptic curves y^2 = f(x) punctured at infinity, and their regular functions and forms.

#include <algorithm>
#include <map>
#include <tuple>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "dynr/laurent.hpp"

namespace dynr {

/// Dense univariate polynomial, coefficients from degree 0 upward.
struct Poly {
  std::vector<Rational> c;

  int degree() const {
    for (int k = static_cast<int>(c.size()) - 1; k >= 0; --k)
      if (sgn(c[k]) != 0) return k;
    return -1;
  }
  Rational lead() const { return degree() < 0 ? Rational(0) : c[degree()]; }
  static Poly monomial(int k, const Rational& v = 1) {
    Poly p;
    p.c.assign(static_cast<size_t>(k) + 1, Rational(0));
    p.c[k] = v;
    return p;
  }
  Poly derivative() const {
    Poly p;
    for (size_t k = 1; k < c.size(); ++k) p.c.push_back(c[k] * Rational(static_cast<long>(k)));
    return p;
  }
  friend bool operator==(const Poly& a, const Poly& b) {
    const size_t n = std::max(a.c.size(), b.c.size());
    for (size_t k = 0; k < n; ++k) {
      Rational x = k < a.c.size() ? a.c[k] : Rational(0), y = k < b.c.size() ? b.c[k] : Rational(0);
      if (x != y) return false;
    }
    return true;
  }
};

/// Polynomial gcd over Q, monic.
inline Poly poly_gcd(Poly a, Poly b) {
  auto trim = [](Poly& p) {
    while (!p.c.empty() && sgn(p.c.back()) == 0) p.c.pop_back();
  };
  trim(a);
  trim(b);
  while (!b.c.empty()) {
    Poly r = a;
    while (r.degree() >= b.degree() && r.degree() >= 0) {
      const int shift = r.degree() - b.degree();
      const Rational q = r.lead() / b.lead();
      for (int k = 0; k <= b.degree(); ++k) r.c[k + shift] -= q * b.c[k];
      trim(r);
    }
    a = b;
    b = r;
  }
  if (!a.c.empty()) {
    Rational l = a.lead();
    for (auto& v : a.c) v /= l;
  }
  return a;
}

enum class Model { Odd, Even };

/// y^2 = f(x) with its punctures at infinity and local coordinate expansions there.
class CurveModel {
 public:
  explicit CurveModel(Poly f) : f_(std::move(f)) {
    while (!f_.c.empty() && sgn(f_.c.back()) == 0) f_.c.pop_back();
    const int deg = f_.degree();
    if (deg < 3) throw Error(ErrorCode::BadDegree, "degree " + std::to_string(deg));
    if (deg % 2 == 1) {
      model_ = Model::Odd;
      genus_ = (deg - 1) / 2;
      ell_ = 1;
    } else {
      model_ = Model::Even;
      genus_ = (deg - 2) / 2;
      ell_ = 2;
    }
    if (genus_ < 2) throw Error(ErrorCode::GenusTooSmall, "genus " + std::to_string(genus_));
    if (poly_gcd(f_, f_.derivative()).degree() > 0) throw Error(ErrorCode::NotSquarefree, "f has a repeated root");
    if (model_ == Model::Even) {
      if (!rational_sqrt(f_.lead())) throw Error(ErrorCode::LeadingNotSquare, to_string(f_.lead()));
      xscale_ = 1;
    } else {
      // x = c z^-2 makes the leading coefficient of f(x) z^{2(2g+1)} a square when c = lead(f).
      xscale_ = rational_sqrt(f_.lead()) ? Rational(1) : f_.lead();
    }
    for (int i = 0; i < ell_; ++i) cache_.push_back(std::make_shared<PunctureCache>());
  }

  const Poly& f() const { return f_; }
  Model model() const { return model_; }
  int genus() const { return genus_; }
  int punctures() const { return ell_; }
  const Rational& xscale() const { return xscale_; }

  /// Pole orders of x and y at every puncture.
  int x_pole() const { return model_ == Model::Odd ? 2 : 1; }
  int y_pole() const { return model_ == Model::Odd ? 2 * genus_ + 1 : genus_ + 1; }
  /// Pole order of dx/y (negative: it vanishes there).
  int dx_over_y_pole() const { return model_ == Model::Odd ? -(2 * genus_ - 2) : -(genus_ - 1); }

  /// Exact expansion of x at puncture i.
  Laurent<Rational> x_expansion(int i) const {
    check_puncture(i);
    return Laurent<Rational>::monomial(i, -x_pole(), xscale_);
  }
  /// dx/dz at puncture i (exact).
  Laurent<Rational> dx_expansion(int i) const { return x_expansion(i).derivative(); }

  /// y at puncture i certified at least to degree certTo.
  Laurent<Rational> y_expansion(int i, int certTo) const {
    check_puncture(i);
    auto& pc = *cache_[i];
    std::lock_guard<std::mutex> lock(pc.mu);
    if (!pc.y || pc.y->certified_to() < certTo) {
      const int rel = std::max(certTo + y_pole(), 2 * (pc.y ? pc.y->certified_to() + y_pole() : 8));
      Laurent<Rational> fx = poly_at(f_, x_expansion(i), 0);
      Laurent<Rational> y = series_sqrt(fx, rel);
      if (model_ == Model::Even && i == 1) y = -y;
      pc.y = std::make_shared<Laurent<Rational>>(y);
      pc.yinv = std::make_shared<Laurent<Rational>>(series_invert(y));
    }
    return pc.y->truncated(certTo);
  }
  /// 1/y at puncture i certified at least to certTo.
  Laurent<Rational> y_inverse_expansion(int i, int certTo) const {
    // 1/y has lo = y_pole and is certified y_pole + (cert_y + y_pole) past it.
    y_expansion(i, std::max(certTo - 2 * y_pole(), -y_pole()));
    auto& pc = *cache_[i];
    std::lock_guard<std::mutex> lock(pc.mu);
    return pc.yinv->truncated(certTo);
  }

  /// p(s) for a series s, exactly when s is exact (valuation bounded below by lo(s) * deg p).
  static Laurent<Rational> poly_at(const Poly& p, const Laurent<Rational>& s, int weight) {
    Laurent<Rational> power = Laurent<Rational>::monomial(s.puncture(), 0, Rational(1), weight);
    const int deg = p.degree();
    Laurent<Rational> out(s.puncture(), std::min(0, deg * s.lo()), kExactDeg, weight, Rational(0));
    for (int k = 0; k <= deg; ++k) {
      if (sgn(p.c[k]) != 0) out = out + laurent_scale(power, p.c[k]);
      if (k < deg) power = laurent_mul(power, s.with_weight(0));
    }
    return out;
  }

 private:
  struct PunctureCache {
    std::mutex mu;
    std::shared_ptr<Laurent<Rational>> y, yinv;
  };
  void check_puncture(int i) const {
    if (i < 0 || i >= ell_) throw Error(ErrorCode::PunctureMismatch, "no puncture " + std::to_string(i));
  }

  Poly f_;
  Model model_ = Model::Odd;
  int genus_ = 0, ell_ = 1;
  Rational xscale_ = 1;
  std::vector<std::shared_ptr<PunctureCache>> cache_;  // shared by copies of the same curve
};

enum class OuterKind { Function, Form };

/// A(x) + B(x) y, regular away from infinity; forms carry an extra factor dx/y.
struct OuterFunction {
  Poly A, B;
  OuterKind kind = OuterKind::Function;

  static OuterFunction x_power(int i, OuterKind k = OuterKind::Function) { return {Poly::monomial(i), Poly{}, k}; }
  static OuterFunction xy_power(int i, OuterKind k = OuterKind::Function) { return {Poly{}, Poly::monomial(i), k}; }

  int y_degree() const { return B.degree() >= 0 ? 1 : 0; }
  /// Pole order at every puncture (for Weierstrass monomials; combinations give an upper bound).
  int pole_order(const CurveModel& X) const {
    int p = -kExactDeg;
    if (A.degree() >= 0) p = std::max(p, X.x_pole() * A.degree());
    if (B.degree() >= 0) p = std::max(p, X.x_pole() * B.degree() + X.y_pole());
    if (kind == OuterKind::Form) p += X.dx_over_y_pole();
    return p;
  }

  /// Expansion at puncture i certified at least through degree certTo (dz coefficient for forms).
  Laurent<Rational> expansion(const CurveModel& X, int i, int certTo) const {
    const Laurent<Rational> x = X.x_expansion(i);
    const int w = kind == OuterKind::Form ? 1 : 0;
    if (kind == OuterKind::Function) {
      Laurent<Rational> out = CurveModel::poly_at(A, x, 0);
      if (B.degree() >= 0) {
        Laurent<Rational> bx = CurveModel::poly_at(B, x, 0);
        Laurent<Rational> y = X.y_expansion(i, certTo - bx.lo());
        out = out + laurent_mul(bx, y);
      }
      return out.truncated(certTo);
    }
    // (A + B y) dx / y = A (dx/dz) / y dz + B dx/dz dz
    Laurent<Rational> dx = X.dx_expansion(i);
    Laurent<Rational> out(i, std::min(0, dx.lo()), kExactDeg, 0, Rational(0));
    if (A.degree() >= 0) {
      Laurent<Rational> adx = laurent_mul(CurveModel::poly_at(A, x, 0), dx);
      Laurent<Rational> yi = X.y_inverse_expansion(i, certTo - adx.lo());
      out = laurent_mul(adx, yi);
    }
    if (B.degree() >= 0) {
      Laurent<Rational> bdx = laurent_mul(CurveModel::poly_at(B, x, 0), dx);
      out = A.degree() >= 0 ? out + bdx : bdx;
    }
    return out.truncated(certTo).with_weight(w);
  }

  std::string str() const {
    auto mono = [](int k) { return k == 0 ? std::string("1") : k == 1 ? std::string("x") : "x^" + std::to_string(k); };
    std::string s;
    for (int k = 0; k <= A.degree(); ++k)
      if (sgn(A.c[k]) != 0) s += (s.empty() ? "" : " + ") + to_string(A.c[k]) + "*" + mono(k);
    for (int k = 0; k <= B.degree(); ++k)
      if (sgn(B.c[k]) != 0) s += (s.empty() ? "" : " + ") + to_string(B.c[k]) + "*" + mono(k) + "*y";
    if (s.empty()) s = "0";
    if (kind == OuterKind::Form) s = "(" + s + ") dx/y";
    return s;
  }
};

/// Weierstrass monomials x^i, x^i y of pole order <= maxPole, ordered by (pole, y-degree, x-degree).
inline std::vector<OuterFunction> outer_basis(const CurveModel& X, OuterKind kind, int maxPole) {
  struct Item {
    int pole, ydeg, xdeg;
  };
  std::vector<Item> items;
  const int shift = kind == OuterKind::Form ? X.dx_over_y_pole() : 0;
  for (int i = 0; X.x_pole() * i + shift <= maxPole; ++i) items.push_back({X.x_pole() * i + shift, 0, i});
  for (int i = 0; X.x_pole() * i + X.y_pole() + shift <= maxPole; ++i)
    items.push_back({X.x_pole() * i + X.y_pole() + shift, 1, i});
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    return std::tie(a.pole, a.ydeg, a.xdeg) < std::tie(b.pole, b.ydeg, b.xdeg);
  });
  std::vector<OuterFunction> out;
  for (auto& it : items)
    out.push_back(it.ydeg ? OuterFunction::xy_power(it.xdeg, kind) : OuterFunction::x_power(it.xdeg, kind));
  return out;
}

/// Sum of residues of a global form over all punctures (exactly zero for a genuine form).
inline Rational residue_sum(const CurveModel& X, const OuterFunction& w) {
  if (w.kind != OuterKind::Form) throw Error(ErrorCode::Internal, "residue of a function");
  Rational s = 0;
  for (int i = 0; i < X.punctures(); ++i) s += residue(w.expansion(X, i, -1));
  return s;
}

}  // namespace dynr
