#pragma once
// Truncated Laurent series at one puncture, with a certified-coefficient window.
//
// A series stores coefficients for degrees [lo, lo + size - 1]. Degrees above that
// and up to certifiedTo are known to be zero; degrees above certifiedTo are unknown.

#include <algorithm>
#include <functional>
#include <type_traits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dynr/jet.hpp"

namespace dynr {

/// certifiedTo value of an exactly known (polynomial) series.
inline constexpr int kExactDeg = 1 << 28;

inline bool coeff_is_zero(const Rational& r) { return sgn(r) == 0; }
inline bool coeff_is_zero(const JetScalar& s) { return s.is_zero(); }
inline Rational coeff_zero(const Rational&) { return Rational(0); }
inline JetScalar coeff_zero(const JetScalar&) { return JetScalar(); }

/// Materialized value type (strips GMP expression templates).
template <class T>
struct value_of {
  using type = std::decay_t<T>;
};
template <class T, class U>
struct value_of<__gmp_expr<T, U>> {
  using type = __gmp_expr<T, T>;
};
template <class T>
using value_of_t = typename value_of<std::decay_t<T>>::type;

inline int sat_add(int a, int b) {
  if (a >= kExactDeg || b >= kExactDeg) return kExactDeg;
  long s = static_cast<long>(a) + b;
  return s >= kExactDeg ? kExactDeg : static_cast<int>(s);
}

template <class C>
class Laurent {
 public:
  Laurent() = default;
  /// Zero series certified on [lo, certifiedTo].
  Laurent(int puncture, int lo, int certifiedTo, int weight, C zero)
      : puncture_(puncture), lo_(lo), cert_(certifiedTo), weight_(weight), zero_(std::move(zero)) {}

  static Laurent monomial(int puncture, int deg, C value, int weight = 0) {
    Laurent s(puncture, deg, kExactDeg, weight, coeff_zero(value));
    s.set(deg, std::move(value));
    return s;
  }

  int puncture() const { return puncture_; }
  int lo() const { return lo_; }
  int certified_to() const { return cert_; }
  int weight() const { return weight_; }
  bool exact() const { return cert_ >= kExactDeg; }
  const C& zero() const { return zero_; }
  /// Highest stored degree (lo - 1 if nothing stored).
  int stored_hi() const { return lo_ + static_cast<int>(c_.size()) - 1; }
  bool window_empty() const { return cert_ < lo_; }

  /// Coefficient at deg; throws outside the certified window.
  const C& at(int deg) const {
    if (deg > cert_)
      throw Error(ErrorCode::WindowTooSmall,
                  "degree " + std::to_string(deg) + " above certified " + std::to_string(cert_));
    if (deg < lo_ || deg > stored_hi()) return zero_;
    return c_[deg - lo_];
  }
  bool certified(int deg) const { return deg <= cert_; }

  void set(int deg, C value) {
    if (deg < lo_) throw Error(ErrorCode::Internal, "set below lo");
    if (deg > cert_) return;
    size_t k = static_cast<size_t>(deg - lo_);
    if (k >= c_.size()) {
      if (coeff_is_zero(value)) return;
      c_.resize(k + 1, zero_);
    }
    c_[k] = std::move(value);
  }
  void add_to(int deg, const C& value) {
    if (deg > cert_ || coeff_is_zero(value)) return;
    if (deg < lo_) throw Error(ErrorCode::Internal, "add below lo");
    size_t k = static_cast<size_t>(deg - lo_);
    if (k >= c_.size()) c_.resize(k + 1, zero_);
    c_[k] = c_[k] + value;
  }

  /// Lowest degree with a nonzero coefficient inside the window, or certifiedTo + 1.
  int valuation() const {
    for (size_t k = 0; k < c_.size(); ++k)
      if (!coeff_is_zero(c_[k])) return lo_ + static_cast<int>(k);
    return cert_ >= kExactDeg ? kExactDeg : cert_ + 1;
  }
  bool is_zero() const {
    for (auto& v : c_)
      if (!coeff_is_zero(v)) return false;
    return true;
  }

  Laurent truncated(int certifiedTo) const {
    Laurent s = *this;
    s.cert_ = std::min(cert_, certifiedTo);
    if (s.stored_hi() > s.cert_) s.c_.resize(static_cast<size_t>(std::max(0, s.cert_ - lo_ + 1)));
    s.trim();
    return s;
  }
  /// Raise lo to the actual valuation (keeps all information).
  Laurent normalized() const {
    Laurent s = *this;
    s.trim();
    if (s.is_zero()) {
      s.c_.clear();
      return s;
    }
    int v = valuation();
    if (v > lo_) {
      s.c_.erase(s.c_.begin(), s.c_.begin() + (v - lo_));
      s.lo_ = v;
    }
    return s;
  }
  /// Multiply by z^k.
  Laurent shifted(int k) const {
    Laurent s = *this;
    s.lo_ += k;
    s.cert_ = sat_add(cert_, k);
    return s;
  }
  Laurent with_weight(int w) const {
    Laurent s = *this;
    s.weight_ = w;
    return s;
  }

  template <class F>
  auto map(F f) const -> Laurent<value_of_t<decltype(f(std::declval<const C&>()))>> {
    using D = value_of_t<decltype(f(std::declval<const C&>()))>;
    Laurent<D> out(puncture_, lo_, cert_, weight_, f(zero_));
    for (size_t k = 0; k < c_.size(); ++k) out.set(lo_ + static_cast<int>(k), f(c_[k]));
    return out;
  }

  /// d/dz of the coefficient function (weight unchanged).
  Laurent derivative() const {
    Laurent out(puncture_, lo_ - 1, cert_ >= kExactDeg ? kExactDeg : cert_ - 1, weight_, zero_);
    for (size_t k = 0; k < c_.size(); ++k) {
      int deg = lo_ + static_cast<int>(k);
      if (deg == 0) continue;
      out.set(deg - 1, c_[k] * Rational(deg));
    }
    return out;
  }

  Laurent operator-() const {
    Laurent s = *this;
    for (auto& v : s.c_) v = zero_ - v;
    return s;
  }
  friend Laurent operator+(const Laurent& a, const Laurent& b) { return combine(a, b, false); }
  friend Laurent operator-(const Laurent& a, const Laurent& b) { return combine(a, b, true); }

  const std::vector<C>& raw() const { return c_; }

 private:
  static Laurent combine(const Laurent& a, const Laurent& b, bool subtract) {
    check_compatible(a, b);
    if (a.weight_ != b.weight_) throw Error(ErrorCode::Internal, "adding series of different weight");
    Laurent out(a.puncture_, std::min(a.lo_, b.lo_), std::min(a.cert_, b.cert_), a.weight_, a.zero_);
    for (int d = a.lo_; d <= std::min(a.stored_hi(), out.cert_); ++d) out.add_to(d, a.c_[d - a.lo_]);
    for (int d = b.lo_; d <= std::min(b.stored_hi(), out.cert_); ++d)
      out.add_to(d, subtract ? b.zero_ - b.c_[d - b.lo_] : b.c_[d - b.lo_]);
    out.trim();
    return out;
  }
  void trim() {
    while (!c_.empty() && coeff_is_zero(c_.back())) c_.pop_back();
  }
  template <class U>
  friend class Laurent;

 public:
  static void check_compatible(const Laurent& a, const Laurent& b) {
    if (a.puncture_ != b.puncture_)
      throw Error(ErrorCode::PunctureMismatch,
                  std::to_string(a.puncture_) + " vs " + std::to_string(b.puncture_));
  }

 private:
  int puncture_ = 0;
  int lo_ = 0;
  int cert_ = kExactDeg;
  int weight_ = 0;
  C zero_{};
  std::vector<C> c_;
};

/// Product with an explicit coefficient multiplication f: A x B -> D.
template <class A, class B, class F>
auto laurent_mul_with(const Laurent<A>& a, const Laurent<B>& b, F f)
    -> Laurent<value_of_t<decltype(f(std::declval<const A&>(), std::declval<const B&>()))>> {
  using D = value_of_t<decltype(f(std::declval<const A&>(), std::declval<const B&>()))>;
  if (a.puncture() != b.puncture())
    throw Error(ErrorCode::PunctureMismatch,
                std::to_string(a.puncture()) + " vs " + std::to_string(b.puncture()));
  const int lo = a.lo() + b.lo();
  // coefficients below the valuation are known zeros, so the valuation bounds the unknown tail's reach
  const int cert = std::min(sat_add(a.certified_to(), std::min(b.valuation(), b.certified_to() + 1)),
                            sat_add(b.certified_to(), std::min(a.valuation(), a.certified_to() + 1)));
  Laurent<D> out(a.puncture(), lo, cert, a.weight() + b.weight(), f(a.zero(), b.zero()));
  const int hi = std::min(cert, a.stored_hi() + b.stored_hi());
  const auto& ac = a.raw();
  const auto& bc = b.raw();
  for (int deg = lo; deg <= hi; ++deg) {
    D acc = out.zero();
    bool any = false;
    const int i0 = std::max(a.lo(), deg - b.stored_hi());
    const int i1 = std::min(a.stored_hi(), deg - b.lo());
    for (int i = i0; i <= i1; ++i) {
      const A& x = ac[i - a.lo()];
      const B& y = bc[deg - i - b.lo()];
      if (coeff_is_zero(x) || coeff_is_zero(y)) continue;
      acc = acc + f(x, y);
      any = true;
    }
    if (any) out.set(deg, std::move(acc));
  }
  return out;
}

template <class C>
Laurent<C> laurent_mul(const Laurent<C>& a, const Laurent<C>& b) {
  return laurent_mul_with(a, b, [](const C& x, const C& y) { return x * y; });
}

/// Scale every coefficient by a fixed scalar.
template <class C, class S>
Laurent<C> laurent_scale(const Laurent<C>& a, const S& s) {
  return a.map([&](const C& x) { return x * s; });
}

template <class C>
C residue(const Laurent<C>& f) {
  if (f.weight() != 1) throw Error(ErrorCode::Internal, "residue of a non-form");
  if (!f.certified(-1)) throw Error(ErrorCode::WindowTooSmall, "residue degree not certified");
  return f.at(-1);
}

namespace detail {
inline bool unit(const Rational& r) { return sgn(r) != 0; }
inline bool unit(const JetScalar& s) { return sgn(s.constant()) != 0; }
inline Rational inv(const Rational& r) { return 1 / r; }
inline JetScalar inv(const JetScalar& s) { return s.inverse(); }
}  // namespace detail

/// Multiplicative inverse. Exact inputs that are not monomials are expanded to relPrecision
/// degrees beyond the leading term.
template <class C>
Laurent<C> series_invert(const Laurent<C>& a, int relPrecision = 32) {
  const int v = a.valuation();
  if (v > a.certified_to()) throw Error(ErrorCode::NotAUnit, "series vanishes on its window");
  const C& lead = a.at(v);
  if (!detail::unit(lead)) throw Error(ErrorCode::NotAUnit, "leading coefficient not invertible");
  const C linv = detail::inv(lead);
  int R = a.exact() ? relPrecision : a.certified_to() - v;
  const bool monomial = a.exact() && a.stored_hi() == v;
  if (monomial) R = kExactDeg;
  const int n = monomial ? 0 : R;
  // u = a / (lead z^v) = 1 + w; b = 1/u by the recurrence b_k = -sum_{j>=1} w_j b_{k-j}.
  std::vector<C> w(static_cast<size_t>(n) + 1, a.zero());
  for (int k = 0; k <= n && v + k <= a.stored_hi(); ++k) w[k] = a.at(v + k) * linv;
  std::vector<C> b(static_cast<size_t>(n) + 1, a.zero());
  b[0] = C(1);
  for (int k = 1; k <= n; ++k) {
    C acc = a.zero();
    for (int j = 1; j <= k; ++j)
      if (!coeff_is_zero(w[j]) && !coeff_is_zero(b[k - j])) acc = acc + w[j] * b[k - j];
    b[k] = a.zero() - acc;
  }
  Laurent<C> out(a.puncture(), -v, monomial ? kExactDeg : sat_add(-v, R), -a.weight(), a.zero());
  for (int k = 0; k <= n; ++k) out.set(-v + k, b[k] * linv);
  return out;
}

/// Square root of a scalar series with even valuation and square leading coefficient.
/// Newton iteration s <- (s + a/s)/2 with doubling relative precision.
template <class C>
Laurent<C> series_sqrt(const Laurent<C>& a, int relPrecision = 32) {
  const int v = a.valuation();
  if (v > a.certified_to()) throw Error(ErrorCode::NotASquare, "series vanishes on its window");
  if (v % 2 != 0) throw Error(ErrorCode::NotASquare, "odd valuation");
  Rational lead0;
  if constexpr (std::is_same_v<C, Rational>) {
    lead0 = a.at(v);
  } else {
    if (!a.at(v).is_constant()) throw Error(ErrorCode::NotASquare, "leading coefficient depends on u");
    lead0 = a.at(v).constant();
  }
  auto root = rational_sqrt(lead0);
  if (!root) throw Error(ErrorCode::NotASquare, "leading coefficient " + to_string(lead0));
  const int R = a.exact() ? relPrecision : a.certified_to() - v;
  // Normalized u = a / (lead z^v), certified to relative degree R.
  Laurent<C> u(a.puncture(), 0, R, 0, a.zero());
  const C linv = C(1 / lead0);
  for (int k = 0; k <= R && v + k <= a.stored_hi(); ++k) u.set(k, a.at(v + k) * linv);
  Laurent<C> s = Laurent<C>::monomial(a.puncture(), 0, C(1)).truncated(0);
  const C half = C(Rational(1, 2));
  int prec = 0;
  while (prec < R) {
    prec = std::min(R, 2 * prec + 1);
    Laurent<C> s_ext(a.puncture(), 0, prec, 0, a.zero());
    for (int k = 0; k <= s.stored_hi(); ++k) s_ext.set(k, s.at(k));
    Laurent<C> q = laurent_mul(u.truncated(prec), series_invert(s_ext, prec));
    Laurent<C> next = laurent_scale(s_ext + q, half).truncated(prec);
    s = next;
  }
  Laurent<C> out(a.puncture(), v / 2, sat_add(v / 2, R), a.weight(), a.zero());
  const C r = C(*root);
  for (int k = 0; k <= std::min(R, s.stored_hi()); ++k) out.set(v / 2 + k, s.at(k) * r);
  return out;
}

}  // namespace dynr
