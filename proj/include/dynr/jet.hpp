#pragma once
// Truncated polynomials in the dynamical variables u_1..u_m.

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "dynr/rational.hpp"

namespace dynr {

/// Order value meaning "no truncation": the stored polynomial is the whole object.
inline constexpr int kExactOrder = 1 << 20;

/// Monomials of total degree <= maxDeg in graded-lex order, so lower-degree tables are prefixes.
class MonomialTable {
 public:
  static const MonomialTable& get(int nvars, int maxDeg) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::unique_ptr<MonomialTable>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{nvars, maxDeg}];
    if (!slot) slot.reset(new MonomialTable(nvars, maxDeg));
    return *slot;
  }

  int nvars() const { return nvars_; }
  int maxDeg() const { return maxDeg_; }
  int size() const { return static_cast<int>(exps_.size()); }
  /// Number of monomials of degree <= deg.
  int count(int deg) const {
    if (deg < 0) return 0;
    return upto_[std::min(deg, maxDeg_)];
  }
  const std::vector<int>& exps(int idx) const { return exps_[idx]; }
  int degree(int idx) const { return deg_[idx]; }
  int index(const std::vector<int>& e) const {
    auto it = lookup_.find(e);
    return it == lookup_.end() ? -1 : it->second;
  }
  /// Index of the product monomial, or -1 if its degree exceeds maxDeg.
  int mul(int i, int j) const { return mul_[static_cast<size_t>(i) * exps_.size() + j]; }
  /// Index of d/du_var applied to monomial idx (-1 if zero) and the multiplier.
  std::pair<int, int> derive(int idx, int var) const {
    const auto& e = exps_[idx];
    if (e[var] == 0) return {-1, 0};
    auto f = e;
    --f[var];
    return {index(f), e[var]};
  }

 private:
  MonomialTable(int nvars, int maxDeg) : nvars_(nvars), maxDeg_(maxDeg) {
    std::vector<int> cur(nvars, 0);
    for (int d = 0; d <= maxDeg; ++d) {
      if (nvars == 0) {
        if (d == 0) push({});
      } else {
        enumerate(cur, 0, d);
      }
      upto_.push_back(static_cast<int>(exps_.size()));
    }
    const size_t n = exps_.size();
    mul_.assign(n * n, -1);
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j) {
        if (deg_[i] + deg_[j] > maxDeg) continue;
        std::vector<int> e(nvars);
        for (int v = 0; v < nvars; ++v) e[v] = exps_[i][v] + exps_[j][v];
        mul_[i * n + j] = lookup_.at(e);
      }
  }
  void enumerate(std::vector<int>& cur, int var, int remaining) {
    if (var == nvars_ - 1) {
      cur[var] = remaining;
      push(cur);
      cur[var] = 0;
      return;
    }
    for (int k = remaining; k >= 0; --k) {
      cur[var] = k;
      enumerate(cur, var + 1, remaining - k);
    }
    cur[var] = 0;
  }
  void push(const std::vector<int>& e) {
    int d = 0;
    for (int x : e) d += x;
    lookup_[e] = static_cast<int>(exps_.size());
    exps_.push_back(e);
    deg_.push_back(d);
  }

  int nvars_, maxDeg_;
  std::vector<std::vector<int>> exps_;
  std::vector<int> deg_;
  std::vector<int> upto_;
  std::vector<int> mul_;
  std::map<std::vector<int>, int> lookup_;
};

/// Element of Q[u_1..u_m]/(deg > order). Constants carry nvars = 0 and mix with any m.
class JetScalar {
 public:
  JetScalar() = default;
  JetScalar(const Rational& c) {  // NOLINT(google-explicit-constructor)
    if (sgn(c) != 0) c_.push_back(c);
  }
  JetScalar(long c) : JetScalar(Rational(c)) {}  // NOLINT(google-explicit-constructor)

  static JetScalar variable(int var, int nvars, int order = kExactOrder) {
    JetScalar s;
    s.nvars_ = nvars;
    s.order_ = order;
    if (order < 1) return s;
    const auto& t = MonomialTable::get(nvars, 1);
    std::vector<int> e(nvars, 0);
    e[var] = 1;
    s.c_.assign(t.size(), Rational(0));
    s.c_[t.index(e)] = 1;
    s.trim();
    return s;
  }
  static JetScalar from_terms(int nvars, int order, const std::map<std::vector<int>, Rational>& terms) {
    JetScalar s;
    s.nvars_ = nvars;
    s.order_ = order;
    int deg = 0;
    for (auto& [e, v] : terms) {
      int d = 0;
      for (int x : e) d += x;
      if (d <= order) deg = std::max(deg, d);
    }
    const auto& t = MonomialTable::get(nvars, deg);
    s.c_.assign(t.size(), Rational(0));
    for (auto& [e, v] : terms) {
      int idx = t.index(e);
      if (idx >= 0) s.c_[idx] = v;
    }
    s.trim();
    return s;
  }

  int nvars() const { return nvars_; }
  int order() const { return order_; }
  bool exact() const { return order_ >= kExactOrder; }
  bool is_zero() const { return c_.empty(); }
  Rational constant() const { return c_.empty() ? Rational(0) : c_[0]; }
  bool is_constant() const { return c_.size() <= 1; }
  const std::vector<Rational>& raw() const { return c_; }
  /// Highest total degree with a stored coefficient (-1 for zero).
  int degree() const {
    if (c_.empty()) return -1;
    return max_table_deg();
  }

  /// Nonzero terms keyed by exponent vector.
  std::map<std::vector<int>, Rational> terms() const {
    std::map<std::vector<int>, Rational> out;
    if (c_.empty()) return out;
    const auto& t = MonomialTable::get(nvars_, max_table_deg());
    for (size_t i = 0; i < c_.size(); ++i)
      if (sgn(c_[i]) != 0) out[t.exps(static_cast<int>(i))] = c_[i];
    return out;
  }

  JetScalar truncated(int order) const {
    JetScalar s = *this;
    s.order_ = std::min(order_, order);
    if (s.order_ < 0) {
      s.c_.clear();
      return s;
    }
    if (!s.c_.empty() && nvars_ > 0) {
      const auto& t = MonomialTable::get(nvars_, max_table_deg());
      size_t keep = static_cast<size_t>(t.count(s.order_));
      if (s.c_.size() > keep) s.c_.resize(keep);
    }
    s.trim();
    return s;
  }
  /// Value at u = 0 as a jet of order 0.
  JetScalar base_point() const { return truncated(0); }

  JetScalar derive(int var) const {
    if (c_.size() <= 1) {
      JetScalar z;
      z.nvars_ = nvars_;
      z.order_ = exact() ? kExactOrder : order_ - 1;
      if (!exact() && order_ < 1) throw Error(ErrorCode::JetOrderTooLow, "derivative of an order-0 jet");
      return z;
    }
    if (!exact() && order_ < 1) throw Error(ErrorCode::JetOrderTooLow, "derivative of an order-0 jet");
    const auto& t = MonomialTable::get(nvars_, max_table_deg());
    JetScalar out;
    out.nvars_ = nvars_;
    out.order_ = exact() ? kExactOrder : order_ - 1;
    out.c_.assign(c_.size(), Rational(0));
    for (size_t i = 0; i < c_.size(); ++i) {
      if (sgn(c_[i]) == 0) continue;
      auto [j, k] = t.derive(static_cast<int>(i), var);
      if (j >= 0) out.c_[j] += c_[i] * k;
    }
    out.trim();
    return out;
  }

  Rational evaluate(const std::vector<Rational>& u) const {
    Rational acc = 0;
    if (c_.empty()) return acc;
    const auto& t = MonomialTable::get(nvars_, max_table_deg());
    for (size_t i = 0; i < c_.size(); ++i) {
      if (sgn(c_[i]) == 0) continue;
      Rational term = c_[i];
      const auto& e = t.exps(static_cast<int>(i));
      for (int v = 0; v < nvars_; ++v)
        for (int p = 0; p < e[v]; ++p) term *= u.at(v);
      acc += term;
    }
    return acc;
  }

  /// Multiplicative inverse; needs a nonzero constant term and a finite order.
  JetScalar inverse() const {
    if (c_.empty() || sgn(c_[0]) == 0) throw Error(ErrorCode::NotAUnit, "jet with zero constant term");
    const Rational inv0 = 1 / c_[0];
    if (c_.size() == 1) {
      JetScalar s(inv0);
      s.nvars_ = nvars_;
      s.order_ = order_;
      return s;
    }
    if (exact()) throw Error(ErrorCode::NotAUnit, "inverse of an untruncated polynomial");
    JetScalar n = *this * JetScalar(inv0) - JetScalar(1);
    JetScalar term(1), acc(1);
    term = term.with_shape(nvars_, order_);
    acc = acc.with_shape(nvars_, order_);
    for (int k = 1; k <= order_; ++k) {
      term = -(term * n);
      acc += term;
    }
    return acc * JetScalar(inv0);
  }

  JetScalar operator-() const {
    JetScalar s = *this;
    for (auto& v : s.c_) v = -v;
    return s;
  }
  JetScalar& operator+=(const JetScalar& o) { return *this = add(*this, o, 1); }
  JetScalar& operator-=(const JetScalar& o) { return *this = add(*this, o, -1); }
  JetScalar& operator*=(const JetScalar& o) { return *this = *this * o; }
  friend JetScalar operator+(const JetScalar& a, const JetScalar& b) { return add(a, b, 1); }
  friend JetScalar operator-(const JetScalar& a, const JetScalar& b) { return add(a, b, -1); }
  friend JetScalar operator*(const JetScalar& a, const JetScalar& b) {
    JetScalar out;
    out.nvars_ = merge_nvars(a, b);
    out.order_ = std::min(a.order_, b.order_);
    if (a.c_.empty() || b.c_.empty()) return out;
    if (a.c_.size() == 1 || b.c_.size() == 1) {
      const JetScalar& s = a.c_.size() == 1 ? a : b;
      const JetScalar& o = a.c_.size() == 1 ? b : a;
      out.c_ = o.c_;
      for (auto& v : out.c_) v *= s.c_[0];
      out.clip();
      out.trim();
      return out;
    }
    const int deg = std::min(out.order_, a.degree() + b.degree());
    const auto& t = MonomialTable::get(out.nvars_, deg);
    out.c_.assign(t.size(), Rational(0));
    mpq_class tmp;
    for (size_t i = 0; i < a.c_.size(); ++i) {
      if (sgn(a.c_[i]) == 0) continue;
      for (size_t j = 0; j < b.c_.size(); ++j) {
        if (sgn(b.c_[j]) == 0) continue;
        int k = (static_cast<int>(i) < t.size() && static_cast<int>(j) < t.size())
                    ? t.mul(static_cast<int>(i), static_cast<int>(j))
                    : -1;
        if (k < 0) continue;
        mpq_mul(tmp.get_mpq_t(), a.c_[i].get_mpq_t(), b.c_[j].get_mpq_t());
        out.c_[k] += tmp;
      }
    }
    out.trim();
    return out;
  }
  /// Equality on the common certified order.
  friend bool operator==(const JetScalar& a, const JetScalar& b) {
    int o = std::min(a.order_, b.order_);
    return (a - b).truncated(o).is_zero();
  }
  friend bool operator!=(const JetScalar& a, const JetScalar& b) { return !(a == b); }

  std::string str() const {
    if (c_.empty()) return "0";
    std::string s;
    for (auto& [e, v] : terms()) {
      if (!s.empty()) s += " + ";
      s += to_string(v);
      for (size_t k = 0; k < e.size(); ++k)
        if (e[k]) s += "*u" + std::to_string(k + 1) + (e[k] > 1 ? "^" + std::to_string(e[k]) : "");
    }
    return s;
  }

  /// Reinterpret a constant with explicit variable count and order.
  JetScalar with_shape(int nvars, int order) const {
    JetScalar s = *this;
    if (s.nvars_ == 0) s.nvars_ = nvars;
    return s.truncated(order);
  }

 private:
  static int merge_nvars(const JetScalar& a, const JetScalar& b) {
    if (a.c_.size() <= 1 && a.nvars_ == 0) return b.nvars_;
    if (b.c_.size() <= 1 && b.nvars_ == 0) return a.nvars_;
    if (a.nvars_ == 0) return b.nvars_;
    if (b.nvars_ == 0) return a.nvars_;
    if (a.nvars_ != b.nvars_) throw Error(ErrorCode::Internal, "jet variable count mismatch");
    return a.nvars_;
  }
  static JetScalar add(const JetScalar& a, const JetScalar& b, int sign) {
    JetScalar out;
    out.nvars_ = merge_nvars(a, b);
    out.order_ = std::min(a.order_, b.order_);
    out.c_.resize(std::max(a.c_.size(), b.c_.size()));
    for (size_t i = 0; i < a.c_.size(); ++i) out.c_[i] = a.c_[i];
    for (size_t i = 0; i < b.c_.size(); ++i) {
      if (sign > 0)
        out.c_[i] += b.c_[i];
      else
        out.c_[i] -= b.c_[i];
    }
    out.clip();
    out.trim();
    return out;
  }
  // Drop monomials above the order.
  void clip() {
    if (exact() || c_.empty() || nvars_ == 0) return;
    const auto& t = MonomialTable::get(nvars_, std::max(order_, 0));
    size_t keep = static_cast<size_t>(t.count(order_));
    if (order_ < 0) keep = 0;
    if (c_.size() > keep) c_.resize(keep);
  }
  void trim() {
    while (!c_.empty() && sgn(c_.back()) == 0) c_.pop_back();
  }
  // Smallest table degree covering the stored coefficients.
  int max_table_deg() const {
    if (nvars_ == 0 || c_.size() <= 1) return 0;
    return degree_of_index(nvars_, c_.size() - 1);
  }
  // Total degree of the monomial at a graded-lex position, from binomial counts.
  static int degree_of_index(int nvars, size_t idx) {
    size_t count = 1;  // monomials of degree <= d is C(nvars + d, d)
    int d = 0;
    while (count <= idx) {
      ++d;
      count = count * static_cast<size_t>(nvars + d) / static_cast<size_t>(d);
    }
    return d;
  }

  std::vector<Rational> c_;
  int nvars_ = 0;
  int order_ = kExactOrder;
};

}  // namespace dynr
