#pragma once
// The jet family sigma(u) = sigma0 exp(sum u_a eta_a), its frame xi, coframe omega and certificate.

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "dynr/curve.hpp"
#include "dynr/linalg.hpp"
#include "dynr/loop.hpp"

namespace dynr {

/// 1 + coeff z^power E_{row,col} at one puncture.
struct ElementaryFactor {
  int puncture = 0, row = 0, col = 1;
  Rational coeff = 1;
  int power = 0;
};

/// coeff z^power I_basis at one puncture.
struct EtaTerm {
  int puncture = 0, basis = 0, power = -1;
  Rational coeff = 1;
};

struct ChartSpec {
  std::vector<ElementaryFactor> sigma0;
  std::vector<std::vector<EtaTerm>> eta;
};

struct Certificate {
  int depth = 0;
  int h0_unknowns = 0, h0_rank = 0;  // rank == unknowns iff no global sections
  int complement_dim = -1, expected_dim = 0;
  int eta_rank_gain = -1, eta_target = 0;
  int kernel_unknowns = -1, kernel_rank = -1;
  int pole_bound = -1;

  bool h0_trivial() const { return h0_rank == h0_unknowns; }
  bool complement_ok() const { return complement_dim == expected_dim; }
  bool eta_spans() const { return eta_rank_gain == eta_target; }
  bool kernel_nonsingular() const { return kernel_rank >= 0 && kernel_rank == kernel_unknowns; }
  bool transversal() const { return h0_trivial() && complement_ok() && eta_spans(); }
  bool passed() const { return transversal() && kernel_nonsingular(); }
};

inline GroupElement elementary_product(int n, int punctures, const std::vector<ElementaryFactor>& fs) {
  GroupElement g = GroupElement::identity(n, punctures);
  for (auto& f : fs) {
    if (f.row == f.col || f.puncture < 0 || f.puncture >= punctures)
      throw Error(ErrorCode::ConfigError, "bad elementary factor");
    GroupElement e = GroupElement::identity(n, punctures);
    Mat E = Mat::unit(n, f.row, f.col, JetScalar(f.coeff));
    e.g[f.puncture] = e.g[f.puncture] + MatSeries::monomial(f.puncture, f.power, E);
    e.ginv[f.puncture] = e.ginv[f.puncture] - MatSeries::monomial(f.puncture, f.power, E);
    g = g * e;
  }
  for (int i = 0; i < punctures; ++i) {
    g.g[i] = g.g[i].normalized();
    g.ginv[i] = g.ginv[i].normalized();
  }
  return g;
}

inline LieSeries eta_element(const LieData& lie, int punctures, const std::vector<EtaTerm>& terms) {
  LieSeries s = LieSeries::zero(lie.n(), punctures);
  for (auto& t : terms)
    s = s + LieSeries::monomial(lie.n(), punctures, t.puncture, t.power, lie.basis(t.basis) * t.coeff);
  for (int i = 0; i < punctures; ++i) s[i] = s[i].normalized();
  return s;
}

/// exp(X) for X vanishing at u = 0, summed until the terms die in the jet truncation.
inline MatSeries exp_series(const MatSeries& X, int n, int maxTerms = 64) {
  MatSeries acc = MatSeries::monomial(X.puncture(), 0, Mat::identity(n));
  MatSeries term = acc;
  for (int k = 1; k <= maxTerms; ++k) {
    term = laurent_scale(laurent_mul(term, X), JetScalar(make_rational(1, k)));
    term = term.normalized();
    if (term.is_zero()) return acc;
    acc = acc + term;
  }
  throw Error(ErrorCode::Internal, "exponential did not terminate");
}

/// Coefficients c_j in g against the Omega^- basis; Ad(sigma^-1) of it is the represented form.
struct GlobalFormVector {
  std::vector<LieVec> coeffs;
};

/// What a solved form must satisfy: optional prescribed principal part and xi-pairings.
struct FormTarget {
  int puncture = -1, degree = 0;
  LieVec value;
  std::vector<JetScalar> xi_pairing;
};

class BundleChart {
 public:
  /// sigmaHi is sigma(u) at jet order jetOrder + 1 so that xi is exact to jetOrder.
  BundleChart(CurveModel curve, LieData lie, GroupElement sigmaHi, int jetOrder, int m,
              std::optional<ChartSpec> spec = std::nullopt)
      : curve_(std::move(curve)), lie_(std::move(lie)), m_(m), order_(jetOrder), spec_(std::move(spec)),
        cache_(std::make_shared<Cache>()) {
    if (jetOrder < 1) throw Error(ErrorCode::JetOrderTooLow, "jet order must be at least 1");
    sigma_hi_ = std::move(sigmaHi);
    sigma_ = sigma_hi_.truncated_jets(jetOrder);
    for (int a = 0; a < m_; ++a) {
      std::vector<MatSeries> blocks;
      for (int i = 0; i < ell(); ++i) {
        MatSeries d = sigma_hi_.g[i].map([a](const Mat& x) { return x.derive(a); });
        MatSeries xi = laurent_mul(sigma_hi_.ginv[i], d).map([&](const Mat& x) { return x.truncated(jetOrder); });
        blocks.push_back(xi.normalized());
      }
      xi_.emplace_back(std::move(blocks));
      xi_coords_.push_back(to_coords(lie_, xi_.back()));
    }
    for (int b = 0; b < lie_.dim(); ++b) {
      std::vector<Laurent<LieVec>> per;
      for (int i = 0; i < ell(); ++i) {
        MatSeries Ib = MatSeries::monomial(i, 0, lie_.basis(b));
        MatSeries c = laurent_mul(laurent_mul(sigma_.ginv[i], Ib), sigma_.g[i]);
        per.push_back(c.map([&](const Mat& x) { return lie_.coords(x); }).normalized());
      }
      conj_basis_.push_back(std::move(per));
    }
  }

  const CurveModel& curve() const { return curve_; }
  const LieData& lie() const { return lie_; }
  int m() const { return m_; }
  int jet_order() const { return order_; }
  int ell() const { return curve_.punctures(); }
  int dim() const { return lie_.dim(); }
  const std::optional<ChartSpec>& spec() const { return spec_; }
  const GroupElement& sigma() const { return sigma_; }
  const GroupElement& sigma_hi() const { return sigma_hi_; }
  const LieSeries& xi(int a) const { return xi_[a]; }
  const Laurent<LieVec>& xi_coords(int a, int i) const { return xi_coords_[a][i]; }
  /// Largest pole of the xi over punctures.
  int xi_pole() const {
    int p = 0;
    for (auto& x : xi_) p = std::max(p, x.pole_order());
    return p;
  }
  /// Pole shift of Ad(sigma^-1): pole(sigma) + pole(sigma^-1).
  int sigma_shift() const {
    int p = 0;
    for (int i = 0; i < ell(); ++i) {
      int a = sigma_.g[i].valuation(), b = sigma_.ginv[i].valuation();
      p = std::max(p, std::max(0, -a) + std::max(0, -b));
    }
    return p;
  }

  const Certificate& certificate() const { return cert_; }
  Certificate& mutable_certificate() { return cert_; }
  const std::vector<GlobalFormVector>& omega() const { return omega_; }
  void set_omega(std::vector<GlobalFormVector> w) { omega_ = std::move(w); }

  OuterFunction basis_element(OuterKind kind, int j) const {
    std::lock_guard<std::mutex> lock(cache_->mu);
    auto& list = kind == OuterKind::Form ? cache_->forms : cache_->funcs;
    if (j >= static_cast<int>(list.size())) {
      int P = 0;
      while (static_cast<int>(outer_basis(curve_, kind, P).size()) <= j) P += 4;
      list = outer_basis(curve_, kind, P);
    }
    return list[j];
  }
  /// Number of basis elements with pole order <= P.
  int basis_count(OuterKind kind, int P) const { return static_cast<int>(outer_basis(curve_, kind, P).size()); }

  /// Coordinates of Ad(sigma^-1)(I_b phi_j) at puncture i, certified through certTo.
  Laurent<LieVec> conj_expansion(OuterKind kind, int i, int j, int b, int certTo) const {
    const auto key = std::make_tuple(kind == OuterKind::Form ? 1 : 0, i, j, b);
    {
      std::lock_guard<std::mutex> lock(cache_->mu);
      auto it = cache_->conj.find(key);
      if (it != cache_->conj.end() && it->second.certified_to() >= certTo) return it->second.truncated(certTo);
    }
    const OuterFunction phi = basis_element(kind, j);
    const Laurent<LieVec>& M = conj_basis_[b][i];
    const int want = certTo + 8;
    Laurent<Rational> e = phi.expansion(curve_, i, want - M.lo());
    Laurent<LieVec> T = laurent_mul_with(e, M, [](const Rational& s, const LieVec& v) { return v * s; });
    if (T.certified_to() < certTo) throw Error(ErrorCode::WindowTooSmall, "conjugated basis window");
    std::lock_guard<std::mutex> lock(cache_->mu);
    cache_->conj[key] = T;
    return T.truncated(certTo);
  }

  /// Ad(sigma^-1) G at puncture i as coordinates, certified through certTo.
  Laurent<LieVec> expand(const GlobalFormVector& G, int i, int certTo) const {
    Laurent<LieVec> out(i, 0, kExactDeg, 1, LieVec(dim()));
    bool first = true;
    for (int j = 0; j < static_cast<int>(G.coeffs.size()); ++j)
      for (int b = 0; b < dim(); ++b) {
        const JetScalar& c = G.coeffs[j][b];
        if (c.is_zero()) continue;
        auto T = laurent_scale(conj_expansion(OuterKind::Form, i, j, b, certTo), c);
        out = first ? T : out + T;
        first = false;
      }
    if (first) out = Laurent<LieVec>(i, 0, certTo, 1, LieVec(dim()));
    return out.truncated(certTo);
  }
  /// B(xi_alpha, Ad(sigma^-1) G).
  JetScalar pair_xi(int alpha, const GlobalFormVector& G) const {
    JetScalar s;
    for (int i = 0; i < ell(); ++i) {
      const auto& X = xi_coords_[alpha][i];
      Laurent<LieVec> T = expand(G, i, -1 - X.lo());
      for (int e = X.lo(); e <= X.stored_hi(); ++e)
        if (-1 - e >= T.lo()) s += lie_.kappa(X.at(e), T.at(-1 - e));
    }
    return s.truncated(order_);
  }
  /// Expansion of G itself (no conjugation) at puncture i.
  Laurent<LieVec> expand_raw(const GlobalFormVector& G, int i, int certTo) const {
    Laurent<LieVec> out(i, 0, certTo, 1, LieVec(dim()));
    for (int j = 0; j < static_cast<int>(G.coeffs.size()); ++j) {
      if (G.coeffs[j].is_zero()) continue;
      Laurent<Rational> e = basis_element(OuterKind::Form, j).expansion(curve_, i, certTo);
      Laurent<LieVec> t = e.map([&](const Rational& s) { return G.coeffs[j] * s; });
      out = out + t.truncated(certTo);
    }
    return out;
  }

  /// Solve for forms with Ad(sigma^-1) G holomorphic apart from the targets' principal parts.
  /// Throws SingularSystem or PoleBoundTooSmall.
  std::vector<GlobalFormVector> solve_forms(int P, const std::vector<FormTarget>& targets, int* rankOut = nullptr) const {
    const int d = dim();
    const int nForms = basis_count(OuterKind::Form, P);
    const int unknowns = nForms * d;
    const int need = std::max(-1, xi_pole() - 1);
    // per puncture lowest degree among unknown expansions
    std::vector<int> emin(ell(), 0);
    std::vector<std::vector<Laurent<LieVec>>> T(ell());
    for (int i = 0; i < ell(); ++i)
      for (int j = 0; j < nForms; ++j)
        for (int b = 0; b < d; ++b) {
          T[i].push_back(conj_expansion(OuterKind::Form, i, j, b, need));
          emin[i] = std::min(emin[i], T[i].back().valuation());
        }
    JetMatrix A;
    JetMatrix B;
    const int nrhs = static_cast<int>(targets.size());
    for (int i = 0; i < ell(); ++i)
      for (int e = emin[i]; e <= -1; ++e)
        for (int a = 0; a < d; ++a) {
          std::vector<JetScalar> row(unknowns);
          bool any = false;
          for (int u = 0; u < unknowns; ++u) {
            row[u] = T[i][u].at(e)[a];
            any = any || !row[u].is_zero();
          }
          std::vector<JetScalar> rhs(nrhs);
          for (int t = 0; t < nrhs; ++t)
            if (targets[t].puncture == i && targets[t].degree == e) rhs[t] = targets[t].value[a];
          bool anyRhs = false;
          for (auto& x : rhs) anyRhs = anyRhs || !x.is_zero();
          if (!any && !anyRhs) continue;
          A.push_back(std::move(row));
          B.push_back(std::move(rhs));
        }
    for (int t = 0; t < nrhs; ++t)
      if (targets[t].puncture >= 0 && targets[t].degree < emin[targets[t].puncture])
        throw Error(ErrorCode::PoleBoundTooSmall, "target pole deeper than the form span");
    for (int beta = 0; beta < m_; ++beta) {
      std::vector<JetScalar> row(unknowns);
      for (int u = 0; u < unknowns; ++u) {
        JetScalar s;
        for (int i = 0; i < ell(); ++i) {
          const auto& X = xi_coords_[beta][i];
          for (int e = X.lo(); e <= X.stored_hi(); ++e) s += lie_.kappa(X.at(e), T[i][u].at(-1 - e));
        }
        row[u] = s.truncated(order_);
      }
      std::vector<JetScalar> rhs(nrhs);
      for (int t = 0; t < nrhs; ++t)
        if (!targets[t].xi_pairing.empty()) rhs[t] = targets[t].xi_pairing[beta];
      A.push_back(std::move(row));
      B.push_back(std::move(rhs));
    }
    JetSolution sol = solve_jets(std::move(A), std::move(B), order_);
    if (rankOut) *rankOut = sol.rank_at_base;
    if (sol.rank_at_base < unknowns)
      throw Error(ErrorCode::SingularSystem,
                  "rank " + std::to_string(sol.rank_at_base) + " < " + std::to_string(unknowns));
    if (!sol.consistent) throw Error(ErrorCode::PoleBoundTooSmall, "pole bound " + std::to_string(P));
    std::vector<GlobalFormVector> out(nrhs);
    for (int t = 0; t < nrhs; ++t) {
      out[t].coeffs.assign(nForms, LieVec(d));
      for (int j = 0; j < nForms; ++j)
        for (int b = 0; b < d; ++b) out[t].coeffs[j][b] = sol.X[j * d + b][t];
    }
    return out;
  }

 private:
  struct Cache {
    std::mutex mu;
    std::vector<OuterFunction> forms, funcs;
    std::map<std::tuple<int, int, int, int>, Laurent<LieVec>> conj;
  };

  CurveModel curve_;
  LieData lie_;
  int m_, order_;
  std::optional<ChartSpec> spec_;
  GroupElement sigma_hi_, sigma_;
  std::vector<LieSeries> xi_;
  std::vector<std::vector<Laurent<LieVec>>> xi_coords_;
  std::vector<std::vector<Laurent<LieVec>>> conj_basis_;  // [b][i]
  Certificate cert_;
  std::vector<GlobalFormVector> omega_;
  std::shared_ptr<Cache> cache_;
};

/// sigma(u) at jet order `order` from a spec.
inline GroupElement chart_sigma(const LieData& lie, int punctures, const ChartSpec& spec, int m, int order) {
  GroupElement s0 = elementary_product(lie.n(), punctures, spec.sigma0);
  if (static_cast<int>(spec.eta.size()) != m) throw Error(ErrorCode::ConfigError, "need m eta modes");
  std::vector<MatSeries> X;
  for (int i = 0; i < punctures; ++i) X.emplace_back(i, 0, kExactDeg, 0, Mat(lie.n()));
  for (int a = 0; a < m; ++a) {
    LieSeries eta = eta_element(lie, punctures, spec.eta[a]);
    const JetScalar u = JetScalar::variable(a, m, order);
    for (int i = 0; i < punctures; ++i) {
      MatSeries t = laurent_scale(eta[i], u);
      X[i] = Laurent<Mat>(i, std::min(X[i].lo(), t.lo()), kExactDeg, 0, Mat(lie.n())) + X[i] + t;
    }
  }
  GroupElement e;
  for (int i = 0; i < punctures; ++i) {
    e.g.push_back(exp_series(X[i], lie.n()));
    e.ginv.push_back(exp_series(-X[i], lie.n()));
  }
  return s0 * e;
}

/// Principal parts at u = 0 of Ad(s^-1)(I_b f) for outer functions f, split at degree -depth.
struct PrincipalSystem {
  int depth = 0, unknowns = 0, emin = 0;
  RatMatrix deep, shallow;
  std::vector<std::array<int, 3>> shallow_label;  // puncture, degree, Lie index
};

inline PrincipalSystem principal_system(const CurveModel& X, const LieData& lie, const GroupElement& s, int depth) {
  const int d = lie.dim(), ell = X.punctures();
  const GroupElement s0 = s.truncated_jets(0);
  PrincipalSystem ps;
  ps.depth = depth;
  int shift = 0;
  for (int i = 0; i < ell; ++i)
    shift = std::max(shift, std::max(0, -s0.g[i].valuation()) + std::max(0, -s0.ginv[i].valuation()));
  const auto basis = outer_basis(X, OuterKind::Function, depth + shift);
  ps.unknowns = static_cast<int>(basis.size()) * d;
  std::vector<std::vector<Laurent<LieVec>>> T(ell);
  for (int i = 0; i < ell; ++i) {
    std::vector<Laurent<LieVec>> M;
    for (int b = 0; b < d; ++b) {
      MatSeries c = laurent_mul(laurent_mul(s0.ginv[i], MatSeries::monomial(i, 0, lie.basis(b))), s0.g[i]);
      M.push_back(c.map([&](const Mat& x) { return lie.coords(x); }).normalized());
    }
    for (auto& phi : basis)
      for (int b = 0; b < d; ++b) {
        Laurent<Rational> e = phi.expansion(X, i, -1 - M[b].lo());
        T[i].push_back(laurent_mul_with(e, M[b], [](const Rational& r, const LieVec& v) { return v * r; }));
        ps.emin = std::min(ps.emin, T[i].back().valuation());
      }
  }
  for (int i = 0; i < ell; ++i)
    for (int e = ps.emin; e <= -1; ++e)
      for (int a = 0; a < d; ++a) {
        std::vector<Rational> row(ps.unknowns);
        for (int u = 0; u < ps.unknowns; ++u) row[u] = T[i][u].at(e)[a].constant();
        if (e < -depth) {
          ps.deep.push_back(std::move(row));
        } else {
          ps.shallow.push_back(std::move(row));
          ps.shallow_label.push_back({i, e, a});
        }
      }
  return ps;
}

/// Rank of [D 0; S E] minus rank D, for extra columns E on the shallow rows.
inline int augmented_gain(const PrincipalSystem& ps, const std::vector<std::vector<Rational>>& extraCols, int rkDeep) {
  const int extra = static_cast<int>(extraCols.size());
  RatMatrix aug;
  for (auto& row : ps.deep) {
    auto r = row;
    r.resize(ps.unknowns + extra);
    aug.push_back(std::move(r));
  }
  for (size_t s = 0; s < ps.shallow.size(); ++s) {
    auto r = ps.shallow[s];
    r.resize(ps.unknowns + extra);
    for (int k = 0; k < extra; ++k) r[ps.unknowns + k] = extraCols[k][s];
    aug.push_back(std::move(r));
  }
  return rank(aug) - rkDeep;
}

/// Rank certificate at u = 0: no global sections, complement dimension m, eta spanning it.
inline Certificate certify(const BundleChart& chart, int depth) {
  const int d = chart.dim(), ell = chart.ell(), m = chart.m();
  const CurveModel& X = chart.curve();
  Certificate c;
  depth = std::max({depth, 2 * X.genus() - 1, chart.xi_pole()});
  c.depth = depth;
  const PrincipalSystem ps = principal_system(X, chart.lie(), chart.sigma(), depth);
  RatMatrix all = ps.deep;
  all.insert(all.end(), ps.shallow.begin(), ps.shallow.end());
  const int rkAll = rank(all), rkDeep = rank(ps.deep);
  c.h0_unknowns = ps.unknowns;
  c.h0_rank = rkAll;
  const int W = d * ell * depth;
  c.expected_dim = m;
  c.complement_dim = W - (rkAll - rkDeep);
  std::vector<std::vector<Rational>> cols(m, std::vector<Rational>(ps.shallow.size()));
  for (int al = 0; al < m; ++al)
    for (size_t s = 0; s < ps.shallow.size(); ++s) {
      auto [i, e, a] = ps.shallow_label[s];
      cols[al][s] = chart.xi_coords(al, i).at(e)[a].constant();
    }
  c.eta_rank_gain = augmented_gain(ps, cols, rkDeep);
  c.eta_target = W;
  return c;
}

/// Elementary modes I_b z_i^-k, k ascending, kept while they enlarge the span; empty if m are not reached.
inline std::vector<std::vector<EtaTerm>> greedy_eta(const CurveModel& X, const LieData& lie,
                                                    const std::vector<ElementaryFactor>& sigma0, int depth) {
  const int m = (X.genus() - 1) * lie.dim();
  depth = std::max(depth, 2 * X.genus() - 1);
  const PrincipalSystem ps =
      principal_system(X, lie, elementary_product(lie.n(), X.punctures(), sigma0), depth);
  RatMatrix all = ps.deep;
  all.insert(all.end(), ps.shallow.begin(), ps.shallow.end());
  const int rkDeep = rank(ps.deep), base = rank(all) - rkDeep;
  std::vector<std::vector<Rational>> cols;
  std::vector<std::vector<EtaTerm>> out;
  for (int k = 1; k <= depth && static_cast<int>(out.size()) < m; ++k)
    for (int i = 0; i < X.punctures() && static_cast<int>(out.size()) < m; ++i)
      for (int b = 0; b < lie.dim() && static_cast<int>(out.size()) < m; ++b) {
        std::vector<Rational> col(ps.shallow.size());
        for (size_t s = 0; s < ps.shallow.size(); ++s) {
          auto [pi, e, a] = ps.shallow_label[s];
          if (pi == i && e == -k) col[s] = lie.coords(lie.basis(b))[a].constant();
        }
        cols.push_back(col);
        if (augmented_gain(ps, cols, rkDeep) == base + static_cast<int>(cols.size()))
          out.push_back({EtaTerm{i, b, -k, 1}});
        else
          cols.pop_back();
      }
  if (static_cast<int>(out.size()) < m) out.clear();
  return out;
}

/// Coframe: m forms with Ad(sigma^-1) omega holomorphic and B(xi_a, omega_b) = delta.
inline std::vector<GlobalFormVector> solve_global_forms(const BundleChart& chart, int slack, int* poleBound = nullptr,
                                                        int* rankOut = nullptr) {
  std::vector<FormTarget> targets;
  for (int a = 0; a < chart.m(); ++a) {
    FormTarget t;
    t.xi_pairing.assign(chart.m(), JetScalar());
    t.xi_pairing[a] = JetScalar(1);
    targets.push_back(t);
  }
  int P = chart.sigma_shift() + slack;
  for (int attempt = 0; attempt < 6; ++attempt, P += std::max(2, slack)) {
    try {
      auto out = chart.solve_forms(P, targets, rankOut);
      if (poleBound) *poleBound = P;
      return out;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::SingularSystem) throw Error(ErrorCode::DualityFailure, e.what());
      if (e.code() != ErrorCode::PoleBoundTooSmall) throw;
    }
  }
  throw Error(ErrorCode::DualityFailure, "no coframe within pole bound " + std::to_string(P));
}

inline ChartSpec default_eta_spec(const CurveModel& X, const LieData& lie, std::vector<ElementaryFactor> sigma0) {
  ChartSpec s;
  s.sigma0 = std::move(sigma0);
  const int m = (X.genus() - 1) * lie.dim();
  for (int t = 0; static_cast<int>(s.eta.size()) < m; ++t)
    for (int b = 0; b < lie.dim() && static_cast<int>(s.eta.size()) < m; ++b) {
      int power = X.model() == Model::Odd ? -(2 * t + 1) : -(t + 1);
      s.eta.push_back({EtaTerm{0, b, power, 1}});
    }
  return s;
}

namespace detail {
inline std::string describe(const Certificate& c) {
  return "h0 rank " + std::to_string(c.h0_rank) + "/" + std::to_string(c.h0_unknowns) + ", complement " +
         std::to_string(c.complement_dim) + "/" + std::to_string(c.expected_dim) + ", eta " +
         std::to_string(c.eta_rank_gain) + "/" + std::to_string(c.eta_target);
}
/// Solve the coframe on a certified chart and record the kernel rank.
inline void finish_chart(BundleChart& chart, int slack) {
  int P = 0, rk = 0;
  chart.set_omega(solve_global_forms(chart, slack, &P, &rk));
  chart.mutable_certificate().pole_bound = P;
  chart.mutable_certificate().kernel_rank = rk;
  chart.mutable_certificate().kernel_unknowns = chart.basis_count(OuterKind::Form, P) * chart.dim();
}
}  // namespace detail

/// Builds the chart, certifies it and solves the coframe. Throws NotTransversal on rank failure.
inline std::shared_ptr<BundleChart> build_chart(const CurveModel& X, const LieData& lie, const ChartSpec& spec,
                                                int jetOrder, int depth = 0, int slack = 2) {
  const int m = (X.genus() - 1) * lie.dim();
  GroupElement hi = chart_sigma(lie, X.punctures(), spec, m, jetOrder + 1);
  auto chart = std::make_shared<BundleChart>(X, lie, hi, jetOrder, m, spec);
  chart->mutable_certificate() = certify(*chart, depth);
  if (!chart->certificate().transversal())
    throw Error(ErrorCode::NotTransversal, detail::describe(chart->certificate()));
  detail::finish_chart(*chart, slack);
  return chart;
}

/// Chart from an arbitrary sigma(u) at jet order jetOrder + 1 (used after gauge transformations).
inline std::shared_ptr<BundleChart> build_chart_from_sigma(const CurveModel& X, const LieData& lie,
                                                           const GroupElement& sigmaHi, int jetOrder, int depth = 0,
                                                           int slack = 2) {
  const int m = (X.genus() - 1) * lie.dim();
  auto chart = std::make_shared<BundleChart>(X, lie, sigmaHi, jetOrder, m);
  chart->mutable_certificate() = certify(*chart, depth);
  if (!chart->certificate().transversal())
    throw Error(ErrorCode::NotTransversal, detail::describe(chart->certificate()));
  detail::finish_chart(*chart, slack);
  return chart;
}

struct SearchLogEntry {
  int index;
  std::string outcome;
};

/// Random candidate sigma0: 2 to 4 unipotent elementaries with powers in [-2, 2].
inline std::vector<ElementaryFactor> random_sigma0(std::mt19937_64& rng, int n, int punctures) {
  std::uniform_int_distribution<int> nf(2, 4), pw(-2, 2), pu(0, punctures - 1), ij(0, n - 1), cc(0, 5);
  static const long num[] = {1, -1, 2, -2, 1, -1};
  static const long den[] = {1, 1, 1, 1, 2, 2};
  std::vector<ElementaryFactor> fs;
  const int k = nf(rng);
  for (int t = 0; t < k; ++t) {
    ElementaryFactor f;
    f.puncture = pu(rng);
    do {
      f.row = ij(rng);
      f.col = ij(rng);
    } while (f.row == f.col);
    if (n == 2) {
      f.row = t % 2;
      f.col = 1 - f.row;
    }
    int c = cc(rng);
    f.coeff = make_rational(num[c], den[c]);
    f.power = pw(rng);
    fs.push_back(f);
  }
  return fs;
}

/// Deterministic search: the lowest-index candidate passing the certificate wins.
inline std::shared_ptr<BundleChart> search_chart(const CurveModel& X, const LieData& lie, uint64_t seed, int attempts,
                                                 int jetOrder, int depth, int slack,
                                                 std::vector<SearchLogEntry>* log = nullptr) {
  if (attempts < 1) throw Error(ErrorCode::SearchExhausted, "no attempts allowed");
  std::mt19937_64 rng(seed);
  const int m = (X.genus() - 1) * lie.dim();
  auto attempt = [&](const ChartSpec& spec, Certificate& cert, std::string& outcome) -> std::shared_ptr<BundleChart> {
    GroupElement hi = chart_sigma(lie, X.punctures(), spec, m, jetOrder + 1);
    auto chart = std::make_shared<BundleChart>(X, lie, hi, jetOrder, m, spec);
    cert = chart->mutable_certificate() = certify(*chart, depth);
    outcome = detail::describe(cert);
    if (!cert.transversal()) return nullptr;
    try {
      detail::finish_chart(*chart, slack);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DualityFailure) throw;
      outcome = e.what();
      return nullptr;
    }
    return chart;
  };
  for (int k = 0; k < attempts; ++k) {
    auto sigma0 = random_sigma0(rng, lie.n(), X.punctures());
    Certificate cert;
    std::string outcome;
    auto chart = attempt(default_eta_spec(X, lie, sigma0), cert, outcome);
    // Only the modes can be at fault when the bundle itself passes.
    if (!chart && cert.h0_trivial() && cert.complement_ok() && !cert.eta_spans()) {
      auto greedy = greedy_eta(X, lie, sigma0, depth);
      if (!greedy.empty()) {
        chart = attempt(ChartSpec{sigma0, greedy}, cert, outcome);
        outcome = "greedy modes: " + outcome;
      }
    }
    if (log) log->push_back({k, chart ? "pass: " + outcome : outcome});
    if (chart) return chart;
  }
  throw Error(ErrorCode::SearchExhausted, std::to_string(attempts) + " candidates failed");
}

}  // namespace dynr
