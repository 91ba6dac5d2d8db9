#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "cmt/error.hpp"
#include "cmt/matrix.hpp"
#include "cmt/poly.hpp"
#include "cmt/spectral.hpp"

namespace cmt {

inline constexpr int min_manifold_order = 2;
inline constexpr int max_manifold_order = 4;
inline constexpr double resonance_condition_limit = 1e10;
inline constexpr double manifold_residual_tolerance = 1e-8;
/// Degree-2 coefficients below this are treated as exactly zero before the
/// solver moves on to higher degrees.
inline constexpr double leading_zero_tolerance = 1e-10;

/// y = h(x): one polynomial per stable coordinate, in the centre coordinates,
/// with terms of total degree 2..order only.
struct CentreManifoldMap {
  int order = 2;
  PolyMap h;
};

struct ReducedSystem {
  PolyMap field;  // A x + f(x, h(x)), truncated at `order`
  Matrix centre_block;
  int order = 2;

  std::size_t dimension() const noexcept { return field.size(); }
};

enum class ParityPrediction { even, unknown };

inline const char* to_string(ParityPrediction p) {
  return p == ParityPrediction::even ? "even" : "unknown";
}

struct ParityReport {
  Parity f_parity = Parity::even;
  Parity g_parity = Parity::even;
  ParityPrediction predicted_h_parity = ParityPrediction::unknown;
  double observed_odd_mass = 0.0;
  /// Lowest degree carrying a coefficient above 1e-6 in any component of h;
  /// -1 when h vanishes to that level.
  int leading_degree = -1;
};

/// All monomials of total degree `d` in `nvars` variables, graded-lex order.
inline std::vector<Monomial> monomials_of_degree(std::size_t nvars, int d) {
  std::vector<Monomial> out;
  if (nvars == 0) {
    if (d == 0) out.emplace_back(0);
    return out;
  }
  std::vector<int> e(nvars, 0);
  auto rec = [&](auto&& self, std::size_t var, int remaining) -> void {
    if (var + 1 == nvars) {
      e[var] = remaining;
      out.emplace_back(e);
      return;
    }
    for (int k = remaining; k >= 0; --k) {
      e[var] = k;
      self(self, var + 1, remaining - k);
    }
  };
  rec(rec, 0, d);
  return out;
}

namespace detail {

/// Images for substituting (u, v) -> (x, h(x)) in the eigenbasis field.
inline std::vector<Polynomial> manifold_images(std::size_t c, const PolyMap& h) {
  std::vector<Polynomial> images;
  for (std::size_t i = 0; i < c; ++i) images.push_back(Polynomial::variable(c, i));
  for (const auto& hj : h) images.push_back(hj);
  return images;
}

inline Polynomial linear_combination(const Matrix& a, std::size_t row, std::size_t nvars) {
  Polynomial p(nvars);
  for (std::size_t k = 0; k < a.cols(); ++k) p.add_term(Monomial::unit(nvars, k), a(row, k));
  return p;
}

inline void check_manifold_shape(const TransformedSystem& sys, const CentreManifoldMap& h) {
  if (h.h.size() != sys.stable_dim() || (h.h.size() > 0 && h.h.nvars() != sys.centre_dim()))
    throw Error("manifold", ErrorKind::dimension_mismatch,
                "manifold map does not match the system's centre/stable dimensions");
}

}  // namespace detail

/// N(x) = Dh(x)·(A x + f(x, h(x))) - (B h(x) + g(x, h(x))), truncated at
/// degree `order`. One component per stable coordinate.
inline PolyMap invariance_residual(const TransformedSystem& sys, const CentreManifoldMap& h,
                                   int order) {
  detail::check_manifold_shape(sys, h);
  const std::size_t c = sys.centre_dim();
  const std::size_t s = sys.stable_dim();
  const auto images = detail::manifold_images(c, h.h);
  const Matrix& a = sys.split.centre_block;
  const Matrix& b = sys.split.stable_block;

  std::vector<Polynomial> centre_velocity;
  for (std::size_t i = 0; i < c; ++i)
    centre_velocity.push_back(detail::linear_combination(a, i, c) +
                              compose(sys.nonlinear[i], images, order));

  PolyMap residual(s, c);
  for (std::size_t j = 0; j < s; ++j) {
    Polynomial n(c);
    for (std::size_t i = 0; i < c; ++i)
      n += multiply(poly_partial(h.h[j], i), centre_velocity[i], order);
    for (std::size_t l = 0; l < s; ++l)
      if (b(j, l) != 0.0) n -= h.h[l] * b(j, l);
    n -= compose(sys.nonlinear[c + j], images, order);
    residual[j] = poly_truncate(n, order);
  }
  return residual;
}

/// Solves the invariance equation degree by degree. At degree d the unknown
/// coefficients enter only through Dh_d·(A x) - B h_d, because f and g start
/// at degree 2; everything else is fixed by the lower degrees already solved.
inline CentreManifoldMap solve_centre_manifold(const TransformedSystem& sys, int order) {
  if (order < min_manifold_order || order > max_manifold_order)
    throw Error("manifold", ErrorKind::invalid_argument,
                "manifold order must be between " + std::to_string(min_manifold_order) +
                    " and " + std::to_string(max_manifold_order) + ", got " +
                    std::to_string(order));
  const std::size_t c = sys.centre_dim();
  const std::size_t s = sys.stable_dim();
  if (c == 0)
    throw Error("manifold", ErrorKind::unsupported_spectrum,
                "no centre eigenvalues; the equilibrium is hyperbolic");

  CentreManifoldMap result{order, PolyMap(s, c)};
  if (s == 0) return result;
  const Matrix& a = sys.split.centre_block;
  const Matrix& b = sys.split.stable_block;
  std::vector<Polynomial> drift;  // A x, componentwise
  for (std::size_t i = 0; i < c; ++i) drift.push_back(detail::linear_combination(a, i, c));

  for (int d = min_manifold_order; d <= order; ++d) {
    const auto monos = monomials_of_degree(c, d);
    const std::size_t m = monos.size();
    const std::size_t unknowns = s * m;

    // Column (j, k) is the image of the basis element h_j = monos[k].
    Matrix op(unknowns, unknowns);
    for (std::size_t j = 0; j < s; ++j)
      for (std::size_t k = 0; k < m; ++k) {
        Polynomial e(c);
        e.add_term(monos[k], 1.0);
        Polynomial lie(c);
        for (std::size_t i = 0; i < c; ++i) lie += poly_partial(e, i) * drift[i];
        const std::size_t col = j * m + k;
        for (std::size_t l = 0; l < s; ++l) {
          Polynomial row_poly = (l == j ? lie : Polynomial(c)) - e * b(l, j);
          for (std::size_t r = 0; r < m; ++r) op(l * m + r, col) = row_poly.coefficient(monos[r]);
        }
      }

    const double cond = condition_number(op);
    if (!(cond <= resonance_condition_limit)) throw ResonanceError(d, cond);

    const PolyMap known = invariance_residual(sys, result, d);
    std::vector<double> rhs(unknowns);
    for (std::size_t l = 0; l < s; ++l)
      for (std::size_t r = 0; r < m; ++r) rhs[l * m + r] = -known[l].coefficient(monos[r]);
    std::vector<double> coef = solve(op, rhs);

    if (d == min_manifold_order &&
        std::all_of(coef.begin(), coef.end(),
                    [](double v) { return std::abs(v) < leading_zero_tolerance; }))
      std::fill(coef.begin(), coef.end(), 0.0);

    for (std::size_t j = 0; j < s; ++j)
      for (std::size_t k = 0; k < m; ++k) result.h[j].add_term(monos[k], coef[j * m + k]);
  }
  return result;
}

/// x' = A x + f(x, h(x)) truncated at the manifold order.
inline ReducedSystem reduce(const TransformedSystem& sys, const CentreManifoldMap& h) {
  detail::check_manifold_shape(sys, h);
  const std::size_t c = sys.centre_dim();
  const auto images = detail::manifold_images(c, h.h);
  ReducedSystem red{PolyMap(c, c), sys.split.centre_block, h.order};
  for (std::size_t i = 0; i < c; ++i)
    red.field[i] = poly_truncate(detail::linear_combination(sys.split.centre_block, i, c) +
                                     compose(sys.nonlinear[i], images, h.order),
                                 h.order);
  return red;
}

inline ParityReport parity_check(const TransformedSystem& sys, const CentreManifoldMap& h) {
  const std::size_t c = sys.centre_dim();
  std::vector<Polynomial> f, g;
  for (std::size_t i = 0; i < sys.nonlinear.size(); ++i)
    (i < c ? f : g).push_back(sys.nonlinear[i]);
  ParityReport rep;
  rep.f_parity = f.empty() ? Parity::even : parity(PolyMap(f));
  rep.g_parity = g.empty() ? Parity::even : parity(PolyMap(g));
  rep.predicted_h_parity = rep.f_parity == Parity::even && rep.g_parity == Parity::even
                               ? ParityPrediction::even
                               : ParityPrediction::unknown;
  int lead = -1;
  for (const auto& hj : h.h)
    for (const auto& [mono, coef] : hj.terms()) {
      if (mono.degree() % 2 == 1)
        rep.observed_odd_mass = std::max(rep.observed_odd_mass, std::abs(coef));
      if (std::abs(coef) > 1e-6 && (lead < 0 || mono.degree() < lead)) lead = mono.degree();
    }
  rep.leading_degree = lead;
  return rep;
}

}  // namespace cmt
