#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "cmt/cmt.hpp"

namespace cmt::testing {

/// Parses one expression over the given variables, e.g. poly("x^2 + 2*x*y", {"x", "y"}).
inline Polynomial poly(const std::string& expr, const std::vector<std::string>& vars) {
  std::string text = "vars";
  for (const auto& v : vars) text += " " + v;
  text += "\nd" + vars[0] + "/dt = " + expr + "\n";
  for (std::size_t i = 1; i < vars.size(); ++i) text += "d" + vars[i] + "/dt = 0\n";
  return parse_system(text).field[0];
}

inline Polynomial poly_xy(const std::string& expr) { return poly(expr, {"x", "y"}); }

/// Largest coefficientwise difference.
inline double max_diff(const Polynomial& a, const Polynomial& b) {
  return (a - b).max_abs_coefficient();
}

inline double max_diff(const PolyMap& a, const PolyMap& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, max_diff(a[i], b[i]));
  return worst;
}

inline Polynomial random_poly(std::mt19937_64& rng, std::size_t nvars, int max_degree,
                              double density = 0.6) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::bernoulli_distribution keep(density);
  Polynomial p(nvars);
  for (int d = 0; d <= max_degree; ++d)
    for (const auto& m : monomials_of_degree(nvars, d))
      if (keep(rng)) p.add_term(m, coef(rng));
  return p;
}

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                            double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = u(rng);
  return m;
}

/// The planar reduced system with every quadratic coefficient equal to one:
///   x' =  l1*y + x^2 + y^2 + x*y
///   y' = -l1*x + x^2 + y^2 + x*y
inline ReducedSystem all_ones_reduced(double l1) {
  const std::string l = format_shortest(l1);
  PolyMap f(std::vector<Polynomial>{poly_xy(l + "*y + x^2 + y^2 + x*y"),
                                    poly_xy("-" + l + "*x + x^2 + y^2 + x*y")});
  return ReducedSystem{f, Matrix{{0.0, l1}, {-l1, 0.0}}, 2};
}

/// Builds a transformed system directly from blocks and a nonlinear remainder.
inline TransformedSystem make_transformed(const Matrix& a, const Matrix& b, PolyMap nonlinear) {
  SpectralSplit split;
  split.centre_dim = a.rows();
  split.stable_dim = b.rows();
  split.centre_block = a;
  split.stable_block = b;
  split.basis = Matrix::identity(a.rows() + b.rows());
  split.basis_inv = split.basis;
  return TransformedSystem{split, std::move(nonlinear)};
}

inline double coef(const Polynomial& p, std::initializer_list<int> e) {
  return p.coefficient(Monomial(e));
}

}  // namespace cmt::testing
