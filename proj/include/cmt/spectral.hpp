#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cmt/error.hpp"
#include "cmt/format.hpp"
#include "cmt/matrix.hpp"
#include "cmt/poly.hpp"
#include "cmt/sysdsl.hpp"

namespace cmt {

inline constexpr double default_zero_tolerance = 1e-9;
/// Off-block entries of the similarity-transformed Jacobian must stay below
/// this (relative to max(1, |J|)).
inline constexpr double block_tolerance = 1e-9;
/// Eigenvector matrices worse conditioned than this are treated as defective.
inline constexpr double defect_condition_limit = 1e8;

struct LinearPart {
  Matrix matrix;
};

enum class SpectralRole { centre, stable };

inline const char* to_string(SpectralRole r) {
  return r == SpectralRole::centre ? "centre" : "stable";
}

struct Eigenvalue {
  double real = 0.0;
  double imag = 0.0;
  SpectralRole role = SpectralRole::centre;
};

struct SpectralSplit {
  std::size_t centre_dim = 0;
  std::size_t stable_dim = 0;
  std::vector<Eigenvalue> eigenvalues;
  Matrix basis;
  Matrix basis_inv;
  Matrix centre_block;
  Matrix stable_block;
  bool basis_override = false;
  double zero_tolerance = default_zero_tolerance;

  std::size_t dimension() const noexcept { return centre_dim + stable_dim; }

  Matrix block_diagonal() const {
    const std::size_t n = dimension();
    Matrix m(n, n);
    for (std::size_t i = 0; i < centre_dim; ++i)
      for (std::size_t j = 0; j < centre_dim; ++j) m(i, j) = centre_block(i, j);
    for (std::size_t i = 0; i < stable_dim; ++i)
      for (std::size_t j = 0; j < stable_dim; ++j)
        m(centre_dim + i, centre_dim + j) = stable_block(i, j);
    return m;
  }
};

/// The field in eigenbasis coordinates u = (centre..., stable...):
///   u' = blockdiag(A, B) u + nonlinear(u)
struct TransformedSystem {
  SpectralSplit split;
  PolyMap nonlinear;

  std::size_t centre_dim() const noexcept { return split.centre_dim; }
  std::size_t stable_dim() const noexcept { return split.stable_dim; }

  /// u1..uc for centre coordinates, v1..vs for stable ones.
  std::vector<std::string> coordinate_names() const {
    auto names = default_names(split.centre_dim, "u");
    for (const auto& v : default_names(split.stable_dim, "v")) names.push_back(v);
    return names;
  }

  /// Linear plus nonlinear part as one map (for integration).
  PolyMap full_field() const {
    const std::size_t n = split.dimension();
    const Matrix lin = split.block_diagonal();
    PolyMap out = nonlinear;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        out[i].add_term(Monomial::unit(n, j), lin(i, j));
    return out;
  }
};

namespace detail {

using cplx = std::complex<double>;

/// Householder reduction to upper Hessenberg form.
inline Matrix hessenberg(Matrix a) {
  const std::size_t n = a.rows();
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double alpha = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) alpha += a(i, k) * a(i, k);
    alpha = std::sqrt(alpha);
    if (alpha == 0.0) continue;
    if (a(k + 1, k) > 0) alpha = -alpha;
    std::vector<double> v(n, 0.0);
    v[k + 1] = a(k + 1, k) - alpha;
    for (std::size_t i = k + 2; i < n; ++i) v[i] = a(i, k);
    double vnorm2 = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) vnorm2 += v[i] * v[i];
    if (vnorm2 == 0.0) continue;
    // A <- H A H with H = I - 2 v v^T / (v^T v)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k + 1; i < n; ++i) s += v[i] * a(i, j);
      s = 2.0 * s / vnorm2;
      for (std::size_t i = k + 1; i < n; ++i) a(i, j) -= s * v[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) s += a(i, j) * v[j];
      s = 2.0 * s / vnorm2;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= s * v[j];
    }
    for (std::size_t i = k + 2; i < n; ++i) a(i, k) = 0.0;
  }
  return a;
}

/// Francis double-shift QR on an upper Hessenberg matrix (EISPACK hqr
/// lineage). Works on a 1-based copy to keep the index arithmetic readable.
inline std::vector<cplx> hessenberg_eigenvalues(const Matrix& h) {
  const int n = static_cast<int>(h.rows());
  std::vector<std::vector<double>> a(n + 1, std::vector<double>(n + 1, 0.0));
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) a[i][j] = h(i - 1, j - 1);
  std::vector<double> wr(n + 1, 0.0), wi(n + 1, 0.0);

  auto sign = [](double x, double y) { return y >= 0.0 ? std::abs(x) : -std::abs(x); };

  double anorm = 0.0;
  for (int i = 1; i <= n; ++i)
    for (int j = std::max(i - 1, 1); j <= n; ++j) anorm += std::abs(a[i][j]);

  int nn = n;
  double t = 0.0;
  double p = 0, q = 0, r = 0, s = 0, w = 0, x = 0, y = 0, z = 0;
  while (nn >= 1) {
    int its = 0;
    int l = 1;
    do {
      for (l = nn; l >= 2; --l) {
        s = std::abs(a[l - 1][l - 1]) + std::abs(a[l][l]);
        if (s == 0.0) s = anorm;
        if (std::abs(a[l][l - 1]) + s == s) {
          a[l][l - 1] = 0.0;
          break;
        }
      }
      x = a[nn][nn];
      if (l == nn) {
        wr[nn] = x + t;
        wi[nn--] = 0.0;
      } else {
        y = a[nn - 1][nn - 1];
        w = a[nn][nn - 1] * a[nn - 1][nn];
        if (l == nn - 1) {
          p = 0.5 * (y - x);
          q = p * p + w;
          z = std::sqrt(std::abs(q));
          x += t;
          if (q >= 0.0) {
            z = p + sign(z, p);
            wr[nn - 1] = wr[nn] = x + z;
            if (z != 0.0) wr[nn] = x - w / z;
            wi[nn - 1] = wi[nn] = 0.0;
          } else {
            wr[nn - 1] = wr[nn] = x + p;
            wi[nn - 1] = -(wi[nn] = z);
          }
          nn -= 2;
        } else {
          if (its == 60)
            throw Error("spectral", ErrorKind::unsupported_spectrum,
                        "QR iteration failed to converge");
          if (its == 10 || its == 20 || its == 40) {
            // exceptional shift
            t += x;
            for (int i = 1; i <= nn; ++i) a[i][i] -= x;
            s = std::abs(a[nn][nn - 1]) + std::abs(a[nn - 1][nn - 2]);
            y = x = 0.75 * s;
            w = -0.4375 * s * s;
          }
          ++its;
          int m = nn - 2;
          for (; m >= l; --m) {
            z = a[m][m];
            r = x - z;
            s = y - z;
            p = (r * s - w) / a[m + 1][m] + a[m][m + 1];
            q = a[m + 1][m + 1] - z - r - s;
            r = a[m + 2][m + 1];
            s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            const double u = std::abs(a[m][m - 1]) * (std::abs(q) + std::abs(r));
            const double v =
                std::abs(p) * (std::abs(a[m - 1][m - 1]) + std::abs(z) + std::abs(a[m + 1][m + 1]));
            if (u + v == v) break;
          }
          for (int i = m + 2; i <= nn; ++i) {
            a[i][i - 2] = 0.0;
            if (i != m + 2) a[i][i - 3] = 0.0;
          }
          for (int k = m; k <= nn - 1; ++k) {
            if (k != m) {
              p = a[k][k - 1];
              q = a[k + 1][k - 1];
              r = 0.0;
              if (k != nn - 1) r = a[k + 2][k - 1];
              if ((x = std::abs(p) + std::abs(q) + std::abs(r)) != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            if ((s = sign(std::sqrt(p * p + q * q + r * r), p)) != 0.0) {
              if (k == m) {
                if (l != m) a[k][k - 1] = -a[k][k - 1];
              } else {
                a[k][k - 1] = -s * x;
              }
              p += s;
              x = p / s;
              y = q / s;
              z = r / s;
              q /= p;
              r /= p;
              for (int j = k; j <= nn; ++j) {
                p = a[k][j] + q * a[k + 1][j];
                if (k != nn - 1) {
                  p += r * a[k + 2][j];
                  a[k + 2][j] -= p * z;
                }
                a[k + 1][j] -= p * y;
                a[k][j] -= p * x;
              }
              const int mmin = nn < k + 3 ? nn : k + 3;
              for (int i = l; i <= mmin; ++i) {
                p = x * a[i][k] + y * a[i][k + 1];
                if (k != nn - 1) {
                  p += z * a[i][k + 2];
                  a[i][k + 2] -= p * r;
                }
                a[i][k + 1] -= p * q;
                a[i][k] -= p;
              }
            }
          }
        }
      }
    } while (l < nn - 1);
  }

  std::vector<cplx> out;
  out.reserve(n);
  for (int i = 1; i <= n; ++i) out.emplace_back(wr[i], wi[i]);
  return out;
}

/// Null space of a square complex matrix by Gauss-Jordan elimination with
/// complete pivoting; pivots at or below `tol` count as zero.
inline std::vector<std::vector<cplx>> null_space(std::vector<std::vector<cplx>> m, double tol) {
  const std::size_t n = m.size();
  std::vector<std::size_t> col_of(n);
  for (std::size_t j = 0; j < n; ++j) col_of[j] = j;
  std::size_t rank = 0;
  for (; rank < n; ++rank) {
    double best = -1.0;
    std::size_t pr = rank, pc = rank;
    for (std::size_t i = rank; i < n; ++i)
      for (std::size_t j = rank; j < n; ++j)
        if (std::abs(m[i][j]) > best) {
          best = std::abs(m[i][j]);
          pr = i;
          pc = j;
        }
    if (best <= tol) break;
    std::swap(m[rank], m[pr]);
    if (pc != rank) {
      for (std::size_t i = 0; i < n; ++i) std::swap(m[i][rank], m[i][pc]);
      std::swap(col_of[rank], col_of[pc]);
    }
    const cplx d = m[rank][rank];
    for (std::size_t j = 0; j < n; ++j) m[rank][j] /= d;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == rank) continue;
      const cplx f = m[i][rank];
      if (f == cplx(0.0)) continue;
      for (std::size_t j = 0; j < n; ++j) m[i][j] -= f * m[rank][j];
    }
  }
  std::vector<std::vector<cplx>> basis;
  for (std::size_t free = rank; free < n; ++free) {
    std::vector<cplx> v(n, cplx(0.0));
    v[col_of[free]] = 1.0;
    for (std::size_t i = 0; i < rank; ++i) v[col_of[i]] = -m[i][free];
    basis.push_back(std::move(v));
  }
  return basis;
}

struct Cluster {
  cplx value;
  std::size_t multiplicity = 0;
  double spread = 0.0;
};

}  // namespace detail

/// Eigenvalues of a small dense real matrix (Hessenberg reduction followed
/// by shifted QR iteration).
inline std::vector<std::complex<double>> eigenvalues(const Matrix& m) {
  if (!m.square())
    throw Error("spectral", ErrorKind::dimension_mismatch, "eigenvalues of a non-square matrix");
  if (m.rows() == 0) return {};
  return detail::hessenberg_eigenvalues(detail::hessenberg(m));
}

inline LinearPart linear_part(const SystemSpec& spec) {
  const std::size_t n = spec.dimension();
  const Monomial origin(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double c = spec.field[i].coefficient(origin);
    if (std::abs(c) > equilibrium_tolerance)
      throw Error("spectral", ErrorKind::not_equilibrium,
                  "component d" + spec.variables[i] + "/dt has constant term " +
                      format_shortest(c) + "; shift equilibrium first");
  }
  LinearPart lin{Matrix(n, n)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      lin.matrix(i, j) = spec.field[i].coefficient(Monomial::unit(n, j));
  return lin;
}

namespace detail {

inline void normalize_real(std::vector<double>& v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  for (double x : v) {
    if (std::abs(x) > 1e-12) {
      if (x < 0)
        for (double& y : v) y = -y;
      break;
    }
  }
}

/// Rotates the phase so the first largest-modulus entry is real positive,
/// then scales so the real part has unit norm.
inline void normalize_complex(std::vector<cplx>& w, std::vector<double>& re,
                              std::vector<double>& im) {
  double big = 0.0;
  for (const auto& z : w) big = std::max(big, std::abs(z));
  std::size_t k = 0;
  while (std::abs(w[k]) < big * (1.0 - 1e-12)) ++k;
  const cplx phase = std::conj(w[k]) / std::abs(w[k]);
  for (auto& z : w) z *= phase;
  w[k] = cplx(w[k].real(), 0.0);
  double norm = 0.0;
  for (const auto& z : w) norm += z.real() * z.real();
  norm = std::sqrt(norm);
  re.clear();
  im.clear();
  for (const auto& z : w) {
    re.push_back(z.real() / norm);
    im.push_back(z.imag() / norm);
  }
}

inline std::vector<Cluster> cluster_eigenvalues(std::vector<cplx> ev, double tol) {
  // Near-real pairs are treated as real.
  for (auto& z : ev)
    if (std::abs(z.imag()) <= tol) z = cplx(z.real(), 0.0);
  std::vector<Cluster> clusters;
  std::vector<bool> used(ev.size(), false);
  for (std::size_t i = 0; i < ev.size(); ++i) {
    if (used[i]) continue;
    std::vector<cplx> members{ev[i]};
    used[i] = true;
    for (std::size_t j = i + 1; j < ev.size(); ++j)
      if (!used[j] && std::abs(ev[j] - ev[i]) <= tol) {
        members.push_back(ev[j]);
        used[j] = true;
      }
    cplx mean(0.0);
    for (const auto& z : members) mean += z;
    mean /= static_cast<double>(members.size());
    double spread = 0.0;
    for (const auto& z : members) spread = std::max(spread, std::abs(z - mean));
    clusters.push_back({mean, members.size(), spread});
  }
  return clusters;
}

inline std::string describe(const cplx& z) {
  std::string s = format_shortest(z.real());
  if (z.imag() != 0.0)
    s += (z.imag() < 0 ? " - " : " + ") + format_shortest(std::abs(z.imag())) + "i";
  return s;
}

inline void check_block_diagonal(const Matrix& similar, std::size_t c, double scale) {
  const std::size_t n = similar.rows();
  double off = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if ((i < c) != (j < c)) off = std::max(off, std::abs(similar(i, j)));
  if (off > block_tolerance * scale)
    throw Error("spectral", ErrorKind::inconsistent_split,
                "similarity transform is not block diagonal (off-block entry " +
                    format_shortest(off) + ")");
}

}  // namespace detail

/// Partitions the spectrum of the Jacobian into centre (|Re| <= zero_tol) and
/// stable (Re < -zero_tol) parts and builds the eigenbasis. Complex pairs are
/// realified into [[a, b], [-b, a]] blocks, b > 0. A `basis` override is used
/// verbatim with its first c columns taken as the centre directions.
inline SpectralSplit eigen_split(const LinearPart& lin, double zero_tol = default_zero_tolerance,
                                 const std::optional<Matrix>& basis = std::nullopt) {
  using detail::cplx;
  const Matrix& jac = lin.matrix;
  if (!jac.square())
    throw Error("spectral", ErrorKind::dimension_mismatch, "Jacobian is not square");
  const std::size_t n = jac.rows();
  const double scale = std::max(1.0, jac.norm_inf());

  const auto raw = eigenvalues(jac);
  for (const auto& z : raw)
    if (z.real() > zero_tol)
      throw Error("spectral", ErrorKind::unsupported_spectrum,
                  "eigenvalue " + detail::describe(z) +
                      " has positive real part; only centre and stable spectra are supported");

  auto clusters = detail::cluster_eigenvalues(raw, 1e-6 * scale);
  auto role_of = [&](const cplx& z) {
    return std::abs(z.real()) <= zero_tol ? SpectralRole::centre : SpectralRole::stable;
  };
  std::sort(clusters.begin(), clusters.end(), [&](const auto& a, const auto& b) {
    const auto ra = role_of(a.value), rb = role_of(b.value);
    if (ra != rb) return ra == SpectralRole::centre;
    if (a.value.real() != b.value.real()) return a.value.real() > b.value.real();
    return a.value.imag() > b.value.imag();
  });

  SpectralSplit split;
  split.zero_tolerance = zero_tol;
  for (const auto& cl : clusters) {
    const auto role = role_of(cl.value);
    const double re = role == SpectralRole::centre ? 0.0 : cl.value.real();
    for (std::size_t k = 0; k < cl.multiplicity; ++k)
      split.eigenvalues.push_back({re, cl.value.imag(), role});
    (role == SpectralRole::centre ? split.centre_dim : split.stable_dim) += cl.multiplicity;
  }
  const std::size_t c = split.centre_dim;

  if (basis) {
    if (basis->rows() != n || basis->cols() != n)
      throw Error("spectral", ErrorKind::dimension_mismatch,
                  "basis override must be " + std::to_string(n) + "x" + std::to_string(n));
    if (condition_number(*basis) > defect_condition_limit)
      throw Error("spectral", ErrorKind::defective, "basis override is singular or ill-conditioned");
    split.basis = *basis;
    split.basis_inv = inverse(*basis);
    split.basis_override = true;
    Matrix similar = split.basis_inv * jac * split.basis;
    detail::check_block_diagonal(similar, c, scale);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (std::abs(similar(i, j)) <= 1e-12 * scale) similar(i, j) = 0.0;
    split.centre_block = similar.block(0, 0, c, c);
    split.stable_block = similar.block(c, c, n - c, n - c);
    for (const auto& z : eigenvalues(split.centre_block))
      if (std::abs(z.real()) > zero_tol)
        throw Error("spectral", ErrorKind::inconsistent_split,
                    "basis override: leading " + std::to_string(c) +
                        " columns do not span the centre subspace");
    for (const auto& z : eigenvalues(split.stable_block))
      if (z.real() >= -zero_tol)
        throw Error("spectral", ErrorKind::inconsistent_split,
                    "basis override: trailing columns do not span the stable subspace");
    return split;
  }

  Matrix p(n, n);
  Matrix blocks(n, n);
  std::size_t col = 0;
  for (const auto& cl : clusters) {
    const auto role = role_of(cl.value);
    const bool is_complex = cl.value.imag() != 0.0;
    if (is_complex && cl.value.imag() < 0) continue;  // conjugate handled with its partner
    const double tol = std::max(1e-8 * scale, 10.0 * cl.spread);
    std::vector<std::vector<cplx>> shifted(n, std::vector<cplx>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        shifted[i][j] = jac(i, j) - (i == j ? (is_complex ? cl.value : cplx(cl.value.real())) : 0.0);
    auto vectors = detail::null_space(shifted, tol);
    if (vectors.size() < cl.multiplicity)
      throw Error("spectral", ErrorKind::defective,
                  "eigenvalue " + detail::describe(cl.value) + " has algebraic multiplicity " +
                      std::to_string(cl.multiplicity) + " but only " +
                      std::to_string(vectors.size()) + " eigenvectors (Jordan block)");
    vectors.resize(cl.multiplicity);
    const double alpha = role == SpectralRole::centre ? 0.0 : cl.value.real();
    if (!is_complex) {
      for (auto& w : vectors) {
        std::vector<double> v;
        for (const auto& z : w) v.push_back(z.real());
        detail::normalize_real(v);
        for (std::size_t i = 0; i < n; ++i) p(i, col) = v[i];
        blocks(col, col) = alpha;
        ++col;
      }
    } else {
      const double beta = cl.value.imag();
      for (auto& w : vectors) {
        std::vector<double> re, im;
        detail::normalize_complex(w, re, im);
        for (std::size_t i = 0; i < n; ++i) {
          p(i, col) = re[i];
          p(i, col + 1) = im[i];
        }
        blocks(col, col) = alpha;
        blocks(col, col + 1) = beta;
        blocks(col + 1, col) = -beta;
        blocks(col + 1, col + 1) = alpha;
        col += 2;
      }
    }
  }

  if (condition_number(p) > defect_condition_limit)
    throw Error("spectral", ErrorKind::defective,
                "eigenvector matrix is ill-conditioned (nearly defective Jacobian)");
  split.basis = p;
  split.basis_inv = inverse(p);
  const Matrix similar = split.basis_inv * jac * split.basis;
  detail::check_block_diagonal(similar, c, scale);
  const Matrix mismatch = similar - blocks;
  if (mismatch.max_abs() > std::max(block_tolerance, zero_tol) * scale)
    throw Error("spectral", ErrorKind::inconsistent_split,
                "eigenbasis does not reproduce the realified spectrum (mismatch " +
                    format_shortest(mismatch.max_abs()) + ")");
  split.centre_block = blocks.block(0, 0, c, c);
  split.stable_block = blocks.block(c, c, n - c, n - c);
  return split;
}

/// Rewrites the field in eigenbasis coordinates: u' = P^-1 F(P u). The
/// constant and linear parts must agree with the split; the rest is returned
/// as the nonlinear remainder.
inline TransformedSystem to_eigenbasis(const SystemSpec& spec, const SpectralSplit& split) {
  const std::size_t n = spec.dimension();
  if (split.dimension() != n)
    throw Error("spectral", ErrorKind::dimension_mismatch, "split does not match the system");
  std::vector<Polynomial> pulled;
  for (const auto& comp : spec.field) pulled.push_back(poly_compose_linear(comp, split.basis));

  PolyMap transformed(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const double w = split.basis_inv(i, k);
      if (w != 0.0) transformed[i] += pulled[k] * w;
    }

  LinearPart lin0 = linear_part(spec);
  const double scale = std::max(1.0, lin0.matrix.norm_inf());
  const Matrix expected = split.block_diagonal();
  const Monomial origin(n);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    worst = std::max(worst, std::abs(transformed[i].coefficient(origin)));
    for (std::size_t j = 0; j < n; ++j)
      worst = std::max(worst, std::abs(transformed[i].coefficient(Monomial::unit(n, j)) -
                                       expected(i, j)));
  }
  // A centre real part is snapped to zero, so allow the zero band too.
  if (worst > std::max(block_tolerance, split.zero_tolerance) * scale)
    throw Error("spectral", ErrorKind::inconsistent_split,
                "low-degree terms left after transformation (max " + format_shortest(worst) + ")");

  TransformedSystem sys{split, PolyMap(n, n)};
  for (std::size_t i = 0; i < n; ++i) sys.nonlinear[i] = drop_below(transformed[i], 2);
  return sys;
}

}  // namespace cmt
