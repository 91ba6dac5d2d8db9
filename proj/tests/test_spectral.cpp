#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <random>

#include "support.hpp"

using namespace cmt;
using cmt::testing::max_diff;

namespace {

ErrorKind split_error(const Matrix& j) {
  try {
    eigen_split(LinearPart{j});
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::invalid_argument;
}

std::vector<std::complex<double>> sorted(std::vector<std::complex<double>> v) {
  std::sort(v.begin(), v.end(), [](auto a, auto b) {
    if (std::abs(a.real() - b.real()) > 1e-7) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return v;
}

std::vector<std::complex<double>> eigen_oracle(const Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(e, false);
  std::vector<std::complex<double>> out;
  for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) out.push_back(solver.eigenvalues()(k));
  return out;
}

double offblock(const SpectralSplit& split, const Matrix& j) {
  const Matrix sim = split.basis_inv * j * split.basis;
  double worst = 0.0;
  for (std::size_t r = 0; r < sim.rows(); ++r)
    for (std::size_t c = 0; c < sim.cols(); ++c)
      if ((r < split.centre_dim) != (c < split.centre_dim)) worst = std::max(worst, std::abs(sim(r, c)));
  return worst;
}

}  // namespace

TEST(LinearPart, Protein) {
  EXPECT_EQ(linear_part(parse_system(protein_system)).matrix, (Matrix{{-2, -1}, {0, 0}}));
}

TEST(LinearPart, GenericThreeDimensional) {
  EXPECT_EQ(linear_part(parse_system(generic3d_system)).matrix,
            (Matrix{{0, 1, 0}, {-1, 0, 0}, {0, 0, -1}}));
}

TEST(LinearPart, PureNonlinear) {
  EXPECT_EQ(linear_part(parse_system("vars x\ndx/dt = x^2")).matrix, (Matrix{{0}}));
}

TEST(LinearPart, ConstantTermsRequireShift) {
  try {
    linear_part(parse_system("vars x\ndx/dt = x^2 - 1"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("shift equilibrium first"), std::string::npos);
  }
}

TEST(EigenSplit, ProteinJacobian) {
  const auto split = eigen_split(LinearPart{Matrix{{-2, -1}, {0, 0}}});
  ASSERT_EQ(split.centre_dim, 1u);
  ASSERT_EQ(split.stable_dim, 1u);
  EXPECT_EQ(split.eigenvalues[0].real, 0.0);
  EXPECT_NEAR(split.eigenvalues[1].real, -2.0, 1e-12);
  // centre eigenvector proportional to (b, a) = (1, -2), unit norm, first entry positive
  EXPECT_NEAR(split.basis(0, 0), 1 / std::sqrt(5.0), 1e-12);
  EXPECT_NEAR(split.basis(1, 0), -2 / std::sqrt(5.0), 1e-12);
  EXPECT_NEAR(split.basis(0, 1), 1.0, 1e-12);
  EXPECT_NEAR(split.basis(1, 1), 0.0, 1e-12);
  EXPECT_NEAR(split.stable_block(0, 0), -2.0, 1e-12);
}

TEST(EigenSplit, GenericThreeDimensionalIsAlreadyInBlockForm) {
  const auto split = eigen_split(LinearPart{Matrix{{0, 1, 0}, {-1, 0, 0}, {0, 0, -1}}});
  ASSERT_EQ(split.centre_dim, 2u);
  EXPECT_LE((split.basis - Matrix::identity(3)).max_abs(), 1e-12);
  EXPECT_EQ(split.centre_block, (Matrix{{0, 1}, {-1, 0}}));
  EXPECT_NEAR(split.stable_block(0, 0), -1.0, 1e-12);
}

TEST(EigenSplit, RotationBlockSignFollowsMatrix) {
  // x' = -2y, y' = 2x: the realified block keeps +beta in the first row.
  const auto split = eigen_split(LinearPart{Matrix{{0, -2}, {2, 0}}});
  EXPECT_NEAR(split.centre_block(0, 1), 2.0, 1e-12);
  EXPECT_NEAR(split.centre_block(1, 0), -2.0, 1e-12);
  EXPECT_EQ(split.centre_block(0, 0), 0.0);
  EXPECT_EQ(split.centre_block(1, 1), 0.0);
  EXPECT_LE(offblock(split, Matrix{{0, -2}, {2, 0}}), 1e-12);
  EXPECT_LE((split.basis_inv * Matrix{{0, -2}, {2, 0}} * split.basis - split.centre_block).max_abs(), 1e-12);
}

TEST(EigenSplit, PositiveEigenvalueIsUnsupported) {
  EXPECT_EQ(split_error(Matrix{{1}}), ErrorKind::unsupported_spectrum);
  EXPECT_EQ(split_error(Matrix{{0, 1}, {4, 0}}), ErrorKind::unsupported_spectrum);
}

TEST(EigenSplit, JordanBlockIsDefective) {
  EXPECT_EQ(split_error(Matrix{{0, 1}, {0, 0}}), ErrorKind::defective);
  EXPECT_EQ(split_error(Matrix{{-1, 1}, {0, -1}}), ErrorKind::defective);
}

TEST(EigenSplit, RepeatedDiagonalizableEigenvalueIsAccepted) {
  const auto split = eigen_split(LinearPart{Matrix{{0, 0, 0}, {0, 0, 0}, {0, 0, -3}}});
  EXPECT_EQ(split.centre_dim, 2u);
  EXPECT_EQ(split.stable_dim, 1u);
}

TEST(EigenSplit, ComplexStablePairIsRealified) {
  const Matrix j{{0, 0, 0}, {0, -1, 2}, {0, -2, -1}};
  const auto split = eigen_split(LinearPart{j});
  ASSERT_EQ(split.stable_dim, 2u);
  EXPECT_NEAR(split.stable_block(0, 0), -1.0, 1e-12);
  EXPECT_NEAR(split.stable_block(1, 1), -1.0, 1e-12);
  EXPECT_NEAR(split.stable_block(0, 1), 2.0, 1e-12);
  EXPECT_NEAR(split.stable_block(1, 0), -2.0, 1e-12);
}

TEST(EigenSplit, ZeroToleranceBand) {
  const Matrix j{{-1e-10, 0}, {0, -1}};
  EXPECT_EQ(eigen_split(LinearPart{j}).centre_dim, 1u);
  EXPECT_EQ(eigen_split(LinearPart{j}, 1e-12).centre_dim, 0u);
}

TEST(EigenSplit, BasisOverrideIsUsedVerbatim) {
  const Matrix p{{1, 1}, {-2, 0}};
  const auto split = eigen_split(LinearPart{Matrix{{-2, -1}, {0, 0}}}, default_zero_tolerance, p);
  EXPECT_TRUE(split.basis_override);
  EXPECT_EQ(split.basis, p);
  EXPECT_EQ(split.centre_block(0, 0), 0.0);
  EXPECT_NEAR(split.stable_block(0, 0), -2.0, 1e-12);
}

TEST(EigenSplit, BadBasisOverrideIsRejected) {
  const Matrix j{{-2, -1}, {0, 0}};
  // stable direction first: the centre block would be -2
  EXPECT_THROW(eigen_split(LinearPart{j}, default_zero_tolerance, Matrix{{1, 1}, {0, -2}}), Error);
  // not block-diagonalising
  EXPECT_THROW(eigen_split(LinearPart{j}, default_zero_tolerance, Matrix{{1, 0}, {0, 1}}), Error);
  // singular
  EXPECT_THROW(eigen_split(LinearPart{j}, default_zero_tolerance, Matrix{{1, 2}, {2, 4}}), Error);
}

TEST(ToEigenbasis, ProteinPaperBasis) {
  auto spec = parse_system(protein_system);
  const auto split = eigen_split(linear_part(spec), default_zero_tolerance, spec.basis);
  const auto sys = to_eigenbasis(spec, split);
  // a=-2, b=1, c=1, Xe=1; x = u + v, z = -2u.
  //   u' = (1/a)[c(bu+v)^2 + c(bu+v)au] = -0.5[(u+v)^2 - 2u(u+v)] = 0.5u^2 - 0.5v^2
  const auto expected_u = cmt::testing::poly("0.5*u^2 - 0.5*v^2", {"u", "v"});
  //   v' - aXe v = a(bu+v)^2 - b(bu+v)au - (b/a)[c(bu+v)^2 + c(bu+v)au]
  const auto s = cmt::testing::poly("u + v", {"u", "v"});
  const auto u = cmt::testing::poly("u", {"u", "v"});
  const auto bracket = s * s - 2.0 * (s * u);
  const auto expected_v = -2.0 * (s * s) + 2.0 * (s * u) + 0.5 * bracket;
  EXPECT_LE(max_diff(sys.nonlinear[0], expected_u), 1e-12);
  EXPECT_LE(max_diff(sys.nonlinear[1], expected_v), 1e-12);
  EXPECT_EQ(sys.nonlinear[0].min_degree(), 2);
}

TEST(ToEigenbasis, IdentityBasisKeepsNonlinearPart) {
  auto spec = parse_system(generic3d_system);
  const auto sys = to_eigenbasis(spec, eigen_split(linear_part(spec)));
  for (std::size_t i = 0; i < 3; ++i)
    EXPECT_LE(max_diff(sys.nonlinear[i], drop_below(spec.field[i], 2)), 1e-12);
}

TEST(ToEigenbasis, LinearOnlySystemHasZeroRemainder) {
  auto spec = parse_system("vars x y\ndx/dt = -x + y\ndy/dt = -2*y");
  const auto sys = to_eigenbasis(spec, eigen_split(linear_part(spec)));
  EXPECT_TRUE(sys.nonlinear.is_zero());
}

TEST(ToEigenbasis, MismatchedSplitIsInconsistent) {
  auto spec = parse_system("vars x y\ndx/dt = -x + x^2\ndy/dt = 0");
  auto split = eigen_split(linear_part(spec));
  split.stable_block(0, 0) = -5.0;
  try {
    to_eigenbasis(spec, split);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::inconsistent_split);
  }
}

class SpectralProperties : public ::testing::TestWithParam<int> {};

namespace {

/// Random J = Q D Q^-1 with a centre part (zero or rotation) and a stable part.
Matrix random_jacobian(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> rate(0.5, 3.0);
  std::bernoulli_distribution coin(0.5);
  Matrix d(n, n);
  std::size_t i = 0;
  if (coin(rng) && n >= 3) {
    const double w = rate(rng);
    d(0, 1) = w;
    d(1, 0) = -w;
    i = 2;
  } else {
    i = 1;
  }
  while (i < n) {
    if (i + 1 < n && coin(rng)) {
      const double a = -rate(rng), b = rate(rng);
      d(i, i) = a;
      d(i + 1, i + 1) = a;
      d(i, i + 1) = b;
      d(i + 1, i) = -b;
      i += 2;
    } else {
      d(i, i) = -rate(rng);
      ++i;
    }
  }
  Matrix q = cmt::testing::random_matrix(rng, n, n);
  for (std::size_t k = 0; k < n; ++k) q(k, k) += 2.0;
  return q * d * inverse(q);
}

}  // namespace

TEST_P(SpectralProperties, EigenvaluesMatchOracle) {
  std::mt19937_64 rng(GetParam());
  std::uniform_int_distribution<int> dim(2, 6);
  const std::size_t n = dim(rng);
  const Matrix a = cmt::testing::random_matrix(rng, n, n, -2, 2);
  const auto ours = sorted(eigenvalues(a));
  const auto ref = sorted(eigen_oracle(a));
  ASSERT_EQ(ours.size(), ref.size());
  for (std::size_t k = 0; k < n; ++k) EXPECT_LE(std::abs(ours[k] - ref[k]), 1e-8) << k;
}

TEST_P(SpectralProperties, SplitInvariants) {
  std::mt19937_64 rng(GetParam());
  std::uniform_int_distribution<int> dim(2, 6);
  const std::size_t n = dim(rng);
  const Matrix j = random_jacobian(rng, n);
  const auto split = eigen_split(LinearPart{j});
  EXPECT_LE((split.basis * split.basis_inv - Matrix::identity(n)).max_abs(), 1e-9);
  EXPECT_LE(offblock(split, j), 1e-9);
  // spectrum of the block form equals the spectrum of J
  const auto before = sorted(eigenvalues(j));
  const auto after = sorted(eigenvalues(split.basis_inv * j * split.basis));
  for (std::size_t k = 0; k < n; ++k) EXPECT_LE(std::abs(before[k] - after[k]), 1e-8);
  for (const auto& ev : split.eigenvalues) {
    if (ev.role == SpectralRole::centre) {
      EXPECT_LE(std::abs(ev.real), default_zero_tolerance);
    } else {
      EXPECT_LT(ev.real, -default_zero_tolerance);
    }
  }
  if (split.centre_dim == 2) {
    EXPECT_EQ(split.centre_block(0, 0), 0.0);
    EXPECT_EQ(split.centre_block(1, 1), 0.0);
    EXPECT_EQ(split.centre_block(0, 1), -split.centre_block(1, 0));
  }
}

TEST_P(SpectralProperties, TransformReconstructsField) {
  std::mt19937_64 rng(GetParam());
  std::uniform_int_distribution<int> dim(2, 4);
  const std::size_t n = dim(rng);
  const Matrix j = random_jacobian(rng, n);
  SystemSpec spec;
  spec.variables = default_names(n);
  std::vector<Polynomial> comps;
  for (std::size_t i = 0; i < n; ++i) {
    Polynomial p = drop_below(cmt::testing::random_poly(rng, n, 3, 0.5), 2);
    for (std::size_t k = 0; k < n; ++k) p.add_term(Monomial::unit(n, k), j(i, k));
    comps.push_back(p);
  }
  spec.field = PolyMap(comps);
  const auto split = eigen_split(linear_part(spec));
  const auto sys = to_eigenbasis(spec, split);

  // x' = P (blockdiag u + N(u)) with u = P^-1 x
  const PolyMap full = sys.full_field();
  std::vector<Polynomial> back;
  for (std::size_t i = 0; i < n; ++i) back.push_back(poly_compose_linear(full[i], split.basis_inv));
  for (std::size_t i = 0; i < n; ++i) {
    Polynomial xi(n);
    for (std::size_t k = 0; k < n; ++k) xi += back[k] * split.basis(i, k);
    EXPECT_LE(max_diff(xi, spec.field[i]), 1e-9) << i;
  }
}

INSTANTIATE_TEST_SUITE_P(Random, SpectralProperties, ::testing::Range(1, 41));
