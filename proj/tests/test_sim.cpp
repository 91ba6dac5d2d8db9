#include <gtest/gtest.h>

#include <numbers>
#include <sstream>

#include "support.hpp"

using namespace cmt;

namespace {

PolyMap field1(const std::string& expr) {
  return PolyMap(std::vector<Polynomial>{cmt::testing::poly(expr, {"x"})});
}

double max_exp_error(double dt) {
  const std::vector<double> x0{1.0};
  const auto traj = integrate(field1("-x"), x0, 1.0, dt);
  double worst = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k)
    worst = std::max(worst, std::abs(traj.states[k][0] - std::exp(-traj.times[k])));
  return worst;
}

}  // namespace

TEST(Integrate, ExponentialDecay) {
  const std::vector<double> x0{1.0};
  const auto traj = integrate(field1("-x"), x0, 1.0, 1e-3);
  ASSERT_EQ(traj.size(), 1001u);
  EXPECT_NEAR(traj.states.back()[0], std::exp(-1.0), 1e-9);
  EXPECT_DOUBLE_EQ(traj.times.back(), 1.0);
}

TEST(Integrate, UniformSteps) {
  const std::vector<double> x0{1.0};
  const auto traj = integrate(field1("-x"), x0, 2.0, 0.01);
  for (std::size_t k = 1; k < traj.size(); ++k)
    EXPECT_NEAR(traj.times[k] - traj.times[k - 1], 0.01, 1e-12);
}

TEST(Integrate, ZeroFieldIsConstant) {
  const std::vector<double> x0{0.3, -2.0};
  const auto traj = integrate(PolyMap(2, 2), x0, 1.0, 0.1);
  for (const auto& s : traj.states) EXPECT_EQ(s, x0);
}

TEST(Integrate, FourthOrderConvergence) {
  const double coarse = max_exp_error(0.1), fine = max_exp_error(0.05);
  EXPECT_GE(coarse / fine, 12.0) << coarse << " " << fine;
}

TEST(Integrate, ClosedFormRadialSolution) {
  // r'' := dr'/dt = (r' + sqrt2 l1) r' / sqrt2, solved by r'(t) = sqrt2 l1 / (k e^{-l1 t} - 1).
  const double l1 = 1.0, s = std::sqrt(2.0) * l1, r0 = -0.1;
  const double k = s / r0 + 1.0;
  const auto f = field1(format_shortest(1 / std::sqrt(2.0)) + "*x^2 + " + format_shortest(l1) + "*x");
  const std::vector<double> x0{r0};
  const auto traj = integrate(f, x0, 10.0, 1e-3);
  double worst = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i)
    worst = std::max(worst, std::abs(traj.states[i][0] - s / (k * std::exp(-l1 * traj.times[i]) - 1)));
  EXPECT_LE(worst, 1e-6);
}

TEST(Integrate, SeparateLinearPart) {
  const std::vector<double> x0{1.0};
  const auto a = integrate(field1("-x + x^2"), x0, 1.0, 0.01);
  const auto b = integrate(field1("x^2"), Matrix{{-1}}, x0, 1.0, 0.01);
  EXPECT_EQ(a.states.back(), b.states.back());
}

TEST(Integrate, DivergenceCarriesPartialTrajectory) {
  const std::vector<double> x0{1.0};
  try {
    integrate(field1("x^2"), x0, 2.0, 1e-3);
    FAIL();
  } catch (const IntegrationDiverged& e) {
    EXPECT_EQ(e.kind(), ErrorKind::divergence);
    EXPECT_NEAR(e.time(), 1.0, 1e-2);
    EXPECT_GT(e.partial().size(), 900u);
    EXPECT_LT(e.partial().times.back(), e.time());
  }
}

TEST(Integrate, BadArguments) {
  const std::vector<double> x0{1.0}, x2{1.0, 2.0};
  EXPECT_THROW(integrate(field1("-x"), x0, 1.0, 0.0), Error);
  EXPECT_THROW(integrate(field1("-x"), x0, 0.01, 0.1), Error);
  EXPECT_THROW(integrate(field1("-x"), x2, 1.0, 0.1), Error);
}

TEST(ManifoldResidual, StartOnManifoldIsZero) {
  const auto spec = parse_system(generic3d_system);
  const auto split = eigen_split(linear_part(spec));
  const auto h = solve_centre_manifold(to_eigenbasis(spec, split), 2);
  const std::vector<double> u{0.05, -0.02};
  const std::vector<double> x0{u[0], u[1], h.h[0].evaluate(u)};
  const auto traj = integrate(spec.field, x0, 0.01, 0.01);
  EXPECT_EQ(manifold_residual(to_eigen_coordinates(traj, split), split, h).front(), 0.0);
}

TEST(ManifoldResidual, GenericThreeDimensionalIsAttracting) {
  const auto spec = parse_system(generic3d_system);
  const auto split = eigen_split(linear_part(spec));
  const auto h = solve_centre_manifold(to_eigenbasis(spec, split), 2);
  const std::vector<double> x0{0.05, 0.0, 0.02};
  const auto traj = integrate(spec.field, x0, 10.0, 1e-3);
  const auto res = manifold_residual(to_eigen_coordinates(traj, split), split, h);
  EXPECT_LT(res.back(), res.front());
}

TEST(ManifoldResidual, LinearStableDecayEnvelope) {
  const auto spec = parse_system("vars x y z\ndx/dt = y\ndy/dt = -x\ndz/dt = -2*z");
  const auto split = eigen_split(linear_part(spec));
  const auto h = solve_centre_manifold(to_eigenbasis(spec, split), 2);
  const std::vector<double> x0{0.3, 0.1, 0.5};
  const auto traj = integrate(spec.field, x0, 5.0, 1e-3);
  const auto res = manifold_residual(to_eigen_coordinates(traj, split), split, h);
  for (std::size_t k = 1; k < res.size(); ++k) EXPECT_LT(res[k], res[k - 1]);
  EXPECT_NEAR(res.back(), 0.5 * std::exp(-10.0), 1e-9);
}

TEST(ManifoldResidual, DimensionMismatch) {
  const auto spec = parse_system(generic3d_system);
  const auto split = eigen_split(linear_part(spec));
  const CentreManifoldMap wrong{2, PolyMap(2, 2)};
  Trajectory t;
  EXPECT_THROW(manifold_residual(t, split, wrong), Error);
}

TEST(AmplitudeSeries, OriginStaysAtRest) {
  const auto red = cmt::testing::all_ones_reduced(1.0);
  const std::vector<double> x0{0.0, 0.0};
  for (const auto& [t, r] : amplitude_series(integrate(red.field, x0, 1.0, 0.01), {0, 1})) EXPECT_EQ(r, 0.0);
}

TEST(AmplitudeSeries, PureRotationConservesRadius) {
  const PolyMap f(std::vector<Polynomial>{cmt::testing::poly_xy("y"), cmt::testing::poly_xy("-x")});
  const std::vector<double> x0{0.6, 0.8};
  for (const auto& [t, r] : amplitude_series(integrate(f, x0, 10.0, 1e-3), {0, 1})) EXPECT_NEAR(r, 1.0, 1e-6);
}

TEST(AmplitudeSeries, OrbitInsideTheSourceStaysBounded) {
  // Started at r = 0.5 on the ray 7pi/4 the reduced orbit circulates around
  // the origin without reaching the saddle at r = sqrt2 or decaying to zero.
  const auto red = cmt::testing::all_ones_reduced(1.0);
  const double th = 7 * std::numbers::pi / 4;
  const std::vector<double> x0{0.5 * std::cos(th), 0.5 * std::sin(th)};
  const auto amp = amplitude_series(integrate(red.field, x0, 20.0, 1e-3), {0, 1});
  for (const auto& [t, r] : amp) {
    EXPECT_LT(r, std::sqrt(2.0));
    EXPECT_GT(r, 0.05);
  }
}

TEST(UnwrappedAngle, SmallOrbitSpiralsClockwise) {
  const auto red = cmt::testing::all_ones_reduced(1.0);
  const std::vector<double> x0{0.05, 0.0};
  const auto theta = unwrapped_angle(integrate(red.field, x0, 20.0, 1e-3), {0, 1});
  for (std::size_t k = 1; k < theta.size(); ++k) EXPECT_LT(theta[k], theta[k - 1]);
  EXPECT_LT(theta.back(), -3 * std::numbers::pi);
}

TEST(Integrate, ReducedProteinGrowsForPositiveU) {
  const std::vector<double> x0{0.1};
  const auto traj = integrate(field1("0.5*x^2"), x0, 10.0, 1e-3);
  for (std::size_t k = 1; k < traj.size(); ++k) EXPECT_GT(traj.states[k][0], traj.states[k - 1][0]);
}

TEST(WriteCsv, HeaderAndPrecision) {
  Trajectory t;
  t.labels = {"x", "y"};
  t.times = {0.0, 0.1};
  t.states = {{1.0 / 3.0, -2.0}, {1e-20, 0.5}};
  std::ostringstream os;
  write_csv(os, t);
  EXPECT_EQ(os.str(), "t,x,y\n0,0.33333333333333331,-2\n0.10000000000000001,9.9999999999999995e-21,0.5\n");
}
