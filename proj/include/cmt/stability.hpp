#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "cmt/error.hpp"
#include "cmt/manifold.hpp"
#include "cmt/poly.hpp"
#include "cmt/spectral.hpp"

namespace cmt {

/// Reduced coefficients at or below this are treated as absent.
inline constexpr double verdict_zero_tolerance = 1e-10;
inline constexpr int default_theta_samples = 360;

enum class StabilityKind { stable, unstable, inconclusive };

inline const char* to_string(StabilityKind k) {
  switch (k) {
    case StabilityKind::stable: return "stable";
    case StabilityKind::unstable: return "unstable";
    case StabilityKind::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

struct StabilityVerdict {
  StabilityKind kind = StabilityKind::inconclusive;
  std::string mechanism;
  int leading_degree = 0;
  double leading_coefficient = 0.0;
};

/// Dense univariate polynomial, coeffs[k] multiplies r^k.
struct Univariate {
  std::vector<double> coeffs;

  double operator()(double r) const {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * r + *it;
    return acc;
  }
  double coefficient(std::size_t k) const { return k < coeffs.size() ? coeffs[k] : 0.0; }
  bool is_zero() const {
    return std::all_of(coeffs.begin(), coeffs.end(), [](double c) { return c == 0.0; });
  }
};

enum class FixedPointClass { sink, source, degenerate };

inline const char* to_string(FixedPointClass c) {
  switch (c) {
    case FixedPointClass::sink: return "sink";
    case FixedPointClass::source: return "source";
    case FixedPointClass::degenerate: return "degenerate";
  }
  return "degenerate";
}

struct RadialFixedPoint {
  double r = 0.0;
  FixedPointClass classification = FixedPointClass::degenerate;
};

/// How the radial polynomial of a ray was obtained.
enum class RayReading {
  projection,  // (x x' + y y') / r
  along_ray,   // x' / cos(theta) on a ray where the projection vanishes
};

inline const char* to_string(RayReading r) {
  return r == RayReading::projection ? "projection" : "along-ray";
}

struct RayAnalysis {
  double theta = 0.0;
  RayReading reading = RayReading::projection;
  Univariate radial_poly;
  std::vector<RadialFixedPoint> fixed_points;
};

struct RadialAnalysis {
  std::vector<RayAnalysis> rays;
  double r_max = 0.0;
};

inline StabilityVerdict classify_1d(const ReducedSystem& red) {
  if (red.dimension() != 1)
    throw Error("stability", ErrorKind::invalid_argument,
                "one-dimensional classification needs a 1-D centre, got " +
                    std::to_string(red.dimension()));
  StabilityVerdict v;
  for (const auto& [mono, coef] : red.field[0].terms()) {
    if (std::abs(coef) <= verdict_zero_tolerance) continue;
    v.leading_degree = mono.degree();
    v.leading_coefficient = coef;
    if (v.leading_degree % 2 == 0) {
      // u' keeps one sign on both sides of the origin.
      v.kind = StabilityKind::unstable;
      v.mechanism = "even-leading-term";
    } else if (coef < 0) {
      v.kind = StabilityKind::stable;
      v.mechanism = "odd-leading-negative";
    } else {
      v.kind = StabilityKind::unstable;
      v.mechanism = "odd-leading-positive";
    }
    return v;
  }
  v.mechanism = "no-nonzero-term";
  return v;
}

namespace detail {

inline void require_planar(const ReducedSystem& red) {
  if (red.dimension() != 2)
    throw Error("stability", ErrorKind::invalid_argument,
                "polar analysis needs a 2-D centre, got " + std::to_string(red.dimension()));
}

/// Builds sum_k r^k * sum_terms coef * cos^(i+ci) sin^(j+sj) from the given
/// components and extra trig factors. Powers are looked up from one table so
/// identical trig products cancel exactly.
inline Univariate polar_collect(const ReducedSystem& red, double theta,
                                const std::vector<std::pair<std::size_t, std::pair<int, int>>>& parts,
                                double divisor = 1.0) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const int maxdeg = std::max(red.field.degree(), 0) + 2;
  std::vector<double> pc(maxdeg + 1, 1.0), ps(maxdeg + 1, 1.0);
  for (int k = 1; k <= maxdeg; ++k) {
    pc[k] = pc[k - 1] * c;
    ps[k] = ps[k - 1] * s;
  }
  Univariate out{std::vector<double>(static_cast<std::size_t>(std::max(red.field.degree(), 1)) + 1, 0.0)};
  for (const auto& [comp, extra] : parts)
    for (const auto& [mono, coef] : red.field[comp].terms()) {
      const double trig = pc[mono[0] + extra.first] * ps[mono[1] + extra.second];
      out.coeffs[mono.degree()] += coef * trig / divisor;
    }
  return out;
}

}  // namespace detail

/// r' = (x x' + y y') / r on the ray at angle theta, as a polynomial in r.
inline Univariate radial_dynamics(const ReducedSystem& red, double theta) {
  detail::require_planar(red);
  const Matrix& a = red.centre_block;
  if (std::abs(a(0, 0)) > 1e-12 || std::abs(a(1, 1)) > 1e-12 || std::abs(a(0, 1) + a(1, 0)) > 1e-12)
    throw Error("stability", ErrorKind::invalid_argument,
                "polar analysis needs an antisymmetric (rotation) centre block");
  return detail::polar_collect(red, theta, {{0, {1, 0}}, {1, {0, 1}}});
}

/// Radial speed read from a single component with theta held fixed:
/// x' = r' cos(theta), so r' = x'(r cos, r sin) / cos(theta). Falls back to
/// the second component when cos(theta) vanishes.
inline Univariate ray_dynamics(const ReducedSystem& red, double theta) {
  detail::require_planar(red);
  const double c = std::cos(theta);
  if (std::abs(c) > 1e-8) return detail::polar_collect(red, theta, {{0, {0, 0}}}, c);
  return detail::polar_collect(red, theta, {{1, {0, 0}}}, std::sin(theta));
}

/// theta' = (x y' - y x') / r^2 at the given polar point.
inline double angular_dynamics(const ReducedSystem& red, double r, double theta) {
  detail::require_planar(red);
  if (!(r > 0))
    throw Error("stability", ErrorKind::invalid_argument, "angular speed needs r > 0");
  const double x = r * std::cos(theta);
  const double y = r * std::sin(theta);
  const std::vector<double> pt{x, y};
  const auto v = red.field.evaluate(pt);
  return (x * v[1] - y * v[0]) / (r * r);
}

namespace detail {

inline FixedPointClass classify_origin(const Univariate& p) {
  for (std::size_t k = 1; k < p.coeffs.size(); ++k) {
    if (p.coeffs[k] > 0) return FixedPointClass::source;
    if (p.coeffs[k] < 0) return FixedPointClass::sink;
  }
  return FixedPointClass::degenerate;
}

inline int sign_of(double v) { return (v > 0) - (v < 0); }

inline FixedPointClass classify_crossing(const Univariate& p, double r) {
  const double left = r > 2e-4 ? r - 1e-4 : r / 2;
  const int before = sign_of(p(left));
  const int after = sign_of(p(r + 1e-4));
  if (before < 0 && after > 0) return FixedPointClass::source;
  if (before > 0 && after < 0) return FixedPointClass::sink;
  return FixedPointClass::degenerate;
}

/// Positive roots in (0, r_max] by sign bracketing on a uniform grid and
/// bisection.
inline std::vector<double> positive_roots(const Univariate& p, double r_max, int grid = 4096) {
  std::vector<double> roots;
  if (p.is_zero()) return roots;
  const double h = r_max / grid;
  double a = h * 1e-6;
  double fa = p(a);
  for (int k = 1; k <= grid; ++k) {
    const double b = h * k;
    const double fb = p(b);
    if (fb == 0.0) {
      roots.push_back(b);
    } else if (fa != 0.0 && sign_of(fa) != sign_of(fb)) {
      double lo = a, hi = b, flo = fa;
      while (hi - lo > 1e-13 * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        const double fm = p(mid);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        if (sign_of(fm) == sign_of(flo)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    a = b;
    fa = fb;
  }
  return roots;
}

inline Univariate clean(Univariate p, double tol) {
  for (double& c : p.coeffs)
    if (std::abs(c) <= tol) c = 0.0;
  return p;
}

inline RayAnalysis analyse_ray(double theta, RayReading reading, Univariate poly, double r_max,
                               double tol) {
  RayAnalysis ray{theta, reading, clean(std::move(poly), tol), {}};
  ray.fixed_points.push_back({0.0, classify_origin(ray.radial_poly)});
  for (double r : positive_roots(ray.radial_poly, r_max))
    ray.fixed_points.push_back({r, classify_crossing(ray.radial_poly, r)});
  return ray;
}

}  // namespace detail

inline double default_r_max(const ReducedSystem& red) {
  double big = 0.0;
  for (const auto& z : eigenvalues(red.centre_block)) big = std::max(big, std::abs(z));
  return 10.0 * (big + 1.0);
}

/// Samples rays, finds radial fixed points on each, and additionally locates
/// the rays on which the radial projection vanishes identically beyond linear
/// order. On those the radial speed is read along the ray from the first
/// centre equation (see ray_dynamics).
inline RadialAnalysis radial_fixed_points(const ReducedSystem& red,
                                          int theta_samples = default_theta_samples,
                                          double r_max = -1.0) {
  detail::require_planar(red);
  if (theta_samples < 8)
    throw Error("stability", ErrorKind::invalid_argument, "need at least 8 ray samples");
  if (r_max <= 0) r_max = default_r_max(red);
  const double two_pi = 2.0 * std::numbers::pi;
  const double tol = 1e-12 * std::max(1.0, red.field.max_abs_coefficient());

  RadialAnalysis out;
  out.r_max = r_max;
  std::vector<Univariate> sampled;
  std::vector<double> thetas;
  for (int k = 0; k < theta_samples; ++k) {
    const double theta = two_pi * k / theta_samples;
    thetas.push_back(theta);
    sampled.push_back(radial_dynamics(red, theta));
  }

  // Leading nonlinear radial coefficient that is not identically zero.
  std::size_t lead = 0;
  const std::size_t top = sampled.front().coeffs.size();
  for (std::size_t k = 2; k < top && lead == 0; ++k)
    for (const auto& p : sampled)
      if (std::abs(p.coefficient(k)) > tol) {
        lead = k;
        break;
      }

  std::vector<double> critical;
  auto add_critical = [&](double theta) {
    theta = std::fmod(theta + two_pi, two_pi);
    const auto p = radial_dynamics(red, theta);
    for (std::size_t k = 2; k < p.coeffs.size(); ++k)
      if (std::abs(p.coeffs[k]) > 1e-10 * std::max(1.0, red.field.max_abs_coefficient())) return;
    for (double t : critical)
      if (std::abs(t - theta) < 1e-9 || std::abs(std::abs(t - theta) - two_pi) < 1e-9) return;
    critical.push_back(theta);
  };
  if (lead > 0) {
    auto value = [&](double theta) { return radial_dynamics(red, theta).coefficient(lead); };
    for (int k = 0; k < theta_samples; ++k) {
      const double t0 = thetas[k];
      const double t1 = k + 1 < theta_samples ? thetas[k + 1] : two_pi;
      const double f0 = sampled[k].coefficient(lead);
      const double f1 = k + 1 < theta_samples ? sampled[k + 1].coefficient(lead) : sampled[0].coefficient(lead);
      if (f0 == 0.0) {
        add_critical(t0);
        continue;
      }
      if (f1 == 0.0 || detail::sign_of(f0) == detail::sign_of(f1)) continue;
      double lo = t0, hi = t1, flo = f0;
      for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = value(mid);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        if (detail::sign_of(fm) == detail::sign_of(flo)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      add_critical(0.5 * (lo + hi));
    }
  }

  for (int k = 0; k < theta_samples; ++k) {
    bool replaced = false;
    for (double t : critical)
      if (std::abs(t - thetas[k]) < 1e-9 || std::abs(std::abs(t - thetas[k]) - two_pi) < 1e-9)
        replaced = true;
    if (!replaced)
      out.rays.push_back(detail::analyse_ray(thetas[k], RayReading::projection, sampled[k], r_max, tol));
  }
  for (double t : critical)
    out.rays.push_back(detail::analyse_ray(t, RayReading::along_ray, ray_dynamics(red, t), r_max, tol));
  std::sort(out.rays.begin(), out.rays.end(),
            [](const RayAnalysis& a, const RayAnalysis& b) { return a.theta < b.theta; });
  return out;
}

}  // namespace cmt
