#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cmt/error.hpp"
#include "cmt/format.hpp"
#include "cmt/manifold.hpp"
#include "cmt/matrix.hpp"
#include "cmt/poly.hpp"
#include "cmt/spectral.hpp"

namespace cmt {

inline constexpr double default_dt = 1e-3;
inline constexpr double default_t_end = 20.0;
inline constexpr double divergence_limit = 1e6;

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  std::vector<std::string> labels;

  std::size_t size() const noexcept { return times.size(); }
};

/// Thrown when the state leaves the finite / bounded region; carries the
/// samples recorded up to that point.
class IntegrationDiverged : public DivergenceError {
 public:
  IntegrationDiverged(double time, Trajectory partial)
      : DivergenceError(time, "state norm exceeded " + format_shortest(divergence_limit) +
                                  " or became non-finite"),
        partial_(std::move(partial)) {}

  const Trajectory& partial() const noexcept { return partial_; }

 private:
  Trajectory partial_;
};

/// Flattened term list for fast repeated evaluation of a PolyMap.
class CompiledField {
 public:
  explicit CompiledField(const PolyMap& f) : nvars_(f.nvars()), max_exp_(0) {
    for (const auto& comp : f) {
      std::vector<Term> terms;
      for (const auto& [mono, coef] : comp.terms()) {
        terms.push_back({coef, mono.exponents()});
        for (int e : mono.exponents()) max_exp_ = std::max(max_exp_, e);
      }
      components_.push_back(std::move(terms));
    }
  }

  std::size_t nvars() const noexcept { return nvars_; }
  std::size_t size() const noexcept { return components_.size(); }

  void operator()(std::span<const double> x, std::span<double> out) const {
    // pw[i * (max+1) + k] = x_i^k
    const std::size_t stride = static_cast<std::size_t>(max_exp_) + 1;
    pw_.assign(nvars_ * stride, 1.0);
    for (std::size_t i = 0; i < nvars_; ++i)
      for (std::size_t k = 1; k < stride; ++k) pw_[i * stride + k] = pw_[i * stride + k - 1] * x[i];
    for (std::size_t c = 0; c < components_.size(); ++c) {
      double acc = 0.0;
      for (const auto& t : components_[c]) {
        double v = t.coef;
        for (std::size_t i = 0; i < nvars_; ++i)
          if (t.exps[i]) v *= pw_[i * stride + t.exps[i]];
        acc += v;
      }
      out[c] = acc;
    }
  }

 private:
  struct Term {
    double coef;
    std::vector<int> exps;
  };
  std::size_t nvars_;
  int max_exp_;
  std::vector<std::vector<Term>> components_;
  mutable std::vector<double> pw_;
};

/// Classical fixed-step RK4 on x' = field(x). `field` includes the linear part.
inline Trajectory integrate(const PolyMap& field, std::span<const double> x0, double t_end,
                            double dt, std::vector<std::string> labels = {}) {
  if (!(dt > 0) || !(t_end >= dt))
    throw Error("sim", ErrorKind::invalid_argument, "need dt > 0 and t_end >= dt");
  if (field.size() != x0.size() || field.nvars() != x0.size())
    throw Error("sim", ErrorKind::dimension_mismatch,
                "initial state has " + std::to_string(x0.size()) + " entries for a " +
                    std::to_string(field.size()) + "-dimensional field");
  if (labels.empty()) labels = default_names(x0.size());
  const std::size_t n = x0.size();
  const CompiledField rhs(field);
  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));

  Trajectory traj;
  traj.labels = std::move(labels);
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  std::vector<double> x(x0.begin(), x0.end());
  traj.times.push_back(0.0);
  traj.states.push_back(x);

  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  for (std::size_t step = 1; step <= steps; ++step) {
    rhs(x, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
    rhs(tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
    rhs(tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + dt * k3[i];
    rhs(tmp, k4);
    double norm2 = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      finite = finite && std::isfinite(x[i]);
      norm2 += x[i] * x[i];
    }
    const double t = static_cast<double>(step) * dt;
    if (!finite || std::sqrt(norm2) > divergence_limit) throw IntegrationDiverged(t, std::move(traj));
    traj.times.push_back(t);
    traj.states.push_back(x);
  }
  return traj;
}

inline Trajectory integrate(const PolyMap& nonlinear, const Matrix& linear,
                            std::span<const double> x0, double t_end, double dt,
                            std::vector<std::string> labels = {}) {
  PolyMap field = nonlinear;
  const std::size_t n = linear.rows();
  if (field.size() != n || field.nvars() != n || !linear.square())
    throw Error("sim", ErrorKind::dimension_mismatch, "linear part does not match the field");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) field[i].add_term(Monomial::unit(n, j), linear(i, j));
  return integrate(field, x0, t_end, dt, std::move(labels));
}

/// Maps an original-coordinate trajectory to eigenbasis coordinates u = P^-1 x.
inline Trajectory to_eigen_coordinates(const Trajectory& traj, const SpectralSplit& split) {
  Trajectory out;
  out.times = traj.times;
  out.labels = default_names(split.centre_dim, "u");
  for (const auto& v : default_names(split.stable_dim, "v")) out.labels.push_back(v);
  for (const auto& x : traj.states) {
    if (x.size() != split.dimension())
      throw Error("sim", ErrorKind::dimension_mismatch, "state does not match the split");
    out.states.push_back(split.basis_inv.apply(x));
  }
  return out;
}

/// Distance of each eigenbasis sample from the manifold: max_j |v_j - h_j(u)|.
inline std::vector<double> manifold_residual(const Trajectory& traj, const SpectralSplit& split,
                                             const CentreManifoldMap& h) {
  const std::size_t c = split.centre_dim;
  const std::size_t s = split.stable_dim;
  if (h.h.size() != s || (s > 0 && h.h.nvars() != c))
    throw Error("sim", ErrorKind::dimension_mismatch, "manifold map does not match the split");
  std::vector<double> out;
  out.reserve(traj.size());
  for (const auto& x : traj.states) {
    if (x.size() != c + s)
      throw Error("sim", ErrorKind::dimension_mismatch, "state does not match the split");
    const std::span<const double> u(x.data(), c);
    double worst = 0.0;
    for (std::size_t j = 0; j < s; ++j) worst = std::max(worst, std::abs(x[c + j] - h.h[j].evaluate(u)));
    out.push_back(worst);
  }
  return out;
}

inline std::vector<std::pair<double, double>> amplitude_series(const Trajectory& traj,
                                                               std::pair<std::size_t, std::size_t> idx) {
  std::vector<std::pair<double, double>> out;
  out.reserve(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto& x = traj.states[k];
    if (idx.first >= x.size() || idx.second >= x.size())
      throw Error("sim", ErrorKind::dimension_mismatch, "amplitude index out of range");
    out.emplace_back(traj.times[k], std::hypot(x[idx.first], x[idx.second]));
  }
  return out;
}

/// Polar angle of the (first, second) pair, unwrapped to be continuous.
inline std::vector<double> unwrapped_angle(const Trajectory& traj,
                                           std::pair<std::size_t, std::size_t> idx) {
  std::vector<double> out;
  out.reserve(traj.size());
  double offset = 0.0;
  double prev = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double a = std::atan2(traj.states[k][idx.second], traj.states[k][idx.first]);
    if (k > 0) {
      const double d = a - prev;
      if (d > std::numbers::pi) offset -= 2 * std::numbers::pi;
      if (d < -std::numbers::pi) offset += 2 * std::numbers::pi;
    }
    prev = a;
    out.push_back(a + offset);
  }
  return out;
}

/// CSV: header "t,<labels>", one row per sample, 17 significant digits.
inline void write_csv(std::ostream& os, const Trajectory& traj) {
  os << "t";
  for (const auto& l : traj.labels) os << ',' << l;
  os << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    os << format_g17(traj.times[k]);
    for (double v : traj.states[k]) os << ',' << format_g17(v);
    os << '\n';
  }
}

}  // namespace cmt
