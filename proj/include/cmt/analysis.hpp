#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "cmt/manifold.hpp"
#include "cmt/poly.hpp"
#include "cmt/spectral.hpp"
#include "cmt/stability.hpp"
#include "cmt/sysdsl.hpp"

namespace cmt {

inline constexpr int report_schema_version = 1;

enum class BasisSource { computed, dsl, flag };

inline const char* to_string(BasisSource b) {
  switch (b) {
    case BasisSource::computed: return "computed";
    case BasisSource::dsl: return "dsl";
    case BasisSource::flag: return "flag";
  }
  return "computed";
}

struct AnalysisOptions {
  int order = 2;
  double zero_tolerance = default_zero_tolerance;
  int theta_samples = default_theta_samples;
  /// Row-major n*n values overriding the DSL `basis` stanza.
  std::optional<std::vector<double>> basis_values;
  /// Use the computed eigenbasis even if the file has a `basis` stanza.
  bool ignore_dsl_basis = false;
};

struct Diagnostics {
  double invariance_residual_max = 0.0;
  double block_offdiag_max = 0.0;
  double basis_inverse_error = 0.0;
  std::vector<std::string> failures;
};

struct AnalysisReport {
  SystemSpec input;
  std::vector<double> equilibrium;
  AnalysisOptions options;
  BasisSource basis_source = BasisSource::computed;
  TransformedSystem transformed;
  CentreManifoldMap manifold;
  ReducedSystem reduced;
  StabilityVerdict verdict;
  std::optional<RadialAnalysis> radial;
  ParityReport parity;
  Diagnostics diagnostics;

  bool ok() const { return diagnostics.failures.empty(); }
};

/// 64-bit FNV-1a, used to fingerprint the canonical input.
inline std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Verdict for a 2-D centre from the rotation-averaged radial drift: the
/// lowest nonlinear power of r whose mean over theta is nonzero decides.
inline StabilityVerdict classify_planar(const ReducedSystem& red, int samples = default_theta_samples) {
  StabilityVerdict v;
  const auto first = radial_dynamics(red, 0.0);
  const double tol = verdict_zero_tolerance * std::max(1.0, red.field.max_abs_coefficient());
  for (std::size_t k = 2; k < first.coeffs.size(); ++k) {
    double mean = 0.0;
    for (int i = 0; i < samples; ++i)
      mean += radial_dynamics(red, 2.0 * std::numbers::pi * i / samples).coefficient(k);
    mean /= samples;
    if (std::abs(mean) <= tol) continue;
    v.leading_degree = static_cast<int>(k);
    v.leading_coefficient = mean;
    v.kind = mean < 0 ? StabilityKind::stable : StabilityKind::unstable;
    v.mechanism = mean < 0 ? "averaged-radial-decay" : "averaged-radial-growth";
    return v;
  }
  v.mechanism = "radial-average-vanishes";
  return v;
}

inline AnalysisReport analyze(const SystemSpec& spec, const AnalysisOptions& opt = {}) {
  AnalysisReport rep;
  rep.input = spec;
  rep.options = opt;
  const std::size_t n = spec.dimension();
  rep.equilibrium = spec.equilibrium.value_or(std::vector<double>(n, 0.0));
  const SystemSpec shifted = shift_equilibrium(spec, rep.equilibrium);

  std::optional<Matrix> basis;
  if (opt.basis_values) {
    if (opt.basis_values->size() != n * n)
      throw Error("cli", ErrorKind::dimension_mismatch,
                  "--basis-override needs " + std::to_string(n * n) + " values");
    basis = Matrix::from_row_major(n, n, *opt.basis_values);
    rep.basis_source = BasisSource::flag;
  } else if (spec.basis && !opt.ignore_dsl_basis) {
    basis = spec.basis;
    rep.basis_source = BasisSource::dsl;
  }

  const LinearPart lin = linear_part(shifted);
  const SpectralSplit split = eigen_split(lin, opt.zero_tolerance, basis);
  rep.transformed = to_eigenbasis(shifted, split);
  rep.manifold = solve_centre_manifold(rep.transformed, opt.order);
  rep.reduced = reduce(rep.transformed, rep.manifold);
  rep.parity = parity_check(rep.transformed, rep.manifold);

  const std::size_t c = split.centre_dim;
  if (c == 1) {
    rep.verdict = classify_1d(rep.reduced);
  } else if (c == 2 && [&] {
               const Matrix& a = split.centre_block;
               return std::abs(a(0, 0)) <= 1e-12 && std::abs(a(1, 1)) <= 1e-12 &&
                      std::abs(a(0, 1) + a(1, 0)) <= 1e-12;
             }()) {
    rep.radial = radial_fixed_points(rep.reduced, opt.theta_samples);
    rep.verdict = classify_planar(rep.reduced, opt.theta_samples);
  } else {
    rep.verdict.mechanism = "unsupported-centre-dimension";
  }

  auto& d = rep.diagnostics;
  d.invariance_residual_max =
      invariance_residual(rep.transformed, rep.manifold, opt.order).max_abs_coefficient();
  const Matrix similar = split.basis_inv * lin.matrix * split.basis;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if ((i < c) != (j < c)) d.block_offdiag_max = std::max(d.block_offdiag_max, std::abs(similar(i, j)));
  d.basis_inverse_error = (split.basis * split.basis_inv - Matrix::identity(n)).max_abs();

  if (d.invariance_residual_max > manifold_residual_tolerance)
    d.failures.push_back("invariance residual above " + format_shortest(manifold_residual_tolerance));
  if (d.block_offdiag_max > block_tolerance * std::max(1.0, lin.matrix.norm_inf()))
    d.failures.push_back("similarity transform not block diagonal");
  if (d.basis_inverse_error > 1e-9) d.failures.push_back("basis inverse inaccurate");
  return rep;
}

namespace detail {

inline nlohmann::json matrix_json(const Matrix& m) {
  auto rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j) == 0.0 ? 0.0 : m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline nlohmann::json terms_json(const PolyMap& f) {
  auto out = nlohmann::json::array();
  for (std::size_t j = 0; j < f.size(); ++j)
    for (const auto& [mono, coef] : f[j].terms())
      out.push_back({{"component", j},
                     {"degree", mono.degree()},
                     {"exponents", mono.exponents()},
                     {"value", coef}});
  return out;
}

inline nlohmann::json rendered_json(const PolyMap& f, const std::vector<std::string>& lhs,
                                    const std::vector<std::string>& names) {
  auto out = nlohmann::json::array();
  for (std::size_t j = 0; j < f.size(); ++j) out.push_back(lhs[j] + " = " + render(f[j], names));
  return out;
}

}  // namespace detail

inline nlohmann::json to_json(const AnalysisReport& rep) {
  using nlohmann::json;
  const std::string canonical = render_system(rep.input);
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(canonical)));

  const auto& split = rep.transformed.split;
  const std::size_t c = split.centre_dim;
  const auto names = rep.transformed.coordinate_names();
  const std::vector<std::string> centre_names(names.begin(), names.begin() + c);
  const std::vector<std::string> stable_names(names.begin() + c, names.end());

  json j;
  j["schema_version"] = report_schema_version;
  j["status"] = rep.ok() ? "OK" : "FAILED";
  j["input"] = {{"hash", hash}, {"canonical", canonical}, {"variables", rep.input.variables}};
  j["options"] = {{"order", rep.options.order},
                  {"zero_tolerance", rep.options.zero_tolerance},
                  {"theta_samples", rep.options.theta_samples},
                  {"basis_source", to_string(rep.basis_source)}};
  j["equilibrium"] = rep.equilibrium;

  auto eig = json::array();
  for (const auto& e : split.eigenvalues)
    eig.push_back({{"real", e.real}, {"imag", e.imag}, {"role", to_string(e.role)}});
  j["spectrum"] = {{"centre_dim", split.centre_dim},
                   {"stable_dim", split.stable_dim},
                   {"eigenvalues", eig},
                   {"basis", detail::matrix_json(split.basis)},
                   {"basis_inverse", detail::matrix_json(split.basis_inv)},
                   {"centre_block", detail::matrix_json(split.centre_block)},
                   {"stable_block", detail::matrix_json(split.stable_block)}};

  std::vector<std::string> dots;
  for (const auto& nm : names) dots.push_back("d" + nm + "/dt");
  j["transformed"] = {{"coordinates", names},
                      {"nonlinear", detail::rendered_json(rep.transformed.nonlinear, dots, names)}};

  j["manifold"] = {{"order", rep.manifold.order},
                   {"coefficients", detail::terms_json(rep.manifold.h)},
                   {"equations", detail::rendered_json(rep.manifold.h, stable_names, centre_names)}};

  std::vector<std::string> centre_dots;
  for (const auto& nm : centre_names) centre_dots.push_back("d" + nm + "/dt");
  j["reduced"] = {{"order", rep.reduced.order},
                  {"coefficients", detail::terms_json(rep.reduced.field)},
                  {"equations", detail::rendered_json(rep.reduced.field, centre_dots, centre_names)}};

  j["stability"] = {{"kind", to_string(rep.verdict.kind)},
                    {"mechanism", rep.verdict.mechanism},
                    {"leading_degree", rep.verdict.leading_degree},
                    {"leading_coefficient", rep.verdict.leading_coefficient}};

  if (rep.radial) {
    auto rays = json::array();
    for (const auto& ray : rep.radial->rays) {
      auto fps = json::array();
      for (const auto& fp : ray.fixed_points)
        fps.push_back({{"r", fp.r}, {"class", to_string(fp.classification)}});
      rays.push_back({{"theta", ray.theta},
                      {"reading", to_string(ray.reading)},
                      {"radial_poly", ray.radial_poly.coeffs},
                      {"fixed_points", fps}});
    }
    j["radial"] = {{"r_max", rep.radial->r_max}, {"rays", rays}};
  } else {
    j["radial"] = nullptr;
  }

  j["parity"] = {{"f_parity", to_string(rep.parity.f_parity)},
                 {"g_parity", to_string(rep.parity.g_parity)},
                 {"predicted_h_parity", to_string(rep.parity.predicted_h_parity)},
                 {"observed_odd_mass", rep.parity.observed_odd_mass},
                 {"leading_degree", rep.parity.leading_degree}};

  j["diagnostics"] = {{"zero_tolerance", rep.options.zero_tolerance},
                      {"prune_tolerance", prune_tolerance},
                      {"residual_tolerance", manifold_residual_tolerance},
                      {"block_tolerance", block_tolerance},
                      {"invariance_residual_max", rep.diagnostics.invariance_residual_max},
                      {"block_offdiag_max", rep.diagnostics.block_offdiag_max},
                      {"basis_inverse_error", rep.diagnostics.basis_inverse_error},
                      {"failures", rep.diagnostics.failures}};
  return j;
}

/// CSV rows "theta,r,class" for every radial fixed point.
inline std::string radial_csv(const RadialAnalysis& radial) {
  std::string out = "theta,r,class\n";
  for (const auto& ray : radial.rays)
    for (const auto& fp : ray.fixed_points)
      out += format_g17(ray.theta) + "," + format_g17(fp.r) + "," + to_string(fp.classification) + "\n";
  return out;
}

}  // namespace cmt
