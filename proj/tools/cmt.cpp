// cmt: centre-manifold reduction of polynomial ODE systems.
//
//   cmt analyze FILE [--order K] [--zero-tol T] [--basis-override "..."] [--json OUT]
//   cmt simulate FILE --x0 X... [--t T] [--dt DT] [--csv OUT]
//   cmt examples NAME [-o OUT]

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cmt/cmt.hpp"

namespace {

enum ExitCode { ok = 0, report_failed = 1, usage = 2, analysis_error = 3, diverged = 4 };

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> values;
  std::string token;
  std::istringstream ss(text);
  while (ss >> token) {
    for (auto& ch : token)
      if (ch == ',') ch = ' ';
    std::istringstream inner(token);
    double v;
    while (inner >> v) values.push_back(v);
  }
  return values;
}

double default_zero_tol() {
  if (const char* env = std::getenv("CMT_ZERO_TOL")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end != env && v > 0) return v;
    std::cerr << "warning: ignoring invalid CMT_ZERO_TOL='" << env << "'\n";
  }
  return cmt::default_zero_tolerance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Centre-manifold reduction of polynomial ODE systems"};
  app.require_subcommand(1);

  std::string analyze_file, json_out, radial_csv_out, basis_text;
  cmt::AnalysisOptions opts;
  opts.zero_tolerance = default_zero_tol();
  auto* analyze = app.add_subcommand("analyze", "Run the full reduction and write a JSON report");
  analyze->add_option("file", analyze_file, "System file")->required();
  analyze->add_option("--order", opts.order, "Manifold order (2-4)")->capture_default_str();
  analyze->add_option("--zero-tol", opts.zero_tolerance, "Centre band for eigenvalue real parts")
      ->capture_default_str();
  analyze->add_option("--basis-override", basis_text,
                      "Row-major n*n basis matrix (centre columns first), overrides the file's basis");
  analyze->add_flag("--ignore-basis", opts.ignore_dsl_basis, "Use the computed eigenbasis");
  analyze->add_option("--theta-samples", opts.theta_samples, "Rays for the radial analysis")
      ->capture_default_str();
  analyze->add_option("--json", json_out, "Report path (default stdout)");
  analyze->add_option("--radial-csv", radial_csv_out, "Write radial fixed points as CSV");

  std::string sim_file, csv_out;
  std::vector<double> x0;
  double t_end = cmt::default_t_end;
  double dt = cmt::default_dt;
  auto* simulate = app.add_subcommand("simulate", "Integrate the full system with RK4");
  simulate->add_option("file", sim_file, "System file")->required();
  simulate->add_option("--x0", x0, "Initial state (original coordinates)")->required()->delimiter(',');
  simulate->add_option("--t", t_end, "End time")->capture_default_str();
  simulate->add_option("--dt", dt, "Step size")->capture_default_str();
  simulate->add_option("--csv", csv_out, "CSV path (default stdout)");

  std::string example_name, example_out;
  auto* examples = app.add_subcommand("examples", "Print a bundled case-study system");
  examples->add_option("name", example_name, "generic3d | protein")->required();
  examples->add_option("-o,--output", example_out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? ok : usage;
  }

  try {
    if (*examples) {
      const auto text = cmt::bundled_system(example_name);
      if (!text) {
        std::cerr << "unknown example '" << example_name << "'; available:";
        for (const auto& n : cmt::bundled_system_names()) std::cerr << ' ' << n;
        std::cerr << '\n';
        return usage;
      }
      write_text(example_out, std::string(*text));
      return ok;
    }

    if (*analyze) {
      const auto spec = cmt::parse_system(read_file(analyze_file));
      if (!basis_text.empty()) opts.basis_values = parse_numbers(basis_text);
      const auto report = cmt::analyze(spec, opts);
      write_text(json_out, cmt::to_json(report).dump(2) + "\n");
      if (!radial_csv_out.empty() && report.radial)
        write_text(radial_csv_out, cmt::radial_csv(*report.radial));
      if (!report.ok()) {
        for (const auto& f : report.diagnostics.failures) std::cerr << "FAILED: " << f << '\n';
        return report_failed;
      }
      return ok;
    }

    if (*simulate) {
      const auto spec = cmt::parse_system(read_file(sim_file));
      try {
        const auto traj = cmt::integrate(spec.field, x0, t_end, dt, spec.variables);
        std::ostringstream csv;
        cmt::write_csv(csv, traj);
        write_text(csv_out, csv.str());
        return ok;
      } catch (const cmt::IntegrationDiverged& e) {
        std::ostringstream csv;
        cmt::write_csv(csv, e.partial());
        write_text(csv_out, csv.str());
        std::cerr << e.what() << '\n';
        return diverged;
      }
    }
  } catch (const cmt::ParseError& e) {
    std::cerr << e.what() << '\n';
    return usage;
  } catch (const cmt::Error& e) {
    std::cerr << e.what() << '\n';
    return analysis_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return usage;
  }
  return usage;
}
