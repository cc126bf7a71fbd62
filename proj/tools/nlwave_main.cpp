// nlwave: scenario runner and tensor tools for 2D nonlinear wave equations
// with null-form quadratic nonlinearities.
//
// Exit codes: 0 success, 1 I/O error, 2 solver non-convergence, 3 bad
// configuration or arguments.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "nlwave/scenario.hpp"
#include "nlwave/transform.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitNonConvergence = 2;
constexpr int kExitConfig = 3;

struct CliOptions {
  bool quiet = false;
  std::string output;
  std::string format = "csv";
};

nlwave::FieldFormat parse_format(const std::string& f) {
  if (f == "csv") return nlwave::FieldFormat::Csv;
  if (f == "binary") return nlwave::FieldFormat::Binary;
  throw nlwave::ConfigError("--format must be csv or binary");
}

int cmd_run(const std::string& config_path, const CliOptions& opt) {
  nlwave::ScenarioConfig cfg = nlwave::load_config(config_path);
  if (!opt.output.empty()) cfg.output_path = opt.output;
  cfg.field_format = parse_format(opt.format);
  for (const auto& w : cfg.warnings)
    if (!opt.quiet) std::cerr << "warning: " << w << '\n';

  nlwave::RunResult result = nlwave::run(cfg);
  const auto& s = result.summary;
  if (!opt.quiet) {
    std::cout << "scenario " << nlwave::scenario_name(s.scenario)
              << (s.completed ? " completed" : " stopped") << " after "
              << result.reports.size() << " reports";
    if (s.failure_time) std::cout << " (failure at t = " << *s.failure_time << ")";
    std::cout << "\nwrote " << cfg.output_path << " and " << cfg.output_path
              << ".summary.txt\n";
    if (s.fit_e2)
      std::cout << "E2 growth exponent " << s.fit_e2->gamma_hat << " over ["
                << s.fit_e2->t0 << ", " << s.fit_e2->t1 << "]\n";
  }
  return s.completed ? kExitOk : kExitNonConvergence;
}

int cmd_check_tensor(const std::string& path, double tol, const CliOptions& opt) {
  nlwave::NullFormTensor<double> t = nlwave::load_tensor(path);
  int nonzero = 0;
  for (int i = 0; i < 81; ++i)
    if (t.coeffs(i) != 0.0) ++nonzero;

  double dense_max = 0.0;
  for (int j = 0; j < 720; ++j) {
    double s = nlwave::null_symbol(t, nlwave::ConeDirection<double>(2.0 * M_PI * j / 720.0));
    dense_max = std::max(dense_max, std::abs(s));
  }
  bool null_verdict = nlwave::is_null(t, tol);
  bool symmetric = t.symmetries_hold(1e-14 * std::max(1.0, double(t.max_abs())));

  if (!opt.quiet) {
    std::cout << path << ": " << nonzero << " nonzero entries, max |coeff| = "
              << double(t.max_abs()) << '\n';
    std::cout << "pair symmetries: " << (symmetric ? "yes" : "no") << '\n';
    std::cout << "null condition (tol " << tol << "): " << (null_verdict ? "yes" : "no")
              << '\n';
    std::cout << "max |symbol| over 720 cone angles: " << dense_max << '\n';
  } else {
    std::cout << (null_verdict ? "null" : "not-null") << '\n';
  }
  return kExitOk;
}

int cmd_transform(const std::string& quasi_path, const std::string& which_case, int n,
                  double half_width, double amplitude, double width,
                  const CliOptions& opt) {
  using namespace nlwave;
  PeriodicGrid<double> g(n, half_width);

  auto gaussian = [&](bool derivative) {
    return sample_field<double>(g, [&](double x1, double x2) {
      double e = amplitude * std::exp(-(x1 * x1 + x2 * x2) / (width * width));
      return derivative ? -2.0 * x1 / (width * width) * e : e;
    });
  };

  FullyNonlinearIVP<double> out;
  if (which_case == "prototype") {
    out = transform_prototype(gaussian(false), GridField<double>(g));
  } else {
    QuasiNullForm<double> form = load_quasi(quasi_path);
    if (form.degenerate())
      std::cerr << "warning: A = 0 degenerates the nonlinearity; the lifted tensor "
                   "is zero and the equation is the linear wave equation\n";
    QuasilinearIVP<double> ivp;
    ivp.form = form;
    if (which_case == "a") {
      ivp.v0 = gaussian(true);  // zero line integrals along x1
      ivp.v1 = GridField<double>(g);
      out = transform_case_a(ivp);
    } else {
      ivp.v0 = gaussian(false);
      ivp.v1 = GridField<double>(g);
      out = transform_case_b(ivp, ivp.v1);
    }
  }

  for (const auto& note : out.notes) std::cerr << "warning: " << note << '\n';

  std::string prefix = opt.output.empty() ? "transformed" : opt.output;
  FieldFormat ff = parse_format(opt.format);
  std::string ext = ff == FieldFormat::Csv ? ".csv" : ".bin";
  save_field(out.phi, prefix + "_phi" + ext, ff);
  save_field(out.psi, prefix + "_psi" + ext, ff);
  save_tensor(out.tensor, prefix + ".tensor");
  if (!opt.quiet)
    std::cout << "wrote " << prefix << "_phi" << ext << ", " << prefix << "_psi" << ext
              << ", " << prefix << ".tensor\n";
  return kExitOk;
}

int cmd_fit(const std::string& csv_path, const std::string& column, double t0, double t1,
            const CliOptions& opt) {
  auto reports = nlwave::read_report_csv(csv_path);
  std::vector<std::pair<double, double>> series;
  for (const auto& r : reports) {
    if (r.t < t0 || r.t > t1) continue;
    double value = 0.0;
    if (column == "E1") value = r.e1;
    else if (column == "E2") value = r.e2;
    else if (column == "ghost_E") value = r.ghost_e;
    else throw nlwave::ConfigError("--column must be E1, E2 or ghost_E");
    series.push_back({r.t, value});
  }
  nlwave::DecayFit fit = nlwave::fit_growth(series);
  if (opt.quiet) {
    std::printf("%.17g\n", fit.gamma_hat);
  } else {
    std::printf("%s ~ t^%.6f over [%g, %g] (%d samples, rms residual %.3e)\n",
                column.c_str(), fit.gamma_hat, fit.t0, fit.t1, fit.samples, fit.residual);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for 2D nonlinear wave equations with null forms"};
  app.require_subcommand(1);

  CliOptions opt;

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "run a scenario from a config file");
  run_cmd->add_option("config", config_path, "flat key=value config file")->required();
  run_cmd->add_option("--output", opt.output, "override output_path");
  run_cmd->add_option("--format", opt.format, "field dump format: csv|binary");

  std::string tensor_path;
  double tol = nlwave::kDefaultNullTol;
  auto* check_cmd = app.add_subcommand("check-tensor", "verify symmetry and null condition");
  check_cmd->add_option("tensor", tensor_path, "tensor file")->required();
  check_cmd->add_option("--tol", tol, "relative null tolerance");

  std::string quasi_path, which_case;
  int n = 128;
  double half_width = 8.0, amplitude = 0.1, width = 1.5;
  auto* tr_cmd = app.add_subcommand("transform", "turn a quasilinear problem into data");
  tr_cmd->add_option("quasi", quasi_path, "quasi form file ('-' for prototype)")->required();
  tr_cmd->add_option("--case", which_case, "a|b|prototype")->required();
  tr_cmd->add_option("--n", n, "grid points per axis");
  tr_cmd->add_option("--half-width", half_width, "domain half width L");
  tr_cmd->add_option("--amplitude", amplitude, "data amplitude");
  tr_cmd->add_option("--width", width, "data width");
  tr_cmd->add_option("--output", opt.output, "output prefix");
  tr_cmd->add_option("--format", opt.format, "field format: csv|binary");

  std::string csv_path, column = "E2";
  double t0 = 5.0, t1 = std::numeric_limits<double>::infinity();
  auto* fit_cmd = app.add_subcommand("fit", "fit a growth exponent from a run CSV");
  fit_cmd->add_option("csv", csv_path, "report CSV from a run")->required();
  fit_cmd->add_option("--column", column, "E1|E2|ghost_E");
  fit_cmd->add_option("--t0", t0, "window start");
  fit_cmd->add_option("--t1", t1, "window end");

  for (auto* sub : {run_cmd, check_cmd, tr_cmd, fit_cmd})
    sub->add_flag("--quiet", opt.quiet, "suppress informational output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(config_path, opt);
    if (check_cmd->parsed()) return cmd_check_tensor(tensor_path, tol, opt);
    if (tr_cmd->parsed()) {
      if (which_case != "a" && which_case != "b" && which_case != "prototype")
        throw nlwave::ConfigError("--case must be a, b or prototype");
      return cmd_transform(quasi_path, which_case, n, half_width, amplitude, width, opt);
    }
    if (fit_cmd->parsed()) return cmd_fit(csv_path, column, t0, t1, opt);
  } catch (const nlwave::NonConvergence& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const nlwave::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const nlwave::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitConfig;
}
