#include "nlwave/scenario.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "nlwave/transform.hpp"

namespace nlwave {

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::Linear: return "linear";
    case Scenario::PrototypeNull: return "prototype_null";
    case Scenario::QuasiCaseA: return "quasi_case_a";
    case Scenario::QuasiCaseB: return "quasi_case_b";
    case Scenario::NonnullContrast: return "nonnull_contrast";
    case Scenario::Custom: return "custom";
  }
  return "?";
}

namespace {

Scenario parse_scenario(const std::string& name, int lineno) {
  for (Scenario s : {Scenario::Linear, Scenario::PrototypeNull, Scenario::QuasiCaseA,
                     Scenario::QuasiCaseB, Scenario::NonnullContrast, Scenario::Custom})
    if (scenario_name(s) == name) return s;
  throw ConfigError("unknown scenario '" + name + "'", lineno);
}

double parse_double(const std::string& v, int lineno, const std::string& key) {
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("invalid number for " + key + ": '" + v + "'", lineno);
  return x;
}

long parse_int(const std::string& v, int lineno, const std::string& key) {
  char* end = nullptr;
  long x = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("invalid integer for " + key + ": '" + v + "'", lineno);
  return x;
}

bool parse_bool(const std::string& v, int lineno, const std::string& key) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw ConfigError("invalid boolean for " + key + ": '" + v + "'", lineno);
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

void ScenarioConfig::validate() {
  warnings.clear();
  if (grid_n < 16 || (grid_n & (grid_n - 1)) != 0)
    throw ConfigError("grid_n must be a power of two >= 16");
  if (!(half_width > 0.0)) throw ConfigError("half_width must be positive");
  if (!(t_end > 0.0)) throw ConfigError("t_end must be positive");
  if (t_end >= half_width)
    throw ConfigError("t_end must stay below half_width (a centered unit-speed pulse "
                      "reaches the boundary at t = half_width)");
  if (t_end >= 0.5 * half_width)
    warnings.push_back("t_end >= half_width/2: data supported beyond the inner half box "
                       "would wrap around before the run ends");
  if (report_every < 1) throw ConfigError("report_every must be >= 1");
  if (!(amplitude >= 0.0)) throw ConfigError("amplitude must be nonnegative");
  if (!(data_width > 0.0)) throw ConfigError("data_width must be positive");
  if (amplitude2 != 0.0 && !(data_width2 > 0.0))
    throw ConfigError("data_width2 must be positive when amplitude2 is set");
  if (!(picard_tol > 0.0)) throw ConfigError("picard_tol must be positive");
  if (picard_max < 1) throw ConfigError("picard_max must be >= 1");
  if (scenario == Scenario::Custom && tensor_path.empty())
    throw ConfigError("scenario=custom requires tensor_path");
  double h = spacing();
  double dt_eff = effective_dt();
  if (!(dt_eff > 0.0) || dt_eff > 0.5 * h)
    throw ConfigError("dt must lie in (0, 0.5 h]; h = " + std::to_string(h));
  if (noise_amp < 0.0) throw ConfigError("noise_amp must be nonnegative");
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  ScenarioConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = line;
    auto hash = s.find('#');
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key=value", lineno);
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (value.empty()) throw ConfigError("empty value for " + key, lineno);

    if (key == "scenario") cfg.scenario = parse_scenario(value, lineno);
    else if (key == "grid_n") cfg.grid_n = int(parse_int(value, lineno, key));
    else if (key == "half_width") cfg.half_width = parse_double(value, lineno, key);
    else if (key == "dt") cfg.dt = parse_double(value, lineno, key);
    else if (key == "t_end") cfg.t_end = parse_double(value, lineno, key);
    else if (key == "report_every") cfg.report_every = int(parse_int(value, lineno, key));
    else if (key == "amplitude") cfg.amplitude = parse_double(value, lineno, key);
    else if (key == "data_width") cfg.data_width = parse_double(value, lineno, key);
    else if (key == "amplitude2") cfg.amplitude2 = parse_double(value, lineno, key);
    else if (key == "data_width2") cfg.data_width2 = parse_double(value, lineno, key);
    else if (key == "tensor_path") cfg.tensor_path = value;
    else if (key == "quasi_path") cfg.quasi_path = value;
    else if (key == "picard_tol") cfg.picard_tol = parse_double(value, lineno, key);
    else if (key == "picard_max") cfg.picard_max = int(parse_int(value, lineno, key));
    else if (key == "dealias") cfg.dealias = parse_bool(value, lineno, key);
    else if (key == "seed") cfg.seed = std::uint64_t(parse_int(value, lineno, key));
    else if (key == "noise_amp") cfg.noise_amp = parse_double(value, lineno, key);
    else if (key == "output_path") cfg.output_path = value;
    else if (key == "checkpoint_path") cfg.checkpoint_path = value;
    else if (key == "format") {
      if (value == "csv") cfg.field_format = FieldFormat::Csv;
      else if (value == "binary") cfg.field_format = FieldFormat::Binary;
      else throw ConfigError("format must be csv or binary", lineno);
    } else {
      throw ConfigError("unknown key '" + key + "'", lineno);
    }
  }
  cfg.validate();
  return cfg;
}

namespace {

// Deterministic uniform in [-1, 1); mt19937_64 is fully specified, the
// standard distributions are not.
double uniform_pm1(std::mt19937_64& gen) {
  return 2.0 * ((gen() >> 11) * 0x1.0p-53) - 1.0;
}

GridField<double> scenario_bump(const ScenarioConfig& cfg, const PeriodicGrid<double>& g,
                                bool derivative_along_x1) {
  GridField<double> f(g);
  auto add_gaussian = [&](double amp, double width) {
    if (amp == 0.0) return;
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i < g.n; ++i) {
        double x1 = g.coord(i), x2 = g.coord(j);
        double e = std::exp(-(x1 * x1 + x2 * x2) / (width * width));
        f.values(i, j) += derivative_along_x1 ? amp * (-2.0 * x1 / (width * width)) * e
                                              : amp * e;
      }
  };
  add_gaussian(cfg.amplitude, cfg.data_width);
  if (cfg.amplitude2 != 0.0) add_gaussian(cfg.amplitude2, cfg.data_width2);

  if (cfg.noise_amp > 0.0) {
    std::mt19937_64 gen(cfg.seed);
    const int modes = 3;
    double L = g.half_width;
    Array2<double> x1 = coordinate_array(g, 0);
    Array2<double> x2 = coordinate_array(g, 1);
    Array2<double> envelope =
        (-(x1.square() + x2.square()) / (cfg.data_width * cfg.data_width)).exp();
    Array2<double> noise = Array2<double>::Zero(g.n, g.n);
    for (int m1 = 0; m1 <= modes; ++m1)
      for (int m2 = -modes; m2 <= modes; ++m2) {
        double c = uniform_pm1(gen), s = uniform_pm1(gen);
        Array2<double> phase = M_PI / L * (m1 * x1 + m2 * x2);
        noise += c * phase.cos() + s * phase.sin();
      }
    f.values += cfg.noise_amp * cfg.amplitude * envelope * noise;
  }
  return f;
}

QuasiNullForm<double> scenario_quasi(const ScenarioConfig& cfg, bool case_a) {
  if (!cfg.quasi_path.empty()) return load_quasi(cfg.quasi_path);
  QuasiNullForm<double> q;
  q.m = minkowski_form<double>();
  q.a = case_a ? Eigen::Vector3d(0.0, 1.0, 0.0) : Eigen::Vector3d(1.0, 0.25, -0.35);
  return q;
}

}  // namespace

FullyNonlinearIVP<double> build_scenario_ivp(const ScenarioConfig& cfg) {
  PeriodicGrid<double> g(cfg.grid_n, cfg.half_width);
  switch (cfg.scenario) {
    case Scenario::Linear: {
      FullyNonlinearIVP<double> ivp;
      ivp.tensor.symmetric_flag = true;  // zero tensor
      ivp.phi = scenario_bump(cfg, g, false);
      ivp.psi = GridField<double>(g);
      return ivp;
    }
    case Scenario::PrototypeNull: {
      GridField<double> v0 = scenario_bump(cfg, g, false);
      GridField<double> v1(g);
      return transform_prototype(v0, v1);
    }
    case Scenario::QuasiCaseA: {
      QuasilinearIVP<double> q;
      q.form = scenario_quasi(cfg, true);
      // derivative-of-gaussian data keeps the line integrals zero, so the
      // transformed data decays
      q.v0 = scenario_bump(cfg, g, true);
      q.v1 = GridField<double>(g);
      return transform_case_a(q);
    }
    case Scenario::QuasiCaseB: {
      QuasilinearIVP<double> q;
      q.form = scenario_quasi(cfg, false);
      q.v0 = scenario_bump(cfg, g, false);
      q.v1 = GridField<double>(g);
      return transform_case_b(q, q.v1);  // preset takes d_t v(0) = v1
    }
    case Scenario::NonnullContrast: {
      FullyNonlinearIVP<double> ivp;
      NullFormTensor<double> bad;
      bad(0, 0, 0, 0) = 1.0;
      ivp.tensor = symmetrize(bad);
      ivp.phi = scenario_bump(cfg, g, false);
      ivp.psi = scenario_bump(cfg, g, false);
      return ivp;
    }
    case Scenario::Custom: {
      FullyNonlinearIVP<double> ivp;
      ivp.tensor = symmetrize(load_tensor(cfg.tensor_path));
      ivp.phi = scenario_bump(cfg, g, false);
      ivp.psi = scenario_bump(cfg, g, false);
      return ivp;
    }
  }
  throw std::logic_error("unreachable scenario");
}

RunResult run(const ScenarioConfig& cfg) {
  auto t_start = std::chrono::steady_clock::now();

  RunResult result;
  result.summary.scenario = cfg.scenario;
  result.summary.notes = cfg.warnings;

  FullyNonlinearIVP<double> ivp = build_scenario_ivp(cfg);
  for (const auto& note : ivp.notes) result.summary.notes.push_back(note);

  SolverConfig<double> scfg;
  scfg.dt = cfg.effective_dt();
  scfg.picard_tol = cfg.picard_tol;
  scfg.picard_max = cfg.picard_max;
  scfg.dealias = cfg.dealias;
  scfg.report_every = cfg.report_every;

  PeriodicGrid<double> g(cfg.grid_n, cfg.half_width);
  Spectral<double> sp(g);

  auto observer = [&](const Observation<double>& obs) {
    EnergyReport<double> rep = compute_report(obs.state, obs.w, obs.u_ttt, ivp.tensor,
                                              obs.picard.iterations, sp);
    result.reports.push_back(rep);
    result.summary.max_picard_iters =
        std::max(result.summary.max_picard_iters, obs.picard.iterations);
    result.summary.picard_ambiguous |= obs.picard.ambiguous;
  };

  try {
    EvolveResult<double> evolved = evolve<double>(ivp, scfg, cfg.t_end, observer);
    result.summary.completed = true;
    if (!cfg.checkpoint_path.empty())
      save_checkpoint(evolved.final_state, cfg.checkpoint_path, cfg.field_format);
  } catch (const NonConvergence& e) {
    result.summary.completed = false;
    result.summary.failure_time = e.t;
    result.summary.notes.push_back(std::string("NonConvergence: ") + e.what());
  }

  // summary statistics over the collected reports
  const auto& reports = result.reports;
  if (!reports.empty()) {
    result.summary.e1_initial = reports.front().e1;
    result.summary.e1_final = reports.back().e1;
    bool first_t1 = true;
    for (const auto& r : reports) {
      result.summary.good_deriv_max = std::max(result.summary.good_deriv_max, r.good_deriv);
      if (r.t >= 1.0) {
        if (first_t1) {
          result.summary.ks_min = result.summary.ks_max = r.ks;
          result.summary.lemma31_t1 = r.lemma31;
          first_t1 = false;
        }
        result.summary.ks_min = std::min(result.summary.ks_min, r.ks);
        result.summary.ks_max = std::max(result.summary.ks_max, r.ks);
        result.summary.lemma31_max = std::max(result.summary.lemma31_max, r.lemma31);
      }
    }
    auto fit_channel = [&](auto pick) -> std::optional<DecayFit> {
      std::vector<std::pair<double, double>> series;
      for (const auto& r : reports)
        if (r.t >= 5.0 && pick(r) > 0.0) series.push_back({r.t, pick(r)});
      if (series.size() < 8) {
        series.clear();
        for (const auto& r : reports)
          if (r.t >= 1.0 && pick(r) > 0.0) series.push_back({r.t, pick(r)});
      }
      if (series.size() < 8) return std::nullopt;
      return fit_growth(series);
    };
    result.summary.fit_e1 = fit_channel([](const EnergyReport<double>& r) { return r.e1; });
    result.summary.fit_e2 = fit_channel([](const EnergyReport<double>& r) { return r.e2; });
  }

  result.summary.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

  if (!reports.empty()) emit_tables(reports, result.summary, cfg.output_path);
  return result;
}

void emit_tables(const std::vector<EnergyReport<double>>& reports,
                 const RunSummary& summary, const std::string& csv_path) {
  if (reports.empty()) throw std::invalid_argument("emit_tables: empty run log");
  write_report_csv(reports, csv_path);

  std::ofstream out(csv_path + ".summary.txt");
  if (!out) throw IoError("cannot open for writing: " + csv_path + ".summary.txt");
  out << "scenario: " << scenario_name(summary.scenario) << '\n';
  out << "completed: " << (summary.completed ? "yes" : "no") << '\n';
  if (summary.failure_time)
    out << "failure_time: " << *summary.failure_time << '\n';
  out << "reports: " << reports.size() << '\n';
  out << "E1_initial: " << summary.e1_initial << '\n';
  out << "E1_final: " << summary.e1_final << '\n';
  auto print_fit = [&](const char* name, const std::optional<DecayFit>& fit) {
    out << name << "_gamma_hat: ";
    if (fit)
      out << fit->gamma_hat << "  window=[" << fit->t0 << ", " << fit->t1
          << "]  residual=" << fit->residual << '\n';
    else
      out << "n/a (fewer than 8 usable samples)\n";
  };
  print_fit("E1", summary.fit_e1);
  print_fit("E2", summary.fit_e2);
  out << "ks_ratio_min: " << summary.ks_min << '\n';
  out << "ks_ratio_max: " << summary.ks_max << '\n';
  out << "good_deriv_max: " << summary.good_deriv_max << '\n';
  out << "lemma31_t1: " << summary.lemma31_t1 << '\n';
  out << "lemma31_max: " << summary.lemma31_max << '\n';
  out << "max_picard_iters: " << summary.max_picard_iters << '\n';
  out << "picard_ambiguous: " << (summary.picard_ambiguous ? "yes" : "no") << '\n';
  out << "wall_time_s: " << summary.wall_time_s << '\n';
  for (const auto& note : summary.notes) out << "note: " << note << '\n';
  if (!out) throw IoError("write failed: " + csv_path + ".summary.txt");
}

}  // namespace nlwave
