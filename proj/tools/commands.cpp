// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "carleman/carleman_system.hpp"
#include "carleman/diagnostics.hpp"
#include "carleman/errors.hpp"
#include "carleman/models.hpp"
#include "carleman/polyode.hpp"
#include "carleman/quadratize.hpp"
#include "carleman/solver.hpp"

namespace carleman::cli {

namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// ODE source
// ---------------------------------------------------------------------------

struct SourceOptions {
  std::string preset;
  std::string ode_path;
  std::optional<double> u_in;
  bool verbatim_reaction = false;
  bool expanded_reaction = false;
  bool strict_origin = false;
  std::uint64_t seed = 1;
};

void add_source_options(CLI::App& cmd, SourceOptions& s) {
  auto* preset = cmd.add_option("--preset", s.preset,
                                "Built-in system: fig1, fig2, fig2-text, scalar-cubic, logistic, random-cubic");
  auto* ode = cmd.add_option("--ode", s.ode_path, "ODE spec JSON file");
  preset->excludes(ode);
  cmd.add_option("--u-in", s.u_in, "Override the reaction-diffusion plateau height");
  auto* verb = cmd.add_flag("--verbatim-reaction", s.verbatim_reaction,
                            "Reaction-diffusion diagonal built from +a");
  auto* exp = cmd.add_flag("--expanded-reaction", s.expanded_reaction,
                           "Reaction-diffusion diagonal built from -a (default)");
  verb->excludes(exp);
  cmd.add_flag("--strict-origin", s.strict_origin, "Plateau on 0 < y < y* instead of 0 <= y < y*");
  cmd.add_option("--seed", s.seed, "Seed for random presets")->capture_default_str();
}

bool is_rd_preset(const std::string& name) {
  const auto names = rd_preset_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

PolynomialODE load_source(const SourceOptions& s) {
  if (s.preset.empty() == s.ode_path.empty()) throw InvalidArgument("exactly one of --preset or --ode is required");
  if (!s.ode_path.empty()) return load_ode_spec(s.ode_path);
  if (is_rd_preset(s.preset)) {
    RDParams p = rd_preset(s.preset);
    if (s.u_in) p.u_in = *s.u_in;
    if (s.verbatim_reaction) p.expanded_reaction = false;
    if (s.strict_origin) p.inclusive_origin = false;
    return build_reaction_diffusion(p);
  }
  if (s.preset == "scalar-cubic") return scalar_cubic();
  if (s.preset == "logistic") return scalar_logistic();
  if (s.preset == "random-cubic") return random_polynomial_ode(2, 3, s.seed);
  throw InvalidArgument("unknown preset '" + s.preset + "'");
}

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec || !fs::is_directory(p)) throw InvalidArgument("cannot create output directory '" + dir + "'");
  return p;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write '" + path.string() + "'");
  f << std::setprecision(17);
  return f;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  auto f = open_out(path);
  f << j.dump(2) << '\n';
  if (!f) throw Error("failed writing '" + path.string() + "'");
}

void write_error_csv(const fs::path& path, const SolutionError& e) {
  auto f = open_out(path);
  f << "t,abs_err_l2\n";
  for (Index j = 0; j < e.times.size(); ++j) f << e.times[j] << ',' << e.abs_l2[j] << '\n';
  if (!f) throw Error("failed writing '" + path.string() + "'");
}

std::vector<std::string> trajectory_header(Index n) {
  std::vector<std::string> h{"t"};
  for (Index i = 1; i <= n; ++i) h.push_back("x" + std::to_string(i));
  return h;
}

nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nullptr; }

// ---------------------------------------------------------------------------
// Simulation core shared by simulate and converge
// ---------------------------------------------------------------------------

enum class Integrator { block, euler, rk4 };

struct SimOptions {
  int level = 3;
  double horizon = 1.0;
  std::optional<Index> steps;
  std::optional<Index> padding;
  bool quadratized = false;
  Integrator integrator = Integrator::block;
  SolveMode solve_mode = SolveMode::substitution;
  Index oracle_steps = kDefaultOracleSteps;
};

struct SimResult {
  CarlemanSystem system;
  CarlemanSolution solution;
  SolutionError error;
  Index steps = 0;
  Index padding = 0;
  std::optional<double> p_measured;
  std::optional<double> p_bound;
  double q = 0.0;
};

std::string integrator_name(Integrator i) {
  switch (i) {
    case Integrator::block: return "block";
    case Integrator::euler: return "euler";
    case Integrator::rk4: return "rk4";
  }
  return "block";
}

SimResult simulate_core(const PolynomialODE& ode, const Trajectory& ref, const SimOptions& o) {
  if (o.level < 1) throw InvalidArgument("--N must be >= 1");
  SimResult r;
  r.system = o.quadratized ? assemble_truncated(quadratize(ode).ode, o.level) : assemble_truncated(ode, o.level);

  if (o.steps) {
    r.steps = *o.steps;
  } else if (o.integrator == Integrator::rk4) {
    // RK4 tolerates h ||A_N|| up to ~2.8; 1000 steps align with the oracle grid.
    r.steps = std::max<Index>(1000, default_steps(r.system, o.horizon) / 5);
  } else {
    r.steps = default_steps(r.system, o.horizon);
  }
  if (r.steps == 0) throw InvalidArgument("--m must be >= 1");

  switch (o.integrator) {
    case Integrator::block: {
      r.padding = o.padding ? *o.padding : r.steps;
      const BlockEulerSystem bes = assemble_block(r.system, o.horizon, r.steps, r.padding);
      r.solution = solve_block(bes, o.solve_mode);
      r.p_measured = measured_p(r.solution, r.steps, r.padding);
      break;
    }
    case Integrator::euler: r.solution = euler_integrate(r.system, o.horizon, r.steps); break;
    case Integrator::rk4: r.solution = rk4_integrate(r.system, o.horizon, r.steps); break;
  }

  if (o.quadratized) {
    for (auto& x : r.solution.extract) x = x.segment(0, ode.dim());
  }
  r.error = solution_error(r.solution, ref);
  const double xT = ref.states.back().norm();
  if (xT > 0.0) {
    r.q = ode.x0().norm() / xT;
    if (r.p_measured && r.q > 0.0) r.p_bound = p_measure_bound(r.steps, r.padding, o.level, r.q);
  }
  return r;
}

Integrator parse_integrator(const std::string& s) {
  if (s == "block") return Integrator::block;
  if (s == "euler") return Integrator::euler;
  if (s == "rk4") return Integrator::rk4;
  throw InvalidArgument("unknown integrator '" + s + "'");
}

std::pair<int, int> parse_range(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw InvalidArgument("--N-range expects a:b");
  auto parse = [&](std::string_view part) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || ptr != part.data() + part.size()) throw InvalidArgument("--N-range expects integers a:b");
    return v;
  };
  const std::string_view view(s);
  const int a = parse(view.substr(0, colon));
  const int b = parse(view.substr(colon + 1));
  if (a < 1 || b < a) throw InvalidArgument("--N-range needs 1 <= a <= b");
  return {a, b};
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct SimulateArgs {
  SourceOptions source;
  int level = 3;
  double horizon = 1.0;
  std::optional<Index> steps;
  std::optional<Index> padding;
  bool direct = false;
  bool quadratized = false;
  std::string integrator = "block";
  std::string solver = "substitution";
  std::string out_dir = "carleman_out";
  std::string export_matrix;
  Index oracle_steps = kDefaultOracleSteps;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const PolynomialODE ode = load_source(a.source);
  SimOptions o;
  o.level = a.level;
  o.horizon = a.horizon;
  o.steps = a.steps;
  o.padding = a.padding;
  o.quadratized = a.quadratized;
  o.integrator = parse_integrator(a.integrator);
  if (a.solver != "substitution" && a.solver != "gmres") throw InvalidArgument("--solver must be substitution or gmres");
  o.solve_mode = a.solver == "gmres" ? SolveMode::gmres : SolveMode::substitution;
  o.oracle_steps = a.oracle_steps;

  const fs::path dir = prepare_dir(a.out_dir);
  const Trajectory ref = direct_integrate(ode, a.horizon, a.oracle_steps);
  const SimResult r = simulate_core(ode, ref, o);

  if (!a.export_matrix.empty()) {
    auto f = open_out(a.export_matrix);
    write_matrix_market(r.system.generator, f);
  }

  const fs::path solution_csv = dir / "solution.csv";
  const fs::path error_csv = dir / "error.csv";
  const fs::path summary_json = dir / "summary.json";
  write_trajectory_csv(r.solution.trajectory(), solution_csv);
  write_error_csv(error_csv, r.error);

  nlohmann::json summary = {{"N", a.level},
                            {"h", a.horizon / static_cast<double>(r.steps)},
                            {"m", r.steps},
                            {"p", r.padding},
                            {"T", a.horizon},
                            {"n", ode.dim()},
                            {"k", ode.degree()},
                            {"n_c", r.system.dim()},
                            {"path", a.quadratized ? "quadratized" : "direct"},
                            {"integrator", integrator_name(o.integrator)},
                            {"max_time_error", r.error.max_time_error},
                            {"eps_normalized", r.error.eps_normalized},
                            {"q", r.q},
                            {"p_measured", optional_json(r.p_measured)},
                            {"p_bound", optional_json(r.p_bound)},
                            {"warnings", r.system.warnings}};
  write_json(summary_json, summary);

  validate_csv(solution_csv, trajectory_header(ode.dim()));
  validate_csv(error_csv, {"t", "abs_err_l2"});
  validate_json(summary_json, {"N", "h", "max_time_error", "eps_normalized", "p_measured", "p_bound"});

  for (const auto& w : r.system.warnings) out << "warning: " << w << '\n';
  out << std::setprecision(6) << "N=" << a.level << " m=" << r.steps << " p=" << r.padding
      << " max_time_error=" << r.error.max_time_error << " eps_normalized=" << r.error.eps_normalized << '\n';
  if (r.p_measured) out << "p_measured=" << *r.p_measured << " p_bound=" << optional_json(r.p_bound).dump() << '\n';
  out << "wrote " << solution_csv.string() << ", " << error_csv.string() << ", " << summary_json.string() << '\n';
  return kExitOk;
}

struct ConvergeArgs {
  SourceOptions source;
  std::string range = "2:5";
  double horizon = 1.0;
  std::optional<Index> steps;
  bool quadratized = false;
  std::string integrator = "rk4";
  std::string out_dir = "carleman_out";
  Index oracle_steps = kDefaultOracleSteps;
};

int cmd_converge(const ConvergeArgs& a, std::ostream& out, std::ostream& err) {
  const PolynomialODE ode = load_source(a.source);
  const auto [lo, hi] = parse_range(a.range);
  SimOptions o;
  o.horizon = a.horizon;
  o.steps = a.steps;
  o.padding = Index{0};
  o.quadratized = a.quadratized;
  o.integrator = parse_integrator(a.integrator);

  const fs::path dir = prepare_dir(a.out_dir);
  const Trajectory ref = direct_integrate(ode, a.horizon, a.oracle_steps);

  std::vector<std::pair<int, double>> rows;
  for (int N = lo; N <= hi; ++N) {
    o.level = N;
    const SimResult r = simulate_core(ode, ref, o);
    const fs::path per_n = dir / ("error_N" + std::to_string(N) + ".csv");
    write_error_csv(per_n, r.error);
    validate_csv(per_n, {"t", "abs_err_l2"});
    rows.emplace_back(N, r.error.max_time_error);
    out << std::setprecision(6) << "N=" << N << " m=" << r.steps << " max_time_error=" << r.error.max_time_error
        << '\n';
  }

  const fs::path csv = dir / "convergence.csv";
  {
    auto f = open_out(csv);
    f << "N,max_time_error\n";
    for (const auto& [N, e] : rows) f << N << ',' << e << '\n';
  }
  validate_csv(csv, {"N", "max_time_error"});
  out << "wrote " << csv.string() << '\n';

  bool decreasing = true;
  for (Index i = 1; i < rows.size(); ++i) decreasing = decreasing && rows[i].second < rows[i - 1].second;

  std::optional<double> rk0;
  if (ode.degree() >= 2 && !ode.has_forcing()) {
    try {
      rk0 = compute_Rk0(ode);
    } catch (const Error& e) {
      err << "warning: Rk0 unavailable: " << e.what() << '\n';
    }
  }
  if (rk0) out << "Rk0=" << std::setprecision(6) << *rk0 << '\n';
  if (!decreasing) {
    if (rk0 && *rk0 < 1.0) {
      err << "error: Rk0 < 1 but max_time_error is not strictly decreasing in N\n";
      return kExitRuntime;
    }
    err << "warning: max_time_error is not strictly decreasing in N\n";
  }
  return kExitOk;
}

struct DiagnoseArgs {
  SourceOptions source;
  int level = 3;
  double horizon = 1.0;
  std::optional<Index> steps;
  std::optional<Index> padding;
  double eps = 1e-2;
  std::optional<double> re_lambda1;
  std::string out_dir = "carleman_out";
  std::string out;
};

void print_row(std::ostream& out, const std::string& name, const nlohmann::json& v) {
  out << "  " << std::left << std::setw(18) << name << (v.is_null() ? std::string("-") : v.dump()) << '\n';
}

int cmd_diagnose(const DiagnoseArgs& a, std::ostream& out) {
  const PolynomialODE ode = load_source(a.source);
  DiagnosticsOptions o;
  o.level = a.level;
  o.horizon = a.horizon;
  o.eps = a.eps;
  o.steps = a.steps;
  o.padding = a.padding;
  o.re_lambda1 = a.re_lambda1;
  const DiagnosticsReport r = diagnose(ode, o);
  const nlohmann::json j = to_json(r);

  const fs::path path = a.out.empty() ? prepare_dir(a.out_dir) / "diagnostics.json" : fs::path(a.out);
  write_json(path, j);
  validate_json(path, {"re_lambda1", "r2", "rk", "rk0", "gamma", "q", "q_k", "s", "s_k", "n_c", "cond_estimate",
                       "p_measure_bound", "complexity_expr"});

  out << "diagnostics (n=" << ode.dim() << ", k=" << ode.degree() << ")\n";
  for (const char* key : {"re_lambda1", "re_lambda1_tilde", "r2", "rk", "rk0", "gamma", "q", "q_k", "s", "s_k",
                          "s_k_bound", "n_c", "N", "m", "p", "cond_estimate", "p_measure_bound", "complexity_expr"}) {
    print_row(out, key, j.at(key));
  }
  for (const auto& w : r.warnings) out << "warning: " << w << '\n';
  out << j.dump(2) << '\n';
  return kExitOk;
}

struct EquivalenceArgs {
  SourceOptions source;
  std::vector<int> levels{2};
  double horizon = 1.0;
  double step = 1e-3;
  std::optional<double> tol;
  std::string out_dir = "carleman_out";
};

int cmd_equivalence(const EquivalenceArgs& a, std::ostream& out, std::ostream& err) {
  const PolynomialODE ode = load_source(a.source);
  const QuadraticODE q = quadratize(ode);
  const ConsistencyReport consistency = rhs_consistency_check(ode, q, 100);

  nlohmann::json runs = nlohmann::json::array();
  double worst = 0.0;
  for (int N : a.levels) {
    const EquivalenceReport r = equivalence_check(ode, N, a.horizon, a.step);
    runs.push_back(to_json(r));
    worst = std::max(worst, r.max_discrepancy);
    out << "N=" << N << " N'=" << r.direct_level << " max_discrepancy=" << std::setprecision(6) << r.max_discrepancy
        << '\n';
  }
  const nlohmann::json j = {{"max_discrepancy", worst},
                            {"trials", runs.size()},
                            {"runs", runs},
                            {"rhs_consistency", to_json(consistency)}};
  const fs::path path = prepare_dir(a.out_dir) / "equivalence.json";
  write_json(path, j);
  validate_json(path, {"max_discrepancy", "trials", "runs", "rhs_consistency"});
  out << "rhs consistency: " << (consistency.passed ? "ok" : "FAILED") << " (max relative "
      << consistency.max_relative_discrepancy << ")\n";
  out << "wrote " << path.string() << '\n';
  if (!consistency.passed) {
    err << "error: quadratized right-hand side disagrees with the original system\n";
    return kExitRuntime;
  }
  if (a.tol && worst > *a.tol) {
    err << "error: max_discrepancy " << worst << " exceeds --tol " << *a.tol << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

struct QuadratizeArgs {
  SourceOptions source;
  std::string out;
  std::string out_dir = "carleman_out";
};

int cmd_quadratize(const QuadratizeArgs& a, std::ostream& out) {
  const PolynomialODE ode = load_source(a.source);
  const QuadraticODE q = quadratize(ode);
  const fs::path path = a.out.empty() ? prepare_dir(a.out_dir) / "quadratized.json" : fs::path(a.out);
  save_ode_spec(q.ode, path);
  if (!(load_ode_spec(path) == q.ode)) throw Error("quadratized spec did not round-trip through '" + path.string() + "'");
  out << "lifted dimension " << q.lift_dim << " (n=" << q.source_dim << ", k=" << q.source_degree << ")\n";
  out << "wrote " << path.string() << '\n';
  return kExitOk;
}

struct ExportArgs {
  SourceOptions source;
  std::string out;
};

int cmd_export(const ExportArgs& a, std::ostream& out) {
  const PolynomialODE ode = load_source(a.source);
  save_ode_spec(ode, a.out);
  if (!(load_ode_spec(a.out) == ode)) throw Error("spec did not round-trip through '" + a.out + "'");
  out << "wrote " << a.out << '\n';
  return kExitOk;
}

}  // namespace

// ---------------------------------------------------------------------------
// Output validation
// ---------------------------------------------------------------------------

void validate_csv(const fs::path& path, const std::vector<std::string>& header) {
  std::ifstream f(path);
  if (!f) throw Error("cannot reopen '" + path.string() + "'");
  std::string line;
  if (!std::getline(f, line)) throw Error("'" + path.string() + "' is empty");
  std::string expected;
  for (Index i = 0; i < header.size(); ++i) expected += (i ? "," : "") + header[i];
  if (line != expected) throw Error("'" + path.string() + "' header is '" + line + "', expected '" + expected + "'");
  Index rows = 0;
  while (std::getline(f, line)) {
    ++rows;
    std::istringstream cells(line);
    std::string cell;
    Index count = 0;
    while (std::getline(cells, cell, ',')) {
      ++count;
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0' || !std::isfinite(v)) {
        throw Error("'" + path.string() + "' row " + std::to_string(rows) + " has a non-numeric cell '" + cell + "'");
      }
    }
    if (count != header.size()) {
      throw Error("'" + path.string() + "' row " + std::to_string(rows) + " has " + std::to_string(count) +
                  " cells");
    }
  }
  if (rows == 0) throw Error("'" + path.string() + "' has no data rows");
}

nlohmann::json validate_json(const fs::path& path, const std::vector<std::string>& required) {
  std::ifstream f(path);
  if (!f) throw Error("cannot reopen '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw Error("'" + path.string() + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw Error("'" + path.string() + "' is not a JSON object");
  for (const auto& key : required) {
    if (!j.contains(key)) throw Error("'" + path.string() + "' lacks key '" + key + "'");
  }
  return j;
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Carleman linearization of polynomial ODEs"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Solve the truncated Carleman system and compare with RK4");
  add_source_options(*simulate, sim.source);
  simulate->add_option("--N", sim.level, "Truncation level")->capture_default_str();
  simulate->add_option("--T", sim.horizon, "Horizon")->capture_default_str();
  simulate->add_option("--m", sim.steps, "Time steps (default: h ||A_N|| <= 0.1)");
  simulate->add_option("--p", sim.padding, "Padding blocks for the block solve (default: m)");
  auto* direct = simulate->add_flag("--direct-cl", sim.direct, "Linearize the system directly (default)");
  auto* quad = simulate->add_flag("--quadratized-cl", sim.quadratized, "Linearize the quadratic lift");
  direct->excludes(quad);
  simulate->add_option("--integrator", sim.integrator, "block, euler or rk4")->capture_default_str();
  simulate->add_option("--solver", sim.solver, "Block solve: substitution or gmres")->capture_default_str();
  simulate->add_option("--export-matrix", sim.export_matrix, "Write A_N as MatrixMarket");
  simulate->add_option("--oracle-steps", sim.oracle_steps, "RK4 reference steps")->capture_default_str();
  simulate->add_option("--out-dir", sim.out_dir, "Output directory")->capture_default_str();

  ConvergeArgs conv;
  auto* converge = app.add_subcommand("converge", "Max-over-time error across truncation levels");
  add_source_options(*converge, conv.source);
  converge->add_option("--N-range", conv.range, "Levels a:b")->capture_default_str();
  converge->add_option("--T", conv.horizon, "Horizon")->capture_default_str();
  converge->add_option("--m", conv.steps, "Time steps per level");
  auto* cdirect = converge->add_flag("--direct-cl", "Linearize the system directly (default)");
  auto* cquad = converge->add_flag("--quadratized-cl", conv.quadratized, "Linearize the quadratic lift");
  cdirect->excludes(cquad);
  converge->add_option("--integrator", conv.integrator, "rk4, euler or block")->capture_default_str();
  converge->add_option("--oracle-steps", conv.oracle_steps, "RK4 reference steps")->capture_default_str();
  converge->add_option("--out-dir", conv.out_dir, "Output directory")->capture_default_str();

  DiagnoseArgs diag;
  auto* diagnose_cmd = app.add_subcommand("diagnose", "Convergence ratios, decay ratios and cost expressions");
  add_source_options(*diagnose_cmd, diag.source);
  diagnose_cmd->add_option("--N", diag.level, "Truncation level")->capture_default_str();
  diagnose_cmd->add_option("--T", diag.horizon, "Horizon")->capture_default_str();
  diagnose_cmd->add_option("--m", diag.steps, "Time steps");
  diagnose_cmd->add_option("--p", diag.padding, "Padding blocks");
  diagnose_cmd->add_option("--eps", diag.eps, "Target accuracy for the cost expression")->capture_default_str();
  diagnose_cmd->add_option("--re-lambda1", diag.re_lambda1, "Use this Re lambda1 instead of an eigensolve");
  diagnose_cmd->add_option("--out-dir", diag.out_dir, "Output directory")->capture_default_str();
  diagnose_cmd->add_option("--out", diag.out, "Output JSON path (overrides --out-dir)");

  EquivalenceArgs eq;
  auto* equivalence = app.add_subcommand("equivalence", "Quadratized CL at N against direct CL at N(k-1)");
  add_source_options(*equivalence, eq.source);
  equivalence->add_option("--N", eq.levels, "Truncation levels")->capture_default_str();
  equivalence->add_option("--T", eq.horizon, "Horizon")->capture_default_str();
  equivalence->add_option("--step", eq.step, "Euler step h")->capture_default_str();
  equivalence->add_option("--tol", eq.tol, "Fail when max_discrepancy exceeds this");
  equivalence->add_option("--out-dir", eq.out_dir, "Output directory")->capture_default_str();

  QuadratizeArgs qa;
  auto* quadratize_cmd = app.add_subcommand("quadratize", "Write the quadratic lift as an ODE spec");
  add_source_options(*quadratize_cmd, qa.source);
  quadratize_cmd->add_option("--out", qa.out, "Output spec path");
  quadratize_cmd->add_option("--out-dir", qa.out_dir, "Output directory when --out is absent")->capture_default_str();

  ExportArgs ex;
  auto* export_cmd = app.add_subcommand("export-spec", "Write a built-in system as an ODE spec");
  add_source_options(*export_cmd, ex.source);
  export_cmd->add_option("--out", ex.out, "Output spec path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*simulate) return cmd_simulate(sim, out);
    if (*converge) return cmd_converge(conv, out, err);
    if (*diagnose_cmd) return cmd_diagnose(diag, out);
    if (*equivalence) return cmd_equivalence(eq, out, err);
    if (*quadratize_cmd) return cmd_quadratize(qa, out);
    if (*export_cmd) return cmd_export(ex, out);
  } catch (const InvalidArgument& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << " (last finite time " << e.last_finite_time() << ")\n";
    return kExitRuntime;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitInput;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"carleman_cli"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace carleman::cli
