// SPDX-License-Identifier: Apache-2.0
// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "carleman/carleman_system.hpp"
#include "carleman/diagnostics.hpp"
#include "carleman/errors.hpp"
#include "carleman/models.hpp"
#include "carleman/quadratize.hpp"
#include "carleman/solver.hpp"
#include "commands.hpp"

using namespace carleman;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "carleman_acceptance" / name;
  fs::create_directories(p);
  return p;
}

int cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0 && code != cli::kExitRuntime) std::cerr << err.str();
  return code;
}

std::vector<double> read_error_column(const fs::path& csv) {
  std::ifstream f(csv);
  std::string line;
  std::getline(f, line);
  std::vector<double> errors;
  while (std::getline(f, line)) errors.push_back(std::stod(line.substr(line.find(',') + 1)));
  return errors;
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt(v[i], 3);
  return s;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  const fs::path dir = scratch("c1");
  if (cli({"diagnose", "--preset", "fig1", "--out", (dir / "fig1.json").string()}) != 0) {
    return {false, "diagnose --preset fig1 failed"};
  }
  const auto fig1 = cli::validate_json(dir / "fig1.json", {"rk0", "re_lambda1"});
  const double rk0 = fig1["rk0"].get<double>();
  const double lam = fig1["re_lambda1"].get<double>();
  bool ok = std::abs(rk0 - 0.94) <= 0.02 && lam < 0.0;
  std::string detail = "fig1 Rk0=" + fmt(rk0) + " Re(lambda1)=" + fmt(lam);

  std::string match = "none";
  for (const char* u : {"0.5", "0.3"}) {
    const fs::path out = dir / (std::string("fig2_") + u + ".json");
    if (cli({"diagnose", "--preset", "fig2", "--u-in", u, "--N", "2", "--out", out.string()}) != 0) {
      return {false, "diagnose --preset fig2 failed"};
    }
    const double v = cli::validate_json(out, {"rk0"})["rk0"].get<double>();
    detail += "; u_in=" + std::string(u) + " Rk0=" + fmt(v);
    if (match == "none" && std::abs(v - 20.62) <= 0.5) match = u;
  }
  ok = ok && match != "none";
  detail += "; matching u_in=" + match;
  return {ok, detail};
}

std::vector<double> converge(const std::string& preset, const std::string& dir) {
  const int code = cli({"converge", "--preset", preset, "--N-range", "2:5", "--out-dir", dir});
  if (code != 0 && code != cli::kExitRuntime) throw Error("converge failed for " + preset);
  return read_error_column(fs::path(dir) / "convergence.csv");
}

std::vector<double> g_fig1_errors;

Outcome criterion2() {
  g_fig1_errors = converge("fig1", scratch("c2").string());
  const bool dec = strictly_decreasing(g_fig1_errors);
  const double ratio = g_fig1_errors.back() / g_fig1_errors.front();
  return {dec && ratio <= 0.1,
          "max-time errors N=2..5: " + join(g_fig1_errors) + "; strictly decreasing=" + (dec ? "yes" : "no") +
              "; e5/e2=" + fmt(ratio, 3)};
}

Outcome criterion3() {
  const std::vector<double> fig2 = converge("fig2", scratch("c3").string());
  const bool dec = strictly_decreasing(fig2);
  if (g_fig1_errors.empty()) g_fig1_errors = converge("fig1", scratch("c3_fig1").string());
  double min_factor = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < fig2.size(); ++i) min_factor = std::min(min_factor, fig2[i] / g_fig1_errors[i]);
  return {dec && min_factor >= 5.0, "fig2 max-time errors N=2..5: " + join(fig2) + "; strictly decreasing=" +
                                        (dec ? "yes" : "no") + "; min fig2/fig1 factor=" + fmt(min_factor, 3)};
}

Outcome criterion4() {
  std::string detail;
  bool ok = true;
  const std::vector<std::pair<std::string, PolynomialODE>> systems{{"scalar cubic", scalar_cubic(0.5)},
                                                                   {"random n=2 k=3", random_polynomial_ode(2, 3, 1)}};
  for (const auto& [name, ode] : systems) {
    for (int N : {2, 3}) {
      const EquivalenceReport r = equivalence_check(ode, N, 1.0, 1e-3);
      ok = ok && r.max_discrepancy <= 1e-8;
      detail += (detail.empty() ? "" : "; ") + name + " N=" + std::to_string(N) + "/N'=" +
                std::to_string(r.direct_level) + " gap=" + fmt(r.max_discrepancy, 3);
    }
  }
  return {ok, detail};
}

Outcome criterion5() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> pick_n(1, 3), pick_k(2, 4);
  std::uniform_real_distribution<double> pick_density(0.2, 1.0);
  double worst_l1 = 0.0, worst_l2 = 0.0, worst_l3a = 0.0, worst_l3b = 0.0, worst_l5 = 0.0;
  auto slack = [](double& worst, double s) { worst = std::min(worst, s); };

  for (int trial = 0; trial < 200; ++trial) {
    const Index n = static_cast<Index>(pick_n(rng));
    const int k = pick_k(rng);
    RandomODEOptions o;
    o.density = pick_density(rng);
    o.forcing = trial % 3 != 0;
    o.entry_scale = 0.5;
    const PolynomialODE ode = random_polynomial_ode(n, k, 1000 + static_cast<std::uint64_t>(trial), o);

    for (int i = 1; i <= 3; ++i) {
      for (int j = 0; j <= k; ++j) {
        if (i + j - 1 < 1) continue;
        slack(worst_l2, i * spectral_norm(ode.coefficient(j)) - spectral_norm(transfer_matrix(ode, i, j)));
      }
    }

    const SparseMatrix& a = ode.coefficient(1);
    const SparseMatrix& b = ode.coefficient(std::min(k, 2));
    slack(worst_l1, -std::abs(spectral_norm(kron(a, b)) - spectral_norm(a) * spectral_norm(b)));

    const QuadraticODE q = quadratize(ode);
    double r = ode.x0().norm(), sum = 0.0, p = 1.0;
    for (int e = 1; e <= k - 1; ++e) {
      p *= r * r;
      sum += p;
    }
    slack(worst_l3a, -std::abs(q.ode.x0().norm() - std::sqrt(sum)));
    double fsum = 0.0;
    for (int e = 2; e <= k; ++e) fsum += spectral_norm(ode.coefficient(e));
    slack(worst_l3b, (k - 1) * fsum - spectral_norm(q.ode.coefficient(2)));

    const double s = static_cast<double>(ode.sparsity());
    const double bound = s * k * (k - 1) / 2.0;
    slack(worst_l5, -std::abs(static_cast<double>(q.ode.coefficient(0).sparsity()) -
                              static_cast<double>(ode.coefficient(0).sparsity())));
    slack(worst_l5, bound - static_cast<double>(q.ode.coefficient(1).sparsity()));
    slack(worst_l5, bound - static_cast<double>(q.ode.coefficient(2).sparsity()));
  }
  const double worst = std::min({worst_l1, worst_l2, worst_l3a, worst_l3b, worst_l5});
  return {worst >= -1e-6, "200 systems; min slack: kron-norm " + fmt(worst_l1, 3) + ", transfer-norm " +
                              fmt(worst_l2, 3) + ", lifted-x0 " + fmt(worst_l3a, 3) + ", lifted-F2 " +
                              fmt(worst_l3b, 3) + ", sparsity " + fmt(worst_l5, 3)};
}

Outcome criterion6() {
  double rk_r2 = 0.0, rk_rk0 = 0.0, r2_inv = 0.0, cx = 0.0;
  int rescaled = 0, post_fail = 0;
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    RandomODEOptions o;
    o.entry_scale = 0.15;
    o.x0_scale = 0.4;
    const PolynomialODE quad = random_polynomial_ode(1 + seed % 3, 2, seed, o);
    const double lam = max_real_eigenvalue(quad.coefficient(1));
    const double r2 = compute_R2(quad, lam);
    rk_r2 = std::max(rk_r2, std::abs(compute_Rk(quad, lam) - r2) / r2);

    o.forcing = false;
    const PolynomialODE homog = random_polynomial_ode(1 + seed % 3, 2 + static_cast<int>(seed % 3), seed, o);
    const double lam0 = max_real_eigenvalue(homog.coefficient(1));
    const double rk0 = compute_Rk0(homog);
    rk_rk0 = std::max(rk_rk0, std::abs(compute_Rk(homog, lam0) - rk0) / rk0);

    if (r2 < 1.0) {
      try {
        const GammaRescaling g = rescale_gamma(quad, lam);
        ++rescaled;
        r2_inv = std::max(r2_inv, std::abs(compute_R2(g.rescaled, lam) - r2) / r2);
        const double sum = spectral_norm(g.rescaled.coefficient(2)) + spectral_norm(g.rescaled.coefficient(0));
        if (!(sum < std::abs(lam)) || !(g.rescaled.x0().norm() < 1.0)) ++post_fail;
      } catch (const InvalidArgument&) {
        // negative discriminant: no rescaling exists for this draw
      }
    }

    // k = 2 cost expression is s T^2 q / eps times the log factors.
    const double expect = 3.0 * 4.0 * 1.7 / 0.01 * std::max(1.0, std::log(2.0)) * std::log(10.0) * std::log(100.0);
    cx = std::max(cx, std::abs(complexity_expression(3, 2.0, 1.7, 0.01, 2, 10) - expect) / expect);
  }
  const bool ok = rk_r2 <= 1e-12 && rk_rk0 <= 1e-12 && r2_inv <= 1e-12 && rescaled > 0 && post_fail == 0 && cx <= 1e-12;
  return {ok, "Rk(k=2) vs R2 rel " + fmt(rk_r2, 2) + "; Rk vs Rk0 rel " + fmt(rk_rk0, 2) + "; R2 invariance rel " +
                  fmt(r2_inv, 2) + " over " + std::to_string(rescaled) + " rescalings, postcondition failures " +
                  std::to_string(post_fail) + "; k=2 cost form rel " + fmt(cx, 2)};
}

Outcome criterion7() {
  std::vector<PolynomialODE> systems{scalar_logistic(0.5), scalar_cubic(0.5), linear_decay(2, 1.0, 1.0)};
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    systems.push_back(random_polynomial_ode(1 + seed % 3, 2 + static_cast<int>(seed % 2), seed));
  }
  double worst = 0.0;
  bool padding_equal = true;
  for (const auto& ode : systems) {
    const CarlemanSystem sys = assemble_truncated(ode, 3);
    const Index m = 100, p = 30;
    const CarlemanSolution e = euler_integrate(sys, 1.0, m);
    const CarlemanSolution b = solve_block(assemble_block(sys, 1.0, m, p));
    for (Index j = 0; j <= m; ++j) worst = std::max(worst, distance(e.blocks[j], b.blocks[j]));
    for (Index j = m + 1; j <= m + p; ++j) padding_equal = padding_equal && b.blocks[j] == b.blocks[m];
  }
  {
    const PolynomialODE fig1 = build_reaction_diffusion(rd_preset("fig1"));
    const CarlemanSystem sys = assemble_truncated(fig1, 2);
    const Index m = default_steps(sys, 1.0);
    const CarlemanSolution e = euler_integrate(sys, 1.0, m);
    const CarlemanSolution b = solve_block(assemble_block(sys, 1.0, m, m));
    for (Index j = 0; j <= m; ++j) worst = std::max(worst, distance(e.blocks[j], b.blocks[j]));
    for (Index j = m + 1; j <= 2 * m; ++j) padding_equal = padding_equal && b.blocks[j] == b.blocks[m];
  }

  const CarlemanSystem lin = assemble_truncated(linear_decay(2, 1.0, 1.0), 1);
  const double exact = std::exp(-1.0);
  const double e1 = std::abs(euler_integrate(lin, 1.0, 200).extract.back()[0] - exact);
  const double e2 = std::abs(euler_integrate(lin, 1.0, 400).extract.back()[0] - exact);
  const double ratio = e1 / e2;
  const bool ok = worst <= 1e-12 && padding_equal && ratio >= 1.8 && ratio <= 2.2;
  return {ok, "max block gap " + fmt(worst, 3) + " over " + std::to_string(systems.size() + 1) +
                  " instances; padding exact=" + (padding_equal ? "yes" : "no") + "; Euler halving ratio " +
                  fmt(ratio, 4)};
}

Outcome criterion8() {
  const fs::path dir = scratch("c8");
  if (cli({"simulate", "--preset", "fig1", "--N", "3", "--out-dir", dir.string()}) != 0) {
    return {false, "simulate --preset fig1 failed"};
  }
  const auto s = cli::validate_json(dir / "summary.json", {"p_measured", "p_bound", "m", "p", "q"});
  const double measured = s["p_measured"].get<double>();
  const double bound = s["p_bound"].get<double>();
  const bool ok = s["m"] == s["p"] && measured >= bound;
  return {ok, "N=3 m=p=" + s["m"].dump() + " q=" + fmt(s["q"].get<double>()) + " measured " + fmt(measured) +
                  " >= bound " + fmt(bound)};
}

}  // namespace

int main() {
  struct Criterion {
    std::string name;
    std::function<Outcome()> run;
    double time_limit;  // seconds; 0 means unlimited
  };
  const std::vector<Criterion> criteria{
      {"R_k^0 reproduction", criterion1, 5.0},
      {"fig1 convergence", criterion2, 120.0},
      {"fig2 behavior", criterion3, 300.0},
      {"quadratized/direct CL equivalence", criterion4, 0.0},
      {"norm and sparsity bounds", criterion5, 0.0},
      {"reduction identities", criterion6, 0.0},
      {"block solve identity", criterion7, 0.0},
      {"measurement probability bound", criterion8, 0.0},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (criteria[i].time_limit > 0.0 && secs > criteria[i].time_limit) {
      o.pass = false;
      o.detail += "; exceeded " + fmt(criteria[i].time_limit) + "s limit";
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].name << "): " << o.detail
              << " [" << std::fixed << std::setprecision(2) << secs << "s]" << std::defaultfloat << std::endl;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
