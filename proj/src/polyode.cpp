// SPDX-License-Identifier: Apache-2.0
#include "carleman/polyode.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "carleman/errors.hpp"

namespace carleman {

using nlohmann::json;

PolynomialODE::PolynomialODE(std::vector<SparseMatrix> coefficients, DenseVector x0)
    : coefficients_(std::move(coefficients)), x0_(std::move(x0)) {
  if (coefficients_.size() < 2) throw InvalidArgument("polynomial degree k must be >= 1");
  const Index n = x0_.size();
  if (n == 0) throw InvalidArgument("state dimension must be positive");
  if (!x0_.all_finite()) throw InvalidArgument("x0 contains non-finite values");
  for (Index i = 0; i < coefficients_.size(); ++i) {
    const auto& f = coefficients_[i];
    const Index want = checked_pow(n, i);
    if (f.rows() != n || f.cols() != want) {
      throw DimensionError("F[" + std::to_string(i) + "] has dims " + std::to_string(f.rows()) + " x " +
                           std::to_string(f.cols()) + ", expected " + std::to_string(n) + " x " +
                           std::to_string(want));
    }
  }
}

DenseVector PolynomialODE::forcing() const {
  DenseVector out(dim());
  const auto& f0 = coefficients_.front();
  for (const auto& t : f0.entries()) out[t.row] = t.value;
  return out;
}

Index PolynomialODE::sparsity() const {
  Index s = 0;
  for (const auto& f : coefficients_) s = std::max(s, f.sparsity());
  return s;
}

PolynomialODE PolynomialODE::with_initial_state(DenseVector x0) const {
  return PolynomialODE(coefficients_, std::move(x0));
}

void Trajectory::validate() const {
  if (times.size() != states.size()) throw InvalidArgument("trajectory times/states length mismatch");
  for (Index j = 1; j < times.size(); ++j) {
    if (!(times[j] > times[j - 1])) throw InvalidArgument("trajectory times must be strictly increasing");
  }
}

DenseVector Trajectory::sample(double t) const {
  if (times.empty()) throw InvalidArgument("empty trajectory");
  const double span = times.back() - times.front();
  const double slack = 1e-12 * std::max(1.0, std::abs(span));
  if (t < times.front() - slack || t > times.back() + slack) {
    throw InvalidArgument("sample time outside trajectory range");
  }
  auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.end()) return states.back();
  const Index hi = static_cast<Index>(it - times.begin());
  if (hi == 0 || *it == t) return states[hi];
  const Index lo = hi - 1;
  // Snap to grid points within roundoff.
  if (std::abs(times[lo] - t) <= slack) return states[lo];
  if (std::abs(times[hi] - t) <= slack) return states[hi];
  const double w = (t - times[lo]) / (times[hi] - times[lo]);
  return (1.0 - w) * states[lo] + w * states[hi];
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace {

std::size_t line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

template <typename T>
T require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw ParseError(where + ": missing \"" + key + "\"", 0);
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError(where + ": field \"" + key + "\" has the wrong type", 0);
  }
}

double finite_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + ": expected a number", 0);
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw InvalidArgument(where + ": non-finite entry");
  return d;
}

}  // namespace

PolynomialODE parse_ode_spec(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), line_of(text, e.byte));
  }
  if (!doc.is_object()) throw ParseError("ODE spec must be a JSON object", 0);

  const auto n = require<long long>(doc, "n", "spec");
  const auto k = require<long long>(doc, "k", "spec");
  if (n < 1) throw InvalidArgument("spec: n must be >= 1");
  if (k < 1) throw InvalidArgument("spec: k must be >= 1");
  const Index dim = static_cast<Index>(n);

  std::vector<SparseMatrix> coeffs;
  coeffs.reserve(static_cast<Index>(k) + 1);
  for (long long i = 0; i <= k; ++i) coeffs.emplace_back(dim, checked_pow(dim, static_cast<Index>(i)));

  if (!doc.contains("F") || !doc["F"].is_array()) throw ParseError("spec: \"F\" must be an array", 0);
  std::vector<bool> seen(static_cast<Index>(k) + 1, false);
  for (const auto& block : doc["F"]) {
    const auto degree = require<long long>(block, "degree", "F entry");
    const std::string where = "F[" + std::to_string(degree) + "]";
    if (degree < 0 || degree > k) throw InvalidArgument(where + ": degree outside 0..k");
    if (seen[static_cast<Index>(degree)]) throw InvalidArgument(where + ": listed twice");
    seen[static_cast<Index>(degree)] = true;
    const auto rows = require<long long>(block, "rows", where);
    const auto cols = require<long long>(block, "cols", where);
    const Index want_cols = checked_pow(dim, static_cast<Index>(degree));
    if (rows != n || cols < 0 || static_cast<Index>(cols) != want_cols) {
      throw DimensionError(where + " has dims " + std::to_string(rows) + " x " + std::to_string(cols) +
                           ", expected " + std::to_string(n) + " x " + std::to_string(want_cols));
    }
    if (!block.contains("triplets") || !block["triplets"].is_array()) {
      throw ParseError(where + ": \"triplets\" must be an array", 0);
    }
    TripletList list(dim, want_cols);
    for (const auto& t : block["triplets"]) {
      if (!t.is_array() || t.size() != 3 || !t[0].is_number_integer() || !t[1].is_number_integer()) {
        throw ParseError(where + ": triplet must be [row, col, value] with integer indices", 0);
      }
      const auto r = t[0].get<long long>();
      const auto c = t[1].get<long long>();
      if (r < 0 || c < 0) throw DimensionError(where + ": negative index");
      list.add(static_cast<Index>(r), static_cast<Index>(c), finite_number(t[2], where));
    }
    coeffs[static_cast<Index>(degree)] = std::move(list).build();
  }

  if (!doc.contains("x0") || !doc["x0"].is_array()) throw ParseError("spec: \"x0\" must be an array", 0);
  std::vector<double> x0;
  for (const auto& v : doc["x0"]) x0.push_back(finite_number(v, "x0"));
  if (x0.size() != dim) {
    throw DimensionError("x0 has length " + std::to_string(x0.size()) + ", expected " + std::to_string(dim));
  }
  return PolynomialODE(std::move(coeffs), DenseVector(std::move(x0)));
}

PolynomialODE load_ode_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open ODE spec " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_ode_spec(buf.str());
}

json to_json(const PolynomialODE& ode) {
  json doc;
  doc["n"] = ode.dim();
  doc["k"] = ode.degree();
  json blocks = json::array();
  for (int i = 0; i <= ode.degree(); ++i) {
    const auto& f = ode.coefficient(i);
    json triplets = json::array();
    for (const auto& t : f.entries()) triplets.push_back({t.row, t.col, t.value});
    blocks.push_back({{"degree", i}, {"rows", f.rows()}, {"cols", f.cols()}, {"triplets", std::move(triplets)}});
  }
  doc["F"] = std::move(blocks);
  doc["x0"] = ode.x0().values();
  return doc;
}

void save_ode_spec(const PolynomialODE& ode, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  // nlohmann serializes doubles with round-trip precision.
  out << to_json(ode).dump(1) << '\n';
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

DenseVector evaluate_rhs(const PolynomialODE& ode, const DenseVector& x) {
  if (x.size() != ode.dim()) throw DimensionError("state dimension mismatch in evaluate_rhs");
  DenseVector out = ode.forcing();
  DenseVector power{1.0};
  DenseVector term(ode.dim());
  for (int i = 1; i <= ode.degree(); ++i) {
    power = kron_vec(x, power);
    const auto& f = ode.coefficient(i);
    if (f.empty()) continue;
    f.multiply(power.span(), term.span());
    out += term;
  }
  return out;
}

Trajectory direct_integrate(const PolynomialODE& ode, double T, Index steps) {
  if (!(T > 0.0)) throw InvalidArgument("integration horizon T must be positive");
  if (steps < 1) throw InvalidArgument("step count must be >= 1");
  const double h = T / static_cast<double>(steps);

  Trajectory traj;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  DenseVector x = ode.x0();
  traj.times.push_back(0.0);
  traj.states.push_back(x);
  for (Index j = 0; j < steps; ++j) {
    const DenseVector k1 = evaluate_rhs(ode, x);
    const DenseVector k2 = evaluate_rhs(ode, x + (0.5 * h) * k1);
    const DenseVector k3 = evaluate_rhs(ode, x + (0.5 * h) * k2);
    const DenseVector k4 = evaluate_rhs(ode, x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.all_finite()) {
      throw NumericalError("direct integration blew up after t = " + std::to_string(traj.times.back()),
                           traj.times.back());
    }
    traj.times.push_back(static_cast<double>(j + 1) * h);
    traj.states.push_back(x);
  }
  return traj;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  const Index n = traj.states.empty() ? 0 : traj.states.front().size();
  out << 't';
  for (Index i = 1; i <= n; ++i) out << ",x" << i;
  out << '\n' << std::setprecision(17);
  for (Index j = 0; j < traj.times.size(); ++j) {
    out << traj.times[j];
    for (double v : traj.states[j]) out << ',' << v;
    out << '\n';
  }
}

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  write_trajectory_csv(traj, out);
}

}  // namespace carleman
