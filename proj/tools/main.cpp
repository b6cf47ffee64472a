// Command-line front end for the tree-model library.
//
// Subcommands: thresholds, fixed-points, phase-diagram, operator-check,
// sample, verify, iterate.  Exit codes: 0 success, 1 usage or validation
// error, 2 numerical failure, 3 verification failure.  Set GTL_THREADS to cap
// the worker count; results do not depend on it.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gtl/identities.hpp"
#include "gtl/io.hpp"
#include "gtl/model.hpp"
#include "gtl/phase.hpp"
#include "gtl/quadrature.hpp"
#include "gtl/reduced.hpp"
#include "gtl/sampler.hpp"

namespace {

using ordered_json = nlohmann::ordered_json;

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw std::invalid_argument("cannot open output file: " + out_path);
  f << text;
}

ordered_json json_or_null(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

// ---- thresholds -----------------------------------------------------------

int run_thresholds(int k, int n, const std::string& out) {
  const double tc = gtl::theta_critical(k, n);
  ordered_json j;
  j["theta_c"] = tc;
  j["reachable"] = tc < 1.0;
  ordered_json th = ordered_json::object();
  for (int i = 1; i <= k; i += 2) th[std::to_string(i)] = gtl::theta_threshold(k, n, i);
  j["thresholds"] = th;
  emit(j.dump(2) + "\n", out);
  return 0;
}

// ---- fixed-points ---------------------------------------------------------

int run_fixed_points(int k, int n, double theta, const std::string& format,
                     const std::string& out) {
  const gtl::ModelParams p(k, n, theta);
  const auto points = gtl::enumerate_fixed_points(p);

  std::ostringstream os;
  if (format == "csv") {
    gtl::write_fixed_points_csv(p, points, os);
  } else {
    ordered_json j;
    j["k"] = k;
    j["n"] = n;
    j["theta"] = theta;
    j["theta_c"] = p.theta_c;
    j["count"] = points.size();
    ordered_json arr = ordered_json::array();
    for (const auto& fp : points) {
      ordered_json pj;
      pj["kind"] = gtl::kind_name(fp.kind);
      pj["x"] = fp.x;
      pj["y"] = fp.y;
      pj["positive_law"] = fp.positive_law;
      pj["residual"] = gtl::v_residual(p, fp.x, fp.y);
      arr.push_back(pj);
    }
    j["points"] = arr;
    os << j.dump(2) << "\n";
  }
  emit(os.str(), out);
  return 0;
}

// ---- phase-diagram --------------------------------------------------------

int run_phase(int k, int n, double tmin, double tmax, int steps, int resolution,
              const std::string& format, const std::string& out) {
  const auto rows = gtl::scan_theta(k, n, tmin, tmax, steps, resolution);
  std::ostringstream os;
  if (format == "csv") {
    gtl::write_phase_csv(rows, os);
  } else {
    ordered_json arr = ordered_json::array();
    for (const auto& r : rows) {
      ordered_json rj;
      rj["theta"] = r.theta;
      rj["count"] = r.fixed_point_count;
      rj["positive_count"] = r.positive_law_count;
      rj["z0"] = json_or_null(r.z0);
      rj["x0"] = json_or_null(r.x0);
      rj["y0"] = json_or_null(r.y0);
      rj["order_param"] = json_or_null(r.order_param);
      rj["residual"] = r.residual_max;
      arr.push_back(rj);
    }
    os << arr.dump(2) << "\n";
  }
  emit(os.str(), out);
  return 0;
}

// ---- sample ---------------------------------------------------------------

gtl::BoundaryFunction resolve_branch(const gtl::ModelParams& p, const std::string& branch) {
  if (branch == "unit") return {1.0, 0.0};
  const auto z0 = gtl::solve_z0(p);
  if (!z0)
    throw std::invalid_argument("branch '" + branch +
                                "' does not exist at theta <= theta_c; use --branch unit");
  const gtl::Vec2 b = gtl::recover_xy(p, *z0);
  return {b.x, branch == "plus" ? b.y : -b.y};
}

int run_sample(int k, int n, double theta, const std::string& branch, int depth,
               std::uint64_t samples, std::uint64_t seed, const std::string& format,
               const std::string& out) {
  const gtl::ModelParams p(k, n, theta);
  const gtl::BoundaryFunction b = resolve_branch(p, branch);

  std::ostringstream os;
  if (format == "csv") {
    if (samples != 1)
      throw std::invalid_argument("csv output dumps a single configuration; use --samples 1");
    gtl::RngStream rng(seed, 0);
    gtl::AcceptTally tally;
    const auto cfg = gtl::sample_configuration(p, b, gtl::TreeSpec(k, depth), rng, tally);
    gtl::write_configuration_csv(cfg, os);
  } else {
    const auto stats = gtl::order_param_estimate(p, b, depth, samples, seed);
    ordered_json j;
    j["sample_count"] = stats.sample_count;
    j["mean_g_root"] = stats.mean_g_root;
    j["std_error"] = stats.std_error;
    j["acceptance_rate"] = stats.acceptance_rate;
    os << j.dump(2) << "\n";
  }
  emit(os.str(), out);
  return 0;
}

// ---- operator-check / verify ----------------------------------------------

struct CheckLine {
  std::string name;
  double value;
  double threshold;
  bool passed;
};

CheckLine check_grid_sums(const gtl::QuadGrid& grid) {
  double sw = 0.0, sg = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    sw += grid.weights[j];
    sg += grid.weights[j] * grid.gvals[j];
  }
  const double v = std::max(std::abs(sw - 1.0), std::abs(sg));
  return {"grid_partition_of_unity", v, 1e-13, v <= 1e-13};
}

CheckLine check_moments(const gtl::ModelParams& p, const gtl::QuadGrid& grid) {
  double worst = 0.0;
  const double root4 = std::pow(4.0, 1.0 / static_cast<double>(p.m));
  for (int i = 0; i <= p.k + 1; ++i) {
    double plain = 0.0, shifted = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double gi = gtl::detail::ipow(grid.gvals[j], i);
      plain += grid.weights[j] * gi;
      shifted += grid.weights[j] * gi * grid.gvals[j];
    }
    plain /= gtl::detail::ipow(root4, i);
    shifted /= gtl::detail::ipow(root4, i + 1);
    worst = std::max(worst, std::abs(plain - gtl::moment_integral(p, i, false)));
    worst = std::max(worst, std::abs(shifted - gtl::moment_integral(p, i, true)));
  }
  return {"moment_quadrature", worst, 1e-12, worst <= 1e-12};
}

CheckLine check_dense_agreement(const gtl::ModelParams& p, std::uint64_t seed) {
  const gtl::QuadGrid grid = gtl::build_grid(p, 8);
  gtl::RngStream rng(seed, 9001);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    gtl::DiscreteFunction f;
    f.values.resize(grid.size());
    for (auto& v : f.values) v = 0.05 + rng.uniform();
    const auto a = gtl::apply_hammerstein(p, grid, f);
    const auto d = gtl::apply_hammerstein_dense(p, grid, f);
    for (std::size_t j = 0; j < grid.size(); ++j)
      worst = std::max(worst, std::abs(a.values[j] - d.values[j]));
  }
  return {"separable_vs_dense", worst, 1e-13, worst <= 1e-13};
}

CheckLine check_rank2_closure(const gtl::ModelParams& p, const gtl::QuadGrid& grid,
                              std::uint64_t seed) {
  gtl::RngStream rng(seed, 9002);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    gtl::DiscreteFunction f;
    f.values.resize(grid.size());
    for (auto& v : f.values) v = 0.05 + rng.uniform();
    const auto img = gtl::apply_hammerstein(p, grid, f);
    worst = std::max(worst, gtl::project_rank2(p, grid, img).fit_error);
  }
  return {"rank2_closure", worst, 1e-9, worst <= 1e-9};
}

CheckLine check_law_residuals(const gtl::ModelParams& p, int resolution) {
  const gtl::QuadGrid grid = gtl::build_grid(p, resolution);
  double worst = 0.0;
  for (const auto& fp : gtl::enumerate_fixed_points(p)) {
    if (!fp.positive_law) continue;
    worst = std::max(worst,
                     gtl::fixed_point_residual(p, grid, gtl::BoundaryFunction{fp.x, fp.y}));
  }
  return {"law_residuals", worst, 1e-8, worst <= 1e-8};
}

int run_operator_check(int k, int n, double theta, int resolution, std::uint64_t seed,
                       const std::string& out) {
  const gtl::ModelParams p(k, n, theta);
  const gtl::QuadGrid grid = gtl::build_grid(p, resolution);

  std::vector<CheckLine> checks;
  checks.push_back(check_grid_sums(grid));
  checks.push_back(check_moments(p, grid));
  checks.push_back(check_dense_agreement(p, seed));
  checks.push_back(check_rank2_closure(p, grid, seed));
  checks.push_back(check_law_residuals(p, resolution));

  bool all = true;
  ordered_json arr = ordered_json::array();
  for (const auto& c : checks) {
    all = all && c.passed;
    ordered_json cj;
    cj["name"] = c.name;
    cj["value"] = c.value;
    cj["threshold"] = c.threshold;
    cj["passed"] = c.passed;
    arr.push_back(cj);
  }
  ordered_json j;
  j["k"] = k;
  j["n"] = n;
  j["theta"] = theta;
  j["resolution"] = resolution;
  j["checks"] = arr;
  j["passed"] = all;
  emit(j.dump(2) + "\n", out);
  return all ? 0 : 3;
}

// verify prints one line per check and fails the process on any FAIL.

struct VerifyLog {
  bool ok = true;

  void line(bool passed, const std::string& text) {
    std::cout << (passed ? "ok   " : "FAIL ") << text << "\n";
    ok = ok && passed;
  }
};

void verify_identities(VerifyLog& log, int kmax, int mmax) {
  bool all = true;
  for (int k = 1; k <= kmax; ++k)
    for (int m = 1; m <= mmax; m += 2) {
      const auto [lhs, rhs] = gtl::alt_sum_identity(k, m);
      if (lhs != rhs || !(lhs > 0)) all = false;
    }
  log.line(all, "identities: alternating sum equals factorial ratio for k <= " +
                    std::to_string(kmax) + ", odd m <= " + std::to_string(mmax));
}

void verify_thresholds(VerifyLog& log) {
  double worst = 0.0;
  for (int k = 2; k <= 6; ++k)
    for (int n = 0; n <= 3; ++n) {
      const double tc = gtl::theta_critical(k, n);
      if (tc >= 1.0) continue;
      const auto det = gtl::detect_theta_c(k, n, 1e-9);
      worst = std::max(worst, det ? std::abs(*det - tc) : 1.0);
    }
  log.line(worst <= 1e-6,
           "thresholds: bisected onset matches closed form, worst err " + gtl::format_g17(worst));
}

void verify_fixed_points(VerifyLog& log, int k, int n) {
  const double tc = gtl::theta_critical(k, n);
  bool counts_ok = true, z0_ok = true, residual_ok = true;
  for (int j = 0; j < 20; ++j) {
    const double theta = 0.025 + 0.05 * j;
    const gtl::ModelParams p(k, n, theta);
    const auto pts = gtl::enumerate_fixed_points(p);
    const bool branch = theta > tc;
    const int want = (k % 2 == 0) ? (branch ? 4 : 2) : (branch ? 7 : 3);
    int positives = 0;
    for (const auto& fp : pts) {
      positives += fp.positive_law ? 1 : 0;
      if (gtl::v_residual(p, fp.x, fp.y) > 1e-9) residual_ok = false;
    }
    if (static_cast<int>(pts.size()) != want) counts_ok = false;
    if (positives != (branch ? 3 : 1)) counts_ok = false;
    if (const auto z0 = gtl::solve_z0(p)) {
      if (!(*z0 < std::pow(2.0, -1.0 / p.m))) z0_ok = false;
      if (!(gtl::poly_eval(gtl::poly_coeffs(p), std::pow(2.0, -1.0 / p.m)) > 0.0)) z0_ok = false;
    } else if (branch) {
      z0_ok = false;
    }
  }
  log.line(counts_ok, "fixed-points: counts and positivity follow the regime split");
  log.line(z0_ok, "fixed-points: branch root stays inside the positivity bound");
  log.line(residual_ok, "fixed-points: planar residuals <= 1e-9");
}

void verify_operator(VerifyLog& log, int k, int n, double theta, int resolution,
                     std::uint64_t seed) {
  const gtl::ModelParams p(k, n, theta);
  const gtl::QuadGrid grid = gtl::build_grid(p, resolution);
  for (const auto& c : {check_grid_sums(grid), check_moments(p, grid),
                        check_dense_agreement(p, seed), check_rank2_closure(p, grid, seed),
                        check_law_residuals(p, resolution)})
    log.line(c.passed, "operator: " + c.name + " value " + gtl::format_g17(c.value) +
                           " threshold " + gtl::format_g17(c.threshold));
}

int run_verify(const std::string& suite, int kmax, int mmax, int k, int n, double theta,
               int resolution, std::uint64_t seed) {
  VerifyLog log;
  if (suite == "identities" || suite == "all") verify_identities(log, kmax, mmax);
  if (suite == "thresholds" || suite == "all") verify_thresholds(log);
  if (suite == "fixed-points" || suite == "all") verify_fixed_points(log, k, n);
  if (suite == "operator" || suite == "all") verify_operator(log, k, n, theta, resolution, seed);
  return log.ok ? 0 : 3;
}

// ---- iterate ----------------------------------------------------------------

int run_iterate(int k, int n, double theta, const std::string& start, int steps, double damping,
                int resolution, const std::string& out) {
  const gtl::ModelParams p(k, n, theta);
  const gtl::QuadGrid grid = gtl::build_grid(p, resolution);
  gtl::DiscreteFunction f0;
  f0.values.resize(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (start == "one")
      f0.values[j] = 1.0;
    else if (start == "zero")
      f0.values[j] = 0.0;
    else if (start == "ramp")
      f0.values[j] = grid.nodes[j];
    else  // perturb: nudge the flat law along the order-parameter direction
      f0.values[j] = 1.0 + 0.25 * grid.gvals[j];
  }

  const auto trace = gtl::iterate_hammerstein(p, grid, f0, steps, damping);
  std::ostringstream os;
  os << "step,c1,c2,residual\n";
  for (std::size_t s = 0; s < trace.size(); ++s)
    os << s << ',' << gtl::format_g17(trace[s].c1) << ',' << gtl::format_g17(trace[s].c2) << ','
       << gtl::format_g17(trace[s].residual) << '\n';
  emit(os.str(), out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Fixed points, boundary laws and tree samplers for a continuous-spin"
      " nearest-neighbour model"};
  app.require_subcommand(1);

  int k = 2, n = 0, depth = 0, steps = 0, resolution = 64, kmax = 20, mmax = 21;
  int vk = 2, vn = 1;
  double theta = 0.0, tmin = 0.0, tmax = 0.0, damping = 1.0, vtheta = 0.9;
  std::uint64_t samples = 1, seed = 1;
  std::string format = "json", out, branch = "unit", suite = "all", start = "one";

  auto* cmd_thresholds = app.add_subcommand("thresholds", "critical coupling and sign thresholds");
  cmd_thresholds->add_option("--k", k, "tree order")->required();
  cmd_thresholds->add_option("--n", n, "exponent index")->required();
  cmd_thresholds->add_option("--out", out, "output path (default stdout)");

  auto* cmd_fp = app.add_subcommand("fixed-points", "enumerate planar fixed points");
  cmd_fp->add_option("--k", k)->required();
  cmd_fp->add_option("--n", n)->required();
  cmd_fp->add_option("--theta", theta)->required();
  cmd_fp->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));
  cmd_fp->add_option("--out", out);

  auto* cmd_phase = app.add_subcommand("phase-diagram", "scan theta and tabulate the transition");
  cmd_phase->add_option("--k", k)->required();
  cmd_phase->add_option("--n", n)->required();
  cmd_phase->add_option("--theta-min", tmin)->required();
  cmd_phase->add_option("--theta-max", tmax)->required();
  cmd_phase->add_option("--steps", steps)->required();
  cmd_phase->add_option("--resolution", resolution, "quadrature points per half interval");
  cmd_phase->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));
  cmd_phase->add_option("--out", out);

  auto* cmd_op = app.add_subcommand("operator-check", "quadrature and operator diagnostics");
  cmd_op->add_option("--k", k)->required();
  cmd_op->add_option("--n", n)->required();
  cmd_op->add_option("--theta", theta)->required();
  cmd_op->add_option("--resolution", resolution);
  cmd_op->add_option("--seed", seed);
  cmd_op->add_option("--out", out);

  auto* cmd_sample = app.add_subcommand("sample", "draw tree configurations or root statistics");
  cmd_sample->add_option("--k", k)->required();
  cmd_sample->add_option("--n", n)->required();
  cmd_sample->add_option("--theta", theta)->required();
  cmd_sample->add_option("--branch", branch, "boundary law: unit, plus or minus")
      ->check(CLI::IsMember({"unit", "plus", "minus"}));
  cmd_sample->add_option("--depth", depth, "tree depth below the root");
  cmd_sample->add_option("--samples", samples, "number of configurations");
  cmd_sample->add_option("--seed", seed, "master seed");
  cmd_sample->add_option("--format", format, "json for stats, csv for one configuration")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd_sample->add_option("--out", out);

  auto* cmd_verify = app.add_subcommand("verify", "self checks, one line per property");
  cmd_verify->add_option("--suite", suite)
      ->check(CLI::IsMember({"identities", "thresholds", "fixed-points", "operator", "all"}));
  cmd_verify->add_option("--k-max", kmax, "largest k for the identity sweep");
  cmd_verify->add_option("--m-max", mmax, "largest odd m for the identity sweep");
  cmd_verify->add_option("--k", vk)->capture_default_str();
  cmd_verify->add_option("--n", vn)->capture_default_str();
  cmd_verify->add_option("--theta", vtheta)->capture_default_str();
  cmd_verify->add_option("--resolution", resolution);
  cmd_verify->add_option("--seed", seed);

  auto* cmd_iter = app.add_subcommand("iterate", "damped fixed-point iteration trace");
  cmd_iter->add_option("--k", k)->required();
  cmd_iter->add_option("--n", n)->required();
  cmd_iter->add_option("--theta", theta)->required();
  cmd_iter->add_option("--start", start, "initial function")
      ->check(CLI::IsMember({"one", "zero", "ramp", "perturb"}));
  cmd_iter->add_option("--steps", steps)->required();
  cmd_iter->add_option("--damping", damping)->capture_default_str();
  cmd_iter->add_option("--resolution", resolution);
  cmd_iter->add_option("--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (cmd_thresholds->parsed()) return run_thresholds(k, n, out);
    if (cmd_fp->parsed()) return run_fixed_points(k, n, theta, format, out);
    if (cmd_phase->parsed()) return run_phase(k, n, tmin, tmax, steps, resolution, format, out);
    if (cmd_op->parsed()) return run_operator_check(k, n, theta, resolution, seed, out);
    if (cmd_sample->parsed())
      return run_sample(k, n, theta, branch, depth, samples, seed, format, out);
    if (cmd_verify->parsed())
      return run_verify(suite, kmax, mmax, vk, vn, vtheta, resolution, seed);
    if (cmd_iter->parsed())
      return run_iterate(k, n, theta, start, steps, damping, resolution, out);
    std::cerr << "error: no subcommand\n";
    return 1;
  } catch (const gtl::numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
