#pragma once

/*
 * Phase structure along the coupling axis: for each theta on a grid,
 * enumerate the planar fixed points, count the strictly positive laws, and
 * attach the branch data (z0, x0, y0, mean order parameter) where the
 * nontrivial branch exists.  detect_theta_c locates the onset of the branch
 * by bisecting the sign-change predicate of the reduced polynomial, which is
 * monotone in theta.
 */

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gtl/model.hpp"
#include "gtl/parallel.hpp"
#include "gtl/quadrature.hpp"
#include "gtl/reduced.hpp"
#include "gtl/sampler.hpp"

namespace gtl {

struct PhaseRow {
  double theta;
  int fixed_point_count;
  int positive_law_count;
  std::optional<double> z0;
  std::optional<double> x0;
  std::optional<double> y0;
  std::optional<double> order_param;  ///< E[g] of the (x0, +y0) branch law
  double residual_max;  ///< worst planar and operator residual at this theta
};

inline std::vector<PhaseRow> scan_theta(int k, int n, double theta_min, double theta_max,
                                        int steps, int resolution = 64) {
  if (steps < 2) throw std::invalid_argument("scan_theta: need at least 2 steps");
  if (!(theta_min >= 0.0 && theta_min < theta_max && theta_max < 1.0))
    throw std::invalid_argument("scan_theta: need 0 <= theta_min < theta_max < 1");

  const QuadGrid grid = build_grid(ModelParams(k, n, 0.0), resolution);
  std::vector<PhaseRow> rows(static_cast<std::size_t>(steps));
  parallel_for(rows.size(), [&](std::size_t i) {
    const double theta =
        theta_min + (theta_max - theta_min) * static_cast<double>(i) / (steps - 1);
    try {
      const ModelParams p(k, n, theta);
      PhaseRow row{theta, 0, 0, {}, {}, {}, {}, 0.0};

      const auto points = enumerate_fixed_points(p);
      row.fixed_point_count = static_cast<int>(points.size());
      for (const auto& fp : points) {
        row.residual_max = std::max(row.residual_max, v_residual(p, fp.x, fp.y));
        if (fp.positive_law) {
          ++row.positive_law_count;
          row.residual_max = std::max(
              row.residual_max, fixed_point_residual(p, grid, BoundaryFunction{fp.x, fp.y}));
        }
      }

      if (const auto z0 = solve_z0(p)) {
        row.z0 = *z0;
        const Vec2 branch = recover_xy(p, *z0);
        row.x0 = branch.x;
        row.y0 = branch.y;
        row.order_param =
            order_param_analytic(p, BoundaryFunction{branch.x, branch.y}, grid);
      }
      rows[i] = row;
    } catch (const numerical_error& e) {
      throw numerical_error("scan_theta: at theta=" + std::to_string(theta) + ": " + e.what());
    }
  });
  return rows;
}

/// Smallest theta with a nontrivial branch, located to within tol by
/// bisection; empty when even theta -> 1 admits none (theta_c >= 1).
inline std::optional<double> detect_theta_c(int k, int n, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("detect_theta_c: tolerance must be positive");
  auto has_branch = [&](double theta) {
    return poly_coeffs(ModelParams(k, n, theta)).sign_changes > 0;
  };

  double lo = 0.0, hi = 1.0 - 1e-12;
  if (!has_branch(hi)) return std::nullopt;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (has_branch(mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace gtl
