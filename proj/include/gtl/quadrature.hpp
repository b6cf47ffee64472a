#pragma once

/*
 * Discretisation of the integral operator
 *
 *     (H f)(t) = int_0^1 K(t,u) f(u)^k du,
 *
 * whose fixed points in the cone of positive continuous functions are the
 * boundary laws of the model.  The integrands involve |4u-2|^(1/m) which has
 * unbounded derivatives at u = 1/2, so a plain Gauss rule converges slowly.
 * Substituting u = 1/2 +- s^m / 2 on each half interval gives
 *
 *     int_0^1 F(u) du = (m/2) int_0^1 [ F(1/2 - s^m/2) + F(1/2 + s^m/2) ] s^(m-1) ds,
 *
 * and on the s-axis g becomes the linear function -+ 2^(1/m) s.  Polynomials
 * in g of degree d turn into polynomials in s of degree d + m - 1, which a
 * Q-point Gauss-Legendre rule integrates exactly once 2Q-1 >= d + m - 1.  The
 * moment integrals the fixed-point reduction relies on are therefore exact at
 * practical resolutions, not merely approximated.
 *
 * Because K is separable, one operator application costs O(N) after two
 * weighted sums; the dense O(N^2) path is kept for cross-checking.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "gtl/model.hpp"

namespace gtl {

namespace detail {

/// Gauss-Legendre nodes and weights on [0,1], Newton iteration on the
/// Legendre polynomial from the usual cosine initial guesses.
inline void gauss_legendre_unit(int q, std::vector<double>& x, std::vector<double>& w) {
  x.assign(q, 0.0);
  w.assign(q, 0.0);
  const int half = (q + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < q; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = q * (z * p0 - p1) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p0 / pp;
      if (std::abs(z - z1) < 1e-15) break;
    }
    x[i] = 0.5 * (1.0 - z);
    x[q - 1 - i] = 0.5 * (1.0 + z);
    w[i] = 1.0 / ((1.0 - z * z) * pp * pp);
    w[q - 1 - i] = w[i];
  }
}

}  // namespace detail

/// Quadrature grid on [0,1] adapted to the root singularity at 1/2.  Nodes
/// ascend; node i and node 2Q-1-i form a mirror pair with identical weights
/// and exactly opposite cached g values.
struct QuadGrid {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> gvals;
  int resolution;  ///< Q, points per half interval
  int params_n;    ///< the n this grid was built for

  std::size_t size() const { return nodes.size(); }
};

inline QuadGrid build_grid(const ModelParams& p, int resolution) {
  if (resolution < 4) throw std::invalid_argument("build_grid: resolution must be >= 4");
  std::vector<double> s, ws;
  detail::gauss_legendre_unit(resolution, s, ws);

  QuadGrid g;
  g.resolution = resolution;
  g.params_n = p.n;
  const std::size_t q = static_cast<std::size_t>(resolution);
  g.nodes.resize(2 * q);
  g.weights.resize(2 * q);
  g.gvals.resize(2 * q);

  const double gb = g_bound(p);
  const double half_m = 0.5 * static_cast<double>(p.m);
  for (std::size_t i = 0; i < q; ++i) {
    const std::size_t left = q - 1 - i;        // descending s keeps nodes ascending
    const double si = s[i];
    const double jac = half_m * detail::ipow(si, p.m - 1) * ws[i];
    const double d = 0.5 * detail::ipow(si, p.m);
    g.nodes[left] = 0.5 - d;
    g.nodes[q + i] = 0.5 + d;
    g.weights[left] = jac;
    g.weights[q + i] = jac;
    g.gvals[left] = -gb * si;
    g.gvals[q + i] = gb * si;
  }
  return g;
}

/// Closed forms for the g-moment integrals, 0 <= i <= k+1:
///
///   plain:    int_0^1 (u-1/2)^(i/m) du       = 0 (i odd),  m/(m+i) 2^(-i/m)      (i even)
///   shifted:  int_0^1 (u-1/2)^((i+1)/m) du   = 0 (i even), m/(m+1+i) 2^(-(i+1)/m) (i odd)
inline double moment_integral(const ModelParams& p, int i, bool shifted) {
  if (i < 0 || i > p.k + 1)
    throw std::invalid_argument("moment_integral: index i must lie in [0, k+1]");
  if (!shifted) {
    if (i % 2 == 1) return 0.0;
    return static_cast<double>(p.m) / static_cast<double>(p.m + i) *
           std::pow(2.0, -static_cast<double>(i) / static_cast<double>(p.m));
  }
  if (i % 2 == 0) return 0.0;
  return static_cast<double>(p.m) / static_cast<double>(p.m + 1 + i) *
         std::pow(2.0, -static_cast<double>(i + 1) / static_cast<double>(p.m));
}

/// Function sampled on the nodes of a QuadGrid.
struct DiscreteFunction {
  std::vector<double> values;
};

namespace detail {

inline void check_grid(const ModelParams& p, const QuadGrid& g, const DiscreteFunction& f,
                       const char* where) {
  if (g.params_n != p.n)
    throw std::invalid_argument(std::string(where) + ": grid was built for a different n");
  if (f.values.size() != g.size())
    throw std::invalid_argument(std::string(where) + ": function size does not match grid");
}

}  // namespace detail

/// One operator application through the separated kernel: with
/// A = sum_j w_j f_j^k and B = sum_j w_j g_j f_j^k,
/// out(t) = A + theta * 2^(-2/m) * g(t) * B.
inline DiscreteFunction apply_hammerstein(const ModelParams& p, const QuadGrid& g,
                                          const DiscreteFunction& f) {
  detail::check_grid(p, g, f, "apply_hammerstein");
  double a = 0.0, b = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double fk = detail::ipow(f.values[j], p.k);
    a += g.weights[j] * fk;
    b += g.weights[j] * g.gvals[j] * fk;
  }
  const double cb = p.theta * g_product_scale(p) * b;
  DiscreteFunction out;
  out.values.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out.values[i] = a + cb * g.gvals[i];
  return out;
}

/// Reference O(N^2) application with the kernel evaluated pointwise; agrees
/// with the separated path to rounding and exists only to check it.
inline DiscreteFunction apply_hammerstein_dense(const ModelParams& p, const QuadGrid& g,
                                                const DiscreteFunction& f) {
  detail::check_grid(p, g, f, "apply_hammerstein_dense");
  const double sc = p.theta * g_product_scale(p);
  DiscreteFunction out;
  out.values.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j)
      acc += g.weights[j] * (1.0 + sc * g.gvals[i] * g.gvals[j]) * detail::ipow(f.values[j], p.k);
    out.values[i] = acc;
  }
  return out;
}

/// Max-norm of H(phi_b) - phi_b on the grid nodes.
inline double fixed_point_residual(const ModelParams& p, const QuadGrid& g,
                                   const BoundaryFunction& b) {
  DiscreteFunction phi;
  phi.values.resize(g.size());
  // sample through the cached g values: near 1/2 the stored node has already
  // lost the low bits of the substitution variable, and g is steep there
  for (std::size_t i = 0; i < g.size(); ++i)
    phi.values[i] = b.c1 + b.c2 * p.theta * g.gvals[i];
  const DiscreteFunction img = apply_hammerstein(p, g, phi);
  double r = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    r = std::max(r, std::abs(img.values[i] - phi.values[i]));
  return r;
}

/// Weighted least-squares projection onto span{1, theta*g}.
struct Rank2Fit {
  double c1;
  double c2;
  double fit_error;  ///< max-norm of the residual on the nodes
};

inline Rank2Fit project_rank2(const ModelParams& p, const QuadGrid& g,
                              const DiscreteFunction& f) {
  detail::check_grid(p, g, f, "project_rank2");
  double sw = 0.0, sb = 0.0, sbb = 0.0, sf = 0.0, sfb = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double w = g.weights[j];
    const double bj = p.theta * g.gvals[j];
    sw += w;
    sb += w * bj;
    sbb += w * bj * bj;
    sf += w * f.values[j];
    sfb += w * f.values[j] * bj;
  }

  Rank2Fit fit{0.0, 0.0, 0.0};
  if (p.theta == 0.0) {
    // the second basis function vanishes identically; fit the constant alone
    fit.c1 = sf / sw;
    fit.c2 = 0.0;
  } else {
    const double det = sw * sbb - sb * sb;
    if (!(std::abs(det) > 0.0)) throw numerical_error("project_rank2: singular normal equations");
    fit.c2 = (sw * sfb - sb * sf) / det;
    fit.c1 = (sf - fit.c2 * sb) / sw;
  }
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double r = f.values[j] - (fit.c1 + fit.c2 * p.theta * g.gvals[j]);
    fit.fit_error = std::max(fit.fit_error, std::abs(r));
  }
  return fit;
}

/// One row of a damped fixed-point iteration trace.
struct IterateStep {
  double c1;
  double c2;
  double residual;  ///< max-norm of H f - f at this iterate
};

/// Damped iteration f <- (1-damping) f + damping H f, reporting the rank-2
/// coordinates and fixed-point residual of every iterate including the start
/// (steps+1 rows).  Throws numerical_error once the iterate norm passes 1e6.
inline std::vector<IterateStep> iterate_hammerstein(const ModelParams& p, const QuadGrid& g,
                                                    const DiscreteFunction& f0, int steps,
                                                    double damping) {
  detail::check_grid(p, g, f0, "iterate_hammerstein");
  if (steps < 1) throw std::invalid_argument("iterate_hammerstein: steps must be >= 1");
  if (!(damping > 0.0 && damping <= 1.0))
    throw std::invalid_argument("iterate_hammerstein: damping must lie in (0,1]");

  std::vector<IterateStep> trace;
  trace.reserve(static_cast<std::size_t>(steps) + 1);
  DiscreteFunction f = f0;
  for (int s = 0; s <= steps; ++s) {
    const DiscreteFunction img = apply_hammerstein(p, g, f);
    const Rank2Fit fit = project_rank2(p, g, f);
    double res = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j)
      res = std::max(res, std::abs(img.values[j] - f.values[j]));
    trace.push_back({fit.c1, fit.c2, res});
    if (s == steps) break;

    double norm = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      f.values[j] = (1.0 - damping) * f.values[j] + damping * img.values[j];
      norm = std::max(norm, std::abs(f.values[j]));
    }
    if (norm > 1e6)
      throw numerical_error("iterate_hammerstein: iteration diverged (norm > 1e6 at step " +
                            std::to_string(s + 1) + ")");
  }
  return trace;
}

}  // namespace gtl
