#pragma once

/*
 * Vocabulary for a nearest-neighbour interaction model with continuous spins
 * in [0,1] on a Cayley tree of order k (every vertex has k+1 neighbours).
 *
 * The pair interaction is encoded by the kernel
 *
 *     K(t,u) = 1 + theta * ( 4(t - 1/2)(u - 1/2) )^(1/(2n+1)),
 *
 * where the root of odd order m = 2n+1 is the signed real root.  Writing
 *
 *     g(t) = sign(4t-2) * |4t-2|^(1/m),        g : [0,1] -> [-2^(1/m), 2^(1/m)],
 *
 * the kernel factorises as K(t,u) = 1 + theta * 2^(-2/m) * g(t) * g(u), so
 * 1-theta <= K(t,u) <= 1+theta and K > 0 for theta < 1.
 *
 * Candidate boundary laws are the two-parameter family
 *
 *     phi(t) = c1 + c2 * theta * g(t),
 *
 * and the uniqueness threshold of the associated fixed-point problem is
 * theta_c = (2n+3) / (k(2n+1)).  Values theta_c >= 1 mean the transition is
 * not reachable inside the admissible range theta in [0,1).
 */

#include <cmath>
#include <stdexcept>
#include <string>

namespace gtl {

/// Raised when an algorithm fails for numerical reasons (no bracket, residual
/// too large, divergence).  Argument/domain problems use the std exceptions.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

/// x^e for small non-negative integer e, by repeated multiplication.
inline double ipow(double x, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

/// Signed real root of odd order m: odd_root(-8, 3) == -2.
inline double odd_root(double x, int m) {
  if (m == 1) return x;
  if (x == 0.0) return 0.0;
  const double r = std::pow(std::abs(x), 1.0 / static_cast<double>(m));
  return x < 0.0 ? -r : r;
}

}  // namespace detail

/// Uniqueness threshold theta_c = (2n+3) / (k(2n+1)).
inline double theta_critical(int k, int n) {
  if (k < 2) throw std::invalid_argument("theta_critical: tree order k must be >= 2");
  if (n < 0) throw std::invalid_argument("theta_critical: exponent index n must be >= 0");
  return static_cast<double>(2 * n + 3) / static_cast<double>(k * (2 * n + 1));
}

/// Validated parameter pack.  m and theta_c are derived on construction.
struct ModelParams {
  int k;         ///< tree order, k >= 2
  int n;         ///< exponent index, n >= 0; root order is m = 2n+1
  double theta;  ///< coupling, 0 <= theta < 1
  int m;
  double theta_c;

  ModelParams(int k_, int n_, double theta_)
      : k(k_), n(n_), theta(theta_), m(2 * n_ + 1), theta_c(0.0) {
    if (k < 2) throw std::invalid_argument("ModelParams: tree order k must be >= 2");
    if (n < 0) throw std::invalid_argument("ModelParams: exponent index n must be >= 0");
    if (!(theta >= 0.0 && theta < 1.0))
      throw std::invalid_argument("ModelParams: coupling theta must satisfy 0 <= theta < 1");
    theta_c = theta_critical(k, n);
  }
};

/// sup |g| = 2^(1/m).
inline double g_bound(const ModelParams& p) {
  return std::pow(2.0, 1.0 / static_cast<double>(p.m));
}

/// Scale of the separated kernel: K = 1 + theta * g_product_scale * g(t) * g(u),
/// with g_product_scale = 2^(-2/m).
inline double g_product_scale(const ModelParams& p) {
  return std::pow(2.0, -2.0 / static_cast<double>(p.m));
}

/// Order-parameter basis function g(t) = sign(4t-2) |4t-2|^(1/m) on [0,1].
inline double g_eval(const ModelParams& p, double t) {
  if (!(t >= 0.0 && t <= 1.0))
    throw std::domain_error("g_eval: spin value t must lie in [0,1]");
  return detail::odd_root(4.0 * t - 2.0, p.m);
}

/// Pair kernel K(t,u), strictly positive for theta < 1.  The g factors are
/// multiplied first so the symmetry in (t,u) is exact in floating point.
inline double kernel_eval(const ModelParams& p, double t, double u) {
  return 1.0 + p.theta * g_product_scale(p) * (g_eval(p, t) * g_eval(p, u));
}

/// Coefficients of a candidate boundary law phi(t) = c1 + c2 * theta * g(t).
struct BoundaryFunction {
  double c1 = 1.0;
  double c2 = 0.0;
};

inline double phi_eval(const BoundaryFunction& b, const ModelParams& p, double t) {
  return b.c1 + b.c2 * p.theta * g_eval(p, t);
}

}  // namespace gtl
