#pragma once

/*
 * Reduction of the boundary-law fixed-point problem to two dimensions.
 *
 * Inserting phi(t) = x + y * theta * g(t) (coefficients relative to the basis
 * {1, g}, with y carrying the C2 coefficient scaled so that phi = x + theta*y*g)
 * into the integral fixed-point equation and integrating the moments of g
 * yields the planar map
 *
 *     x' = sum_{i even, 0<=i<=k}  C(k,i) * (2n+1)/(2n+1+i) * 2^(i/(2n+1))     * x^(k-i) (theta y)^i
 *     y' = sum_{i odd,  1<=i<=k}  C(k,i) * (2n+1)/(2n+2+i) * 2^((i-1)/(2n+1)) * x^(k-i) (theta y)^i
 *
 * For x != 0 this is (x', y') = (x^k E(z), x^k O(z)) with z = theta*y/x and
 *
 *     E(z) = sum_{i even} a_i z^i,   O(z) = sum_{i odd} b_i z^i
 *
 * (a_i, b_i the coefficients above).  Fixed points with x > 0 away from the
 * trivial ray reduce to positive roots of the odd polynomial
 *
 *     P(z) = z E(z) - theta O(z)
 *          = sum_{i odd, i<=k} r_i z^i  [+ a_k z^(k+1) when k is even],
 *
 * where r_i = C(k,i) * (2n+1)/(2n+2+i) * 2^((i-1)/(2n+1)) * (theta_i - theta)
 * and theta_i = i/(k-i+1) * (2n+2+i)/(2n+i) is increasing in i with
 * theta_1 = theta_c.  All coefficients of P are positive for theta < theta_c
 * and exactly one sign change appears once theta > theta_c, so by Descartes'
 * rule P has exactly one positive root z0 in that regime.  The fixed point is
 * recovered through
 *
 *     x0 = E(z0)^(1/(1-k)),   y0 = O(z0) * E(z0)^(k/(1-k)).
 *
 * A planar fixed point (x, y) corresponds to a strictly positive boundary law
 * iff x > 0 and |theta*y/x| < 2^(-1/(2n+1)).
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "gtl/model.hpp"

namespace gtl {

namespace detail {

/// Binomial coefficient as a double; exact while the intermediates stay below 2^53.
inline double binomial(int k, int i) {
  if (i < 0 || i > k) return 0.0;
  i = std::min(i, k - i);
  double c = 1.0;
  for (int j = 1; j <= i; ++j) c = c * static_cast<double>(k - j + 1) / static_cast<double>(j);
  return c;
}

/// a_i = C(k,i) * (2n+1)/(2n+1+i) * 2^(i/(2n+1)), the even-index series coefficient.
inline double series_coeff_even(const ModelParams& p, int i) {
  return binomial(p.k, i) * static_cast<double>(p.m) / static_cast<double>(p.m + i) *
         std::pow(2.0, static_cast<double>(i) / static_cast<double>(p.m));
}

/// b_i = C(k,i) * (2n+1)/(2n+2+i) * 2^((i-1)/(2n+1)), the odd-index series coefficient.
inline double series_coeff_odd(const ModelParams& p, int i) {
  return binomial(p.k, i) * static_cast<double>(p.m) / static_cast<double>(p.m + 1 + i) *
         std::pow(2.0, static_cast<double>(i - 1) / static_cast<double>(p.m));
}

}  // namespace detail

/// Values of the even and odd power series E, O at a point z.
struct SeriesValues {
  double odd;   ///< O(z) = sum over odd i of b_i z^i
  double even;  ///< E(z) = sum over even i of a_i z^i
};

inline SeriesValues series_eval(const ModelParams& p, double z) {
  double odd = 0.0, even = 0.0, zp = 1.0;
  for (int i = 0; i <= p.k; ++i) {
    if (i % 2 == 0)
      even += detail::series_coeff_even(p, i) * zp;
    else
      odd += detail::series_coeff_odd(p, i) * zp;
    zp *= z;
  }
  return {odd, even};
}

struct Vec2 {
  double x;
  double y;
};

/// One application of the planar map.
inline Vec2 v_apply(const ModelParams& p, double x, double y) {
  double xo = 0.0, yo = 0.0;
  const double ty = p.theta * y;
  for (int i = 0; i <= p.k; ++i) {
    const double w = detail::ipow(x, p.k - i) * detail::ipow(ty, i);
    if (i % 2 == 0)
      xo += detail::series_coeff_even(p, i) * w;
    else
      yo += detail::series_coeff_odd(p, i) * w;
  }
  return {xo, yo};
}

/// Max-norm distance of (x,y) from its image under the planar map.
inline double v_residual(const ModelParams& p, double x, double y) {
  const Vec2 v = v_apply(p, x, y);
  return std::max(std::abs(v.x - x), std::abs(v.y - y));
}

/// theta_i = i/(k-i+1) * (2n+2+i)/(2n+i) for odd i in [1,k]; theta_1 == theta_c
/// and the sequence is strictly increasing in i.
inline double theta_threshold(int k, int n, int i) {
  if (k < 2) throw std::invalid_argument("theta_threshold: tree order k must be >= 2");
  if (n < 0) throw std::invalid_argument("theta_threshold: exponent index n must be >= 0");
  if (i < 1 || i > k || i % 2 == 0)
    throw std::invalid_argument("theta_threshold: index i must be odd and in [1,k]");
  const double num = static_cast<double>(i) * static_cast<double>(2 * n + 2 + i);
  const double den = static_cast<double>(k - i + 1) * static_cast<double>(2 * n + i);
  return num / den;
}

struct PolyTerm {
  int degree;
  double coeff;
};

/// Odd polynomial P(z) whose positive roots index the nontrivial fixed points.
/// Terms are stored with ascending degree; degrees are the odd integers up to
/// k (k odd) or up to k+1 (k even, the leading term a_k z^(k+1)).
struct PolyCoeffs {
  std::vector<PolyTerm> terms;
  int sign_changes;  ///< Descartes count over coefficients ordered by degree
};

namespace detail {

/// Coefficients below this fraction of the largest magnitude are treated as
/// zero by the sign-change count; theta values that hit a threshold theta_i
/// exactly produce such structurally vanishing terms.
inline constexpr double kSignZeroRel = 1e-14;

inline int count_sign_changes(const std::vector<PolyTerm>& terms) {
  double amax = 0.0;
  for (const auto& t : terms) amax = std::max(amax, std::abs(t.coeff));
  if (amax == 0.0) return 0;
  int changes = 0, prev = 0;
  for (const auto& t : terms) {
    if (std::abs(t.coeff) <= kSignZeroRel * amax) continue;
    const int s = t.coeff > 0.0 ? 1 : -1;
    if (prev != 0 && s != prev) ++changes;
    prev = s;
  }
  return changes;
}

}  // namespace detail

inline PolyCoeffs poly_coeffs(const ModelParams& p) {
  PolyCoeffs out;
  for (int i = 1; i <= p.k; i += 2) {
    const double r = detail::series_coeff_odd(p, i) * (theta_threshold(p.k, p.n, i) - p.theta);
    out.terms.push_back({i, r});
  }
  if (p.k % 2 == 0) out.terms.push_back({p.k + 1, detail::series_coeff_even(p, p.k)});
  out.sign_changes = detail::count_sign_changes(out.terms);
  return out;
}

/// Evaluate P(z).  All degrees are odd, so this runs Horner in w = z^2 and
/// multiplies by z once; P(-z) == -P(z) holds exactly in floating point.
inline double poly_eval(const PolyCoeffs& c, double z) {
  if (c.terms.empty()) return 0.0;
  const double w = z * z;
  double acc = 0.0;
  for (auto it = c.terms.rbegin(); it != c.terms.rend(); ++it) acc = acc * w + it->coeff;
  return acc * z;
}

namespace detail {

/// P(z) / z as a polynomial in w = z^2, ascending coefficients.
inline std::vector<double> even_part_coeffs(const PolyCoeffs& c) {
  std::vector<double> q;
  q.reserve(c.terms.size());
  for (const auto& t : c.terms) q.push_back(t.coeff);
  return q;
}

inline double horner(const std::vector<double>& q, double w) {
  double acc = 0.0;
  for (auto it = q.rbegin(); it != q.rend(); ++it) acc = acc * w + *it;
  return acc;
}

inline double horner_deriv(const std::vector<double>& q, double w) {
  double acc = 0.0;
  for (std::size_t j = q.size(); j-- > 1;) acc = acc * w + static_cast<double>(j) * q[j];
  return acc;
}

}  // namespace detail

/// Unique positive root of P, when it exists.  Returns an empty optional when
/// the coefficient signs admit no positive root (theta <= theta_c).  Bisection
/// on w = z^2 inside a Cauchy bound down to 1e-13 relative width, then Newton
/// polish; the result must satisfy |P(z0)| <= 1e-10 * sum_i |r_i| z0^degree_i.
inline std::optional<double> solve_z0(const ModelParams& p) {
  const PolyCoeffs c = poly_coeffs(p);
  if (c.sign_changes == 0) return std::nullopt;

  const std::vector<double> q = detail::even_part_coeffs(c);
  const double lead = q.back();
  double amax = 0.0;
  for (std::size_t j = 0; j + 1 < q.size(); ++j) amax = std::max(amax, std::abs(q[j]));
  double hi = 1.0 + amax / lead;  // Cauchy: all roots of the w-polynomial lie below
  if (!(detail::horner(q, hi) > 0.0))
    throw numerical_error("solve_z0: upper bracket is not positive");

  // Q(0) = r_1 is negative past the first threshold; if rounding left it at
  // ~0 find a strictly negative point by scanning down from the bound.
  double lo = 0.0;
  if (!(detail::horner(q, lo) < 0.0)) {
    bool found = false;
    for (int j = 1; j <= 400; ++j) {
      const double w = std::ldexp(hi, -j);
      if (detail::horner(q, w) < 0.0) {
        lo = w;
        found = true;
        break;
      }
    }
    if (!found) throw numerical_error("solve_z0: sign change reported but no bracket found");
  }

  for (int it = 0; it < 500 && (hi - lo) > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (detail::horner(q, mid) < 0.0 ? lo : hi) = mid;
  }

  double w = 0.5 * (lo + hi);
  for (int it = 0; it < 50; ++it) {
    const double f = detail::horner(q, w);
    const double df = detail::horner_deriv(q, w);
    if (df == 0.0) break;
    const double wn = w - f / df;
    if (!std::isfinite(wn) || wn < 0.5 * lo || wn > 2.0 * hi) break;
    const bool done = std::abs(wn - w) <= 1e-16 * w;
    w = wn;
    if (done) break;
  }

  const double z0 = std::sqrt(w);
  double scale = 0.0, zp;
  for (const auto& t : c.terms) {
    zp = 1.0;
    for (int d = 0; d < t.degree; ++d) zp *= z0;
    scale += std::abs(t.coeff) * zp;
  }
  if (std::abs(poly_eval(c, z0)) > 1e-10 * scale)
    throw numerical_error("solve_z0: root residual exceeds tolerance");
  return z0;
}

/// Map a root z0 of P back to the planar fixed point with x > 0, y > 0.
inline Vec2 recover_xy(const ModelParams& p, double z0) {
  const SeriesValues s = series_eval(p, z0);
  if (!(s.even > 0.0)) throw numerical_error("recover_xy: even series not positive at z0");
  const double ex = 1.0 / (1.0 - static_cast<double>(p.k));
  const double x0 = std::pow(s.even, ex);
  const double y0 = s.odd * std::pow(s.even, static_cast<double>(p.k) * ex);
  return {x0, y0};
}

enum class FixedPointKind {
  origin,
  unit,
  negated_unit,
  branch_pp,
  branch_mm,
  branch_pm,
  branch_mp,
};

inline const char* kind_name(FixedPointKind k) {
  switch (k) {
    case FixedPointKind::origin: return "origin";
    case FixedPointKind::unit: return "unit";
    case FixedPointKind::negated_unit: return "negated_unit";
    case FixedPointKind::branch_pp: return "branch_pp";
    case FixedPointKind::branch_mm: return "branch_mm";
    case FixedPointKind::branch_pm: return "branch_pm";
    case FixedPointKind::branch_mp: return "branch_mp";
  }
  return "?";
}

struct FixedPoint2D {
  double x;
  double y;
  FixedPointKind kind;
  bool positive_law;
};

/// Whether the planar point corresponds to a strictly positive boundary law:
/// x > 0 and |theta y / x| < 2^(-1/m).
inline bool classify_positive(const ModelParams& p, const FixedPoint2D& fp) {
  if (!(fp.x > 0.0)) return false;
  return std::abs(p.theta * fp.y) * g_bound(p) < fp.x;
}

/// All fixed points of the planar map, trivial ray first, then the branch
/// points obtained from the positive root of P.  The sign pattern depends on
/// the parity of k: even k identifies (x,y) with (-x,-y) composed with the
/// series parities, leaving {(0,0), (1,0)} plus the pair (x0, +-y0); odd k
/// additionally admits (-1,0) and all four sign combinations of the branch.
inline std::vector<FixedPoint2D> enumerate_fixed_points(const ModelParams& p) {
  std::vector<FixedPoint2D> out;
  auto push = [&](double x, double y, FixedPointKind kind) {
    FixedPoint2D fp{x, y, kind, false};
    fp.positive_law = classify_positive(p, fp);
    const double res = v_residual(p, x, y);
    if (!(res <= 1e-9))
      throw numerical_error(std::string("enumerate_fixed_points: residual ") +
                            std::to_string(res) + " at " + kind_name(kind));
    out.push_back(fp);
  };

  push(0.0, 0.0, FixedPointKind::origin);
  push(1.0, 0.0, FixedPointKind::unit);
  if (p.k % 2 == 1) push(-1.0, 0.0, FixedPointKind::negated_unit);

  if (const auto z0 = solve_z0(p)) {
    const Vec2 b = recover_xy(p, *z0);
    push(b.x, b.y, FixedPointKind::branch_pp);
    push(b.x, -b.y, FixedPointKind::branch_pm);
    if (p.k % 2 == 1) {
      push(-b.x, b.y, FixedPointKind::branch_mp);
      push(-b.x, -b.y, FixedPointKind::branch_mm);
    }
  }
  return out;
}

}  // namespace gtl
