#pragma once

/*
 * Tree-indexed Monte Carlo sampler for the Markov chain a strictly positive
 * boundary law phi induces on the Cayley tree:
 *
 *     root density        rho(t)   proportional to  phi(t)^(k+1)
 *     child given parent  p(u|t) = K(t,u) phi(u)^k / phi(t)
 *
 * p(.|t) integrates to one precisely because phi is a fixed point of the
 * integral operator, so the sampler doubles as a check of that property.
 * Both densities are bounded (phi is monotone in t, K <= 1+theta), which
 * gives exact rejection envelopes and keeps the acceptance rate away from
 * zero uniformly in the parent spin.
 *
 * Streams are seeded per configuration index, so runs are reproducible for a
 * fixed master seed independent of thread count, and the consistency check
 * compares empirical child distributions inside parent-quantile bins against
 * the closed-form conditional law (the integrands are polynomials in g, whose
 * antiderivatives are explicit).
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gtl/model.hpp"
#include "gtl/parallel.hpp"
#include "gtl/quadrature.hpp"

namespace gtl {

/// Deterministic uniform stream; (master, index) pairs give independent
/// substreams with reproducible draws.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : RngStream(seed, 0) {}

  RngStream(std::uint64_t master, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    eng_.seed(seq);
  }

  /// Uniform draw in [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 eng_;
};

/// Running tally of rejection proposals.
struct AcceptTally {
  std::uint64_t proposals = 0;
  std::uint64_t accepted = 0;

  double rate() const {
    return proposals == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposals);
  }
};

namespace detail {

/// phi is monotone (affine in the increasing g), so its extrema sit at the
/// interval ends.  Rejects laws that are not strictly positive.
inline std::pair<double, double> phi_range(const BoundaryFunction& b, const ModelParams& p) {
  const double p0 = phi_eval(b, p, 0.0);
  const double p1 = phi_eval(b, p, 1.0);
  const double lo = std::min(p0, p1);
  if (!(lo > 0.0))
    throw std::invalid_argument("sampler: boundary law is not strictly positive on [0,1]");
  return {lo, std::max(p0, p1)};
}

inline constexpr std::uint64_t kMaxProposalsPerDraw = 100000000;

}  // namespace detail

/// Draw a root spin from rho(t) ~ phi(t)^(k+1) by rejection against the
/// uniform proposal with the exact envelope max(phi(0), phi(1))^(k+1).
inline double sample_root(const ModelParams& p, const BoundaryFunction& b, RngStream& rng,
                          AcceptTally& tally) {
  const double env = detail::ipow(detail::phi_range(b, p).second, p.k + 1);
  for (std::uint64_t it = 0; it < detail::kMaxProposalsPerDraw; ++it) {
    const double t = rng.uniform();
    const double dens = detail::ipow(phi_eval(b, p, t), p.k + 1);
    ++tally.proposals;
    if (rng.uniform() * env <= dens) {
      ++tally.accepted;
      return t;
    }
  }
  throw numerical_error("sample_root: rejection loop failed to accept");
}

/// Draw a child spin from p(u|t) = K(t,u) phi(u)^k / phi(t), envelope
/// (1+theta) max(phi)^k / phi(t).
inline double sample_child(const ModelParams& p, const BoundaryFunction& b, double parent,
                           RngStream& rng, AcceptTally& tally) {
  const double phi_max = detail::phi_range(b, p).second;
  const double phit = phi_eval(b, p, parent);
  const double env = (1.0 + p.theta) * detail::ipow(phi_max, p.k) / phit;
  const double gt = g_eval(p, parent);
  const double sc = p.theta * g_product_scale(p);
  for (std::uint64_t it = 0; it < detail::kMaxProposalsPerDraw; ++it) {
    const double u = rng.uniform();
    const double kern = 1.0 + sc * gt * g_eval(p, u);
    const double dens = kern * detail::ipow(phi_eval(b, p, u), p.k) / phit;
    if (dens > env * (1.0 + 1e-12))
      throw numerical_error("sample_child: density exceeds rejection envelope");
    ++tally.proposals;
    if (rng.uniform() * env <= dens) {
      ++tally.accepted;
      return u;
    }
  }
  throw numerical_error("sample_child: rejection loop failed to accept");
}

/// Finite subtree shape: the root keeps all k+1 neighbours, every other
/// interior vertex has k children, cut off below the given depth.
struct TreeSpec {
  int k;
  int depth;

  TreeSpec(int k_, int depth_) : k(k_), depth(depth_) {
    if (k < 2) throw std::invalid_argument("TreeSpec: tree order k must be >= 2");
    if (depth < 0) throw std::invalid_argument("TreeSpec: depth must be >= 0");
  }

  /// 1 + (k+1)(k^depth - 1)/(k - 1) vertices.
  std::size_t vertex_count() const {
    std::size_t total = 1, width = static_cast<std::size_t>(k) + 1;
    for (int d = 1; d <= depth; ++d) {
      total += width;
      width *= static_cast<std::size_t>(k);
    }
    return total;
  }
};

/// Spins indexed breadth-first from the root, with the tree wiring alongside.
struct Configuration {
  std::vector<double> spins;
  std::vector<std::int64_t> parents;  ///< -1 for the root
  std::vector<int> depths;
};

inline Configuration sample_configuration(const ModelParams& p, const BoundaryFunction& b,
                                          const TreeSpec& tree, RngStream& rng,
                                          AcceptTally& tally) {
  if (tree.k != p.k) throw std::invalid_argument("sample_configuration: tree order differs from k");
  const std::size_t total = tree.vertex_count();
  Configuration cfg;
  cfg.spins.reserve(total);
  cfg.parents.reserve(total);
  cfg.depths.reserve(total);

  cfg.spins.push_back(sample_root(p, b, rng, tally));
  cfg.parents.push_back(-1);
  cfg.depths.push_back(0);

  std::size_t next_parent = 0;
  while (cfg.spins.size() < total) {
    const std::size_t v = next_parent++;
    const int child_depth = cfg.depths[v] + 1;
    if (child_depth > tree.depth) break;
    const int fanout = (v == 0) ? p.k + 1 : p.k;
    for (int c = 0; c < fanout; ++c) {
      cfg.spins.push_back(sample_child(p, b, cfg.spins[v], rng, tally));
      cfg.parents.push_back(static_cast<std::int64_t>(v));
      cfg.depths.push_back(child_depth);
    }
  }
  return cfg;
}

/// Mean of g at the root under rho ~ phi^(k+1), via grid quadrature:
/// E[g] = int g phi^(k+1) / int phi^(k+1).
inline double order_param_analytic(const ModelParams& p, const BoundaryFunction& b,
                                   const QuadGrid& grid) {
  detail::phi_range(b, p);
  if (grid.params_n != p.n)
    throw std::invalid_argument("order_param_analytic: grid was built for a different n");
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double ph = detail::ipow(b.c1 + b.c2 * p.theta * grid.gvals[j], p.k + 1);
    num += grid.weights[j] * grid.gvals[j] * ph;
    den += grid.weights[j] * ph;
  }
  return num / den;
}

struct SampleStats {
  std::uint64_t sample_count;
  double mean_g_root;
  double std_error;
  double acceptance_rate;
};

/// Monte Carlo estimate of E[g(root)] from independent configurations, one
/// RNG substream per configuration so the result does not depend on the
/// thread count.  depth 0 draws the root alone.
inline SampleStats order_param_estimate(const ModelParams& p, const BoundaryFunction& b, int depth,
                                        std::uint64_t samples, std::uint64_t master_seed) {
  if (samples < 100)
    throw std::invalid_argument("order_param_estimate: need at least 100 samples");
  detail::phi_range(b, p);
  const TreeSpec tree(p.k, depth);

  std::vector<double> gvals(samples);
  std::vector<AcceptTally> tallies(samples);
  parallel_for(samples, [&](std::size_t i) {
    RngStream rng(master_seed, i);
    AcceptTally t;
    const Configuration cfg = sample_configuration(p, b, tree, rng, t);
    gvals[i] = g_eval(p, cfg.spins[0]);
    tallies[i] = t;
  });

  double sum = 0.0;
  AcceptTally total;
  for (std::size_t i = 0; i < samples; ++i) {
    sum += gvals[i];
    total.proposals += tallies[i].proposals;
    total.accepted += tallies[i].accepted;
  }
  const double mean = sum / static_cast<double>(samples);
  double sq = 0.0;
  for (const double v : gvals) sq += (v - mean) * (v - mean);
  const double var = sq / static_cast<double>(samples - 1);
  return {samples, mean, std::sqrt(var / static_cast<double>(samples)), total.rate()};
}

namespace detail {

/// Antiderivative of g(v)^p: with w = 4v-2 and a = (p+m)/m,
/// d/dv [ m/(4(p+m)) * sgn-adjusted |w|^a ] = g(v)^p.
inline double g_power_antiderivative(const ModelParams& p, int pw, double v) {
  const double w = 4.0 * v - 2.0;
  const double a = static_cast<double>(pw + p.m) / static_cast<double>(p.m);
  const double mag = std::pow(std::abs(w), a);
  const double val = (pw % 2 == 0) ? (w < 0.0 ? -mag : mag) : mag;
  return static_cast<double>(p.m) / (4.0 * static_cast<double>(pw + p.m)) * val;
}

inline double g_power_integral(const ModelParams& p, int pw, double lo, double hi) {
  return g_power_antiderivative(p, pw, hi) - g_power_antiderivative(p, pw, lo);
}

/// int_lo^hi g(u)^extra * phi(u)^kpow du by binomial expansion of phi in g.
inline double phi_power_g_integral(const ModelParams& p, const BoundaryFunction& b, int kpow,
                                   int extra, double lo, double hi) {
  double acc = 0.0;
  for (int j = 0; j <= kpow; ++j)
    acc += binomial(kpow, j) * ipow(b.c1, kpow - j) * ipow(b.c2 * p.theta, j) *
           g_power_integral(p, j + extra, lo, hi);
  return acc;
}

/// Root marginal CDF R(t) = int_0^t phi^(k+1) / int_0^1 phi^(k+1).
inline double root_cdf(const ModelParams& p, const BoundaryFunction& b, double t) {
  return phi_power_g_integral(p, b, p.k + 1, 0, 0.0, t) /
         phi_power_g_integral(p, b, p.k + 1, 0, 0.0, 1.0);
}

/// Inverse of the root CDF by bisection (R is continuous and increasing).
inline double root_quantile(const ModelParams& p, const BoundaryFunction& b, double prob) {
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (root_cdf(p, b, mid) < prob ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

struct ConsistencyResult {
  double ks_distance;  ///< worst Kolmogorov-Smirnov distance over the bins
  bool pass;
};

namespace detail {

inline constexpr int kConsistencyBins = 5;
inline constexpr double kKsCritical = 1.63;  // ~1% point of the KS statistic per bin

}  // namespace detail

/// Kolmogorov-Smirnov comparison of (parent, child) draws against the exact
/// conditional law, with parents grouped into quantile bins of the root
/// marginal.  Conditional on the parent falling in [a,c], the child CDF is
///
///     F(u) = [ A(u) S0 + theta 2^(-2/m) B(u) S1 ] / T,
///
/// with A(u) = int_0^u phi^k, B(u) = int_0^u g phi^k, S0 = int_a^c phi^k,
/// S1 = int_a^c g phi^k and T = int_a^c phi^(k+1): averaging p(u|t) over the
/// root marginal cancels the phi(t) denominator, and F(1) = 1 restates the
/// fixed-point property of phi.
inline ConsistencyResult consistency_check_pairs(const ModelParams& p, const BoundaryFunction& b,
                                                 const std::vector<std::pair<double, double>>& pairs) {
  detail::phi_range(b, p);
  if (pairs.size() < 100)
    throw std::invalid_argument("consistency_check_pairs: need at least 100 pairs");

  // deterministic quantile edges of the root marginal
  std::vector<double> edges(detail::kConsistencyBins + 1);
  edges[0] = 0.0;
  edges[detail::kConsistencyBins] = 1.0;
  for (int j = 1; j < detail::kConsistencyBins; ++j)
    edges[j] = detail::root_quantile(p, b, static_cast<double>(j) / detail::kConsistencyBins);

  const double sc = p.theta * g_product_scale(p);
  ConsistencyResult result{0.0, true};
  for (int bin = 0; bin < detail::kConsistencyBins; ++bin) {
    const double a = edges[bin], c = edges[bin + 1];
    std::vector<double> children;
    for (const auto& [t, u] : pairs)
      if (t >= a && (t < c || (bin == detail::kConsistencyBins - 1 && t <= c)))
        children.push_back(u);
    if (children.size() < 5) {
      result.pass = false;
      continue;
    }
    std::sort(children.begin(), children.end());

    const double s0 = detail::phi_power_g_integral(p, b, p.k, 0, a, c);
    const double s1 = detail::phi_power_g_integral(p, b, p.k, 1, a, c);
    const double tt = detail::phi_power_g_integral(p, b, p.k + 1, 0, a, c);
    auto cdf = [&](double u) {
      const double au = detail::phi_power_g_integral(p, b, p.k, 0, 0.0, u);
      const double bu = detail::phi_power_g_integral(p, b, p.k, 1, 0.0, u);
      return (au * s0 + sc * bu * s1) / tt;
    };

    double dist = 0.0;
    const double inv = 1.0 / static_cast<double>(children.size());
    for (std::size_t i = 0; i < children.size(); ++i) {
      const double f = cdf(children[i]);
      dist = std::max(dist, std::abs(f - static_cast<double>(i) * inv));
      dist = std::max(dist, std::abs(static_cast<double>(i + 1) * inv - f));
    }
    result.ks_distance = std::max(result.ks_distance, dist);
    if (dist > detail::kKsCritical / std::sqrt(static_cast<double>(children.size())))
      result.pass = false;
  }
  return result;
}

/// Draw (root, child) pairs with the library sampler and run the closed-form
/// KS comparison on them.  The grid argument guards against garbage input: b
/// must actually be a fixed point or the conditional densities do not
/// normalise and the comparison is meaningless.
inline ConsistencyResult consistency_check(const ModelParams& p, const BoundaryFunction& b,
                                           const QuadGrid& grid, std::uint64_t samples,
                                           std::uint64_t master_seed) {
  if (samples < 10000) throw std::invalid_argument("consistency_check: need at least 10000 samples");
  if (fixed_point_residual(p, grid, b) > 1e-6)
    throw std::invalid_argument("consistency_check: boundary law is not a fixed point");

  std::vector<std::pair<double, double>> pairs(samples);
  parallel_for(samples, [&](std::size_t i) {
    RngStream rng(master_seed, i);
    AcceptTally t;
    const double root = sample_root(p, b, rng, t);
    pairs[i] = {root, sample_child(p, b, root, rng, t)};
  });
  return consistency_check_pairs(p, b, pairs);
}

}  // namespace gtl
