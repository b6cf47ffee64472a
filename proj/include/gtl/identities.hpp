#pragma once

/*
 * Exact combinatorial identity behind the moment table of the planar map:
 *
 *     sum_{i=0}^{k} (-1)^i C(k,i) / (m+1+i)  =  k! m! / (m+1+k)!
 *
 * Both sides are evaluated in exact rational arithmetic so the check is an
 * equality, not a tolerance.  Factorials up to k+m+1 appear, which overflows
 * 64-bit integers long before the target range (k = 20, m = 21 needs 42!),
 * hence the arbitrary-precision integers.
 */

#include <stdexcept>
#include <utility>

#include <boost/multiprecision/cpp_int.hpp>

namespace gtl {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

namespace detail {

inline BigInt big_factorial(int v) {
  BigInt r = 1;
  for (int i = 2; i <= v; ++i) r *= i;
  return r;
}

inline BigInt big_binomial(int k, int i) {
  BigInt r = 1;
  for (int j = 1; j <= i; ++j) {
    r *= (k - j + 1);
    r /= j;  // always divides exactly at this point
  }
  return r;
}

}  // namespace detail

/// Returns the pair (alternating sum, factorial ratio); the identity asserts
/// the two components are equal.  Requires k >= 1 and odd m >= 1.
inline std::pair<BigRational, BigRational> alt_sum_identity(int k, int m) {
  if (k < 1) throw std::invalid_argument("alt_sum_identity: k must be >= 1");
  if (m < 1 || m % 2 == 0) throw std::invalid_argument("alt_sum_identity: m must be odd and >= 1");

  BigRational lhs = 0;
  for (int i = 0; i <= k; ++i) {
    BigRational term(detail::big_binomial(k, i), BigInt(m + 1 + i));
    if (i % 2 == 1) term = -term;
    lhs += term;
  }
  const BigRational rhs(detail::big_factorial(k) * detail::big_factorial(m),
                        detail::big_factorial(m + 1 + k));
  return {lhs, rhs};
}

}  // namespace gtl
