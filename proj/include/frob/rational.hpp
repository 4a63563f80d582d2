#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace frob {

using Int = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Int binomial(long n, long k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  Int r = 1;
  for (long i = 0; i < k; ++i) {
    r *= n - i;
    r /= i + 1;
  }
  return r;
}

inline Int factorial(long n) {
  Int r = 1;
  for (long i = 2; i <= n; ++i) r *= i;
  return r;
}

}  // namespace frob
