#pragma once

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include "errors.hpp"

namespace erestab {

// Bracketed scalar root. f(lo) and f(hi) must differ in sign (or one must be 0).
template <class F>
double bracketed_root(F&& f, double lo, double hi, double rel_tol = 1e-15,
                      std::uintmax_t max_iter = 200) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0) == (fhi < 0))
    throw ExistenceError("no sign change on [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "]");
  auto tol = [rel_tol](double a, double b) {
    return std::fabs(a - b) <= rel_tol * std::fmin(std::fabs(a), std::fabs(b)) ||
           std::fabs(a - b) <= 1e-300;
  };
  std::uintmax_t iters = max_iter;
  auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
  if (iters >= max_iter)
    throw ConvergenceError("bracketed root did not converge in " +
                           std::to_string(max_iter) + " iterations");
  double a = r.first, b = r.second;
  return std::fabs(f(a)) <= std::fabs(f(b)) ? a : b;
}

}  // namespace erestab
