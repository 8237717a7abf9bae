#pragma once

#include <vector>

#include "growthlab/growth.hpp"

namespace growthlab {

/// Least-squares line through (log n, log Gamma_n) over n in [n_lo, n_hi].
struct FitReport {
  long n_lo = 0;
  long n_hi = 0;
  std::size_t points = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;  // largest |log Gamma_n - fitted value|
};

inline constexpr double kMinWindowRatio = 10.0;
inline constexpr std::size_t kMinWindowPoints = 10;

/// Throws PreconditionError when n_hi / n_lo < 10, the window leaves the
/// computed range or holds fewer than 10 records.
FitReport fit_exponent(const std::vector<GrowthRecord>& records, long n_lo,
                       long n_hi);

/// Same fit on raw (n, Gamma_n) pairs.
FitReport fit_exponent(const std::vector<long>& n,
                       const std::vector<double>& gamma, long n_lo, long n_hi);

}  // namespace growthlab
