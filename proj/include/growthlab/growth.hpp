#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "growthlab/interval_diffeo.hpp"

namespace growthlab {

/// Sample points of [0;1]: a uniform grid united with geometric ladders
/// 2^{-j/q} and 1 - 2^{-j/q} for j <= depth*q, plus optional extra points.
struct GridSpec {
  std::size_t uniform = 4096;
  int ladder_depth = 60;
  int ladder_per_octave = 4;
  std::vector<UnitPoint> extra;
  // Also follow backward orbits of the grid. The maximiser of (f^n)' sits
  // near f^{-n} of an interior point, where forward samples are too sparse.
  bool backward_orbits = true;

  /// Sorted, duplicate-free points including both endpoints.
  std::vector<UnitPoint> points() const;
};

/// Growth data of the n-th iterate.
///
/// a_fwd = max log (f^n)' and a_bwd = max log (f^{-n})' over the grid;
/// gamma_n = exp max(a_fwd, a_bwd). The slack fields estimate how far the
/// grid maximum falls below the true one: the rise of the parabola through
/// the extremal grid point and its two neighbours.
struct GrowthRecord {
  long n = 0;
  double a_fwd = 0.0;
  double a_bwd = 0.0;
  double log_gamma = 0.0;
  double gamma_n = 1.0;
  std::size_t grid_size = 0;
  double slack_fwd = 0.0;
  double slack_bwd = 0.0;

  double slack() const { return a_fwd >= a_bwd ? slack_fwd : slack_bwd; }
};

/// f^n(p); negative n iterates the inverse.
UnitPoint eval_iterate(const IntervalDiffeo& f, long n, UnitPoint p);
double eval_iterate(const IntervalDiffeo& f, long n, double x);

/// log (f^n)'(p) as a sum of log f' along the orbit. Throws InvariantError
/// when a non-positive derivative is met.
double log_orbit_derivative(const IntervalDiffeo& f, long n, UnitPoint p);
double log_orbit_derivative(const IntervalDiffeo& f, long n, double x);

/// Records for n = 1..n_max, computed by advancing every grid orbit once per
/// step. Since f^n is a bijection of [0;1],
/// max_x log (f^n)'(x) = -min_y log (f^{-n})'(y), so forward and backward
/// orbits of the grid both sample a_fwd and a_bwd; the larger value wins.
std::vector<GrowthRecord> growth_sequence(const IntervalDiffeo& f, long n_max,
                                          const GridSpec& grid = {});

struct GammaEstimate {
  double gamma = 1.0;           // Gamma_N^{1/N}
  double gamma_previous = 1.0;  // Gamma_{N/2}^{2/N}
  long n_probe = 0;
  double fixed_point_gamma = 1.0;  // max over Fix(f) of max(f', 1/f')
  double tolerance = 1e-2;
  bool consistent = true;
};

GammaEstimate gamma_exponent(const IntervalDiffeo& f, long n_probe,
                             const GridSpec& grid = {},
                             double tolerance = 1e-2);

struct FixedPointSet {
  std::vector<double> points;
  std::vector<double> multipliers;
  std::vector<bool> degenerate;
  // Near-tangencies without a sign change, reported rather than resolved.
  std::vector<bool> ambiguous;
  std::vector<std::pair<double, double>> identity_intervals;
};

inline constexpr double kFixedPointTolerance = 1e-10;
inline constexpr double kDegenerateTolerance = 1e-8;
inline constexpr int kIdentityRun = 10;

FixedPointSet find_fixed_points(const IntervalDiffeo& f, int resolution = 1001);

struct OrbitGaps {
  UnitPoint x0;
  std::vector<double> deltas;  // delta_n = x_{n+1} - x_n, n = 0..n_max
  int direction = 0;
};

struct OrbitGapReport {
  OrbitGaps gaps;
  // log Gamma_n + slack >= log(delta_0 / delta_n) failed at these n.
  std::vector<long> violations;
  std::vector<double> reciprocal_partial_sums;  // sum_{k<=n} 1/Gamma_k
  bool partial_sums_monotone = true;
  bool partial_sums_bounded = true;  // every partial sum <= 1/delta_0
  double gap_sum = 0.0;              // sum |delta_n|, at most 1
  bool ok() const {
    return violations.empty() && partial_sums_monotone &&
           partial_sums_bounded && gap_sum <= 1.0 + 1e-12;
  }
};

/// Checks Gamma_n >= delta_0 / delta_n and the reciprocal-sum bound along the
/// orbit of x0. Throws PreconditionError when x0 is fixed.
OrbitGapReport orbit_gap_bound(const IntervalDiffeo& f, UnitPoint x0,
                               const std::vector<GrowthRecord>& records);
OrbitGapReport orbit_gap_bound(const IntervalDiffeo& f, UnitPoint x0,
                               long n_max, const GridSpec& grid = {});

struct EndpointFlatness {
  bool right_end = false;
  // Per order i = 1..max_order: |f'(p) - 1| for i = 1, |f^{(i)}(p)| above.
  // nullopt when the oracle does not provide that order.
  std::vector<std::optional<double>> limits;
  // Full approach sequences, same indexing as `limits`.
  std::vector<std::vector<double>> sequences;
  bool flat = false;
  // Smallest p with f^{(p+1)}(endpoint) != 0 given f'(endpoint) = 1;
  // 0 for a non-degenerate endpoint, nullopt when flat to the probed order.
  std::optional<int> fixed_point_order;
  bool order_unavailable = false;
};

struct FlatnessReport {
  int max_order = 0;
  double tolerance = 1e-4;
  EndpointFlatness left;
  EndpointFlatness right;
  bool flat() const { return left.flat && right.flat; }
};

FlatnessReport flatness_report(const IntervalDiffeo& f, int max_order,
                               double tolerance = 1e-4);

/// Pairs (n, m) with n + m <= n_max where
/// log Gamma_{n+m} > log Gamma_n + log Gamma_m + slack_n + slack_m + eps.
std::vector<std::pair<long, long>> submultiplicativity_violations(
    const std::vector<GrowthRecord>& records, double eps = 1e-9);

}  // namespace growthlab
