#pragma once

#include <optional>
#include <string>
#include <vector>

#include "growthlab/growth.hpp"
#include "growthlab/interval_diffeo.hpp"

namespace growthlab {

/// v = total variation of log f', L = Lipschitz constant of log f',
/// C = L e^v.
struct RegularityData {
  double variation = 0.0;
  double lipschitz = 0.0;
  double c_const = 0.0;
  double variation_error = 0.0;  // quadrature error estimate
};

/// Needs the second-derivative oracle. `resolution` is the number of samples
/// scanned for the Lipschitz maximum before golden-section refinement.
RegularityData regularity_constants(const IntervalDiffeo& f,
                                    int resolution = 20001);

struct DenjoyReport {
  double lo = 0.0, hi = 0.0;
  long n = 0;
  double min_ratio = 1.0;  // extremal (f^n)'(x) / (f^n)'(y) over samples
  double max_ratio = 1.0;
  double bound = 1.0;  // e^v
  bool ok = true;
};

inline constexpr double kDenjoySlack = 1e-9;

/// Samples (f^n)' on J = [lo; hi] and compares every ratio with e^{+-v}.
/// Throws PreconditionError when f(J) meets J.
DenjoyReport denjoy_check(const IntervalDiffeo& f, double lo, double hi,
                          long n, int samples, const RegularityData& reg);

enum class Direction { Forward, Backward };
std::string to_string(Direction d);

struct ConvexityViolation {
  long n = 0;
  Direction direction = Direction::Forward;
  double second_difference = 0.0;  // 2a_n - a_{n-1} - a_{n+1}
  double allowed = 0.0;            // C e^{-a_n} + slack
};

inline constexpr double kConvexityTolerance = 1e-6;

/// Checks 2a_n - a_{n-1} - a_{n+1} <= C e^{-a_n} + tol + s_{n-1} + s_{n+1}
/// for a sequence starting at a_0. `slack` is empty or has a.size() entries.
std::vector<ConvexityViolation> near_convexity_violations(
    const std::vector<double>& a, double c_const,
    const std::vector<double>& slack = {},
    Direction direction = Direction::Forward);

/// Both the forward and the backward a-sequences of the records, with
/// a_0 = 0 prepended and the records' grid slack applied.
std::vector<ConvexityViolation> near_convexity_check(
    const std::vector<GrowthRecord>& records, const RegularityData& reg);

/// a_0, a_1, ..., a_N with a_0 = 0, and the constant C of the
/// second-difference inequality L_j a <= C e^{-a_j}.
struct RealSequence {
  std::vector<double> values;
  double c_const = 1.0;
  double tolerance = 1e-9;  // absolute slack on every comparison
};

enum class Verdict { LogBound, LinearGrowth, NotSubsolution, Inconclusive };
std::string to_string(Verdict v);

struct ClassificationVerdict {
  Verdict verdict = Verdict::LogBound;
  // First index where the sub-solution inequality fails (NotSubsolution)
  // or where a_n first exceeds the log bound (LinearGrowth, Inconclusive).
  std::optional<long> witness;
  // min of a_n / n over the final quarter of indices.
  double slope_estimate = 0.0;
};

/// Tail length below which a first exceedance is reported as Inconclusive.
inline constexpr long kInconclusiveTail = 10;

/// h_j = 2 log(j sqrt(C/2) + 1).
double log_bound(double c_const, long j);

/// L_j h - C e^{-h_j}, evaluated without cancellation. Positive for every
/// C > 0 and j >= 1.
double supersolution_margin(double c_const, long j);

ClassificationVerdict growth_lemma_classify(const RealSequence& seq);

/// Indices j with b_j = a_j - (1 + eps) h_j positive and a strict interior
/// local maximum.
std::vector<long> max_principle_violations(const RealSequence& seq,
                                           double eps = 0.01);

/// a_0 = 0, a_1 given, a_{n+1} = 2a_n - a_{n-1} - C e^{-a_n} + r_n. Every
/// such sequence with r_n >= 0 is a sub-solution.
RealSequence subsolution_from_residuals(double c_const, double a1,
                                        const std::vector<double>& residuals);

struct GapCertificate {
  std::string map_name;
  long n_max = 0;
  RegularityData regularity;
  double gamma = 1.0;  // Gamma_{n_max}^{1/n_max}
  // max over Fix(f) of max(f', 1/f'); above 1 exactly when gamma(f) > 1.
  double fixed_point_gamma = 1.0;
  bool hyperbolic = false;
  ClassificationVerdict verdict_fwd;
  ClassificationVerdict verdict_bwd;
  std::vector<ConvexityViolation> convexity_violations;
  // n with log Gamma_n + slack > 2 log(n sqrt(C/2) + 1).
  std::vector<long> bound_violations;
  double max_grid_slack = 0.0;
  double tolerance = kConvexityTolerance;
  std::vector<GrowthRecord> records;

  /// Quadratic growth certified at every computed n.
  bool certified() const {
    return !hyperbolic && bound_violations.empty() &&
           convexity_violations.empty();
  }
};

inline constexpr double kHyperbolicThreshold = kDegenerateTolerance;

GapCertificate certify_gap(const IntervalDiffeo& f, long n_max,
                           const GridSpec& grid = {});

}  // namespace growthlab
