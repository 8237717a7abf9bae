#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace growthlab {

/// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Sums terms in order of decreasing magnitude with compensation. The span
/// is reordered in place.
double sorted_compensated_sum(std::span<double> terms);

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
};

/// Adaptive Simpson with Richardson correction. Subdivides until the local
/// estimate satisfies |S2 - S1| <= 15 tol or `max_depth` is reached.
QuadratureResult adaptive_simpson(const std::function<double(double)>& f,
                                  double a, double b, double tol,
                                  int max_depth = 50);

/// Adaptive 15-point Gauss-Kronrod on [a, b].
QuadratureResult gauss_kronrod(const std::function<double(double)>& f,
                               double a, double b, double rel_tol,
                               unsigned max_depth = 15);

/// Golden-section search for the maximum of a unimodal f on [a, b].
std::pair<double, double> golden_section_max(
    const std::function<double(double)>& f, double a, double b,
    int iterations = 60);

/// Worker count for data-parallel kernels: hardware concurrency capped by
/// the GROWTHLAB_THREADS environment variable.
unsigned worker_count();

/// Splits [0, n) into contiguous chunks and runs `body(chunk, begin, end)`
/// on up to worker_count() threads. Returns the number of chunks used.
std::size_t parallel_chunks(
    std::size_t n,
    const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

/// Number of chunks parallel_chunks() will use for n items.
std::size_t chunk_count(std::size_t n);

}  // namespace growthlab
