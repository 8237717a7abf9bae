#include "growthlab/fit.hpp"

#include <cmath>
#include <string>

#include "growthlab/errors.hpp"
#include "growthlab/numerics.hpp"

namespace growthlab {

namespace {

FitReport fit_logs(const std::vector<long>& n,
                   const std::vector<double>& log_gamma, long n_lo,
                   long n_hi) {
  if (n.size() != log_gamma.size()) {
    throw PreconditionError("fit: n and gamma differ in length");
  }
  if (!(n_lo >= 1 && static_cast<double>(n_hi) >=
                         kMinWindowRatio * static_cast<double>(n_lo))) {
    throw PreconditionError("fit window [" + std::to_string(n_lo) + ", " +
                            std::to_string(n_hi) +
                            "] must have n_lo >= 1 and n_hi / n_lo >= 10");
  }
  long lo_seen = -1, hi_seen = -1;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (lo_seen < 0 || n[i] < lo_seen) lo_seen = n[i];
    hi_seen = std::max(hi_seen, n[i]);
    if (n[i] < n_lo || n[i] > n_hi) continue;
    if (!std::isfinite(log_gamma[i])) {
      throw PreconditionError("fit: Gamma_" + std::to_string(n[i]) +
                              " is not a positive finite number");
    }
    xs.push_back(std::log(static_cast<double>(n[i])));
    ys.push_back(log_gamma[i]);
  }
  if (n.empty() || n_lo < lo_seen || n_hi > hi_seen) {
    throw PreconditionError("fit window [" + std::to_string(n_lo) + ", " +
                            std::to_string(n_hi) +
                            "] is outside the computed range");
  }
  if (xs.size() < kMinWindowPoints) {
    throw PreconditionError("fit window holds fewer than 10 points");
  }
  const double m = static_cast<double>(xs.size());
  CompensatedSum sx, sy;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx.add(xs[i]);
    sy.add(ys[i]);
  }
  const double mx = sx.value() / m, my = sy.value() / m;
  CompensatedSum sxx, sxy;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx.add((xs[i] - mx) * (xs[i] - mx));
    sxy.add((xs[i] - mx) * (ys[i] - my));
  }
  if (!(sxx.value() > 0.0)) throw PreconditionError("fit: degenerate window");
  FitReport rep;
  rep.n_lo = n_lo;
  rep.n_hi = n_hi;
  rep.points = xs.size();
  rep.slope = sxy.value() / sxx.value();
  rep.intercept = my - rep.slope * mx;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    rep.max_residual = std::max(
        rep.max_residual, std::abs(ys[i] - rep.intercept - rep.slope * xs[i]));
  }
  return rep;
}

}  // namespace

FitReport fit_exponent(const std::vector<long>& n,
                       const std::vector<double>& gamma, long n_lo,
                       long n_hi) {
  std::vector<double> logs(gamma.size());
  for (std::size_t i = 0; i < gamma.size(); ++i) logs[i] = std::log(gamma[i]);
  return fit_logs(n, logs, n_lo, n_hi);
}

FitReport fit_exponent(const std::vector<GrowthRecord>& records, long n_lo,
                       long n_hi) {
  std::vector<long> n;
  std::vector<double> logs;
  n.reserve(records.size());
  logs.reserve(records.size());
  for (const GrowthRecord& r : records) {
    n.push_back(r.n);
    logs.push_back(r.log_gamma);
  }
  return fit_logs(n, logs, n_lo, n_hi);
}

}  // namespace growthlab
