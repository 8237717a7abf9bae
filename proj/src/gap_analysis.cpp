#include "growthlab/gap_analysis.hpp"

#include <algorithm>
#include <cmath>

#include "growthlab/errors.hpp"
#include "growthlab/format.hpp"
#include "growthlab/numerics.hpp"

namespace growthlab {

namespace {

double log_deriv_slope(const IntervalDiffeo& f, double x) {
  const UnitPoint p = UnitPoint::at(x);
  return *f.derivative(2, p) / std::exp(f.log_deriv(p));
}

}  // namespace

std::string to_string(Direction d) {
  return d == Direction::Forward ? "forward" : "backward";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::LogBound: return "LogBound";
    case Verdict::LinearGrowth: return "LinearGrowth";
    case Verdict::NotSubsolution: return "NotSubsolution";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

RegularityData regularity_constants(const IntervalDiffeo& f, int resolution) {
  if (f.max_order() < 2 || !f.derivative(2, UnitPoint::at(0.5))) {
    throw PreconditionError("regularity constants need f'' but " + f.name() +
                            " does not provide it");
  }
  if (resolution < 3) {
    throw PreconditionError("regularity_constants: resolution must be >= 3");
  }
  RegularityData reg;
  const auto q = adaptive_simpson(
      [&](double x) { return std::abs(log_deriv_slope(f, x)); }, 0.0, 1.0,
      1e-8);
  reg.variation = q.value;
  reg.variation_error = q.error;

  int best = 0;
  double best_val = -1.0;
  for (int i = 0; i < resolution; ++i) {
    const double v =
        std::abs(log_deriv_slope(f, static_cast<double>(i) / (resolution - 1)));
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  const double h = 1.0 / (resolution - 1);
  const double a = std::max(0.0, (best - 1) * h);
  const double b = std::min(1.0, (best + 1) * h);
  const auto refined = golden_section_max(
      [&](double x) { return std::abs(log_deriv_slope(f, x)); }, a, b);
  reg.lipschitz = std::max(best_val, refined.second);
  reg.c_const = reg.lipschitz * std::exp(reg.variation);
  return reg;
}

DenjoyReport denjoy_check(const IntervalDiffeo& f, double lo, double hi,
                          long n, int samples, const RegularityData& reg) {
  if (!(0.0 <= lo && lo < hi && hi <= 1.0)) {
    throw PreconditionError("denjoy_check: need 0 <= lo < hi <= 1");
  }
  if (samples < 2) throw PreconditionError("denjoy_check: samples must be >= 2");
  const double flo = f(lo), fhi = f(hi);
  if (!(fhi < lo || flo > hi)) {
    throw PreconditionError(
        "denjoy_check: f(J) = [" + full_precision(flo) + ", " +
        full_precision(fhi) + "] overlaps J = [" + full_precision(lo) + ", " +
        full_precision(hi) + "]");
  }
  double mn = INFINITY, mx = -INFINITY;
  for (int i = 0; i < samples; ++i) {
    const double x = lo + (hi - lo) * i / (samples - 1);
    const double v = log_orbit_derivative(f, n, x);
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  DenjoyReport rep;
  rep.lo = lo;
  rep.hi = hi;
  rep.n = n;
  rep.max_ratio = std::exp(mx - mn);
  rep.min_ratio = std::exp(mn - mx);
  rep.bound = std::exp(reg.variation);
  rep.ok = mx - mn <= reg.variation + kDenjoySlack;
  return rep;
}

std::vector<ConvexityViolation> near_convexity_violations(
    const std::vector<double>& a, double c_const,
    const std::vector<double>& slack, Direction direction) {
  std::vector<ConvexityViolation> out;
  auto s = [&](std::size_t i) { return slack.empty() ? 0.0 : slack[i]; };
  for (std::size_t n = 1; n + 1 < a.size(); ++n) {
    const double lhs = 2.0 * a[n] - a[n - 1] - a[n + 1];
    const double rhs = c_const * std::exp(-a[n]) + kConvexityTolerance +
                       s(n - 1) + s(n + 1);
    if (lhs > rhs) {
      out.push_back({static_cast<long>(n), direction, lhs, rhs});
    }
  }
  return out;
}

std::vector<ConvexityViolation> near_convexity_check(
    const std::vector<GrowthRecord>& records, const RegularityData& reg) {
  std::vector<double> fwd{0.0}, bwd{0.0}, sf{0.0}, sb{0.0};
  for (const auto& r : records) {
    fwd.push_back(r.a_fwd);
    bwd.push_back(r.a_bwd);
    sf.push_back(r.slack_fwd);
    sb.push_back(r.slack_bwd);
  }
  auto out = near_convexity_violations(fwd, reg.c_const, sf, Direction::Forward);
  auto back =
      near_convexity_violations(bwd, reg.c_const, sb, Direction::Backward);
  out.insert(out.end(), back.begin(), back.end());
  return out;
}

double log_bound(double c_const, long j) {
  return 2.0 * std::log1p(static_cast<double>(j) * std::sqrt(c_const / 2.0));
}

double supersolution_margin(double c_const, long j) {
  // With q = D / (Dj + 1): L_j h = -2 log(1 - q^2) and C e^{-h_j} = 2 q^2.
  const double d = std::sqrt(c_const / 2.0);
  const double q = d / (d * static_cast<double>(j) + 1.0);
  const double q2 = q * q;
  if (q2 > 1e-3) return -2.0 * std::log1p(-q2) - 2.0 * q2;
  double term = q2 * q2, sum = 0.0;
  for (int k = 2; k < 40 && term > 0.0; ++k) {
    sum += term / k;
    term *= q2;
  }
  return 2.0 * sum;
}

ClassificationVerdict growth_lemma_classify(const RealSequence& seq) {
  const double c = seq.c_const;
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw PreconditionError("growth_lemma_classify: C must be positive");
  }
  const auto& a = seq.values;
  if (a.empty() || a[0] != 0.0) {
    throw PreconditionError("growth_lemma_classify: sequence must start with a_0 = 0");
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i])) {
      throw PreconditionError("growth_lemma_classify: a_" + std::to_string(i) +
                              " is not finite");
    }
  }
  const long n_last = static_cast<long>(a.size()) - 1;
  ClassificationVerdict out;

  for (long j = 1; j < n_last; ++j) {
    const double lhs = 2.0 * a[j] - a[j - 1] - a[j + 1];
    if (lhs > c * std::exp(-a[j]) + seq.tolerance) {
      out.verdict = Verdict::NotSubsolution;
      out.witness = j;
      return out;
    }
  }

  if (n_last >= 1) {
    const long first_tail = std::max(1L, n_last - n_last / 4);
    double slope = INFINITY;
    for (long n = first_tail; n <= n_last; ++n) {
      slope = std::min(slope, a[n] / static_cast<double>(n));
    }
    out.slope_estimate = slope;
  }

  for (long n = 1; n <= n_last; ++n) {
    if (a[n] > log_bound(c, n) + seq.tolerance) {
      out.witness = n;
      out.verdict = n > n_last - kInconclusiveTail ? Verdict::Inconclusive
                                                   : Verdict::LinearGrowth;
      return out;
    }
  }
  out.verdict = Verdict::LogBound;
  return out;
}

std::vector<long> max_principle_violations(const RealSequence& seq,
                                           double eps) {
  const auto& a = seq.values;
  std::vector<double> b(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) {
    b[j] = a[j] - (1.0 + eps) * log_bound(seq.c_const, static_cast<long>(j));
  }
  std::vector<long> out;
  for (std::size_t j = 1; j + 1 < b.size(); ++j) {
    if (b[j] > 0.0 && b[j] > b[j - 1] && b[j] > b[j + 1]) {
      out.push_back(static_cast<long>(j));
    }
  }
  return out;
}

RealSequence subsolution_from_residuals(double c_const, double a1,
                                        const std::vector<double>& residuals) {
  RealSequence seq;
  seq.c_const = c_const;
  seq.values = {0.0, a1};
  for (std::size_t n = 1; n <= residuals.size(); ++n) {
    if (residuals[n - 1] < 0.0) {
      throw PreconditionError("subsolution residuals must be non-negative");
    }
    const double an = seq.values[n];
    seq.values.push_back(2.0 * an - seq.values[n - 1] -
                         c_const * std::exp(-an) + residuals[n - 1]);
  }
  return seq;
}

GapCertificate certify_gap(const IntervalDiffeo& f, long n_max,
                           const GridSpec& grid) {
  GapCertificate cert;
  cert.map_name = f.name();
  cert.n_max = n_max;
  cert.regularity = regularity_constants(f);
  cert.records = growth_sequence(f, n_max, grid);
  const auto& recs = cert.records;
  cert.gamma = std::exp(recs.back().log_gamma / static_cast<double>(n_max));

  const FixedPointSet fps = find_fixed_points(f);
  for (double m : fps.multipliers) {
    cert.fixed_point_gamma = std::max({cert.fixed_point_gamma, m, 1.0 / m});
  }
  cert.hyperbolic = cert.fixed_point_gamma > 1.0 + kHyperbolicThreshold;

  for (const auto& r : recs) {
    cert.max_grid_slack =
        std::max({cert.max_grid_slack, r.slack_fwd, r.slack_bwd});
  }
  cert.convexity_violations = near_convexity_check(recs, cert.regularity);

  const double c = cert.regularity.c_const;
  RealSequence fwd, bwd;
  fwd.values = {0.0};
  bwd.values = {0.0};
  for (const auto& r : recs) {
    fwd.values.push_back(r.a_fwd);
    bwd.values.push_back(r.a_bwd);
  }
  fwd.tolerance = bwd.tolerance =
      kConvexityTolerance + 2.0 * cert.max_grid_slack;
  if (c > 0.0) {
    fwd.c_const = bwd.c_const = c;
    cert.verdict_fwd = growth_lemma_classify(fwd);
    cert.verdict_bwd = growth_lemma_classify(bwd);
  } else {
    // C = 0 only for the identity, where every a_n vanishes.
    cert.verdict_fwd = cert.verdict_bwd = ClassificationVerdict{};
  }

  for (const auto& r : recs) {
    if (r.log_gamma + r.slack() > log_bound(c, r.n)) {
      cert.bound_violations.push_back(r.n);
    }
  }
  return cert;
}

}  // namespace growthlab
