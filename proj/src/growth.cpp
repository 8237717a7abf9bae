#include "growthlab/growth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "growthlab/errors.hpp"
#include "growthlab/format.hpp"
#include "growthlab/numerics.hpp"

namespace growthlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_finite_log_deriv(const IntervalDiffeo& f, double ld, UnitPoint p) {
  if (!std::isfinite(ld)) {
    throw InvariantError("non-positive derivative of " + f.name() +
                         " at x=" + full_precision(p.x));
  }
}

}  // namespace

std::vector<UnitPoint> GridSpec::points() const {
  std::vector<UnitPoint> pts;
  pts.reserve(uniform + 2 * static_cast<std::size_t>(ladder_depth) *
                            static_cast<std::size_t>(ladder_per_octave) +
              extra.size() + 2);
  pts.push_back(UnitPoint::left_end());
  pts.push_back(UnitPoint::right_end());
  if (uniform >= 2) {
    const double denom = static_cast<double>(uniform - 1);
    for (std::size_t i = 0; i < uniform; ++i) {
      pts.push_back({static_cast<double>(i) / denom,
                     static_cast<double>(uniform - 1 - i) / denom});
    }
  }
  if (ladder_per_octave > 0) {
    for (int j = 1; j <= ladder_depth * ladder_per_octave; ++j) {
      const double d =
          std::exp2(-static_cast<double>(j) / ladder_per_octave);
      pts.push_back(UnitPoint::at(d));
      pts.push_back(UnitPoint::from_right(d));
    }
  }
  pts.insert(pts.end(), extra.begin(), extra.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

UnitPoint eval_iterate(const IntervalDiffeo& f, long n, UnitPoint p) {
  if (n >= 0) {
    for (long j = 0; j < n; ++j) p = f.apply(p);
  } else {
    for (long j = 0; j < -n; ++j) p = f.apply_inverse(p);
  }
  return p;
}

double eval_iterate(const IntervalDiffeo& f, long n, double x) {
  return eval_iterate(f, n, UnitPoint::at(x)).x;
}

double log_orbit_derivative(const IntervalDiffeo& f, long n, UnitPoint p) {
  double sum = 0.0;
  if (n >= 0) {
    for (long j = 0; j < n; ++j) {
      const double ld = f.log_deriv(p);
      require_finite_log_deriv(f, ld, p);
      sum += ld;
      p = f.apply(p);
    }
  } else {
    // (f^{-m})'(x) = 1 / (f^m)'(f^{-m} x)
    for (long j = 0; j < -n; ++j) {
      p = f.apply_inverse(p);
      const double ld = f.log_deriv(p);
      require_finite_log_deriv(f, ld, p);
      sum -= ld;
    }
  }
  return sum;
}

double log_orbit_derivative(const IntervalDiffeo& f, long n, double x) {
  return log_orbit_derivative(f, n, UnitPoint::at(x));
}

namespace {

// Extremum of one step within a chunk together with its grid neighbours.
struct LocalExtremum {
  double value;
  std::size_t index = 0;
  double left = 0.0, right = 0.0;
  bool has_left = false, has_right = false;
};

struct StepExtremes {
  LocalExtremum max{-kInf};
  LocalExtremum min{kInf};
};

// Height of the vertex of the parabola through the grid maximum and its two
// neighbours above the maximum itself; 0 when the fit is not concave.
double parabolic_excess(const std::vector<UnitPoint>& pts,
                        const LocalExtremum& e, double sign) {
  if (!e.has_left || !e.has_right) return 0.0;
  const UnitPoint& p = pts[e.index];
  const double tl = UnitPoint::displacement(p, pts[e.index - 1]);
  const double tr = UnitPoint::displacement(p, pts[e.index + 1]);
  const double v0 = sign * e.value;
  const double sl = (sign * e.left - v0) / tl;
  const double sr = (sign * e.right - v0) / tr;
  const double a = (sr - sl) / (tr - tl);
  if (!(a < 0.0)) return 0.0;
  const double b = sl - a * tl;
  return b * b / (-4.0 * a);
}

}  // namespace

namespace {

// Per-step extrema of log (f^{+-k})' over orbits of the grid, advancing
// every orbit once per step. Backward orbits accumulate log (f^{-k})'.
std::vector<std::vector<StepExtremes>> scan_orbits(
    const IntervalDiffeo& f, const std::vector<UnitPoint>& pts,
    std::size_t steps, bool backward) {
  const std::size_t total = pts.size();
  std::vector<std::vector<StepExtremes>> per_chunk(
      chunk_count(total), std::vector<StepExtremes>(steps));

  parallel_chunks(total, [&](std::size_t c, std::size_t begin,
                             std::size_t end) {
    // One extra orbit on each side supplies the neighbours of the extrema.
    const std::size_t lo = begin > 0 ? begin - 1 : 0;
    const std::size_t hi = std::min(total, end + 1);
    std::vector<UnitPoint> cur(pts.begin() + lo, pts.begin() + hi);
    std::vector<double> sum(cur.size(), 0.0);
    auto fill = [&](LocalExtremum& e, std::size_t j) {
      e.index = lo + j;
      e.has_left = e.index > 0;
      e.has_right = e.index + 1 < total;
      if (e.has_left) e.left = sum[j - 1];
      if (e.has_right) e.right = sum[j + 1];
    };
    for (std::size_t k = 0; k < steps; ++k) {
      for (std::size_t j = 0; j < cur.size(); ++j) {
        if (backward) {
          cur[j] = f.apply_inverse(cur[j]);
          const double ld = f.log_deriv(cur[j]);
          require_finite_log_deriv(f, ld, cur[j]);
          sum[j] -= ld;
        } else {
          const double ld = f.log_deriv(cur[j]);
          require_finite_log_deriv(f, ld, cur[j]);
          sum[j] += ld;
          cur[j] = f.apply(cur[j]);
        }
      }
      StepExtremes& ex = per_chunk[c][k];
      std::size_t jmax = begin - lo, jmin = begin - lo;
      for (std::size_t j = begin - lo; j < end - lo; ++j) {
        if (sum[j] > sum[jmax]) jmax = j;
        if (sum[j] < sum[jmin]) jmin = j;
      }
      ex.max.value = sum[jmax];
      ex.min.value = sum[jmin];
      fill(ex.max, jmax);
      fill(ex.min, jmin);
    }
  });
  return per_chunk;
}

// Best extremum across chunks for step k; sign +1 for maxima.
const LocalExtremum& best_of(const std::vector<std::vector<StepExtremes>>& s,
                             std::size_t k, bool want_max) {
  const LocalExtremum* best = want_max ? &s[0][k].max : &s[0][k].min;
  for (const auto& chunk : s) {
    const LocalExtremum& e = want_max ? chunk[k].max : chunk[k].min;
    if (want_max ? e.value > best->value : e.value < best->value) best = &e;
  }
  return *best;
}

}  // namespace

std::vector<GrowthRecord> growth_sequence(const IntervalDiffeo& f, long n_max,
                                          const GridSpec& grid) {
  if (n_max < 1) throw PreconditionError("growth_sequence: n_max must be >= 1");
  const std::vector<UnitPoint> pts = grid.points();
  const std::size_t steps = static_cast<std::size_t>(n_max);

  const auto fwd = scan_orbits(f, pts, steps, false);
  std::vector<std::vector<StepExtremes>> bwd;
  if (grid.backward_orbits) bwd = scan_orbits(f, pts, steps, true);

  std::vector<GrowthRecord> records(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    GrowthRecord& r = records[k];
    r.n = static_cast<long>(k + 1);
    r.grid_size = pts.size();

    // max log (f^n)' is attained both as max over x of forward sums and as
    // -min over y of backward sums, and symmetrically for f^{-n}.
    const LocalExtremum& fmax = best_of(fwd, k, true);
    const LocalExtremum& fmin = best_of(fwd, k, false);
    r.a_fwd = fmax.value;
    r.slack_fwd = parabolic_excess(pts, fmax, 1.0);
    r.a_bwd = -fmin.value;
    r.slack_bwd = parabolic_excess(pts, fmin, -1.0);
    if (!bwd.empty()) {
      // Slack is measured against the best refined value of either family.
      const LocalExtremum& bmin = best_of(bwd, k, false);
      const LocalExtremum& bmax = best_of(bwd, k, true);
      const double top_fwd =
          std::max(r.a_fwd + r.slack_fwd,
                   -bmin.value + parabolic_excess(pts, bmin, -1.0));
      const double top_bwd =
          std::max(r.a_bwd + r.slack_bwd,
                   bmax.value + parabolic_excess(pts, bmax, 1.0));
      r.a_fwd = std::max(r.a_fwd, -bmin.value);
      r.a_bwd = std::max(r.a_bwd, bmax.value);
      r.slack_fwd = top_fwd - r.a_fwd;
      r.slack_bwd = top_bwd - r.a_bwd;
    }
    r.log_gamma = std::max(r.a_fwd, r.a_bwd);
    r.gamma_n = std::exp(r.log_gamma);
  }
  return records;
}

FixedPointSet find_fixed_points(const IntervalDiffeo& f, int resolution) {
  if (resolution < 2) {
    throw PreconditionError("find_fixed_points: resolution must be >= 2");
  }
  const int n = resolution;
  std::vector<UnitPoint> xs(n);
  std::vector<double> d(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = {static_cast<double>(i) / (n - 1),
             static_cast<double>(n - 1 - i) / (n - 1)};
    d[i] = UnitPoint::displacement(xs[i], f.apply(xs[i]));
  }
  auto zeroish = [&](int i) { return std::abs(d[i]) < kFixedPointTolerance; };

  FixedPointSet out;
  struct Candidate {
    UnitPoint p;
    bool ambiguous;
  };
  std::vector<Candidate> found{{UnitPoint::left_end(), false},
                               {UnitPoint::right_end(), false}};

  auto refine = [&](UnitPoint a, UnitPoint b) {
    const double sa = UnitPoint::displacement(a, f.apply(a));
    for (int it = 0; it < 200; ++it) {
      if (UnitPoint::displacement(a, b) <= 1e-12) break;
      const UnitPoint m = UnitPoint::midpoint(a, b);
      const double sm = UnitPoint::displacement(m, f.apply(m));
      if (sm == 0.0) return m;
      if ((sm > 0) == (sa > 0)) {
        a = m;
      } else {
        b = m;
      }
    }
    return UnitPoint::midpoint(a, b);
  };

  int i = 0;
  while (i < n) {
    if (!zeroish(i)) {
      if (i + 1 < n && !zeroish(i + 1) && (d[i] > 0) != (d[i + 1] > 0)) {
        found.push_back({refine(xs[i], xs[i + 1]), false});
      }
      ++i;
      continue;
    }
    int j = i;
    while (j + 1 < n && zeroish(j + 1)) ++j;
    if (j - i + 1 >= kIdentityRun) {
      out.identity_intervals.emplace_back(xs[i].x, xs[j].x);
    } else if (i > 0 && j < n - 1) {
      if ((d[i - 1] > 0) != (d[j + 1] > 0)) {
        found.push_back({refine(xs[i - 1], xs[j + 1]), false});
      } else {
        int best = i;
        for (int k = i; k <= j; ++k) {
          if (std::abs(d[k]) < std::abs(d[best])) best = k;
        }
        found.push_back({xs[best], true});
      }
    }
    i = j + 1;
  }

  std::sort(found.begin(), found.end(),
            [](const Candidate& a, const Candidate& b) { return a.p < b.p; });
  for (const auto& c : found) {
    if (!out.points.empty() && out.points.back() == c.p.x &&
        !(c.p == UnitPoint::right_end())) {
      continue;
    }
    if (!out.points.empty() && out.points.back() == 1.0) continue;
    const double m = std::exp(f.log_deriv(c.p));
    out.points.push_back(c.p.x);
    out.multipliers.push_back(m);
    out.degenerate.push_back(std::abs(m - 1.0) < kDegenerateTolerance);
    out.ambiguous.push_back(c.ambiguous);
  }
  return out;
}

GammaEstimate gamma_exponent(const IntervalDiffeo& f, long n_probe,
                             const GridSpec& grid, double tolerance) {
  if (n_probe < 2) throw PreconditionError("gamma_exponent: n_probe must be >= 2");
  const auto records = growth_sequence(f, n_probe, grid);
  GammaEstimate est;
  est.n_probe = n_probe;
  est.tolerance = tolerance;
  const long half = n_probe / 2;
  est.gamma = std::exp(records.back().log_gamma / static_cast<double>(n_probe));
  est.gamma_previous =
      std::exp(records[half - 1].log_gamma / static_cast<double>(half));
  const FixedPointSet fps = find_fixed_points(f);
  double worst = 1.0;
  for (double m : fps.multipliers) worst = std::max({worst, m, 1.0 / m});
  est.fixed_point_gamma = worst;
  est.consistent = std::abs(est.gamma - est.fixed_point_gamma) <= tolerance;
  return est;
}

OrbitGapReport orbit_gap_bound(const IntervalDiffeo& f, UnitPoint x0,
                               const std::vector<GrowthRecord>& records) {
  const double first = UnitPoint::displacement(x0, f.apply(x0));
  if (std::abs(first) < kFixedPointTolerance) {
    throw PreconditionError("orbit_gap_bound: x0=" + full_precision(x0.x) +
                            " is a fixed point of " + f.name());
  }
  OrbitGapReport rep;
  rep.gaps.x0 = x0;
  rep.gaps.direction = first > 0 ? 1 : -1;
  UnitPoint x = x0;
  for (std::size_t n = 0; n <= records.size(); ++n) {
    const UnitPoint next = f.apply(x);
    const double delta = UnitPoint::displacement(x, next);
    rep.gaps.deltas.push_back(delta);
    rep.gap_sum += std::abs(delta);
    x = next;
  }
  const double log_d0 = std::log(std::abs(rep.gaps.deltas[0]));
  const double cap = 1.0 / std::abs(rep.gaps.deltas[0]);
  double partial = 0.0;
  for (std::size_t k = 0; k < records.size(); ++k) {
    const GrowthRecord& r = records[k];
    const double dn = rep.gaps.deltas[static_cast<std::size_t>(r.n)];
    const bool same_sign = (dn > 0) == (rep.gaps.direction > 0) && dn != 0.0;
    const double rhs = log_d0 - std::log(std::abs(dn));
    if (!same_sign || r.log_gamma + r.slack() + 1e-9 < rhs) {
      rep.violations.push_back(r.n);
    }
    const double next = partial + std::exp(-r.log_gamma);
    if (next < partial) rep.partial_sums_monotone = false;
    partial = next;
    if (partial > cap * (1.0 + 1e-12)) rep.partial_sums_bounded = false;
    rep.reciprocal_partial_sums.push_back(partial);
  }
  return rep;
}

OrbitGapReport orbit_gap_bound(const IntervalDiffeo& f, UnitPoint x0,
                               long n_max, const GridSpec& grid) {
  const double first = UnitPoint::displacement(x0, f.apply(x0));
  if (std::abs(first) < kFixedPointTolerance) {
    throw PreconditionError("orbit_gap_bound: x0=" + full_precision(x0.x) +
                            " is a fixed point of " + f.name());
  }
  return orbit_gap_bound(f, x0, growth_sequence(f, n_max, grid));
}

FlatnessReport flatness_report(const IntervalDiffeo& f, int max_order,
                               double tolerance) {
  FlatnessReport rep;
  rep.max_order = max_order;
  rep.tolerance = tolerance;
  for (bool right : {false, true}) {
    EndpointFlatness& ep = right ? rep.right : rep.left;
    ep.right_end = right;
    const auto seq = f.approach_sequence(right);
    for (int i = 1; i <= max_order; ++i) {
      std::vector<double> vals;
      bool available = i <= f.max_order();
      for (const UnitPoint& p : seq) {
        if (!available) break;
        if (i == 1) {
          vals.push_back(std::abs(std::expm1(f.log_deriv(p))));
        } else {
          const auto d = f.derivative(i, p);
          if (!d) {
            available = false;
            break;
          }
          vals.push_back(std::abs(*d));
        }
      }
      if (!available || vals.empty()) {
        ep.order_unavailable = true;
        ep.limits.push_back(std::nullopt);
        ep.sequences.emplace_back();
      } else {
        ep.limits.push_back(vals.back());
        ep.sequences.push_back(std::move(vals));
      }
    }
    ep.flat = !ep.order_unavailable;
    for (std::size_t i = 0; i < ep.limits.size(); ++i) {
      const auto& lim = ep.limits[i];
      if (!lim) continue;
      if (*lim > tolerance) {
        ep.flat = false;
        if (!ep.fixed_point_order) {
          ep.fixed_point_order = static_cast<int>(i);
        }
      }
    }
  }
  return rep;
}

std::vector<std::pair<long, long>> submultiplicativity_violations(
    const std::vector<GrowthRecord>& records, double eps) {
  std::vector<std::pair<long, long>> bad;
  const long n_max = static_cast<long>(records.size());
  for (long n = 1; n <= n_max; ++n) {
    const GrowthRecord& rn = records[n - 1];
    for (long m = n; n + m <= n_max; ++m) {
      const GrowthRecord& rm = records[m - 1];
      const GrowthRecord& rs = records[n + m - 1];
      if (rs.log_gamma >
          rn.log_gamma + rm.log_gamma + rn.slack() + rm.slack() + eps) {
        bad.emplace_back(n, m);
      }
    }
  }
  return bad;
}

}  // namespace growthlab
