#include "growthlab/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "growthlab/errors.hpp"
#include "growthlab/format.hpp"
#include "growthlab/numerics.hpp"

namespace growthlab {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double eta_tolerance(double s) { return std::max(1e-12, 4.0 * kEps * s); }

}  // namespace

FlowMap::FlowMap(DeltaFunction delta, IntegrabilityReport integrability)
    : delta_(std::move(delta)), integrability_(integrability) {
  // The index set is symmetric under k -> -k, so U(0) is half the total.
  norm_ = 2.0 * delta_.upper_integral(0.0);

  std::vector<double> s{0.0};
  for (double c : delta_.hump_centers()) {
    if (c >= 0.0) s.push_back(c);
    for (int j = -1; j <= 12; ++j) {
      for (double o : {std::ldexp(1.0, j), -std::ldexp(1.0, j)}) {
        if (c + o > 0.0) s.push_back(c + o);
      }
    }
  }
  for (double x = delta_.max_center() + 1.0; x < kEtaShiftLimit; x *= 1.1) {
    s.push_back(x);
  }
  for (double x = kEtaShiftLimit; x < kEtaMax; x *= 4.0) s.push_back(x);
  s.push_back(kEtaMax);
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  table_s_ = std::move(s);
  table_u_.resize(table_s_.size());
  parallel_chunks(table_s_.size(),
                  [&](std::size_t, std::size_t b, std::size_t e) {
                    for (std::size_t i = b; i < e; ++i) {
                      table_u_[i] = delta_.upper_integral(table_s_[i]);
                    }
                  });
  table_u_[0] = 0.5 * norm_;
}

std::string FlowMap::name() const {
  std::string out = "flatflow:u=" + delta_.schedule().u_description +
                    ",levels=" + std::to_string(delta_.schedule().levels()) +
                    ",tail_eps=" + shortest_repr(delta_.tail_eps());
  return out;
}

UnitPoint FlowMap::a(double eta) const {
  if (eta <= 0.0) {
    const double x = delta_.upper_integral(-eta) / norm_;
    return {x, 1.0 - x};
  }
  const double xc = delta_.upper_integral(eta) / norm_;
  return {1.0 - xc, xc};
}

double FlowMap::solve_upper(double y) const {
  const double inf = std::numeric_limits<double>::infinity();
  if (y >= table_u_.front()) return 0.0;
  if (y < table_u_.back()) return inf;
  // First node with U <= y; U decreases along the table.
  const auto it = std::lower_bound(table_u_.begin(), table_u_.end(), y,
                                   std::greater<double>());
  const std::size_t j = static_cast<std::size_t>(it - table_u_.begin());
  if (table_u_[j] == y) return table_s_[j];
  double lo = table_s_[j - 1], hi = table_s_[j];
  const double ulo = table_u_[j - 1], uhi = table_u_[j];
  double s = lo + (hi - lo) * (ulo - y) / (ulo - uhi);
  for (int iter = 0; iter < 200; ++iter) {
    const double f = delta_.upper_integral(s) - y;
    if (f == 0.0) return s;
    if (f > 0.0) {
      lo = s;
    } else {
      hi = s;
    }
    if (std::abs(f) <= 8.0 * kEps * y) return s;
    double next = s + f / delta_(s);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - s);
    s = next;
    if (step <= eta_tolerance(s) || hi - lo <= eta_tolerance(s)) return s;
  }
  throw ConvergenceError("a^{-1} did not converge for U = " + shortest_repr(y));
}

double FlowMap::a_inv(UnitPoint p) const {
  if (p.right_half()) return solve_upper(p.xc * norm_);
  return -solve_upper(p.x * norm_);
}

UnitPoint FlowMap::iterate(UnitPoint p, long n) const {
  if (n == 0 || p.x <= 0.0 || p.xc <= 0.0) return p;
  const double eta = a_inv(p);
  if (!(std::abs(eta) < kEtaShiftLimit)) return p;
  return a(eta + static_cast<double>(n));
}

double FlowMap::log_deriv(UnitPoint p) const {
  if (p.x <= 0.0 || p.xc <= 0.0) return 0.0;
  const double eta = a_inv(p);
  if (!std::isfinite(eta)) return 0.0;
  return std::log1p(g0_minus_one(delta_, eta));
}

std::optional<double> FlowMap::derivative(int order, UnitPoint p) const {
  if (order < 1 || order > max_order()) return std::nullopt;
  double eta = std::numeric_limits<double>::infinity();
  if (p.x > 0.0 && p.xc > 0.0) eta = a_inv(p);
  if (!std::isfinite(eta)) return order == 1 ? 1.0 : 0.0;
  const GValues g = g_values(delta_, eta);
  if (order == 1) return 1.0 + g.g0_minus_one;
  return std::pow(norm_, order - 1) * g.g[order - 1];
}

std::vector<UnitPoint> FlowMap::approach_sequence(bool right_end) const {
  std::vector<UnitPoint> seq;
  for (int j = 1; j <= 30; ++j) {
    const double eta = std::pow(10.0, j);
    seq.push_back(a(right_end ? eta : -eta));
  }
  return seq;
}

std::vector<UnitPoint> FlowMap::grid_hint(double shift) const {
  std::vector<UnitPoint> out;
  for (double eta : hump_grid(delta_, shift)) {
    const UnitPoint p = a(eta);
    if (p.x > 0.0 && p.xc > 0.0) out.push_back(p);
  }
  return out;
}

FlowPtr build_flow(DeltaFunction d) {
  IntegrabilityReport rep = verify_integrability(d);
  auto fm = std::make_shared<const FlowMap>(std::move(d), rep);
  const double z = fm->norm();
  if (!(std::abs(rep.total - z) <= kNormAgreement * z)) {
    throw ConvergenceError("quadrature total " + shortest_repr(rep.total) +
                           " disagrees with term-wise integral " +
                           shortest_repr(z));
  }
  return fm;
}

double flow_growth(const FlowMap& fm, long n) {
  if (n == 0) return 1.0;
  // Delta is even, so the backward iterate has the same growth.
  const double shift = static_cast<double>(n < 0 ? -n : n);
  return std::max(1.0, shift_ratio_sup(fm.delta(), shift).sup);
}

bool SubsequenceReport::ok() const {
  for (const auto& l : levels) {
    if (!l.ok) return false;
  }
  return ladder_decreasing && flatness.flat();
}

SubsequenceReport verify_subsequence_bound(const FlowMap& fm,
                                          double flat_tolerance) {
  SubsequenceReport rep;
  const DeltaSchedule& s = fm.delta().schedule();
  for (int i = 1; i <= s.levels(); ++i) {
    LevelCheck c;
    c.level = i;
    c.tau = s.tau[i - 1];
    c.u_tau = s.u_tau[i - 1];
    c.gamma = flow_growth(fm, c.tau);
    c.ratio = c.gamma / c.u_tau;
    c.ok = c.ratio <= 1.0;
    rep.levels.push_back(c);
  }
  for (double eta : {1e3, 1e4, 1e5}) {
    const GValues g = g_values(fm.delta(), eta);
    rep.ladder.push_back({eta, g.g0_minus_one, g.g[1], g.g[2]});
  }
  for (std::size_t i = 1; i < rep.ladder.size(); ++i) {
    const LadderPoint& a = rep.ladder[i - 1];
    const LadderPoint& b = rep.ladder[i];
    rep.ladder_decreasing = rep.ladder_decreasing &&
                            std::abs(b.g0_minus_one) < std::abs(a.g0_minus_one) &&
                            std::abs(b.g1) < std::abs(a.g1) &&
                            std::abs(b.g2) < std::abs(a.g2);
  }
  rep.flatness = flatness_report(fm, fm.max_order(), flat_tolerance);
  return rep;
}

}  // namespace growthlab
