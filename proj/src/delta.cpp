#include "growthlab/delta.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include "growthlab/errors.hpp"
#include "growthlab/format.hpp"
#include "growthlab/jet.hpp"
#include "growthlab/numerics.hpp"

namespace growthlab {

namespace {

constexpr int kOrders = kMaxDerivativeOrder + 1;
constexpr int kMaxLogPower = kMaxDerivativeOrder + 3;

// h^{(m)}(t) = t^{-(m+1)} sum_k coeff[m][k] (log t)^{-k} for t >= 3.
struct TailCoefficients {
  double c[kOrders][kMaxLogPower]{};
  TailCoefficients() {
    c[0][2] = 1.0;
    for (int m = 0; m + 1 < kOrders; ++m) {
      for (int k = 0; k + 1 < kMaxLogPower; ++k) {
        c[m + 1][k] -= (m + 1) * c[m][k];
        c[m + 1][k + 1] -= k * c[m][k];
      }
    }
  }
};

const TailCoefficients& tail_coefficients() {
  static const TailCoefficients table;
  return table;
}

double tail_poly(int m, double y) {
  const auto& c = tail_coefficients().c[m];
  double acc = 0.0;
  for (int k = kMaxLogPower - 1; k >= 0; --k) acc = acc * y + c[k];
  return acc;
}

// sum_k c_k (y1^k - y0^k) / (y1 - y0)
double tail_poly_divided(int m, double y0, double y1) {
  const auto& c = tail_coefficients().c[m];
  double acc = 0.0;
  for (int k = 1; k < kMaxLogPower; ++k) {
    if (c[k] == 0.0) continue;
    double s = 0.0, p1 = 1.0;
    for (int j = 0; j < k; ++j) {
      s += p1 * std::pow(y0, k - 1 - j);
      p1 *= y1;
    }
    acc += c[k] * s;
  }
  return acc;
}

Jet<kOrders> bridge_jet(double t) {
  using J = Jet<kOrders>;
  const J x = J::variable(t);
  const J q = kBridge.kappa * (x * x);
  if (t <= kBridge.blend_start) return exp(-q);
  const double width = kBridge.blend_end - kBridge.blend_start;
  const J u = (x + (-kBridge.blend_start)) * (1.0 / width);
  const J one = J::constant(1.0);
  const J psi_u = exp(-(one / u));
  const J psi_v = exp(-(one / (1.0 - u)));
  const J chi = psi_u / (psi_u + psi_v);
  const J tail = log(x) + 2.0 * log(log(x));
  return exp(-((1.0 - chi) * q + chi * tail));
}

// h^{(0..order)} at t >= 0.
void h_all_nonnegative(double t, int order, double* out) {
  if (t >= kBridge.blend_end) {
    const double inv = 1.0 / t;
    const double y = 1.0 / std::log(t);
    double p = inv;
    for (int m = 0; m <= order; ++m) {
      out[m] = p * tail_poly(m, y);
      p *= inv;
    }
    return;
  }
  const Jet<kOrders> j = bridge_jet(t);
  for (int m = 0; m <= order; ++m) out[m] = j.derivative(m);
}

void h_all(double t, int order, double* out) {
  h_all_nonnegative(std::abs(t), order, out);
  if (t < 0.0) {
    for (int m = 1; m <= order; m += 2) out[m] = -out[m];
  }
}

// h^{(m)}(s + d) - h^{(m)}(s) for s, s + d >= 3 and d >= 0.
double tail_difference(int m, double s, double d) {
  const double lp = std::log1p(d / s);
  const double l0 = std::log(s);
  const double l1 = l0 + lp;
  const double y0 = 1.0 / l0, y1 = 1.0 / l1;
  const double dy = -lp / (l0 * l1);
  const double rm1 = std::expm1(-(m + 1) * lp);
  const double bracket =
      rm1 * tail_poly(m, y1) + dy * tail_poly_divided(m, y0, y1);
  return bracket / std::pow(s, m + 1);
}

void h_diff_all(double s, double d, int order, double* out) {
  const double e = kBridge.blend_end;
  if (s >= e && s + d >= e) {
    for (int m = 0; m <= order; ++m) out[m] = tail_difference(m, s, d);
    return;
  }
  if (s + d <= -e) {
    // By evenness, h^{(m)}(-v) = (-1)^m h^{(m)}(v).
    const double v = -(s + d);
    for (int m = 0; m <= order; ++m) {
      const double sign = (m % 2 == 0) ? -1.0 : 1.0;
      out[m] = sign * tail_difference(m, v, d);
    }
    return;
  }
  double a[kOrders], b[kOrders];
  h_all(s + d, order, a);
  h_all(s, order, b);
  for (int m = 0; m <= order; ++m) out[m] = a[m] - b[m];
}

void check_order(int m) {
  if (m < 0 || m > kMaxDerivativeOrder) {
    throw PreconditionError("derivative order " + std::to_string(m) +
                            " outside [0, " +
                            std::to_string(kMaxDerivativeOrder) + "]");
  }
}

constexpr int kBlendCells = 256;

double blend_piece(double a, double b) {
  return boost::math::quadrature::gauss<double, 10>::integrate(
      [](double t) { return base_h(t); }, a, b);
}

// Integral of h over [blend_start; start of cell i], i = 0..kBlendCells.
const std::vector<double>& blend_table() {
  static const std::vector<double> table = [] {
    const double w = (kBridge.blend_end - kBridge.blend_start) / kBlendCells;
    std::vector<double> out(kBlendCells + 1, 0.0);
    CompensatedSum sum;
    for (int i = 0; i < kBlendCells; ++i) {
      const double a = kBridge.blend_start + i * w;
      sum.add(blend_piece(a, a + w));
      out[i + 1] = sum.value();
    }
    return out;
  }();
  return table;
}

// Integral of h over [0; b], b <= blend_end. On the Gaussian part it is an
// error function; the blend zone uses a table of cell integrals.
double bridge_integral(double b) {
  const double k = kBridge.kappa;
  const double g = std::min(b, kBridge.blend_start);
  double value = 0.5 * std::sqrt(M_PI / k) * std::erf(std::sqrt(k) * g);
  if (b > kBridge.blend_start) {
    const double w = (kBridge.blend_end - kBridge.blend_start) / kBlendCells;
    const int i = std::min(
        kBlendCells, static_cast<int>((b - kBridge.blend_start) / w));
    const double a = kBridge.blend_start + i * w;
    value += blend_table()[i];
    if (b > a) value += blend_piece(a, b);
  }
  return value;
}

double bridge_mass() {
  static const double value = bridge_integral(kBridge.blend_end);
  return value;
}

}  // namespace

// --- target sequences --------------------------------------------------------

TargetSequence::TargetSequence(std::function<double(double)> u,
                               std::string description)
    : u_(std::move(u)), description_(std::move(description)) {}

TargetSequence TargetSequence::linear() {
  return {[](double n) { return n; }, "linear"};
}

TargetSequence TargetSequence::power(double p) {
  if (!(p > 0.0) || !std::isfinite(p)) {
    throw PreconditionError("power target needs p > 0");
  }
  return {[p](double n) { return std::pow(n, p); },
          "power:p=" + shortest_repr(p)};
}

TargetSequence TargetSequence::parse(const std::string& spec) {
  if (spec == "linear") return linear();
  const std::string prefix = "power:p=";
  if (spec.rfind(prefix, 0) == 0) {
    const std::string rest = spec.substr(prefix.size());
    std::size_t used = 0;
    double p = 0.0;
    try {
      p = std::stod(rest, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != rest.size()) {
      throw PreconditionError("bad exponent in target '" + spec + "'");
    }
    return power(p);
  }
  throw PreconditionError("unknown target sequence '" + spec +
                          "' (expected linear or power:p=<float>)");
}

// --- schedule ----------------------------------------------------------------

double DeltaSchedule::log_gamma(int i, long l) const {
  const double big_l = log_mu_abs.at(static_cast<std::size_t>(i - 1));
  const double cap = std::log(big_l);
  if (l == 0) return cap;
  return std::min(cap, big_l / std::sqrt(static_cast<double>(std::labs(l))));
}

double DeltaSchedule::log_theta_factor(int i, long l) const {
  if (l == 0) return 0.0;
  const double big_l = log_mu_abs.at(static_cast<std::size_t>(i - 1));
  const double a = static_cast<double>(std::labs(l));
  return std::min(a * std::log(big_l), std::sqrt(a) * big_l);
}

DeltaSchedule schedule_from_values(std::string u_description,
                                   std::vector<long> tau,
                                   std::vector<double> u_tau) {
  if (tau.size() != u_tau.size()) {
    throw PreconditionError("schedule: tau and u(tau) differ in length");
  }
  DeltaSchedule s;
  s.u_description = std::move(u_description);
  for (std::size_t i = 0; i < tau.size(); ++i) {
    if (tau[i] < 1 || (i > 0 && tau[i] <= tau[i - 1])) {
      throw PreconditionError("schedule: tau must be positive and increasing");
    }
    if (!(u_tau[i] >= std::exp(8.0) * (1 - 1e-15))) {
      throw PreconditionError("schedule: u(tau_i) must be at least e^8");
    }
    s.log_mu_abs.push_back(std::log(u_tau[i]) / 4.0);
    s.mu.push_back(std::exp(-s.log_mu_abs.back()));
  }
  s.tau = std::move(tau);
  s.u_tau = std::move(u_tau);
  return s;
}

DeltaSchedule build_schedule(const TargetSequence& u, int levels,
                             long tau_floor) {
  if (levels < 0) throw PreconditionError("levels must be >= 0");
  if (tau_floor < 1) throw PreconditionError("tau_floor must be >= 1");
  auto value = [&](long n) {
    const double v = u(static_cast<double>(n));
    if (!(v > 0.0) || std::isnan(v)) {
      throw PreconditionError("target " + u.description() +
                              " is not positive at n=" + std::to_string(n));
    }
    return v;
  };
  auto not_increasing = [&](long a, long b) {
    return PreconditionError("target " + u.description() +
                             " is not increasing between n=" +
                             std::to_string(a) + " and n=" + std::to_string(b));
  };

  const double floor_value = value(tau_floor);
  const double floor_log = std::log(floor_value);
  std::vector<long> taus;
  std::vector<double> u_tau;
  for (int i = 1; i <= levels; ++i) {
    const double log_target =
        std::max({static_cast<double>(i) * i, 8.0, floor_log});
    if (log_target > 700.0) {
      throw PreconditionError("level " + std::to_string(i) +
                              " needs u beyond double range");
    }
    const double target =
        log_target == floor_log ? floor_value : std::exp(log_target);
    long lo = 0, hi = 1;
    double prev = value(1);
    while (value(hi) < target) {
      if (hi > (1L << 61)) {
        throw PreconditionError("target " + u.description() +
                                " does not reach e^" +
                                shortest_repr(log_target));
      }
      lo = hi;
      hi *= 2;
      const double next = value(hi);
      if (!(next > prev)) throw not_increasing(lo, hi);
      prev = next;
    }
    // Invariant: u(lo) < target <= u(hi) (lo = 0 stands for "none").
    while (hi - lo > 1) {
      const long mid = lo + (hi - lo) / 2;
      const double v = value(mid);
      if (lo > 0 && !(v > value(lo))) throw not_increasing(lo, mid);
      if (!(value(hi) > v)) throw not_increasing(mid, hi);
      if (v >= target) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    long tau = hi;
    if (!taus.empty()) tau = std::max(tau, taus.back() + 1);
    taus.push_back(tau);
    u_tau.push_back(value(tau));
  }
  return schedule_from_values(u.description(), std::move(taus),
                              std::move(u_tau));
}

// --- multi-indices -------------------------------------------------------------

Weights weights(const MultiIndex& k, const DeltaSchedule& s) {
  if (static_cast<int>(k.size()) > s.levels()) {
    throw PreconditionError("multi-index has more entries than levels");
  }
  Weights w;
  for (std::size_t i = 0; i < k.size(); ++i) {
    w.log_phi -= std::abs(k[i]) * s.log_mu_abs[i];
    w.log_theta += s.log_theta_factor(static_cast<int>(i + 1), k[i]);
  }
  if (w.log_phi + w.log_theta > 1e-12) {
    throw InvariantError("phi(k) theta(k) exceeds 1");
  }
  return w;
}

double center(const MultiIndex& k, const DeltaSchedule& s) {
  double c = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    c += static_cast<double>(k[i]) * static_cast<double>(s.tau[i]);
  }
  return c;
}

IndexSet enumerate_indices(const DeltaSchedule& s, double tail_eps, int cap) {
  if (!(tail_eps > 0.0)) throw PreconditionError("tail_eps must be positive");
  const int levels = s.levels();
  IndexSet out;
  std::vector<double> factor(levels);
  for (int i = 0; i < levels; ++i) {
    factor[i] = (1.0 + s.mu[i]) / (1.0 - s.mu[i]);
  }
  for (int i = 0; i < levels; ++i) {
    double others = 1.0;
    for (int j = 0; j < levels; ++j) {
      if (j != i) others *= factor[j];
    }
    const double mu = s.mu[i];
    auto bound = [&](int k) {
      return 2.0 * std::pow(mu, k + 1) / (1.0 - mu) * others;
    };
    int k = 0;
    while (bound(k) > tail_eps / levels) {
      if (++k > cap) {
        throw PreconditionError(
            "tail_eps=" + shortest_repr(tail_eps) + " needs K_" +
            std::to_string(i + 1) + " > " + std::to_string(cap) +
            "; the cap allows a tail bound of " +
            shortest_repr(levels * bound(cap)));
      }
    }
    out.bounds.push_back(k);
    out.tail_bound += bound(k);
  }

  double count = 1.0;
  for (int k : out.bounds) count *= 2.0 * k + 1.0;
  if (count > 5e6) {
    throw PreconditionError("index set of " + shortest_repr(count) +
                            " multi-indices is too large");
  }
  MultiIndex k(levels);
  for (int i = 0; i < levels; ++i) k[i] = -out.bounds[i];
  while (true) {
    out.indices.push_back(k);
    int i = 0;
    while (i < levels && k[i] == out.bounds[i]) {
      k[i] = -out.bounds[i];
      ++i;
    }
    if (i == levels) break;
    ++k[i];
  }
  return out;
}

// --- h ----------------------------------------------------------------------

double base_h(double t, int m) {
  check_order(m);
  double out[kOrders];
  h_all(t, m, out);
  return out[m];
}

double base_h_difference(int m, double s, double d) {
  check_order(m);
  double out[kOrders];
  h_diff_all(s, d, m, out);
  return out[m];
}

double base_h_tail(double s) {
  if (s < 0.0) throw PreconditionError("base_h_tail needs s >= 0");
  const double e = kBridge.blend_end;
  if (s >= e) return 1.0 / std::log(s);
  return bridge_mass() - bridge_integral(s) + 1.0 / std::log(e);
}

double base_h_integral() {
  return 2.0 * (bridge_mass() + 1.0 / std::log(kBridge.blend_end));
}

int base_h_monotonicity_failures(int samples) {
  int failures = 0;
  double prev = base_h(0.0);
  for (int i = 1; i <= samples; ++i) {
    const double v = base_h(4.0 * i / samples);
    if (!(v < prev)) ++failures;
    prev = v;
  }
  return failures;
}

double h_ratio_sup(double c, double* witness) {
  if (!(c > 0.0)) throw PreconditionError("h_ratio_sup needs c > 0");
  double best = 0.0, arg = 0.0;
  auto probe = [&](double s) {
    const double r = base_h(s) / base_h(c * s);
    if (r > best) {
      best = r;
      arg = s;
    }
  };
  for (int i = 0; i <= 4000; ++i) probe(10.0 * i / 4000);
  for (double s = 1e-4; s < 1e15; s *= 1.01) probe(s);
  const double step = arg * 0.01 + 1e-3;
  const auto refined = golden_section_max(
      [&](double s) { return base_h(s) / base_h(c * s); },
      std::max(0.0, arg - step), arg + step);
  if (refined.second > best) {
    best = refined.second;
    arg = refined.first;
  }
  if (witness) *witness = arg;
  return best;
}

// --- Delta ------------------------------------------------------------------

DeltaFunction::DeltaFunction(DeltaSchedule schedule, double tail_eps, int cap)
    : schedule_(std::move(schedule)), tail_eps_(tail_eps) {
  IndexSet set = enumerate_indices(schedule_, tail_eps, cap);
  bounds_ = set.bounds;
  tail_bound_ = set.tail_bound;
  terms_.reserve(set.indices.size());
  for (auto& k : set.indices) {
    const Weights w = weights(k, schedule_);
    Term t;
    t.log_phi = w.log_phi;
    t.log_theta = w.log_theta;
    t.phi = std::exp(w.log_phi);
    t.scale = std::exp(w.log_phi + w.log_theta);
    t.center = center(k, schedule_);
    t.k = std::move(k);
    max_center_ = std::max(max_center_, std::abs(t.center));
    terms_.push_back(std::move(t));
  }
  std::stable_sort(terms_.begin(), terms_.end(),
                   [](const Term& a, const Term& b) {
                     if (a.log_phi != b.log_phi) return a.log_phi > b.log_phi;
                     return a.center < b.center;
                   });
}

std::array<double, kMaxDerivativeOrder + 1> DeltaFunction::derivatives(
    double t, int order) const {
  check_order(order);
  CompensatedSum sums[kOrders];
  double h[kOrders];
  for (const Term& term : terms_) {
    h_all(term.scale * (t - term.center), order, h);
    double w = term.phi;
    for (int m = 0; m <= order; ++m) {
      sums[m].add(w * h[m]);
      w *= term.scale;
    }
  }
  std::array<double, kOrders> out{};
  for (int m = 0; m <= order; ++m) out[m] = sums[m].value();
  return out;
}

std::array<double, kMaxDerivativeOrder + 1> DeltaFunction::forward_differences(
    double t, int order) const {
  check_order(order);
  CompensatedSum sums[kOrders];
  double h[kOrders];
  for (const Term& term : terms_) {
    h_diff_all(term.scale * (t - term.center), term.scale, order, h);
    double w = term.phi;
    for (int m = 0; m <= order; ++m) {
      sums[m].add(w * h[m]);
      w *= term.scale;
    }
  }
  std::array<double, kOrders> out{};
  for (int m = 0; m <= order; ++m) out[m] = sums[m].value();
  return out;
}

double DeltaFunction::derivative(int m, double t) const {
  check_order(m);
  if (m == 0) {
    CompensatedSum sum;
    double h[1];
    for (const Term& term : terms_) {
      h_all(term.scale * (t - term.center), 0, h);
      sum.add(term.phi * h[0]);
    }
    return sum.value();
  }
  return derivatives(t, m)[m];
}

double DeltaFunction::forward_difference(int m, double t) const {
  return forward_differences(t, m)[m];
}

std::vector<double> DeltaFunction::hump_centers() const {
  std::vector<double> c;
  c.reserve(terms_.size());
  for (const Term& t : terms_) c.push_back(t.center);
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  return c;
}

double DeltaFunction::phi_mass() const {
  CompensatedSum s;
  for (const Term& t : terms_) s.add(t.phi);
  return s.value();
}

double DeltaFunction::inverse_theta_sum() const {
  CompensatedSum s;
  for (const Term& t : terms_) s.add(std::exp(-t.log_theta));
  return s.value();
}

double DeltaFunction::tail_integral(double T) const {
  if (T < max_center_) {
    throw PreconditionError("tail_integral needs T >= max hump center");
  }
  CompensatedSum s;
  for (const Term& t : terms_) {
    const double w = std::exp(-t.log_theta);
    s.add(w * base_h_tail(t.scale * (T - t.center)));
    s.add(w * base_h_tail(t.scale * (T + t.center)));
  }
  return s.value();
}

double DeltaFunction::upper_integral(double s) const {
  const double total = base_h_integral();
  CompensatedSum sum;
  for (const Term& t : terms_) {
    const double y = t.scale * (s - t.center);
    const double tail = y >= 0.0 ? base_h_tail(y) : total - base_h_tail(-y);
    sum.add(std::exp(-t.log_theta) * tail);
  }
  return sum.value();
}

// --- verification ----------------------------------------------------------

namespace {

// Integral of Delta over [a; b] with breakpoints at hump centers.
QuadratureResult integrate_delta(const DeltaFunction& d, double a, double b,
                                 double tol) {
  std::vector<double> cuts{a, b};
  for (double c : d.hump_centers()) {
    if (c > a && c < b) cuts.push_back(c);
  }
  // Geometric cuts keep the far field well resolved.
  for (double x = std::max(a, 64.0); x < b; x *= 2.0) {
    if (x > a) cuts.push_back(x);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  QuadratureResult total;
  CompensatedSum value;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const auto r =
        gauss_kronrod([&](double t) { return d(t); }, cuts[i], cuts[i + 1], tol);
    value.add(r.value);
    total.error += r.error;
    total.converged = total.converged && r.converged;
  }
  total.value = value.value();
  return total;
}

}  // namespace

IntegrabilityReport verify_integrability(const DeltaFunction& d,
                                         double quad_tol, double margin) {
  IntegrabilityReport rep;
  rep.T = d.max_center() + margin;
  const auto half = integrate_delta(d, 0.0, rep.T, quad_tol);
  const auto extra = integrate_delta(d, rep.T, 2.0 * rep.T, quad_tol);
  rep.inner = 2.0 * half.value;
  rep.inner_error = 2.0 * (half.error + extra.error);
  rep.tail = d.tail_integral(rep.T);
  rep.total = rep.inner + rep.tail;
  rep.doubled_inner = rep.inner + 2.0 * extra.value;
  rep.doubled_tail = d.tail_integral(2.0 * rep.T);
  rep.doubled_total = rep.doubled_inner + rep.doubled_tail;
  rep.analytic = base_h_integral() * d.inverse_theta_sum();
  rep.converged = half.converged && extra.converged;
  if (!rep.converged) {
    throw ConvergenceError("quadrature of Delta did not reach tolerance " +
                           shortest_repr(quad_tol) + " (error estimate " +
                           shortest_repr(rep.inner_error) + ")");
  }
  return rep;
}

std::vector<double> hump_grid(const DeltaFunction& d, double shift) {
  const std::vector<double> centers = d.hump_centers();
  std::vector<double> base;
  for (double c : centers) {
    base.push_back(c);
    base.push_back(c - shift);
  }
  for (std::size_t i = 0; i + 1 < centers.size(); ++i) {
    const double mid = 0.5 * (centers[i] + centers[i + 1]);
    base.push_back(mid);
    base.push_back(mid - shift);
  }
  std::vector<double> offsets{0.0};
  for (int j = -1; j <= 12; ++j) {
    offsets.push_back(std::ldexp(1.0, j));
    offsets.push_back(-std::ldexp(1.0, j));
  }
  std::vector<double> grid;
  grid.reserve(base.size() * offsets.size() + 400);
  for (double b : base) {
    for (double o : offsets) grid.push_back(b + o);
  }
  const double start = d.max_center() + std::abs(shift) + 1.0;
  for (double x = start; x < 1e12; x *= 1.1) {
    grid.push_back(x);
    grid.push_back(-x);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

ShiftRatioSup shift_ratio_sup(const DeltaFunction& d, double shift) {
  ShiftRatioSup out;
  const std::vector<double> grid = hump_grid(d, shift);
  out.grid_points = grid.size();
  std::vector<double> ratio(grid.size());
  parallel_chunks(grid.size(), [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      ratio[i] = d(grid[i] + shift) / d(grid[i]);
    }
  });
  const std::size_t best = static_cast<std::size_t>(
      std::max_element(ratio.begin(), ratio.end()) - ratio.begin());
  out.sup = ratio[best];
  out.witness_t = grid[best];
  const double lo = best > 0 ? grid[best - 1] : grid[best] - 1.0;
  const double hi = best + 1 < grid.size() ? grid[best + 1] : grid[best] + 1.0;
  const auto refined = golden_section_max(
      [&](double t) { return d(t + shift) / d(t); }, lo, hi);
  if (refined.second > out.sup) {
    out.sup = refined.second;
    out.witness_t = refined.first;
  }
  return out;
}

RatioReport verify_ratio_bound(const DeltaFunction& d, int level) {
  const DeltaSchedule& s = d.schedule();
  if (level < 1 || level > s.levels()) {
    throw PreconditionError("verify_ratio_bound: level " +
                            std::to_string(level) + " outside [1, " +
                            std::to_string(s.levels()) + "]");
  }
  RatioReport rep;
  rep.level = level;
  const double tau = static_cast<double>(s.tau[level - 1]);
  rep.bound = s.u_tau[level - 1];

  const ShiftRatioSup sup = shift_ratio_sup(d, tau);
  rep.grid_points = sup.grid_points;
  rep.sup_ratio = sup.sup;
  rep.witness_t = sup.witness_t;
  rep.ok = rep.sup_ratio <= rep.bound;

  const double big_l = s.log_mu_abs[level - 1];
  for (const auto& term : d.terms()) {
    MultiIndex next = term.k;
    next[level - 1] += 1;
    const Weights w = weights(next, s);
    const double dphi = w.log_phi - term.log_phi;
    const double dtheta = w.log_theta - term.log_theta;
    rep.phi_sandwich = rep.phi_sandwich && std::abs(dphi) <= big_l + kSandwichSlack;
    rep.theta_sandwich =
        rep.theta_sandwich && std::abs(dtheta) <= big_l + kSandwichSlack;
    rep.phi_exact =
        rep.phi_exact && std::abs(std::abs(dphi) - big_l) <= kSandwichSlack;
    ++rep.indices_checked;
  }
  return rep;
}

FlatnessDiagnostic flatness_diagnostic(const DeltaFunction& d, int m, double c,
                                       const std::vector<double>& t_list,
                                       int subsamples) {
  if (m < 1) throw PreconditionError("flatness_diagnostic needs m >= 1");
  check_order(m);
  if (!(c >= 0.0 && c < 1.0)) {
    throw PreconditionError("flatness_diagnostic needs c in [0; 1)");
  }
  FlatnessDiagnostic out;
  out.m = m;
  out.c = c;
  for (double t : t_list) {
    double sup = 0.0;
    for (int j = 0; j <= subsamples; ++j) {
      sup = std::max(sup, std::abs(d.derivative(m, t + double(j) / subsamples)));
    }
    out.t.push_back(t);
    out.ratios.push_back(sup / std::pow(d(t), m + c));
  }
  for (std::size_t i = 1; i < out.ratios.size(); ++i) {
    out.decreasing = out.decreasing && out.ratios[i] < out.ratios[i - 1];
  }
  const double box = std::pow(m / (1.0 - c), 2);
  out.log_nu = -std::numeric_limits<double>::infinity();
  for (const auto& term : d.terms()) {
    const double v = (1.0 - c) * term.log_phi + m * term.log_theta;
    out.log_nu = std::max(out.log_nu, v);
    if (v > 1e-12) {
      ++out.above_one;
      for (int ki : term.k) {
        if (std::abs(ki) > box) {
          ++out.outside_box;
          break;
        }
      }
    }
  }
  return out;
}

double g0_minus_one(const DeltaFunction& d, double t) {
  return d.forward_difference(0, t) / d(t);
}

namespace {

double numeric_g(const DeltaFunction& d, int m, double t) {
  if (m == 0) return g0_minus_one(d, t);
  const auto dv = d.derivatives(t, 1);
  const double scale =
      std::clamp(dv[0] / std::abs(dv[1]), 1.0, std::abs(t) + 1.0);
  const double h = 0.01 * (std::isfinite(scale) ? scale : 1.0);
  const double slope = (numeric_g(d, m - 1, t - 2 * h) -
                        8.0 * numeric_g(d, m - 1, t - h) +
                        8.0 * numeric_g(d, m - 1, t + h) -
                        numeric_g(d, m - 1, t + 2 * h)) /
                       (12.0 * h);
  return slope / dv[0];
}

}  // namespace

GValues g_values(const DeltaFunction& d, double t) {
  constexpr std::size_t N = kMaxDerivativeOrder;
  const auto dv = d.derivatives(t, N - 1);
  const auto wv = d.forward_differences(t, N - 1);
  Jet<N> dj, wj;
  double fact = 1.0;
  for (std::size_t k = 0; k < N; ++k) {
    if (k > 1) fact *= static_cast<double>(k);
    dj.c[k] = dv[k] / fact;
    wj.c[k] = wv[k] / fact;
  }
  GValues out;
  const Jet<N> g0 = wj / dj;
  out.g0_minus_one = g0.value();
  out.g[0] = 1.0 + g0.value();
  const Jet<N - 1> g1 = g0.differentiated() / dj.truncated<N - 1>();
  out.g[1] = g1.value();
  const Jet<N - 2> g2 = g1.differentiated() / dj.truncated<N - 2>();
  out.g[2] = g2.value();
  const Jet<N - 3> g3 = g2.differentiated() / dj.truncated<N - 3>();
  out.g[3] = g3.value();
  return out;
}

double g_sequence(const DeltaFunction& d, int m, double t, GRoute route) {
  if (m < 0 || m >= kMaxDerivativeOrder) {
    throw PreconditionError("g_" + std::to_string(m) +
                            " needs derivatives beyond the available order " +
                            std::to_string(kMaxDerivativeOrder));
  }
  if (route == GRoute::Exact) return g_values(d, t).g[m];
  if (m == 0) return 1.0 + g0_minus_one(d, t);
  return numeric_g(d, m, t);
}

double g1_identity(const DeltaFunction& d, double t) {
  const auto dv = d.derivatives(t, 1);
  const auto wv = d.forward_differences(t, 1);
  return (wv[1] * dv[0] - wv[0] * dv[1]) / (dv[0] * dv[0] * dv[0]);
}

}  // namespace growthlab
