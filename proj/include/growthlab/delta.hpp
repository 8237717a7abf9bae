#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace growthlab {

/// A strictly increasing unbounded target u(n) for the growth of the flow map.
class TargetSequence {
 public:
  TargetSequence(std::function<double(double)> u, std::string description);

  /// u(n) = n.
  static TargetSequence linear();
  /// u(n) = n^p, p > 0.
  static TargetSequence power(double p);
  /// Parses "linear" or "power:p=<float>".
  static TargetSequence parse(const std::string& spec);

  double operator()(double n) const { return u_(n); }
  const std::string& description() const { return description_; }

 private:
  std::function<double(double)> u_;
  std::string description_;
};

/// Levels i = 1..I of the construction. Vectors are indexed by i - 1.
struct DeltaSchedule {
  std::string u_description;
  std::vector<long> tau;
  std::vector<double> u_tau;       // u(tau_i)
  std::vector<double> log_mu_abs;  // |log mu_i| = log u(tau_i) / 4
  std::vector<double> mu;          // u(tau_i)^{-1/4}

  int levels() const { return static_cast<int>(tau.size()); }

  /// log gamma_{i,l}: |log mu_i| branch capped by mu_i^{-1/sqrt|l|}, taken
  /// in log form. Level i is 1-based.
  double log_gamma(int i, long l) const;

  /// |l| log gamma_{i,l} = min(|l| log|log mu_i|, sqrt|l| |log mu_i|).
  double log_theta_factor(int i, long l) const;
};

/// tau_i = min{n : u(n) >= max(e^{i^2}, e^8, u(tau_floor))}, then forced
/// strictly increasing. Throws PreconditionError when u fails to increase on
/// a probed point.
DeltaSchedule build_schedule(const TargetSequence& u, int levels,
                             long tau_floor = 1);

/// Rebuilds a schedule from stored tau and u(tau) values.
DeltaSchedule schedule_from_values(std::string u_description,
                                   std::vector<long> tau,
                                   std::vector<double> u_tau);

/// k_i for levels i = 1..I, stored at position i - 1.
using MultiIndex = std::vector<int>;

struct Weights {
  double log_phi = 0.0;
  double log_theta = 0.0;
};

/// log phi(k) and log theta(k). Throws InvariantError if phi theta > 1.
Weights weights(const MultiIndex& k, const DeltaSchedule& s);

/// <k, tau>.
double center(const MultiIndex& k, const DeltaSchedule& s);

struct IndexSet {
  std::vector<int> bounds;  // K_i
  std::vector<MultiIndex> indices;
  double tail_bound = 0.0;  // bound on the omitted sum of phi(k)
};

inline constexpr int kDefaultIndexCap = 200;

/// Keeps |k_i| <= K_i with K_i minimal such that
/// 2 mu_i^{K_i+1} / (1 - mu_i) * prod_{j != i} (1 + mu_j) / (1 - mu_j)
/// is at most tail_eps / I.
IndexSet enumerate_indices(const DeltaSchedule& s, double tail_eps,
                           int cap = kDefaultIndexCap);

// --- base function h --------------------------------------------------------

inline constexpr int kMaxDerivativeOrder = 4;

/// Shape constants of h near 0: h = exp(-s) with s = kappa t^2 for
/// |t| <= blend_start, s = log t + 2 log log t for |t| >= blend_end, and a
/// smooth-step blend in between.
struct BridgeParameters {
  double kappa = 0.1;
  double blend_start = 2.5;
  double blend_end = 3.0;
};

inline constexpr BridgeParameters kBridge{};

/// h^{(m)}(t) for 0 <= m <= kMaxDerivativeOrder.
double base_h(double t, int m = 0);

/// h^{(m)}(s + d) - h^{(m)}(s), accurate when d is small against s.
double base_h_difference(int m, double s, double d);

/// Integral of h over [s; +inf), s >= 0.
double base_h_tail(double s);

/// Integral of h over the real line.
double base_h_integral();

/// Largest number of sample points on (0; 4] where h fails to decrease
/// strictly (0 when h is monotone there).
int base_h_monotonicity_failures(int samples = 10000);

/// sup_{s > 0} h(s) / h(c s), by scanning a geometric grid; the argument of
/// the supremum is written to `witness` when given.
double h_ratio_sup(double c, double* witness = nullptr);

// --- Delta -----------------------------------------------------------------

/// Delta(t) = sum_k phi(k) h(phi(k) theta(k) (t - <k, tau>)) over a
/// truncated index set.
class DeltaFunction {
 public:
  struct Term {
    MultiIndex k;
    double log_phi = 0.0;
    double log_theta = 0.0;
    double phi = 1.0;
    double scale = 1.0;  // phi theta
    double center = 0.0;
  };

  DeltaFunction(DeltaSchedule schedule, double tail_eps,
                int cap = kDefaultIndexCap);

  const DeltaSchedule& schedule() const { return schedule_; }
  const std::vector<int>& bounds() const { return bounds_; }
  /// Terms in order of decreasing phi.
  const std::vector<Term>& terms() const { return terms_; }
  double tail_bound() const { return tail_bound_; }
  double tail_eps() const { return tail_eps_; }

  double operator()(double t) const { return derivative(0, t); }

  /// Delta^{(m)}(t) = sum phi (phi theta)^m h^{(m)}(phi theta (t - c)).
  double derivative(int m, double t) const;

  /// Delta^{(m)}(t + 1) - Delta^{(m)}(t), term by term without cancellation.
  double forward_difference(int m, double t) const;

  /// Delta^{(0..order)}(t), or their forward differences, in one pass.
  std::array<double, kMaxDerivativeOrder + 1> derivatives(double t,
                                                          int order) const;
  std::array<double, kMaxDerivativeOrder + 1> forward_differences(
      double t, int order) const;

  /// Largest |<k, tau>|.
  double max_center() const { return max_center_; }
  /// Sorted distinct hump centers.
  std::vector<double> hump_centers() const;
  /// Sum of phi(k) over enumerated k.
  double phi_mass() const;
  /// Sum of 1/theta(k); the integral of Delta is this times the integral of h.
  double inverse_theta_sum() const;
  /// Integral of Delta over |t| > T, T >= max_center().
  double tail_integral(double T) const;
  /// Integral of Delta over [s; +inf) for any real s, term by term from
  /// the antiderivative of h. No cancellation: every term is positive.
  double upper_integral(double s) const;

 private:
  DeltaSchedule schedule_;
  double tail_eps_;
  std::vector<int> bounds_;
  double tail_bound_ = 0.0;
  std::vector<Term> terms_;
  double max_center_ = 0.0;
};

// --- verification ----------------------------------------------------------

struct IntegrabilityReport {
  double T = 0.0;
  double inner = 0.0;  // integral over [-T; T]
  double inner_error = 0.0;
  double tail = 0.0;  // integral over |t| > T
  double total = 0.0;
  double doubled_inner = 0.0;  // the same at 2T
  double doubled_tail = 0.0;
  double doubled_total = 0.0;
  double analytic = 0.0;  // integral of h times sum 1/theta
  bool converged = true;
};

/// Throws ConvergenceError when the quadrature fails to reach quad_tol.
IntegrabilityReport verify_integrability(const DeltaFunction& d,
                                         double quad_tol = 1e-10,
                                         double margin = 50.0);

struct RatioReport {
  int level = 1;
  double bound = 0.0;  // u(tau_i)
  double sup_ratio = 0.0;
  double witness_t = 0.0;
  std::size_t grid_points = 0;
  bool ok = true;
  // Sandwiches mu_i <= w(k + e^i) / w(k) <= 1/mu_i for w = phi, theta,
  // checked in log form over every enumerated k.
  std::size_t indices_checked = 0;
  bool phi_sandwich = true;
  bool theta_sandwich = true;
  bool phi_exact = true;  // phi ratio is exactly mu_i^{+-1}
};

inline constexpr double kSandwichSlack = 1e-12;

/// Sample points concentrated around every hump center and its shift by
/// -shift, plus midpoints and a geometric far field, for both signs of t.
std::vector<double> hump_grid(const DeltaFunction& d, double shift);

struct ShiftRatioSup {
  double sup = 1.0;
  double witness_t = 0.0;
  std::size_t grid_points = 0;
};

/// sup_t Delta(t + shift) / Delta(t) over hump_grid(d, shift), refined by
/// golden-section search around the best grid point.
ShiftRatioSup shift_ratio_sup(const DeltaFunction& d, double shift);

RatioReport verify_ratio_bound(const DeltaFunction& d, int level);

struct FlatnessDiagnostic {
  int m = 1;
  double c = 0.0;
  std::vector<double> t;
  // max over [t; t+1] of |Delta^{(m)}| divided by Delta(t)^{m+c}.
  std::vector<double> ratios;
  bool decreasing = true;
  // log nu_{m,c} = max_k (1-c) log phi(k) + m log theta(k).
  double log_nu = 0.0;
  std::size_t above_one = 0;  // enumerated k with value > 1
  // Of those, the ones with some |k_i| > (m / (1 - c))^2.
  std::size_t outside_box = 0;
};

FlatnessDiagnostic flatness_diagnostic(const DeltaFunction& d, int m, double c,
                                       const std::vector<double>& t_list,
                                       int subsamples = 32);

/// g_0 = Delta(t+1)/Delta(t) and g_{m+1} = g_m' / Delta.
enum class GRoute {
  Numeric,  // nested central differences of g_{m-1}
  Exact     // Taylor-jet propagation of Delta and its forward differences
};

/// g_0(t) - 1 = (Delta(t+1) - Delta(t)) / Delta(t) without cancellation.
double g0_minus_one(const DeltaFunction& d, double t);

/// g_m(t) for 0 <= m < kMaxDerivativeOrder.
double g_sequence(const DeltaFunction& d, int m, double t,
                  GRoute route = GRoute::Numeric);

struct GValues {
  double g0_minus_one = 0.0;
  std::array<double, kMaxDerivativeOrder> g{};  // g_0 .. g_3
};

/// All g_m at once by the exact route.
GValues g_values(const DeltaFunction& d, double t);

/// (omega Delta' Delta - omega Delta Delta') / Delta^3 with
/// omega v(t) = v(t+1) - v(t); equals g_1.
double g1_identity(const DeltaFunction& d, double t);

}  // namespace growthlab
