#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "growthlab/delta.hpp"
#include "growthlab/growth.hpp"
#include "growthlab/interval_diffeo.hpp"

namespace growthlab {

/// Beyond this |eta| the shift eta -> eta + 1 is lost in double precision
/// and iterates act as the identity. Derivatives are still evaluated there.
inline constexpr double kEtaShiftLimit = 9007199254740992.0;  // 2^53
/// a^{-1} reports +-infinity past this |eta|.
inline constexpr double kEtaMax = 1e300;

/// f(x) = a(a^{-1}(x) + 1) with a(eta) = (1/Z) integral of Delta over
/// (-inf; eta] and Z the total integral. In the coordinate eta the map is
/// the unit translation, so f^n(x) = a(a^{-1}(x) + n) and
/// f^{(m+1)}(x) = Z^m g_m(a^{-1}(x)).
class FlowMap final : public IntervalDiffeo {
 public:
  FlowMap(DeltaFunction delta, IntegrabilityReport integrability);

  const DeltaFunction& delta() const { return delta_; }
  const IntegrabilityReport& integrability() const { return integrability_; }
  /// Z, the normalising total integral.
  double norm() const { return norm_; }

  /// a(eta) with both coordinates accurate.
  UnitPoint a(double eta) const;
  /// a^{-1}(x), to max(1e-12, 4 ulp) in eta or to the resolution of a.
  /// Returns +-infinity when |eta| would exceed kEtaMax.
  double a_inv(UnitPoint p) const;

  /// f^n(p) for any integer n.
  UnitPoint iterate(UnitPoint p, long n) const;

  /// Nodes of the tabulation of a on eta >= 0.
  std::size_t table_size() const { return table_s_.size(); }

  /// a(eta) over the hump-aware grid shifted by `shift`, clipped to
  /// points strictly inside (0; 1).
  std::vector<UnitPoint> grid_hint(double shift) const;

  DiffeoKind kind() const override { return DiffeoKind::FlowGenerated; }
  std::string name() const override;
  UnitPoint apply(UnitPoint p) const override { return iterate(p, 1); }
  UnitPoint apply_inverse(UnitPoint p) const override {
    return iterate(p, -1);
  }
  double log_deriv(UnitPoint p) const override;
  std::optional<double> derivative(int order, UnitPoint p) const override;
  int max_order() const override { return kMaxDerivativeOrder; }
  /// a(+-10^j), j = 1..30.
  std::vector<UnitPoint> approach_sequence(bool right_end) const override;

 private:
  // Solves U(s) = y for s >= 0, U the upper integral of Delta.
  double solve_upper(double y) const;

  DeltaFunction delta_;
  IntegrabilityReport integrability_;
  double norm_ = 1.0;
  // U(s) at increasing s >= 0; U decreases.
  std::vector<double> table_s_;
  std::vector<double> table_u_;
};

using FlowPtr = std::shared_ptr<const FlowMap>;

inline constexpr double kNormAgreement = 1e-8;

/// Throws ConvergenceError when the quadrature of Delta fails or disagrees
/// with the term-wise integral by more than kNormAgreement (relative).
FlowPtr build_flow(DeltaFunction d);

/// Gamma_n(f) = sup_eta Delta(eta + n) / Delta(eta); 1 for n = 0.
double flow_growth(const FlowMap& fm, long n);

struct LevelCheck {
  int level = 0;
  long tau = 0;
  double u_tau = 0.0;
  double gamma = 0.0;
  double ratio = 0.0;  // gamma / u_tau
  bool ok = true;
};

struct LadderPoint {
  double eta = 0.0;
  double g0_minus_one = 0.0;
  double g1 = 0.0;
  double g2 = 0.0;
};

struct SubsequenceReport {
  std::vector<LevelCheck> levels;
  std::vector<LadderPoint> ladder;  // eta = 10^3, 10^4, 10^5
  bool ladder_decreasing = true;    // |g0 - 1|, |g1|, |g2| each
  FlatnessReport flatness;
  bool ok() const;
};

SubsequenceReport verify_subsequence_bound(const FlowMap& fm,
                                          double flat_tolerance = 1e-4);

}  // namespace growthlab
