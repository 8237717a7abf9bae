#pragma once

#include <vector>

#include "growthlab/growth.hpp"
#include "growthlab/interval_diffeo.hpp"

namespace growthlab {

inline constexpr double kAnnulusInner = 1.0 / 3.0;
inline constexpr double kAnnulusOuter = 2.0 / 3.0;

/// g(x) = x h(|x|) / |x| on the closed unit ball of R^dim, for a profile h
/// equal to the identity outside the middle third. g is the identity on
/// |x| <= 1/3 and |x| >= 2/3.
class RadialMap {
 public:
  RadialMap(DiffeoPtr profile, int dim);

  const IntervalDiffeo& profile() const { return *profile_; }
  DiffeoPtr profile_ptr() const { return profile_; }
  int dim() const { return dim_; }

  /// g^n(x) for signed n. Throws PreconditionError outside the ball or on
  /// a dimension mismatch.
  std::vector<double> iterate(const std::vector<double>& x, long n) const;
  std::vector<double> operator()(const std::vector<double>& x) const {
    return iterate(x, 1);
  }

  /// The differential of g^n at |x| = r is diagonal in an orthonormal frame:
  /// (h^n)'(r) radially and h^n(r)/r on the tangent space (absent for
  /// dim = 1).
  struct Factors {
    double radial = 1.0;
    double tangential = 1.0;
  };
  Factors factors(double r, long n) const;

 private:
  DiffeoPtr profile_;
  int dim_;
};

/// Throws PreconditionError when dim < 1 or h moves a sampled point of
/// [0;1/3] or [2/3;1].
RadialMap build_radial(DiffeoPtr h, int dim, int samples = 1000);

struct RadialGrowthRecord {
  long n = 0;
  double gamma_h = 1.0;
  double gamma_g = 1.0;
  // max over the annulus grid of max(rho, 1/rho), rho = h^n(r)/r.
  double tangential = 1.0;
  double rho_min = 1.0;
  double rho_max = 1.0;
  bool sandwich = true;      // gamma_h <= gamma_g <= max(2, gamma_h)
  bool equality = true;      // gamma_g == gamma_h whenever gamma_h > 2
  bool radial_range = true;  // rho within [1/2; 2]
  bool ok() const { return sandwich && equality && radial_range; }
};

inline constexpr double kSandwichTolerance = 1e-12;

/// Gamma_n(g) = exp max over the radial grid of the larger |log| of the two
/// factors, for n = 1..n_max.
std::vector<RadialGrowthRecord> radial_growth_sequence(
    const RadialMap& rm, long n_max, const GridSpec& grid = {},
    int annulus_samples = 2049);

/// Gamma_n(g) for a single n >= 0.
double radial_growth(const RadialMap& rm, long n, const GridSpec& grid = {});

}  // namespace growthlab
