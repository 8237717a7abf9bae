#include "growthlab/ball.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "growthlab/errors.hpp"
#include "growthlab/numerics.hpp"

namespace growthlab {

namespace {

double norm2(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s = std::hypot(s, v);
  return s;
}

}  // namespace

RadialMap::RadialMap(DiffeoPtr profile, int dim)
    : profile_(std::move(profile)), dim_(dim) {
  if (!profile_) throw PreconditionError("radial map needs a profile");
  if (dim_ < 1) throw PreconditionError("ball dimension must be >= 1");
}

std::vector<double> RadialMap::iterate(const std::vector<double>& x,
                                       long n) const {
  if (static_cast<int>(x.size()) != dim_) {
    throw PreconditionError("point has dimension " + std::to_string(x.size()) +
                            ", expected " + std::to_string(dim_));
  }
  const double r = norm2(x);
  if (r > 1.0) throw PreconditionError("point outside the unit ball");
  if (r <= kAnnulusInner || r >= kAnnulusOuter || n == 0) return x;
  const double s = eval_iterate(*profile_, n, r) / r;
  std::vector<double> out(x);
  for (double& v : out) v *= s;
  return out;
}

RadialMap::Factors RadialMap::factors(double r, long n) const {
  if (!(r > 0.0 && r <= 1.0)) throw PreconditionError("radius outside (0;1]");
  Factors f;
  f.radial = std::exp(log_orbit_derivative(*profile_, n, r));
  if (dim_ > 1) f.tangential = eval_iterate(*profile_, n, r) / r;
  return f;
}

RadialMap build_radial(DiffeoPtr h, int dim, int samples) {
  if (!h) throw PreconditionError("radial map needs a profile");
  for (int i = 0; i <= samples; ++i) {
    const double t = static_cast<double>(i) / samples;
    for (double x : {kAnnulusInner * t, kAnnulusOuter + (1.0 - kAnnulusOuter) * t}) {
      const UnitPoint p = UnitPoint::at(x);
      const UnitPoint q = h->apply(p);
      if (std::abs(q.x - p.x) > 1e-15 || std::abs(q.xc - p.xc) > 1e-15) {
        throw PreconditionError(h->name() +
                                " is not the identity outside [1/3;2/3] (x=" +
                                std::to_string(x) + ")");
      }
    }
  }
  return RadialMap(std::move(h), dim);
}

std::vector<RadialGrowthRecord> radial_growth_sequence(const RadialMap& rm,
                                                       long n_max,
                                                       const GridSpec& grid,
                                                       int annulus_samples) {
  if (n_max < 1) throw PreconditionError("radial growth needs n_max >= 1");
  const auto hrec = growth_sequence(rm.profile(), n_max, grid);
  std::vector<RadialGrowthRecord> out(static_cast<std::size_t>(n_max));
  for (long n = 1; n <= n_max; ++n) {
    out[n - 1].n = n;
    out[n - 1].gamma_h = hrec[n - 1].gamma_n;
  }

  if (rm.dim() > 1) {
    // Orbits of an annulus grid in both directions; every h^{+-n}(r)/r is a
    // tangential factor of g^{+-n}.
    std::vector<double> r0(static_cast<std::size_t>(annulus_samples));
    for (int i = 0; i < annulus_samples; ++i) {
      r0[i] = kAnnulusInner +
              (kAnnulusOuter - kAnnulusInner) * (i + 0.5) / annulus_samples;
    }
    std::vector<double> lo(n_max, 0.0), hi(n_max, 0.0);
    for (int dir : {1, -1}) {
      std::vector<UnitPoint> pts(r0.size());
      for (std::size_t i = 0; i < r0.size(); ++i) pts[i] = UnitPoint::at(r0[i]);
      for (long n = 1; n <= n_max; ++n) {
        for (std::size_t i = 0; i < pts.size(); ++i) {
          pts[i] = dir > 0 ? rm.profile().apply(pts[i])
                           : rm.profile().apply_inverse(pts[i]);
          const double lr = std::log(pts[i].x / r0[i]);
          lo[n - 1] = std::min(lo[n - 1], lr);
          hi[n - 1] = std::max(hi[n - 1], lr);
        }
      }
    }
    for (long n = 1; n <= n_max; ++n) {
      RadialGrowthRecord& rec = out[n - 1];
      rec.rho_min = std::exp(lo[n - 1]);
      rec.rho_max = std::exp(hi[n - 1]);
      rec.tangential = std::exp(std::max(hi[n - 1], -lo[n - 1]));
    }
  }

  for (RadialGrowthRecord& rec : out) {
    rec.gamma_g = std::max(rec.gamma_h, rec.tangential);
    const double tol = 1.0 + kSandwichTolerance;
    rec.sandwich = rec.gamma_h <= rec.gamma_g * tol &&
                   rec.gamma_g <= std::max(2.0, rec.gamma_h) * tol;
    rec.equality = !(rec.gamma_h > 2.0) || rec.gamma_g == rec.gamma_h;
    rec.radial_range = rec.rho_min >= 0.5 / tol && rec.rho_max <= 2.0 * tol;
  }
  return out;
}

double radial_growth(const RadialMap& rm, long n, const GridSpec& grid) {
  if (n < 0) throw PreconditionError("radial growth needs n >= 0");
  if (n == 0) return 1.0;
  return radial_growth_sequence(rm, n, grid).back().gamma_g;
}

}  // namespace growthlab
