#include "growthlab/interval_diffeo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "growthlab/errors.hpp"
#include "growthlab/format.hpp"

namespace growthlab {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double int_power(double b, int e) {
  double r = 1.0;
  for (; e > 0; e >>= 1, b *= b) {
    if (e & 1) r *= b;
  }
  return r;
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

std::string describe(UnitPoint p) {
  std::ostringstream os;
  os << "[x=" << full_precision(p.x) << ", 1-x=" << full_precision(p.xc)
     << "]";
  return os.str();
}

}  // namespace

UnitPoint IntervalDiffeo::apply_inverse(UnitPoint y) const {
  if (y.x <= 0.0) return UnitPoint::left_end();
  if (y.xc <= 0.0) return UnitPoint::right_end();
  const bool use_right = y.right_half();
  const double target = use_right ? y.xc : y.x;
  auto residual = [&](UnitPoint p) {
    const UnitPoint fp = apply(p);
    return use_right ? y.xc - fp.xc : fp.x - y.x;
  };

  UnitPoint lo = UnitPoint::left_end();
  UnitPoint hi = UnitPoint::right_end();
  UnitPoint g = y;
  for (int iter = 0; iter < 600; ++iter) {
    const double r = residual(g);
    if (r == 0.0 || std::abs(r) <= 2.0 * kEps * target) return g;
    if (r < 0.0) {
      lo = g;
    } else {
      hi = g;
    }
    const double width = UnitPoint::displacement(lo, hi);
    if (width <= 4.0 * kEps * std::max(g.margin(), 1e-300)) return g;

    const double slope = std::exp(log_deriv(g));
    UnitPoint cand = g.shifted(-r / slope);
    if (!std::isfinite(cand.x) || !std::isfinite(cand.xc) || !(lo < cand) ||
        !(cand < hi)) {
      cand = UnitPoint::midpoint(lo, hi);
    }
    if (cand == g) return g;
    g = cand;
  }
  throw ConvergenceError("inverse of " + name() + " at " + describe(y) +
                         " did not converge; last bracket " + describe(lo) +
                         " .. " + describe(hi));
}

std::vector<UnitPoint> IntervalDiffeo::approach_sequence(bool right_end) const {
  std::vector<UnitPoint> seq;
  for (int j = 1; j <= 10; ++j) {
    const double d = std::ldexp(1.0, -4 * j);
    seq.push_back(right_end ? UnitPoint::from_right(d) : UnitPoint::at(d));
  }
  return seq;
}

double IntervalDiffeo::deriv(double x) const {
  return std::exp(log_deriv(UnitPoint::at(x)));
}

// --- identity --------------------------------------------------------------

std::optional<double> IdentityMap::derivative(int order, UnitPoint) const {
  if (order < 1 || order > max_order()) return std::nullopt;
  return order == 1 ? 1.0 : 0.0;
}

// --- Mobius ----------------------------------------------------------------

MobiusMap::MobiusMap(double lambda) : lambda_(lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw PreconditionError("mobius: lambda must be positive and finite");
  }
}

std::string MobiusMap::name() const {
  return "mobius:lambda=" + shortest_repr(lambda_);
}

UnitPoint MobiusMap::apply(UnitPoint p) const {
  const double den = 1.0 + (lambda_ - 1.0) * p.x;
  return {lambda_ * p.x / den, p.xc / den};
}

UnitPoint MobiusMap::apply_inverse(UnitPoint p) const {
  return MobiusMap(1.0 / lambda_).apply(p);
}

double MobiusMap::log_deriv(UnitPoint p) const {
  return std::log(lambda_) - 2.0 * std::log1p((lambda_ - 1.0) * p.x);
}

std::optional<double> MobiusMap::derivative(int order, UnitPoint p) const {
  if (order < 1 || order > max_order()) return std::nullopt;
  const double b = lambda_ - 1.0;
  const double den = 1.0 + b * p.x;
  const double sign = (order % 2 == 1) ? 1.0 : -1.0;
  return sign * lambda_ * factorial(order) * std::pow(b, order - 1) /
         std::pow(den, order + 1);
}

// --- polynomial perturbation -----------------------------------------------

PolyPerturbationMap::PolyPerturbationMap(int p, double c) : p_(p), c_(c) {
  if (p < 1) throw PreconditionError("poly: p must be >= 1");
  if (!std::isfinite(c)) throw PreconditionError("poly: c must be finite");
  const int m = p + 1;
  poly_.assign(2 * m + 1, 0.0);
  double binom = 1.0;
  for (int j = 0; j <= m; ++j) {
    poly_[m + j] = (j % 2 == 0 ? 1.0 : -1.0) * binom;
    binom = binom * (m - j) / (j + 1);
  }
  // f'(x) = 1 + c (p+1) x^p (1-x)^p (1-2x) must stay positive.
  double worst = std::numeric_limits<double>::infinity();
  constexpr int kSamples = 20000;
  for (int i = 0; i <= kSamples; ++i) {
    const double x = static_cast<double>(i) / kSamples;
    const double w =
        (p + 1) * std::pow(x, p) * std::pow(1.0 - x, p) * (1.0 - 2.0 * x);
    worst = std::min(worst, 1.0 + c * w);
  }
  if (!(worst > 0.0)) {
    throw PreconditionError("poly: f' is not positive for p=" +
                            std::to_string(p) + ", c=" + shortest_repr(c));
  }
}

std::string PolyPerturbationMap::name() const {
  return "poly:p=" + std::to_string(p_) + ",c=" + shortest_repr(c_);
}

double PolyPerturbationMap::displacement(UnitPoint p) const {
  return c_ * int_power(p.x * p.xc, p_ + 1);
}

UnitPoint PolyPerturbationMap::apply_inverse(UnitPoint y) const {
  if (y.x <= 0.0) return UnitPoint::left_end();
  if (y.xc <= 0.0) return UnitPoint::right_end();
  // The displacement is small and smooth, so Newton from y - v(y) settles
  // in a few steps; anything unusual goes to the bracketed solver.
  UnitPoint x = y.shifted(-displacement(y));
  const double tol = 2.0 * kEps * y.margin();
  for (int iter = 0; iter < 8; ++iter) {
    if (!(x.x >= 0.0 && x.xc >= 0.0)) break;
    const double r = UnitPoint::displacement(y, apply(x));
    if (std::abs(r) <= tol) return x;
    const UnitPoint next = x.shifted(-r / std::exp(log_deriv(x)));
    if (next == x) return x;
    x = next;
  }
  return IntervalDiffeo::apply_inverse(y);
}

UnitPoint PolyPerturbationMap::apply(UnitPoint p) const {
  return p.shifted(displacement(p));
}

double PolyPerturbationMap::log_deriv(UnitPoint p) const {
  return std::log1p(c_ * (p_ + 1) * int_power(p.x * p.xc, p_) * (p.xc - p.x));
}

std::optional<double> PolyPerturbationMap::derivative(int order,
                                                      UnitPoint p) const {
  if (order < 1 || order > max_order()) return std::nullopt;
  // Horner on the order-th derivative of poly_.
  double acc = 0.0;
  const int deg = static_cast<int>(poly_.size()) - 1;
  for (int j = deg; j >= order; --j) {
    double falling = 1.0;
    for (int i = 0; i < order; ++i) falling *= (j - i);
    acc = acc * p.x + poly_[j] * falling;
  }
  return (order == 1 ? 1.0 : 0.0) + c_ * acc;
}

// --- inverse ---------------------------------------------------------------

InverseMap::InverseMap(DiffeoPtr inner) : inner_(std::move(inner)) {}

std::string InverseMap::name() const { return "inverse(" + inner_->name() + ")"; }

UnitPoint InverseMap::apply(UnitPoint p) const {
  return inner_->apply_inverse(p);
}

UnitPoint InverseMap::apply_inverse(UnitPoint p) const {
  return inner_->apply(p);
}

double InverseMap::log_deriv(UnitPoint p) const {
  return -inner_->log_deriv(inner_->apply_inverse(p));
}

std::optional<double> InverseMap::derivative(int order, UnitPoint p) const {
  if (order < 1 || order > max_order()) return std::nullopt;
  const UnitPoint y = inner_->apply_inverse(p);
  const double d1 = std::exp(inner_->log_deriv(y));
  if (order == 1) return 1.0 / d1;
  const auto d2 = inner_->derivative(2, y);
  if (!d2) return std::nullopt;
  return -*d2 / (d1 * d1 * d1);
}

int InverseMap::max_order() const { return std::min(2, inner_->max_order()); }

// --- iterate ---------------------------------------------------------------

IterateMap::IterateMap(DiffeoPtr inner, long n)
    : inner_(std::move(inner)), n_(n) {}

std::string IterateMap::name() const {
  return "iterate(" + inner_->name() + "," + std::to_string(n_) + ")";
}

UnitPoint IterateMap::apply(UnitPoint p) const {
  for (long j = 0; j < std::abs(n_); ++j) {
    p = n_ > 0 ? inner_->apply(p) : inner_->apply_inverse(p);
  }
  return p;
}

UnitPoint IterateMap::apply_inverse(UnitPoint p) const {
  for (long j = 0; j < std::abs(n_); ++j) {
    p = n_ > 0 ? inner_->apply_inverse(p) : inner_->apply(p);
  }
  return p;
}

double IterateMap::log_deriv(UnitPoint p) const {
  double sum = 0.0;
  if (n_ >= 0) {
    for (long j = 0; j < n_; ++j) {
      sum += inner_->log_deriv(p);
      p = inner_->apply(p);
    }
  } else {
    for (long j = 0; j < -n_; ++j) {
      p = inner_->apply_inverse(p);
      sum -= inner_->log_deriv(p);
    }
  }
  return sum;
}

std::optional<double> IterateMap::derivative(int order, UnitPoint p) const {
  if (order != 1) return std::nullopt;
  return std::exp(log_deriv(p));
}

// --- supported copy --------------------------------------------------------

SupportedMap::SupportedMap(DiffeoPtr inner, double lo, double hi)
    : inner_(std::move(inner)), lo_(lo), hi_(hi), width_(hi - lo) {
  if (!(lo >= 0.0 && lo < hi && hi <= 1.0)) {
    throw PreconditionError("supported map: need 0 <= lo < hi <= 1");
  }
}

std::string SupportedMap::name() const {
  return "supported(" + inner_->name() + "," + shortest_repr(lo_) + "," +
         shortest_repr(hi_) + ")";
}

UnitPoint SupportedMap::to_inner(UnitPoint p) const {
  return {(p.x - lo_) / width_, (hi_ - p.x) / width_};
}

UnitPoint SupportedMap::from_inner(UnitPoint q) const {
  return {lo_ + width_ * q.x, (1.0 - hi_) + width_ * q.xc};
}

UnitPoint SupportedMap::apply(UnitPoint p) const {
  return inside(p) ? from_inner(inner_->apply(to_inner(p))) : p;
}

UnitPoint SupportedMap::apply_inverse(UnitPoint p) const {
  return inside(p) ? from_inner(inner_->apply_inverse(to_inner(p))) : p;
}

double SupportedMap::log_deriv(UnitPoint p) const {
  return inside(p) ? inner_->log_deriv(to_inner(p)) : 0.0;
}

std::optional<double> SupportedMap::derivative(int order, UnitPoint p) const {
  if (order < 1 || order > max_order()) return std::nullopt;
  if (!inside(p)) return order == 1 ? 1.0 : 0.0;
  const auto d = inner_->derivative(order, to_inner(p));
  if (!d) return std::nullopt;
  return *d * std::pow(width_, 1 - order);
}

int SupportedMap::max_order() const { return inner_->max_order(); }

}  // namespace growthlab
