#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "growthlab/unit_point.hpp"

namespace growthlab {

enum class DiffeoKind { ClosedForm, FlowGenerated, Wrapper };

/// An orientation-preserving diffeomorphism of [0;1] fixing both endpoints,
/// exposed through evaluation and derivative oracles.
///
/// Implementations are immutable after construction and safe to share
/// between threads.
class IntervalDiffeo {
 public:
  virtual ~IntervalDiffeo() = default;

  virtual DiffeoKind kind() const = 0;

  /// Family name with parameters, in the map mini-language where possible.
  virtual std::string name() const = 0;

  virtual UnitPoint apply(UnitPoint p) const = 0;

  /// Default: safeguarded Newton on the strictly increasing apply().
  /// Throws ConvergenceError when the bracket cannot be closed.
  virtual UnitPoint apply_inverse(UnitPoint p) const;

  /// log f'(p). Must be finite; a non-positive derivative is reported as
  /// NaN or -inf and rejected by the orbit routines.
  virtual double log_deriv(UnitPoint p) const = 0;

  /// f^{(order)}(p) for 1 <= order <= max_order(); nullopt beyond.
  virtual std::optional<double> derivative(int order, UnitPoint p) const = 0;

  virtual int max_order() const = 0;

  /// Points approaching an endpoint, used to read off one-sided limits of
  /// the derivative oracles. Default: geometric 2^{-4j}, j = 1..10.
  virtual std::vector<UnitPoint> approach_sequence(bool right_end) const;

  double operator()(double x) const { return apply(UnitPoint::at(x)).x; }
  double deriv(double x) const;
};

using DiffeoPtr = std::shared_ptr<const IntervalDiffeo>;

class IdentityMap final : public IntervalDiffeo {
 public:
  DiffeoKind kind() const override { return DiffeoKind::ClosedForm; }
  std::string name() const override { return "identity"; }
  UnitPoint apply(UnitPoint p) const override { return p; }
  UnitPoint apply_inverse(UnitPoint p) const override { return p; }
  double log_deriv(UnitPoint) const override { return 0.0; }
  std::optional<double> derivative(int order, UnitPoint p) const override;
  int max_order() const override { return 64; }
};

/// f(x) = lambda x / (1 + (lambda - 1) x). Iterates stay in the family:
/// f^n is the map with parameter lambda^n.
class MobiusMap final : public IntervalDiffeo {
 public:
  explicit MobiusMap(double lambda);

  double lambda() const { return lambda_; }

  DiffeoKind kind() const override { return DiffeoKind::ClosedForm; }
  std::string name() const override;
  UnitPoint apply(UnitPoint p) const override;
  UnitPoint apply_inverse(UnitPoint p) const override;
  double log_deriv(UnitPoint p) const override;
  std::optional<double> derivative(int order, UnitPoint p) const override;
  int max_order() const override { return 16; }

 private:
  double lambda_;
};

/// f(x) = x + c x^{p+1} (1-x)^{p+1}. Both endpoints are fixed points of
/// order p. Construction rejects c for which f' fails to be positive.
class PolyPerturbationMap final : public IntervalDiffeo {
 public:
  PolyPerturbationMap(int p, double c);

  int order() const { return p_; }
  double coefficient() const { return c_; }

  DiffeoKind kind() const override { return DiffeoKind::ClosedForm; }
  std::string name() const override;
  UnitPoint apply(UnitPoint p) const override;
  UnitPoint apply_inverse(UnitPoint p) const override;
  double log_deriv(UnitPoint p) const override;
  std::optional<double> derivative(int order, UnitPoint p) const override;
  int max_order() const override { return 2 * p_ + 3; }

 private:
  double displacement(UnitPoint p) const;

  int p_;
  double c_;
  // Coefficients of x^{p+1}(1-x)^{p+1}, lowest degree first.
  std::vector<double> poly_;
};

/// f^{-1} for a wrapped f.
class InverseMap final : public IntervalDiffeo {
 public:
  explicit InverseMap(DiffeoPtr inner);

  DiffeoKind kind() const override { return DiffeoKind::Wrapper; }
  std::string name() const override;
  UnitPoint apply(UnitPoint p) const override;
  UnitPoint apply_inverse(UnitPoint p) const override;
  double log_deriv(UnitPoint p) const override;
  std::optional<double> derivative(int order, UnitPoint p) const override;
  int max_order() const override;

 private:
  DiffeoPtr inner_;
};

/// f^n for a wrapped f and signed n.
class IterateMap final : public IntervalDiffeo {
 public:
  IterateMap(DiffeoPtr inner, long n);

  DiffeoKind kind() const override { return DiffeoKind::Wrapper; }
  std::string name() const override;
  UnitPoint apply(UnitPoint p) const override;
  UnitPoint apply_inverse(UnitPoint p) const override;
  double log_deriv(UnitPoint p) const override;
  std::optional<double> derivative(int order, UnitPoint p) const override;
  int max_order() const override { return 1; }

 private:
  DiffeoPtr inner_;
  long n_;
};

/// A copy of f conjugated by the affine map [0;1] -> [lo;hi], extended by
/// the identity outside [lo;hi]. Derivatives are preserved by the rescaling.
class SupportedMap final : public IntervalDiffeo {
 public:
  SupportedMap(DiffeoPtr inner, double lo, double hi);

  double lo() const { return lo_; }
  double hi() const { return hi_; }

  DiffeoKind kind() const override { return DiffeoKind::Wrapper; }
  std::string name() const override;
  UnitPoint apply(UnitPoint p) const override;
  UnitPoint apply_inverse(UnitPoint p) const override;
  double log_deriv(UnitPoint p) const override;
  std::optional<double> derivative(int order, UnitPoint p) const override;
  int max_order() const override;

 private:
  bool inside(UnitPoint p) const { return p.x > lo_ && p.x < hi_; }
  UnitPoint to_inner(UnitPoint p) const;
  UnitPoint from_inner(UnitPoint q) const;

  DiffeoPtr inner_;
  double lo_, hi_, width_;
};

}  // namespace growthlab
