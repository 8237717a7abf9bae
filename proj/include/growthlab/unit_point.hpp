#pragma once

namespace growthlab {

/// A point of [0;1] carried together with its distance to 1.
///
/// Orbits of the maps studied here accumulate at both endpoints, so the
/// distance to the nearer endpoint must stay accurate to full relative
/// precision. `x` is accurate near 0 and `xc` (= 1 - x) is accurate near 1;
/// every map in the library updates both.
struct UnitPoint {
  double x = 0.0;
  double xc = 1.0;

  static constexpr UnitPoint at(double v) { return {v, 1.0 - v}; }
  static constexpr UnitPoint from_right(double d) { return {1.0 - d, d}; }
  static constexpr UnitPoint left_end() { return {0.0, 1.0}; }
  static constexpr UnitPoint right_end() { return {1.0, 0.0}; }

  constexpr bool right_half() const { return xc < x; }

  /// Distance to the nearer endpoint.
  constexpr double margin() const { return xc < x ? xc : x; }

  /// Signed displacement `to - from`, evaluated in whichever coordinate is
  /// accurate for `from`.
  static constexpr double displacement(const UnitPoint& from,
                                       const UnitPoint& to) {
    return from.right_half() ? from.xc - to.xc : to.x - from.x;
  }

  static constexpr UnitPoint midpoint(const UnitPoint& a, const UnitPoint& b) {
    return {0.5 * (a.x + b.x), 0.5 * (a.xc + b.xc)};
  }

  /// Move by `d` (positive is towards 1).
  constexpr UnitPoint shifted(double d) const { return {x + d, xc - d}; }
};

constexpr bool operator<(const UnitPoint& a, const UnitPoint& b) {
  if (a.right_half() && b.right_half()) return a.xc > b.xc;
  return a.x < b.x;
}

constexpr bool operator==(const UnitPoint& a, const UnitPoint& b) {
  return a.x == b.x && a.xc == b.xc;
}

}  // namespace growthlab
