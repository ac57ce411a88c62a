#pragma once

#include <cmath>
#include <limits>

#include "hsel/errors.hpp"

namespace hsel {

/// One-dimensional truncation interval. Unbounded ends are IEEE infinities,
/// which are first-class values here (never a large finite stand-in).
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  static Interval all() { return {}; }
  static Interval below(double b) { return {-std::numeric_limits<double>::infinity(), b}; }
  static Interval above(double a) { return {a, std::numeric_limits<double>::infinity()}; }

  bool lo_finite() const { return std::isfinite(lo); }
  bool hi_finite() const { return std::isfinite(hi); }
  bool unbounded() const { return !lo_finite() && !hi_finite(); }
  bool empty() const { return !(lo < hi); }

  void validate() const {
    if (std::isnan(lo) || std::isnan(hi)) throw domain_error("interval bound is NaN");
    if (!(lo < hi)) throw domain_error("interval requires lo < hi");
  }
};

/// Axis-aligned truncation rectangle in the plane.
struct Rect2 {
  Interval x1, x2;

  static Rect2 all() { return {}; }
  void validate() const {
    x1.validate();
    x2.validate();
  }
};

}  // namespace hsel
