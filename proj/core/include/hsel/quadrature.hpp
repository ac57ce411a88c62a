#pragma once

#include <functional>
#include <vector>

namespace hsel {

struct QuadResult {
  double value = 0;
  double error = 0;       // estimated absolute error
  int intervals = 0;      // panels used
  bool converged = false;
};

/// Adaptive Gauss-Kronrod (7,15) integration of f over the finite interval
/// [a, b] to absolute tolerance abs_tol. Bisects the panel with the largest
/// error estimate until the global estimate meets abs_tol or max_intervals is
/// reached.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double abs_tol, int max_intervals = 2000);

/// Integration over [a, b] pre-split at the given interior points. Wide tail
/// ranges must be segmented this way: a lone panel whose nodes all land where
/// the integrand has decayed to zero reports zero error and is never refined.
QuadResult integrate_segmented(const std::function<double(double)>& f, double a, double b,
                               const std::vector<double>& interior, double abs_tol,
                               int max_intervals = 4000);

/// Geometric breakpoints for a density-like integrand concentrated around
/// `center` with spread `scale`: center +- {2,8,32,...} * scale up to the range.
std::vector<double> tail_breakpoints(double a, double b, double center, double scale);

}  // namespace hsel
