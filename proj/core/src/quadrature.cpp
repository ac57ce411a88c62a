#include "hsel/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

namespace hsel {
namespace {

// QUADPACK dqk15 nodes/weights on [-1, 1].
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, err;
  bool operator<(const Panel& o) const { return err < o.err; }
};

Panel eval_panel(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double fc = f(c);
  double resg = kWg[3] * fc;
  double resk = kWgk[7] * fc;
  for (int j = 0; j < 7; ++j) {
    double x = h * kXgk[j];
    double fsum = f(c - x) + f(c + x);
    resk += kWgk[j] * fsum;
    if (j % 2 == 1) resg += kWg[j / 2] * fsum;
  }
  double value = resk * h;
  // |K15 - G7| is a conservative error estimate; good enough to drive bisection.
  double err = std::abs((resk - resg) * h);
  return {a, b, value, err};
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double abs_tol, int max_intervals) {
  QuadResult out;
  if (!(a < b)) return out;
  std::priority_queue<Panel> heap;
  heap.push(eval_panel(f, a, b));
  double total = heap.top().value, toterr = heap.top().err;
  int n = 1;
  while (toterr > abs_tol && n < max_intervals) {
    Panel worst = heap.top();
    heap.pop();
    double mid = 0.5 * (worst.a + worst.b);
    if (!(worst.a < mid && mid < worst.b)) {  // interval exhausted at double resolution
      heap.push(worst);
      break;
    }
    Panel le = eval_panel(f, worst.a, mid);
    Panel ri = eval_panel(f, mid, worst.b);
    total += le.value + ri.value - worst.value;
    toterr += le.err + ri.err - worst.err;
    heap.push(le);
    heap.push(ri);
    ++n;
  }
  out.value = total;
  out.error = toterr;
  out.intervals = n;
  out.converged = toterr <= abs_tol;
  return out;
}

}  // namespace hsel
namespace hsel {

QuadResult integrate_segmented(const std::function<double(double)>& f, double a, double b,
                               const std::vector<double>& interior, double abs_tol,
                               int max_intervals) {
  std::vector<double> pts{a};
  for (double t : interior)
    if (t > pts.back() && t < b) pts.push_back(t);
  pts.push_back(b);
  const int nseg = static_cast<int>(pts.size()) - 1;
  QuadResult total;
  total.converged = true;
  for (int k = 0; k < nseg; ++k) {
    QuadResult part = integrate(f, pts[k], pts[k + 1], abs_tol / nseg, max_intervals / nseg + 16);
    total.value += part.value;
    total.error += part.error;
    total.intervals += part.intervals;
    total.converged = total.converged && part.converged;
  }
  return total;
}

std::vector<double> tail_breakpoints(double a, double b, double center, double scale) {
  std::vector<double> pts;
  for (double m = 2; m <= 1e300; m *= 4) {
    double lo = center - m * scale, hi = center + m * scale;
    bool useful = false;
    if (lo > a) {
      pts.push_back(lo);
      useful = true;
    }
    if (hi < b) {
      pts.push_back(hi);
      useful = true;
    }
    if (!useful) break;
  }
  std::sort(pts.begin(), pts.end());
  return pts;
}

}  // namespace hsel
