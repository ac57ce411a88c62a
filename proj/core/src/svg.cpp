#include "hsel/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "hsel/errors.hpp"

namespace hsel {

namespace {

struct Frame {
  double x0, x1, y0, y1;            // data ranges
  double px0, px1, py0, py1;        // pixel box
  double sx(double x) const { return px0 + (x - x0) / (x1 - x0) * (px1 - px0); }
  double sy(double y) const { return py1 - (y - y0) / (y1 - y0) * (py1 - py0); }
};

void polyline(std::FILE* f, const Frame& fr, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
              const char* style) {
  std::fprintf(f, "<polyline fill=\"none\" %s points=\"", style);
  for (long i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
    std::fprintf(f, "%.2f,%.2f ", fr.sx(x[i]), fr.sy(y[i]));
  }
  std::fprintf(f, "\"/>\n");
}

}  // namespace

void write_qq_envelope_svg(const std::string& path, const Envelope& env) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw domain_error("cannot write '" + path + "'");
  const int W = 640, H = 520;
  Frame fr;
  fr.px0 = 60;
  fr.px1 = W - 20;
  fr.py0 = 20;
  fr.py1 = H - 50;

  double ymin = 1e300, ymax = -1e300;
  auto scan = [&](const Eigen::VectorXd& v) {
    for (long i = 0; i < v.size(); ++i)
      if (std::isfinite(v[i])) {
        ymin = std::min(ymin, v[i]);
        ymax = std::max(ymax, v[i]);
      }
  };
  scan(env.low);
  scan(env.high);
  scan(env.observed_sorted);
  if (!(ymin < ymax)) {
    ymin -= 1;
    ymax += 1;
  }
  double pad = 0.05 * (ymax - ymin);
  fr.y0 = ymin - pad;
  fr.y1 = ymax + pad;
  fr.x0 = env.theoretical.minCoeff() - 0.2;
  fr.x1 = env.theoretical.maxCoeff() + 0.2;

  std::fprintf(f,
               "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
               "viewBox=\"0 0 %d %d\">\n",
               W, H, W, H);
  std::fprintf(f, "<rect width=\"%d\" height=\"%d\" fill=\"white\"/>\n", W, H);
  std::fprintf(f,
               "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" "
               "stroke=\"black\"/>\n",
               fr.px0, fr.py0, fr.px1 - fr.px0, fr.py1 - fr.py0);

  // axis ticks
  for (int t = std::ceil(fr.x0); t <= std::floor(fr.x1); ++t) {
    double px = fr.sx(t);
    std::fprintf(f, "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
                 px, fr.py1, px, fr.py1 + 5);
    std::fprintf(f,
                 "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" text-anchor=\"middle\">%d</text>\n",
                 px, fr.py1 + 18, t);
  }
  int yticks = 6;
  for (int k = 0; k <= yticks; ++k) {
    double yv = fr.y0 + k * (fr.y1 - fr.y0) / yticks;
    double py = fr.sy(yv);
    std::fprintf(f, "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
                 fr.px0 - 5, py, fr.px0, py);
    std::fprintf(f,
                 "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" text-anchor=\"end\">%.2f</text>\n",
                 fr.px0 - 8, py + 4, yv);
  }
  std::fprintf(f,
               "<text x=\"%.1f\" y=\"%d\" font-size=\"13\" text-anchor=\"middle\">standard "
               "normal quantile</text>\n",
               0.5 * (fr.px0 + fr.px1), H - 12);
  std::fprintf(f,
               "<text x=\"16\" y=\"%.1f\" font-size=\"13\" text-anchor=\"middle\" "
               "transform=\"rotate(-90 16 %.1f)\">martingale-type residual</text>\n",
               0.5 * (fr.py0 + fr.py1), 0.5 * (fr.py0 + fr.py1));

  polyline(f, fr, env.theoretical, env.low, "stroke=\"#666\" stroke-width=\"1\"");
  polyline(f, fr, env.theoretical, env.high, "stroke=\"#666\" stroke-width=\"1\"");
  polyline(f, fr, env.theoretical, env.median,
           "stroke=\"#999\" stroke-width=\"1\" stroke-dasharray=\"4 3\"");
  for (long i = 0; i < env.theoretical.size(); ++i) {
    if (!std::isfinite(env.observed_sorted[i])) continue;
    std::fprintf(f, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.4\" fill=\"black\"/>\n",
                 fr.sx(env.theoretical[i]), fr.sy(env.observed_sorted[i]));
  }
  std::fprintf(f, "</svg>\n");
  std::fclose(f);
}

}  // namespace hsel
