#include "mvis/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mvis {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

struct Canvas {
  std::ostringstream os;
  int width, height;

  Canvas(int w, int h) : width(w), height(h) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
       << "\" viewBox=\"0 0 " << w << " " << h << "\">\n"
       << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
  }
  void line(double x1, double y1, double x2, double y2, const std::string& color,
            double sw = 1.0) {
    os << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1) << "\" x2=\"" << fmt(x2)
       << "\" y2=\"" << fmt(y2) << "\" stroke=\"" << color << "\" stroke-width=\"" << fmt(sw)
       << "\"/>\n";
  }
  void rect(double x, double y, double w, double h, const std::string& fill) {
    os << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(w)
       << "\" height=\"" << fmt(h) << "\" fill=\"" << fill << "\"/>\n";
  }
  void circle(double x, double y, double r, const std::string& fill) {
    os << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(y) << "\" r=\"" << fmt(r)
       << "\" fill=\"" << fill << "\"/>\n";
  }
  void text(double x, double y, const std::string& s, int size = 12,
            const std::string& anchor = "start", const std::string& color = "black") {
    os << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" font-size=\"" << size
       << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor << "\" fill=\"" << color
       << "\">" << s << "</text>\n";
  }
  std::string finish() {
    os << "</svg>\n";
    return os.str();
  }
};

// diverging map: t in [-1,1], blue at -1, white at 0, red at +1
std::string diverging_color(double t) {
  t = std::clamp(t, -1.0, 1.0);
  int r, g, b;
  if (t >= 0) {                        // white -> red (215,48,39)
    r = int(255 + t * (215 - 255));
    g = int(255 + t * (48 - 255));
    b = int(255 + t * (39 - 255));
  } else {
    const double s = -t;               // white -> blue (69,117,180)
    r = int(255 + s * (69 - 255));
    g = int(255 + s * (117 - 255));
    b = int(255 + s * (180 - 255));
  }
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

constexpr const char* kPos = "#d62728";
constexpr const char* kNeg = "#1f77b4";

}  // namespace

std::string plot_stem3(const DiscreteKernel& kernel, const std::string& title,
                       double negative_scale) {
  if (kernel.m != 2) throw ConfigError("plot_stem3 draws 2-operator kernels");
  const int W = 640, H = 480;
  Canvas c(W, H);

  const auto& ax = kernel.axes[0];
  const auto& bx = kernel.axes[1];
  const double amin = ax.front(), amax = ax.back();
  const double bmin = bx.front(), bmax = bx.back();
  double hmax = 1e-300;
  for (double v : kernel.values)
    hmax = std::max(hmax, std::abs(v) * (v < 0 ? negative_scale : 1.0));

  // oblique projection: A to the right, B into the upper-right, height up
  const double ox = 90, oy = 380;
  const double ux = 380, uy = 30;    // A direction
  const double vx = 130, vy = -120;  // B direction
  const double hscale = 210;

  auto proj = [&](double a, double b, double h) {
    const double ta = (amax > amin) ? (a - amin) / (amax - amin) : 0.5;
    const double tb = (bmax > bmin) ? (b - bmin) / (bmax - bmin) : 0.5;
    const double x = ox + ta * ux + tb * vx;
    const double y = oy + ta * uy + tb * vy - h / hmax * hscale;
    return std::pair<double, double>{x, y};
  };

  // axes
  auto [x0, y0] = proj(amin, bmin, 0);
  auto [xa, ya] = proj(amax, bmin, 0);
  auto [xb, yb] = proj(amin, bmax, 0);
  c.line(x0, y0, xa, ya, "#888888");
  c.line(x0, y0, xb, yb, "#888888");
  c.line(x0, y0, x0, y0 - hscale, "#888888");
  c.text(xa + 6, ya + 14, kernel.labels[0], 13);
  c.text(xb - 8, yb - 8, kernel.labels[1], 13, "end");
  c.text((x0 + xa) / 2, ya + 30, fmt_tick(amin) + " .. " + fmt_tick(amax), 11, "middle",
         "#555555");
  c.text(xb - 8, yb + 8, fmt_tick(bmin) + " .. " + fmt_tick(bmax), 11, "end", "#555555");

  // stems back to front (large B first, then large A)
  struct Stem {
    double a, b, v;
  };
  std::vector<Stem> stems;
  const std::size_t gb = bx.size();
  for (std::size_t i = 0; i < ax.size(); ++i)
    for (std::size_t j = 0; j < gb; ++j) {
      const double v = kernel.values[i * gb + j];
      if (std::abs(v) > 1e-14) stems.push_back({ax[i], bx[j], v});
    }
  std::stable_sort(stems.begin(), stems.end(), [](const Stem& s, const Stem& t) {
    if (s.b != t.b) return s.b > t.b;
    return s.a > t.a;
  });
  for (const auto& s : stems) {
    const double h = s.v * (s.v < 0 ? negative_scale : 1.0);
    auto [px, py] = proj(s.a, s.b, 0);
    auto [qx, qy] = proj(s.a, s.b, std::abs(h));
    c.line(px, py, qx, qy, s.v >= 0 ? kPos : kNeg, 2.0);
    c.circle(qx, qy, 1.6, s.v >= 0 ? kPos : kNeg);
  }

  c.text(W / 2, 24, title, 14, "middle");
  c.text(16, H - 36, "red: positive weight", 11, "start", kPos);
  if (negative_scale != 1.0)
    c.text(16, H - 20, "blue: negative weight, scaled x" + fmt_tick(negative_scale), 11,
           "start", kNeg);
  else
    c.text(16, H - 20, "blue: negative weight", 11, "start", kNeg);
  return c.finish();
}

std::string plot_heatmap(const XiField& field, const std::string& title) {
  const int W = 640, H = 560;
  const double px0 = 80, py0 = 60, pw = 460, ph = 400;
  Canvas c(W, H);

  double vmax = 1e-300;
  for (double v : field.values) vmax = std::max(vmax, std::abs(v));

  const int na = field.ga.n, nb = field.gb.n;
  const double cw = pw / na, chh = ph / nb;
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < nb; ++j) {
      const double v = field.at(i, j);
      if (v == 0.0) continue;  // white background already
      c.rect(px0 + i * cw, py0 + ph - (j + 1) * chh, cw + 0.5, chh + 0.5,
             diverging_color(v / vmax));
    }
  // frame and ticks
  c.line(px0, py0, px0, py0 + ph, "black");
  c.line(px0, py0 + ph, px0 + pw, py0 + ph, "black");
  c.line(px0 + pw, py0, px0 + pw, py0 + ph, "black");
  c.line(px0, py0, px0 + pw, py0, "black");
  for (int t = 0; t <= 4; ++t) {
    const double fa = field.ga.min + t / 4.0 * (field.ga.max() - field.ga.min);
    const double fb = field.gb.min + t / 4.0 * (field.gb.max() - field.gb.min);
    const double x = px0 + t / 4.0 * pw;
    const double y = py0 + ph - t / 4.0 * ph;
    c.line(x, py0 + ph, x, py0 + ph + 5, "black");
    c.text(x, py0 + ph + 18, fmt_tick(fa), 10, "middle");
    c.line(px0 - 5, y, px0, y, "black");
    c.text(px0 - 8, y + 4, fmt_tick(fb), 10, "end");
  }
  c.text(px0 + pw / 2, py0 + ph + 36, field.labels[0], 13, "middle");
  c.text(24, py0 + ph / 2, field.labels[1], 13, "middle");
  c.text(W / 2, 28, title, 14, "middle");
  c.text(px0, H - 40,
         "W=" + fmt_tick(field.W) + "  min=" + fmt_tick(field.min_value) +
             "  integral=" + fmt_tick(field.integral),
         11);
  // colorbar
  const double bx = px0 + pw + 24, bw = 18, bh = ph;
  const int steps = 64;
  for (int s = 0; s < steps; ++s) {
    const double t = 1.0 - 2.0 * s / (steps - 1);
    c.rect(bx, py0 + s * bh / steps, bw, bh / steps + 0.5, diverging_color(t));
  }
  c.text(bx + bw + 4, py0 + 10, fmt_tick(vmax), 10);
  c.text(bx + bw + 4, py0 + bh / 2 + 4, "0", 10);
  c.text(bx + bw + 4, py0 + bh, fmt_tick(-vmax), 10);
  return c.finish();
}

std::string plot_curve(const std::vector<CurveSeries>& series, const std::string& title,
                       const std::string& xlabel, const std::string& ylabel) {
  const int W = 640, H = 440;
  const double px0 = 90, py0 = 50, pw = 500, ph = 320;
  Canvas c(W, H);

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymax = ymin + (std::abs(ymin) > 0 ? std::abs(ymin) : 1.0) * 1e-3;
  const double ypad = 0.06 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto X = [&](double x) { return px0 + (x - xmin) / (xmax - xmin) * pw; };
  auto Y = [&](double y) { return py0 + ph - (y - ymin) / (ymax - ymin) * ph; };

  c.line(px0, py0, px0, py0 + ph, "black");
  c.line(px0, py0 + ph, px0 + pw, py0 + ph, "black");
  if (ymin < 0 && ymax > 0) c.line(px0, Y(0), px0 + pw, Y(0), "#cccccc");
  for (int t = 0; t <= 4; ++t) {
    const double xv = xmin + t / 4.0 * (xmax - xmin);
    const double yv = ymin + t / 4.0 * (ymax - ymin);
    c.line(X(xv), py0 + ph, X(xv), py0 + ph + 5, "black");
    c.text(X(xv), py0 + ph + 18, fmt_tick(xv), 10, "middle");
    c.line(px0 - 5, Y(yv), px0, Y(yv), "black");
    c.text(px0 - 8, Y(yv) + 4, fmt_tick(yv), 10, "end");
  }
  const char* palette[6] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& ser = series[s];
    const std::string color = palette[s % 6];
    for (std::size_t i = 0; i + 1 < ser.x.size(); ++i)
      c.line(X(ser.x[i]), Y(ser.y[i]), X(ser.x[i + 1]), Y(ser.y[i + 1]), color, 1.5);
    for (std::size_t i = 0; i < ser.x.size(); ++i)
      c.circle(X(ser.x[i]), Y(ser.y[i]), 3.0, color);
    c.text(px0 + pw - 150, py0 + 18 + 16 * double(s), ser.name, 11, "start", color);
  }
  c.text(W / 2, 26, title, 14, "middle");
  c.text(px0 + pw / 2, H - 8, xlabel, 12, "middle");
  c.text(18, py0 - 14, ylabel, 12);
  return c.finish();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  f << content;
  if (!f) throw NumericalError("short write to '" + path + "'");
}

}  // namespace mvis
