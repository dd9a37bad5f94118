#pragma once
// Static SVG rendering of a landscape: density contours (marching squares),
// a seeded sample of points coloured by stance, and ranked attractor
// markers. Everything drawn is also listed in a companion CSV.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"
#include "landscape.hpp"

namespace blf {

struct RenderParams {
  double sample_fraction = 0.001;
  int width = 800;
  int height = 800;
  int levels = 8;
  std::uint64_t seed = 1;
};

struct Segment {
  double x0, y0, x1, y1;
};

/// Iso-line segments of the grid at `level` in data coordinates.
inline std::vector<Segment> contour_segments(const DensityGrid& g, double level) {
  std::vector<Segment> out;
  const auto lerp = [&](double a, double b, double va, double vb) {
    const double t = (level - va) / (vb - va);
    return a + t * (b - a);
  };
  for (int i = 0; i + 1 < g.n_grid; ++i) {
    for (int j = 0; j + 1 < g.n_grid; ++j) {
      const double x0 = g.gx[static_cast<std::size_t>(i)], x1 = g.gx[static_cast<std::size_t>(i) + 1];
      const double y0 = g.gy[static_cast<std::size_t>(j)], y1 = g.gy[static_cast<std::size_t>(j) + 1];
      // corners counter-clockwise from (x0, y0)
      const double v[4] = {g.values(i, j), g.values(i + 1, j), g.values(i + 1, j + 1), g.values(i, j + 1)};
      int code = 0;
      for (int k = 0; k < 4; ++k)
        if (v[k] > level) code |= 1 << k;
      if (code == 0 || code == 15) continue;
      // crossing points on the four edges: bottom, right, top, left
      const double e[4][2] = {{lerp(x0, x1, v[0], v[1]), y0},
                              {x1, lerp(y0, y1, v[1], v[2])},
                              {lerp(x0, x1, v[3], v[2]), y1},
                              {x0, lerp(y0, y1, v[0], v[3])}};
      const auto seg = [&](int a, int b) { out.push_back({e[a][0], e[a][1], e[b][0], e[b][1]}); };
      switch (code) {
        case 1: case 14: seg(3, 0); break;
        case 2: case 13: seg(0, 1); break;
        case 3: case 12: seg(3, 1); break;
        case 4: case 11: seg(1, 2); break;
        case 6: case 9: seg(0, 2); break;
        case 7: case 8: seg(3, 2); break;
        case 5: seg(3, 2); seg(0, 1); break;
        case 10: seg(3, 0); seg(1, 2); break;
        default: break;
      }
    }
  }
  return out;
}

inline std::string_view stance_colour(Stance s) {
  switch (s) {
    case Stance::Believer: return "#1f77b4";
    case Stance::Skeptic: return "#d62728";
    default: return "#7f7f7f";
  }
}

/// Deterministic sample of `fraction` of the points (at least one when any
/// exist and fraction > 0), in input order.
inline std::vector<std::size_t> sample_points(std::size_t n, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0 && fraction <= 1)) throw ConfigError("sample fraction must lie in [0, 1]");
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  if (fraction >= 1.0) return idx;
  auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (k == 0 && n > 0 && fraction > 0) k = 1;
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

struct RenderOutput {
  std::string svg;
  std::string csv;
  Warnings warnings;
};

inline RenderOutput render_landscape(const DensityGrid* grid, const std::vector<LandscapePoint>& points,
                                     const std::vector<Attractor>& attractors, const RenderParams& p = {}) {
  RenderOutput out;
  std::ostringstream svg, csv;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << p.width << "\" height=\"" << p.height
      << "\" viewBox=\"0 0 " << p.width << ' ' << p.height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  csv << "kind,id,x,y,value,stance\n";
  if (!grid || grid->n_grid < 2 || points.empty()) {
    out.warnings.add("empty landscape; nothing to draw");
    svg << "<text x=\"" << p.width / 2 << "\" y=\"" << p.height / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" fill=\"#888\">empty landscape</text>\n</svg>\n";
    out.svg = svg.str();
    out.csv = csv.str();
    return out;
  }
  const double pad = 20.0;
  const double sx = (p.width - 2 * pad) / (grid->x_max() - grid->x_min());
  const double sy = (p.height - 2 * pad) / (grid->y_max() - grid->y_min());
  const auto px = [&](double x) { return pad + (x - grid->x_min()) * sx; };
  const auto py = [&](double y) { return p.height - pad - (y - grid->y_min()) * sy; };
  const auto num = [](double v) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(2);
    s << v;
    return s.str();
  };

  const double top = grid->values.maxCoeff();
  svg << "<g fill=\"none\" stroke=\"#444\" stroke-width=\"0.7\">\n";
  for (int l = 1; l <= p.levels && top > 0; ++l) {
    const double level = top * l / (p.levels + 1);
    const auto segs = contour_segments(*grid, level);
    if (segs.empty()) continue;
    svg << "<path d=\"";
    for (const auto& s : segs)
      svg << 'M' << num(px(s.x0)) << ' ' << num(py(s.y0)) << 'L' << num(px(s.x1)) << ' ' << num(py(s.y1));
    svg << "\"/>\n";
    csv << "contour," << l << ",,," << format_double(level) << ",\n";
  }
  svg << "</g>\n<g stroke=\"none\">\n";
  for (auto i : sample_points(points.size(), p.sample_fraction, p.seed)) {
    const auto& pt = points[i];
    svg << "<circle cx=\"" << num(px(pt.x)) << "\" cy=\"" << num(py(pt.y)) << "\" r=\"2\" fill=\""
        << stance_colour(pt.stance) << "\"/>\n";
    csv << "point," << pt.user_id << '@' << pt.t << ',' << format_double(pt.x) << ',' << format_double(pt.y) << ",,"
        << to_string(pt.stance) << '\n';
  }
  svg << "</g>\n<g font-family=\"sans-serif\" font-size=\"12\">\n";
  for (const auto& a : attractors) {
    svg << "<path d=\"M" << num(px(a.x) - 5) << ' ' << num(py(a.y) - 5) << "L" << num(px(a.x) + 5) << ' '
        << num(py(a.y) + 5) << "M" << num(px(a.x) - 5) << ' ' << num(py(a.y) + 5) << "L" << num(px(a.x) + 5) << ' '
        << num(py(a.y) - 5) << "\" stroke=\"black\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << num(px(a.x) + 7) << "\" y=\"" << num(py(a.y) - 7) << "\">" << a.rank << "</text>\n";
    csv << "attractor," << a.id << ',' << format_double(a.x) << ',' << format_double(a.y) << ','
        << format_double(a.magnitude) << ",\n";
  }
  svg << "</g>\n</svg>\n";
  out.svg = svg.str();
  out.csv = csv.str();
  return out;
}

}  // namespace blf
