/*
 * Copyright 2026 The edslab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "edslab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "edslab/errors.hpp"

namespace edslab {

namespace {

constexpr double kWidth = 720.0;
constexpr double kPanelHeight = 320.0;
constexpr double kLeft = 70.0, kRight = 20.0, kTop = 36.0, kBottom = 44.0;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double y0;  // top of the panel
  int first, last;
  double lo, hi;  // log10 range

  double px(double stage) const {
    return kLeft + (stage - first) / std::max(1, last - first) * (kWidth - kLeft - kRight);
  }
  double py(double value) const {
    const double t = (std::log10(value) - lo) / (hi - lo);
    return y0 + kTop + (1.0 - t) * (kPanelHeight - kTop - kBottom);
  }
};

void line(std::ostream& os, double x1, double y1, double x2, double y2, const char* stroke, double width,
          const char* extra = "") {
  os << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1) << "\" x2=\"" << fmt(x2) << "\" y2=\"" << fmt(y2)
     << "\" stroke=\"" << stroke << "\" stroke-width=\"" << fmt(width) << "\"" << extra << "/>\n";
}

void text(std::ostream& os, double x, double y, const std::string& s, const char* anchor, int size = 12) {
  os << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" font-family=\"sans-serif\" font-size=\"" << size
     << "\" text-anchor=\"" << anchor << "\">" << escape(s) << "</text>\n";
}

void draw_panel(std::ostream& os, const DecayPanel& panel, double y0) {
  const auto& profiles = panel.profiles;
  if (profiles.empty()) throw ConfigurationError("no profiles to plot");
  const double floor_abs = panel.fit ? panel.fit->floor_abs : 1e-12;
  const double floor_rel = panel.fit ? panel.fit->floor_rel : 1e-9;

  Frame fr{y0, profiles.front().first_stage(), profiles.front().last_stage(), 0.0, 0.0};
  for (const auto& p : profiles) fr.last = std::max(fr.last, p.last_stage());

  // Largest perturbation per stage j, for the envelope overlay.
  std::map<int, double> envelope_mag;
  for (const auto& p : profiles) envelope_mag[p.j] = std::max(envelope_mag[p.j], p.magnitude);
  auto envelope = [&](int i, int j) {
    return panel.fit->upsilon * std::pow(panel.fit->rho, std::abs(i - j)) * envelope_mag[j];
  };

  double vmin = INFINITY, vmax = -INFINITY;
  auto include = [&](double v) {
    if (v > 0.0 && std::isfinite(v)) {
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
    }
  };
  for (const auto& p : profiles) {
    const double floor = profile_floor(p, floor_abs, floor_rel);
    for (int i = p.first_stage(); i <= p.last_stage(); ++i)
      if (p.at(i) > floor) include(p.at(i));
  }
  if (!(vmax > 0.0)) throw ConfigurationError("every profile entry is below the plotting floor");
  if (panel.fit) {
    for (const auto& [j, mag] : envelope_mag)
      for (int i = fr.first; i <= fr.last; ++i)
        if (envelope(i, j) >= vmin) include(envelope(i, j));
  }
  fr.lo = std::floor(std::log10(vmin));
  fr.hi = std::ceil(std::log10(vmax));
  if (fr.hi <= fr.lo) fr.hi = fr.lo + 1.0;

  const double left = kLeft, right = kWidth - kRight;
  const double top = y0 + kTop, bottom = y0 + kPanelHeight - kBottom;
  text(os, kWidth / 2.0, y0 + 20.0, panel.title, "middle", 14);

  // Axes and ticks.
  line(os, left, bottom, right, bottom, "#000000", 1.0);
  line(os, left, top, left, bottom, "#000000", 1.0);
  const int decades = static_cast<int>(fr.hi - fr.lo);
  const int dstep = std::max(1, decades / 8);
  for (int e = static_cast<int>(fr.lo); e <= static_cast<int>(fr.hi); e += dstep) {
    const double y = fr.py(std::pow(10.0, e));
    line(os, left - 4.0, y, left, y, "#000000", 1.0);
    line(os, left, y, right, y, "#e0e0e0", 0.5);
    text(os, left - 7.0, y + 4.0, "1e" + std::to_string(e), "end", 10);
  }
  const int span = fr.last - fr.first;
  const int xstep = span > 40 ? 10 : span > 10 ? 5 : 1;
  for (int i = 0; i <= fr.last; i += xstep) {
    const double x = fr.px(i);
    line(os, x, bottom, x, bottom + 4.0, "#000000", 1.0);
    text(os, x, bottom + 16.0, std::to_string(i), "middle", 10);
  }
  text(os, (left + right) / 2.0, bottom + 34.0, "stage i", "middle", 12);
  text(os, 14.0, (top + bottom) / 2.0, "s_i", "middle", 12);

  // Perturbed stages.
  for (const auto& [j, mag] : envelope_mag) {
    line(os, fr.px(j), top, fr.px(j), bottom, "#888888", 1.0, " stroke-dasharray=\"4 3\"");
  }

  if (panel.fit) {
    for (const auto& [j, mag] : envelope_mag) {
      for (int i = fr.first; i < fr.last; ++i) {
        const double a = envelope(i, j), b = envelope(i + 1, j);
        if (a < std::pow(10.0, fr.lo) || b < std::pow(10.0, fr.lo)) continue;
        line(os, fr.px(i), fr.py(a), fr.px(i + 1), fr.py(b), "#000000", 1.2);
      }
    }
    char label[96];
    std::snprintf(label, sizeof label, "rho = %.4f, Upsilon = %.4g", panel.fit->rho, panel.fit->upsilon);
    text(os, right - 4.0, top + 14.0, label, "end", 11);
  }

  std::size_t color = 0;
  std::map<int, std::size_t> color_of;
  for (const auto& p : profiles) {
    if (!color_of.count(p.j)) color_of[p.j] = color++ % (sizeof kPalette / sizeof kPalette[0]);
    const char* c = kPalette[color_of[p.j]];
    const double floor = profile_floor(p, floor_abs, floor_rel);
    for (int i = p.first_stage(); i <= p.last_stage(); ++i) {
      if (!(p.at(i) > floor)) continue;
      os << "<circle cx=\"" << fmt(fr.px(i)) << "\" cy=\"" << fmt(fr.py(p.at(i))) << "\" r=\"2.5\" fill=\"" << c
         << "\"/>\n";
    }
  }
}

}  // namespace

std::string plot_decay_panels(std::span<const DecayPanel> panels) {
  if (panels.empty()) throw ConfigurationError("no panels to plot");
  std::ostringstream body;
  for (std::size_t k = 0; k < panels.size(); ++k) draw_panel(body, panels[k], static_cast<double>(k) * kPanelHeight);

  std::ostringstream os;
  const double height = static_cast<double>(panels.size()) * kPanelHeight;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(kWidth) << "\" height=\"" << fmt(height)
     << "\" viewBox=\"0 0 " << fmt(kWidth) << ' ' << fmt(height) << "\">\n";
  os << body.str();
  os << "</svg>\n";
  return os.str();
}

std::string plot_decay(std::span<const SensitivityProfile> profiles, const std::optional<DecayFit>& fit,
                       const std::string& title) {
  if (profiles.empty()) throw ConfigurationError("no profiles to plot");
  const DecayPanel panel{title, {profiles.begin(), profiles.end()}, fit};
  return plot_decay_panels(std::span<const DecayPanel>(&panel, 1));
}

}  // namespace edslab
