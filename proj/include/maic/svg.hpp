// Copyright 2026 The MAIC Testbed Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Deterministic SVG line plots of mean absolute joint goal error versus time,
// one polyline per record, with perturbation intervals shaded.

#ifndef MAIC_SVG_HPP_
#define MAIC_SVG_HPP_

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "maic/io.hpp"
#include "maic/metrics.hpp"

namespace maic {

inline void emit_plot(const std::filesystem::path& path,
                      const std::vector<const MetricsRecord*>& records,
                      const std::vector<std::pair<double, double>>& shaded = {},
                      std::uint64_t root_seed = 0) {
  static const char* kColors[] = {"#d62728", "#1f77b4", "#2ca02c",
                                  "#9467bd", "#ff7f0e", "#8c564b"};
  const double width = 720, height = 360;
  const double ml = 60, mr = 20, mt = 20, mb = 40;
  const double pw = width - ml - mr, ph = height - mt - mb;

  double t_max = 0.0, e_max = 0.0;
  for (const MetricsRecord* r : records) {
    if (!r->t.empty()) t_max = std::max(t_max, r->t.back());
    for (Eigen::Index k = 0; k < r->goal_error.cols(); ++k)
      e_max = std::max(e_max, r->goal_error.col(k).cwiseAbs().mean());
  }
  if (t_max <= 0) t_max = 1.0;
  if (e_max <= 0) e_max = 1.0;
  e_max *= 1.05;

  auto px = [&](double t) { return ml + pw * t / t_max; };
  auto py = [&](double e) { return mt + ph * (1.0 - e / e_max); };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  out << "<!-- root_seed=" << root_seed << " -->\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";

  for (const auto& [lo, hi] : shaded)
    out << "<rect x=\"" << FormatDouble(px(lo)) << "\" y=\"" << FormatDouble(mt)
        << "\" width=\"" << FormatDouble(px(hi) - px(lo)) << "\" height=\""
        << FormatDouble(ph) << "\" fill=\"#f4cccc\"/>\n";

  // Axes.
  out << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw
      << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
      << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 8
      << "\" font-size=\"12\" text-anchor=\"middle\">t [s]</text>\n";
  out << "<text x=\"14\" y=\"" << mt + ph / 2
      << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
      << mt + ph / 2 << ")\">mean |q - q_d| [rad]</text>\n";

  int color = 0;
  for (const MetricsRecord* r : records) {
    const std::size_t ticks = r->t.size();
    if (ticks == 0) {
      ++color;
      continue;
    }
    const std::size_t stride = std::max<std::size_t>(1, ticks / 1500);
    out << "<polyline fill=\"none\" stroke=\""
        << kColors[color % 6] << "\" stroke-width=\"1.2\" points=\"";
    for (std::size_t k = 0; k < ticks; k += stride) {
      const double e = r->goal_error.col(static_cast<Eigen::Index>(k)).cwiseAbs().mean();
      out << FormatDouble(px(r->t[k])) << ',' << FormatDouble(py(e)) << ' ';
    }
    out << "\"/>\n";
    out << "<text x=\"" << ml + pw - 120 << "\" y=\"" << mt + 16 + 16 * color
        << "\" font-size=\"12\" fill=\"" << kColors[color % 6] << "\">"
        << r->controller << "</text>\n";
    ++color;
  }
  out << "</svg>\n";
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace maic

#endif  // MAIC_SVG_HPP_
