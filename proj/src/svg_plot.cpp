#include "fluentnet/svg_plot.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

namespace fluentnet {
namespace {

constexpr int kWidth = 960;
constexpr int kPanelHeight = 150;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 24;
constexpr int kPanelGap = 36;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                          "#8c564b", "#e377c2", "#17becf"};

struct Range {
  double lo = 0;
  double hi = 1;

  void widen(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double span() const { return hi > lo ? hi - lo : 1; }
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

std::ofstream open_svg(const std::string& path, int height) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot write");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  return out;
}

void panel_frame(std::ofstream& out, int top, const std::string& title, const Range& y,
                 const std::string& unit) {
  out << "<rect x=\"" << kMarginLeft << "\" y=\"" << top << "\" width=\""
      << kWidth - kMarginLeft - kMarginRight << "\" height=\"" << kPanelHeight
      << "\" fill=\"none\" stroke=\"#999\"/>\n"
      << "<text x=\"" << kMarginLeft << "\" y=\"" << top - 6 << "\">" << title << "</text>\n"
      << "<text x=\"4\" y=\"" << top + 12 << "\" fill=\"#555\">" << num(y.hi) << unit
      << "</text>\n"
      << "<text x=\"4\" y=\"" << top + kPanelHeight << "\" fill=\"#555\">" << num(y.lo) << unit
      << "</text>\n";
}

}  // namespace

void render_trace_svg(const std::string& path,
                      const std::vector<EvalSample>& samples,
                      const Scoreboard& board,
                      const std::vector<LabelWindow>& labels) {
  Range time;
  for (const auto& s : samples) time.widen(static_cast<double>(s.at));
  for (const auto& w : labels) {
    time.widen(static_cast<double>(w.begin));
    time.widen(static_cast<double>(w.end));
  }
  for (const auto& r : board.matched) time.widen(static_cast<double>(r.at));
  for (const auto& r : board.unmatched) time.widen(static_cast<double>(r.at));

  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  auto x_of = [&](double t) { return kMarginLeft + (t - time.lo) / time.span() * plot_w; };

  std::map<std::string, std::vector<const EvalSample*>> by_node;
  for (const auto& s : samples) by_node[s.node].push_back(&s);

  const int height = kMarginTop + 4 * (kPanelHeight + kPanelGap);
  auto out = open_svg(path, height);

  struct PanelSpec {
    const char* title;
    const char* unit;
    double (*value)(const EvalSample&);
  };
  const PanelSpec panels[] = {
      {"node complexity", "", [](const EvalSample& s) { return static_cast<double>(s.complexity); }},
      {"evaluation time", " us",
       [](const EvalSample& s) { return static_cast<double>(s.duration_ns) / 1000.0; }},
      {"propagated statements", "",
       [](const EvalSample& s) { return static_cast<double>(s.propagated); }},
  };

  int top = kMarginTop;
  for (const auto& panel : panels) {
    Range y;
    for (const auto& s : samples) y.widen(panel.value(s));
    panel_frame(out, top, panel.title, y, panel.unit);
    auto y_of = [&](double v) {
      return top + kPanelHeight - (v - y.lo) / y.span() * kPanelHeight;
    };
    std::size_t color = 0;
    for (const auto& [node, points] : by_node) {
      out << "<polyline fill=\"none\" stroke=\"" << kPalette[color % 8] << "\" points=\"";
      for (const auto* s : points)
        out << num(x_of(static_cast<double>(s->at))) << ',' << num(y_of(panel.value(*s))) << ' ';
      out << "\"/>\n";
      if (top == kMarginTop) {
        out << "<text x=\"" << kMarginLeft + 8 + 70 * static_cast<int>(color) << "\" y=\""
            << top + 14 << "\" fill=\"" << kPalette[color % 8] << "\">" << node << "</text>\n";
      }
      ++color;
    }
    top += kPanelHeight + kPanelGap;
  }

  Range acts;
  acts.lo = 0.5;
  acts.hi = 8.5;
  panel_frame(out, top, "recognitions over label windows", acts, "");
  auto y_of_activity = [&](int a) {
    return top + kPanelHeight - (static_cast<double>(a) - acts.lo) / acts.span() * kPanelHeight;
  };
  for (const auto& w : labels) {
    const double y = y_of_activity(w.activity);
    out << "<line x1=\"" << num(x_of(static_cast<double>(w.begin))) << "\" y1=\"" << num(y)
        << "\" x2=\"" << num(x_of(static_cast<double>(w.end))) << "\" y2=\"" << num(y)
        << "\" stroke=\"" << kPalette[(w.activity - 1) % 8] << "\" stroke-width=\"5\" opacity=\"0.4\"/>\n";
  }
  auto mark = [&](const RecognitionRecord& r, const char* fill) {
    out << "<text x=\"" << num(x_of(static_cast<double>(r.at)) - 4) << "\" y=\""
        << num(y_of_activity(r.activity) + 4) << "\" fill=\"" << fill
        << "\" font-size=\"15\">*</text>\n";
  };
  for (const auto& r : board.matched) mark(r, "black");
  for (const auto& r : board.unmatched) mark(r, "#d62728");

  out << "</svg>\n";
}

void render_scatter_svg(const std::string& path, const std::vector<EvalSample>& samples) {
  Range x, y;
  for (const auto& s : samples) {
    x.widen(static_cast<double>(s.complexity));
    y.widen(static_cast<double>(s.duration_ns) / 1000.0);
  }
  const int height = kMarginTop + kPanelHeight * 2 + 30;
  auto out = open_svg(path, height);
  panel_frame(out, kMarginTop, "evaluation time vs node complexity", y, " us");
  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  std::set<std::string> nodes;
  for (const auto& s : samples) nodes.insert(s.node);
  std::map<std::string, std::size_t> color;
  for (const auto& n : nodes) color.emplace(n, color.size());
  for (const auto& s : samples) {
    const double px = kMarginLeft + (static_cast<double>(s.complexity) - x.lo) / x.span() * plot_w;
    const double py = kMarginTop + kPanelHeight -
                      (static_cast<double>(s.duration_ns) / 1000.0 - y.lo) / y.span() * kPanelHeight;
    out << "<circle cx=\"" << num(px) << "\" cy=\"" << num(py) << "\" r=\"2.5\" fill=\""
        << kPalette[color[s.node] % 8] << "\" opacity=\"0.6\"/>\n";
  }
  out << "<text x=\"" << kMarginLeft << "\" y=\"" << kMarginTop + kPanelHeight + 16
      << "\">complexity " << num(x.lo) << " to " << num(x.hi) << "</text>\n";
  int row = 0;
  for (const auto& [node, c] : color) {
    out << "<text x=\"" << kMarginLeft + 120 * row << "\" y=\""
        << kMarginTop + kPanelHeight + 34 << "\" fill=\"" << kPalette[c % 8] << "\">" << node
        << "</text>\n";
    ++row;
  }
  out << "</svg>\n";
}

}  // namespace fluentnet
