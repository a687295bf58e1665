#include "rowplan/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <unordered_set>

#include "rowplan/errors.hpp"

namespace rowplan {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2"};

const char* color(std::size_t i) { return kPalette[i % std::size(kPalette)]; }

std::string fmt(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string variant_label(const PlannerVariant& v) {
  return std::string(to_string(v.mode)) + (v.biodiv ? " / bio-div" : "");
}

// Round tick step giving roughly `target` intervals over [lo, hi].
double nice_step(double lo, double hi, int target) {
  const double raw = (hi - lo) / target;
  if (!(raw > 0.0)) return 1.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) return m * mag;
  }
  return 10.0 * mag;
}

// Minimal plotting canvas: a data rectangle with linear axes.
class Canvas {
 public:
  Canvas(double width, double height, std::string title) : w_(width), h_(height) {
    body_ += "<text x=\"" + fmt(w_ / 2, 1) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + escape(title) +
             "</text>\n";
  }

  void set_range(double x0, double x1, double y0, double y1) {
    x0_ = x0;
    x1_ = x1 > x0 ? x1 : x0 + 1.0;
    y0_ = y0;
    y1_ = y1 > y0 ? y1 : y0 + 1.0;
  }

  double px(double x) const { return left_ + (x - x0_) / (x1_ - x0_) * (w_ - left_ - right_); }
  double py(double y) const { return h_ - bottom_ + (y - y0_) / (y1_ - y0_) * -(h_ - top_ - bottom_); }

  void frame(const std::string& xlabel, const std::string& ylabel, bool x_ticks = true) {
    const double l = left_, r = w_ - right_, t = top_, b = h_ - bottom_;
    body_ += "<rect x=\"" + fmt(l, 1) + "\" y=\"" + fmt(t, 1) + "\" width=\"" + fmt(r - l, 1) + "\" height=\"" +
             fmt(b - t, 1) + "\" fill=\"none\" stroke=\"#333\"/>\n";
    const double ys = nice_step(y0_, y1_, 5);
    for (double y = std::ceil(y0_ / ys) * ys; y <= y1_ + 1e-9; y += ys) {
      body_ += line(l, py(y), r, py(y), "#ddd");
      body_ += text(l - 6, py(y) + 4, fmt(y, ys < 1 ? 2 : 0), "end", 11);
    }
    if (x_ticks) {
      const double xs = nice_step(x0_, x1_, 6);
      for (double x = std::ceil(x0_ / xs) * xs; x <= x1_ + 1e-9; x += xs) {
        body_ += line(px(x), b, px(x), b + 4, "#333");
        body_ += text(px(x), b + 17, fmt(x, xs < 1 ? 1 : 0), "middle", 11);
      }
    }
    body_ += text((l + r) / 2, h_ - 12, xlabel, "middle", 12);
    body_ += "<text x=\"16\" y=\"" + fmt((t + b) / 2, 1) + "\" transform=\"rotate(-90 16 " + fmt((t + b) / 2, 1) +
             ")\" text-anchor=\"middle\" font-size=\"12\">" + escape(ylabel) + "</text>\n";
  }

  void add(const std::string& element) { body_ += element; }

  void set_right_margin(double px) { right_ = px; }

  // Drawn inside the top-right corner, or in the right margin when it is wide enough.
  void legend(const std::vector<std::pair<std::string, std::string>>& entries) {
    const double x = right_ >= 140 ? w_ - right_ + 12 : w_ - right_ - 150;
    double y = top_ + 14;
    for (const auto& [label, col] : entries) {
      body_ += "<rect x=\"" + fmt(x, 1) + "\" y=\"" + fmt(y - 9, 1) + "\" width=\"10\" height=\"10\" fill=\"" +
               col + "\"/>\n";
      body_ += text(x + 15, y, label, "start", 11);
      y += 16;
    }
  }

  void note(const std::string& message) { body_ += text(w_ / 2, h_ / 2, message, "middle", 14); }

  static std::string line(double x1, double y1, double x2, double y2, const std::string& stroke,
                          const std::string& extra = "") {
    return "<line x1=\"" + fmt(x1, 1) + "\" y1=\"" + fmt(y1, 1) + "\" x2=\"" + fmt(x2, 1) + "\" y2=\"" + fmt(y2, 1) +
           "\" stroke=\"" + stroke + "\"" + extra + "/>\n";
  }

  static std::string text(double x, double y, const std::string& s, const char* anchor, int size) {
    return "<text x=\"" + fmt(x, 1) + "\" y=\"" + fmt(y, 1) + "\" text-anchor=\"" + anchor + "\" font-size=\"" +
           std::to_string(size) + "\">" + escape(s) + "</text>\n";
  }

  std::string str() const {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(w_, 0) + "\" height=\"" + fmt(h_, 0) +
           "\" viewBox=\"0 0 " + fmt(w_, 0) + " " + fmt(h_, 0) + "\" font-family=\"sans-serif\">\n" +
           "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" + body_ + "</svg>\n";
  }

  double left() const { return left_; }
  double right_edge() const { return w_ - right_; }
  double bottom_edge() const { return h_ - bottom_; }

 private:
  double w_, h_;
  double left_ = 60, right_ = 20, top_ = 36, bottom_ = 48;
  double x0_ = 0, x1_ = 1, y0_ = 0, y1_ = 1;
  std::string body_;
};

std::vector<PlannerVariant> variants_of(const ExperimentSummary& s) {
  std::vector<PlannerVariant> out;
  for (const auto& g : s.groups) {
    if (std::find(out.begin(), out.end(), g.variant) == out.end()) out.push_back(g.variant);
  }
  return out;
}

std::vector<std::string> fields_of(const ExperimentSummary& s) {
  std::vector<std::string> out;
  for (const auto& g : s.groups) {
    if (std::find(out.begin(), out.end(), g.field_model) == out.end()) out.push_back(g.field_model);
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace

std::string format_table(const ExperimentSummary& summary) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-18s %7s %-18s %5s %15s %15s %8s %8s\n", "field_model", "lambda", "variant", "runs",
                "loss % (std)", "axis dist m", "high %", "low %");
  out += line;
  for (const auto& g : summary.groups) {
    const auto& m = g.metrics;
    const std::string high = m.high_total > 0 ? fmt(m.high_rate_mean) : "-";
    const std::string low = m.low_total > 0 ? fmt(m.low_rate_mean) : "-";
    std::snprintf(line, sizeof line, "%-18s %7.1f %-18s %5zu %7.2f (%5.2f) %7.2f (%5.2f) %8s %8s\n",
                  g.field_model.c_str(), g.lambda, variant_label(g.variant).c_str(), m.runs, m.loss_mean, m.loss_std,
                  m.distance_mean, m.distance_std, high.c_str(), low.c_str());
    out += line;
  }
  if (!summary.mode_deltas.empty()) {
    out += "\npaired segment - rolling loss (points)\n";
    for (const auto& d : summary.mode_deltas) {
      std::snprintf(line, sizeof line, "%-18s %7.1f %-9s pairs %3zu  mean %+6.2f  std %5.2f\n", d.field_model.c_str(),
                    d.lambda, d.biodiv ? "bio-div" : "baseline", d.pairs, d.mean, d.std);
      out += line;
    }
  }
  if (!summary.biodiv_deltas.empty()) {
    out += "\npaired bio-div - baseline (points)\n";
    for (const auto& d : summary.biodiv_deltas) {
      std::snprintf(line, sizeof line, "%-18s %7.1f %-8s pairs %3zu  high %+6.2f  low %+6.2f  loss %+6.2f\n",
                    d.field_model.c_str(), d.lambda, std::string(to_string(d.mode)).c_str(), d.pairs, d.high_rate_mean,
                    d.low_rate_mean, d.loss_mean);
      out += line;
    }
  }
  return out;
}

std::string loss_density_svg(const ExperimentSummary& summary) {
  Canvas c(640, 420, "Weeding loss vs weed density");
  if (summary.groups.empty()) {
    c.set_range(0, 1, 0, 1);
    c.frame("weed density (weeds/m^2)", "loss (%)");
    c.note("no runs");
    return c.str();
  }
  double xmax = 0.0, ymax = 0.0;
  for (const auto& g : summary.groups) {
    xmax = std::max(xmax, g.lambda);
    ymax = std::max(ymax, g.metrics.loss_mean + g.metrics.loss_std);
  }
  c.set_range(0.0, xmax * 1.08 + 1e-9, 0.0, std::max(1.0, ymax * 1.1));
  c.frame("weed density (weeds/m^2)", "loss (%)");

  std::vector<std::pair<std::string, std::string>> legend;
  const auto variants = variants_of(summary);
  for (std::size_t vi = 0; vi < variants.size(); ++vi) {
    std::vector<const GroupSummary*> pts;
    for (const auto& g : summary.groups) {
      if (g.variant == variants[vi]) pts.push_back(&g);
    }
    std::stable_sort(pts.begin(), pts.end(), [](auto* a, auto* b) { return a->lambda < b->lambda; });
    std::string poly;
    for (const auto* g : pts) poly += fmt(c.px(g->lambda), 1) + "," + fmt(c.py(g->metrics.loss_mean), 1) + " ";
    if (pts.size() > 1) {
      c.add("<polyline points=\"" + poly + "\" fill=\"none\" stroke=\"" + color(vi) + "\" stroke-width=\"2\"/>\n");
    }
    for (const auto* g : pts) {
      const double x = c.px(g->lambda);
      c.add(Canvas::line(x, c.py(g->metrics.loss_mean - g->metrics.loss_std), x,
                         c.py(g->metrics.loss_mean + g->metrics.loss_std), color(vi)));
      c.add("<circle cx=\"" + fmt(x, 1) + "\" cy=\"" + fmt(c.py(g->metrics.loss_mean), 1) + "\" r=\"4\" fill=\"" +
            color(vi) + "\"/>\n");
    }
    legend.emplace_back(variant_label(variants[vi]), color(vi));
  }
  c.legend(legend);
  return c.str();
}

std::string axis_distance_svg(const ExperimentSummary& summary) {
  Canvas c(640, 420, "Per-axis lateral travel (mean +/- std)");
  const auto fields = fields_of(summary);
  const auto variants = variants_of(summary);
  if (fields.empty()) {
    c.set_range(0, 1, 0, 1);
    c.frame("field model", "travel per axis (m)", false);
    c.note("no runs");
    return c.str();
  }
  double ymax = 0.0;
  for (const auto& g : summary.groups) ymax = std::max(ymax, g.metrics.distance_mean + g.metrics.distance_std);
  c.set_range(0.0, static_cast<double>(fields.size()), 0.0, std::max(0.1, ymax * 1.1));
  c.frame("field model", "travel per axis (m)", false);

  const double slot = 1.0 / static_cast<double>(variants.size() + 1);
  for (std::size_t fi = 0; fi < fields.size(); ++fi) {
    c.add(Canvas::text(c.px(fi + 0.5), c.bottom_edge() + 17, fields[fi], "middle", 11));
    for (const auto& g : summary.groups) {
      if (g.field_model != fields[fi]) continue;
      const auto vi = static_cast<std::size_t>(std::find(variants.begin(), variants.end(), g.variant) - variants.begin());
      const double x0 = c.px(fi + slot * (vi + 0.5));
      const double x1 = c.px(fi + slot * (vi + 1.5));
      const double top = c.py(g.metrics.distance_mean);
      c.add("<rect x=\"" + fmt(x0, 1) + "\" y=\"" + fmt(top, 1) + "\" width=\"" + fmt(x1 - x0, 1) + "\" height=\"" +
            fmt(c.py(0.0) - top, 1) + "\" fill=\"" + color(vi) + "\"/>\n");
      const double xm = (x0 + x1) / 2;
      c.add(Canvas::line(xm, c.py(std::max(0.0, g.metrics.distance_mean - g.metrics.distance_std)), xm,
                         c.py(g.metrics.distance_mean + g.metrics.distance_std), "#222"));
    }
  }
  std::vector<std::pair<std::string, std::string>> legend;
  for (std::size_t vi = 0; vi < variants.size(); ++vi) legend.emplace_back(variant_label(variants[vi]), color(vi));
  c.legend(legend);
  return c.str();
}

std::string paired_delta_svg(const ExperimentSummary& summary) {
  Canvas c(640, 420, "Paired per-seed loss improvement (segment - rolling)");
  const auto& deltas = summary.mode_deltas;
  if (deltas.empty()) {
    c.set_range(0, 1, -1, 1);
    c.frame("field model", "loss improvement (points)", false);
    c.note("no segment/rolling pairs");
    return c.str();
  }
  double lo = 0.0, hi = 0.0;
  for (const auto& d : deltas) {
    for (double x : d.loss_improvement) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  const double pad = std::max(0.5, 0.1 * (hi - lo));
  c.set_range(0.0, static_cast<double>(deltas.size()), lo - pad, hi + pad);
  c.frame("field model", "loss improvement (points)", false);
  c.add(Canvas::line(c.left(), c.py(0.0), c.right_edge(), c.py(0.0), "#333", " stroke-dasharray=\"4 3\""));

  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const auto& d = deltas[i];
    const double x0 = c.px(i + 0.25), x1 = c.px(i + 0.75);
    const double top = c.py(std::max(0.0, d.mean)), bottom = c.py(std::min(0.0, d.mean));
    c.add("<rect x=\"" + fmt(x0, 1) + "\" y=\"" + fmt(top, 1) + "\" width=\"" + fmt(x1 - x0, 1) + "\" height=\"" +
          fmt(bottom - top, 1) + "\" fill=\"" + color(d.biodiv ? 1 : 0) + "\" fill-opacity=\"0.6\"/>\n");
    for (std::size_t k = 0; k < d.loss_improvement.size(); ++k) {
      // Spread the per-seed dots across the bar deterministically.
      const double jitter = d.loss_improvement.size() > 1 ? static_cast<double>(k) / (d.loss_improvement.size() - 1) : 0.5;
      c.add("<circle cx=\"" + fmt(c.px(i + 0.3 + 0.4 * jitter), 1) + "\" cy=\"" + fmt(c.py(d.loss_improvement[k]), 1) +
            "\" r=\"2\" fill=\"#222\"/>\n");
    }
    const std::string label = d.field_model + (d.biodiv ? " (bio-div)" : "");
    c.add(Canvas::text(c.px(i + 0.5), c.bottom_edge() + 17, label, "middle", 11));
    c.add(Canvas::text(c.px(i + 0.5), c.py(d.mean) - 6, "mean " + fmt(d.mean), "middle", 11));
  }
  return c.str();
}

std::string trajectory_svg(const TrajectoryView& view) {
  if (!(view.span_m > 0.0)) throw DomainError("trajectory span must be > 0");
  const double x0 = view.from_x, x1 = view.from_x + view.span_m;
  const double width = view.field.width();
  Canvas c(1000, 380, "Planned axis trajectories (" + std::string(to_string(view.plan.mode)) +
                          (view.plan.biodiv ? ", bio-div" : "") + ")");
  c.set_right_margin(170);
  c.set_range(x0, x1, 0.0, width);
  c.frame("x along the row (m)", "lateral y (m)");

  constexpr const char* kCrop = "#6b8e23";
  constexpr const char* kHigh = "#d62728";
  constexpr const char* kLow = "#777";

  std::unordered_set<PlantId> planned;
  for (const auto& axis : view.plan.axes) {
    for (const auto& n : axis.nodes) planned.insert(n.id);
  }
  for (std::size_t i = 1; i < view.plan.axes.size(); ++i) {
    const double y = view.plan.axes[i].band.lo;
    c.add(Canvas::line(c.px(x0), c.py(y), c.px(x1), c.py(y), "#999", " stroke-dasharray=\"5 4\""));
  }
  for (std::size_t a = 0; a < view.plan.axes.size(); ++a) {
    const auto& axis = view.plan.axes[a];
    std::vector<Point> pts{axis.initial};
    for (const auto& n : axis.nodes) pts.push_back(n.pos);
    std::string poly;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const Point& p = pts[k];
      if (p.x < x0) continue;
      if (poly.empty() && k > 0 && pts[k - 1].x < x0) {
        // Clip the incoming edge at the left border.
        const Point& q = pts[k - 1];
        const double y = q.y + (p.y - q.y) * (x0 - q.x) / (p.x - q.x);
        poly += fmt(c.px(x0), 1) + "," + fmt(c.py(y), 1) + " ";
      }
      if (p.x > x1) {
        const Point& q = pts[k - 1];
        const double y = q.y + (p.y - q.y) * (x1 - q.x) / (p.x - q.x);
        poly += fmt(c.px(x1), 1) + "," + fmt(c.py(y), 1) + " ";
        break;
      }
      poly += fmt(c.px(p.x), 1) + "," + fmt(c.py(p.y), 1) + " ";
    }
    if (!poly.empty()) {
      c.add("<polyline points=\"" + poly + "\" fill=\"none\" stroke=\"" + color(a) + "\" stroke-width=\"1.5\"/>\n");
    }
  }
  for (const auto& p : view.field.plants()) {
    if (p.x < x0 || p.x > x1) continue;
    const double x = c.px(p.x), y = c.py(p.y);
    if (p.is_crop()) {
      c.add("<path d=\"M" + fmt(x, 1) + " " + fmt(y - 6, 1) + " l6 6 l-6 6 l-6 -6 z\" fill=\"none\" stroke=\"" +
            kCrop + "\" stroke-width=\"1.5\"/>\n");
    } else {
      const char* stroke = p.priority == Priority::high ? kHigh : kLow;
      const std::string fill = planned.contains(p.id) ? stroke : "white";
      c.add("<circle cx=\"" + fmt(x, 1) + "\" cy=\"" + fmt(y, 1) + "\" r=\"3\" fill=\"" + fill + "\" stroke=\"" +
            stroke + "\"/>\n");
    }
  }
  std::vector<std::pair<std::string, std::string>> legend;
  for (std::size_t a = 0; a < view.plan.axes.size(); ++a) {
    legend.emplace_back("axis " + std::to_string(view.plan.axes[a].axis_id), color(a));
  }
  legend.emplace_back("crop", kCrop);
  legend.emplace_back("high-priority weed", kHigh);
  legend.emplace_back("low-priority weed", kLow);
  c.legend(legend);
  c.add(Canvas::text(c.right_edge() + 12, 230, "filled = planned", "start", 11));
  c.add(Canvas::text(c.right_edge() + 12, 246, "hollow = untreated", "start", 11));
  return c.str();
}

ReportResult render_report(std::span<const RunRecord> records, const ReportOptions& options) {
  prepare_output_dir(options.out_dir);

  ReportResult result;
  if (records.empty()) result.warnings.push_back("metrics file holds no runs; plots are empty");
  const ExperimentSummary summary = summarize(records);
  result.table = format_table(summary);

  auto emit = [&](const char* name, const std::string& text) {
    const auto path = options.out_dir / name;
    write_text(path, text);
    result.written.push_back(path);
  };
  emit("loss_vs_density.svg", loss_density_svg(summary));
  emit("axis_distance.svg", axis_distance_svg(summary));
  emit("paired_delta.svg", paired_delta_svg(summary));
  if (options.trajectory) emit("trajectory.svg", trajectory_svg(*options.trajectory));
  emit("report.txt", result.table);
  return result;
}

}  // namespace rowplan
