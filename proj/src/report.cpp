#include "aed/report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace aed {

namespace {

std::string num(double v) {
  std::array<char, 48> buf;
  auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), p);
}

// fixed two-decimal coordinates for SVG geometry
std::string coord(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::io, "cannot write report file: " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) fail(errc::io, "failed writing report file: " + path.string());
}

std::string csv_body(const EvalReport& report) {
  std::string s = "appliance,mae_watts,sae,pred_total,true_total,share_pct\n";
  for (const auto& a : report.appliances) {
    s += a.name + "," + num(a.mae_watts) + "," + num(a.sae) + "," + num(a.pred_total) + "," +
         num(a.true_total) + "," + num(a.share_pct) + "\n";
  }
  return s;
}

std::string json_body(const EvalReport& report) {
  nlohmann::json j;
  j["metadata"] = report.metadata;
  j["appliances"] = nlohmann::json::array();
  for (const auto& a : report.appliances) {
    j["appliances"].push_back({{"appliance", a.name},
                               {"mae_watts", a.mae_watts},
                               {"sae", a.sae},
                               {"pred_total", a.pred_total},
                               {"true_total", a.true_total},
                               {"share_pct", a.share_pct}});
  }
  return j.dump(2) + "\n";
}

struct PlotBox {
  double x0, y0, w, h;
};

void polyline(std::string& svg, const PlotBox& box, std::span<const double> ys, double ymin,
              double ymax, const char* color) {
  if (ys.empty()) return;
  svg += "<polyline fill=\"none\" stroke=\"";
  svg += color;
  svg += "\" stroke-width=\"1\" points=\"";
  const double span = ymax > ymin ? ymax - ymin : 1.0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double x = box.x0 + box.w * static_cast<double>(i) / static_cast<double>(ys.size() - 1 ? ys.size() - 1 : 1);
    const double y = box.y0 + box.h * (1.0 - (ys[i] - ymin) / span);
    svg += coord(x);
    svg += ",";
    svg += coord(y);
    svg += " ";
  }
  svg += "\"/>\n";
}

std::string overlay_svg(const SeriesOverlay& ov) {
  const PlotBox box{50, 20, 880, 260};
  double ymin = 0.0, ymax = 1.0;
  for (const auto* v : {&ov.mains, &ov.truth, &ov.pred})
    for (double y : *v) {
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"960\" height=\"330\" "
      "viewBox=\"0 0 960 330\">\n"
      "<rect width=\"960\" height=\"330\" fill=\"white\"/>\n";
  svg += "<text x=\"50\" y=\"14\" font-family=\"sans-serif\" font-size=\"12\">" + ov.appliance +
         ": mains (grey), truth (green), prediction (red); y in Watts, max " + num(ymax) +
         "</text>\n";
  polyline(svg, box, ov.mains, ymin, ymax, "#bbbbbb");
  polyline(svg, box, ov.truth, ymin, ymax, "#2a9d2a");
  polyline(svg, box, ov.pred, ymin, ymax, "#d03030");
  svg += "<line x1=\"50\" y1=\"280\" x2=\"930\" y2=\"280\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg += "</svg>\n";
  return svg;
}

std::string shares_svg(const EvalReport& report) {
  const double bar_h = 24, gap = 10, left = 150, width = 600;
  const double total_h = 30 + report.appliances.size() * (bar_h + gap);
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"820\" height=\"" +
                    coord(total_h) + "\" viewBox=\"0 0 820 " + coord(total_h) + "\">\n";
  svg += "<rect width=\"820\" height=\"" + coord(total_h) + "\" fill=\"white\"/>\n";
  svg += "<text x=\"10\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\">predicted share of "
         "total energy</text>\n";
  static const char* colors[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52",
                                 "#8172b3", "#937860", "#da8bc3", "#8c8c8c"};
  for (std::size_t i = 0; i < report.appliances.size(); ++i) {
    const auto& a = report.appliances[i];
    const double y = 30 + static_cast<double>(i) * (bar_h + gap);
    svg += "<text x=\"10\" y=\"" + coord(y + bar_h - 7) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + a.name + "</text>\n";
    svg += "<rect x=\"" + coord(left) + "\" y=\"" + coord(y) + "\" width=\"" +
           coord(width * a.share_pct / 100.0) + "\" height=\"" + coord(bar_h) + "\" fill=\"" +
           colors[i % 8] + "\"/>\n";
    svg += "<text x=\"" + coord(left + width * a.share_pct / 100.0 + 6) + "\" y=\"" +
           coord(y + bar_h - 7) + "\" font-family=\"sans-serif\" font-size=\"12\">" +
           num(a.share_pct) + "%</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace

std::vector<std::filesystem::path> emit_report(const EvalReport& report,
                                               const std::vector<ReportFormat>& formats,
                                               const std::filesystem::path& prefix) {
  if (report.appliances.empty()) fail(errc::config, "cannot emit a report with no appliances");
  std::vector<std::filesystem::path> written;
  if (prefix.has_parent_path()) std::filesystem::create_directories(prefix.parent_path());
  for (ReportFormat f : formats) {
    switch (f) {
      case ReportFormat::csv: {
        auto p = prefix;
        p += ".csv";
        write_file(p, csv_body(report));
        written.push_back(p);
        break;
      }
      case ReportFormat::json: {
        auto p = prefix;
        p += ".json";
        write_file(p, json_body(report));
        written.push_back(p);
        break;
      }
      case ReportFormat::svg: {
        auto p = prefix;
        p += "_shares.svg";
        write_file(p, shares_svg(report));
        written.push_back(p);
        for (const auto& ov : report.overlays) {
          auto sp = prefix;
          sp += "_" + ov.appliance + ".svg";
          write_file(sp, overlay_svg(ov));
          written.push_back(sp);
        }
        break;
      }
    }
  }
  return written;
}

}  // namespace aed
