#include "shuffleguard/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "shuffleguard/manifest.hpp"

namespace shuffleguard {

namespace {

std::string acc_text(double v) {
  if (v < 0.0 || v > 1.0) throw std::logic_error("report: accuracy outside [0,1]");
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("failed to write: " + path.string());
}

}  // namespace

std::string report_csv(const AccuracyReport& report) {
  std::string out = "# manifest " + report.manifest_hash + "\n";
  out += "condition,epsilon,iterations,random_init,key_match,samples,clean_acc,attacked_acc\n";
  for (const auto& r : report.rows) {
    out += r.condition;
    out += ',' + pixel_fraction_text(r.epsilon);
    out += ',' + std::to_string(r.iterations);
    out += std::string(",") + (r.random_init ? "true" : "false");
    out += std::string(",") + (r.key_match ? "true" : "false");
    out += ',' + std::to_string(r.sample_count);
    out += ',' + acc_text(r.clean_acc);
    out += ',' + acc_text(r.attacked_acc);
    out += '\n';
  }
  return out;
}

void write_report_csv(const std::filesystem::path& path, const AccuracyReport& report) {
  write_text(path, report_csv(report));
}

std::string report_json(const AccuracyReport& report) {
  nlohmann::ordered_json j;
  j["manifest_hash"] = report.manifest_hash;
  j["seed"] = report.seed;
  j["wall_seconds"] = report.wall_seconds;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    nlohmann::ordered_json row;
    row["condition"] = r.condition;
    row["epsilon"] = pixel_fraction_text(r.epsilon);
    row["iterations"] = r.iterations;
    row["random_init"] = r.random_init;
    row["key_match"] = r.key_match;
    row["samples"] = r.sample_count;
    row["clean_acc"] = r.clean_acc;
    row["attacked_acc"] = r.attacked_acc;
    j["rows"].push_back(std::move(row));
  }
  return j.dump(2) + "\n";
}

void write_report_json(const std::filesystem::path& path, const AccuracyReport& report) {
  write_text(path, report_json(report));
}

std::string report_svg(const AccuracyReport& report, const std::string& title) {
  constexpr double kW = 640, kH = 420;
  constexpr double kL = 70, kR = 24, kT = 40, kB = 56;
  const double plot_w = kW - kL - kR;
  const double plot_h = kH - kT - kB;

  double max_eps = 0.0;
  for (const auto& r : report.rows) max_eps = std::max(max_eps, r.epsilon);
  const double x_span = std::max(max_eps * 255.0, 1.0);

  auto px = [&](double eps) { return kL + plot_w * (eps * 255.0) / x_span; };
  auto py = [&](double acc) { return kT + plot_h * (1.0 - acc); };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + coord(kW) + "\" height=\"" +
       coord(kH) + "\" viewBox=\"0 0 " + coord(kW) + " " + coord(kH) + "\">\n";
  s += "<rect width=\"" + coord(kW) + "\" height=\"" + coord(kH) + "\" fill=\"white\"/>\n";
  s += "<text x=\"" + coord(kW / 2) + "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
       title + "</text>\n";

  // horizontal grid and y labels at 0.0 .. 1.0
  for (int i = 0; i <= 5; ++i) {
    const double acc = i / 5.0;
    const double y = py(acc);
    s += "<line x1=\"" + coord(kL) + "\" y1=\"" + coord(y) + "\" x2=\"" + coord(kW - kR) +
         "\" y2=\"" + coord(y) + "\" stroke=\"#ddd\"/>\n";
    s += "<text x=\"" + coord(kL - 8) + "\" y=\"" + coord(y + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + acc_text(acc).substr(0, 3) +
         "</text>\n";
  }
  // x ticks at the row epsilons
  for (const auto& r : report.rows) {
    const double x = px(r.epsilon);
    s += "<line x1=\"" + coord(x) + "\" y1=\"" + coord(kH - kB) + "\" x2=\"" + coord(x) +
         "\" y2=\"" + coord(kH - kB + 5) + "\" stroke=\"#444\"/>\n";
    s += "<text x=\"" + coord(x) + "\" y=\"" + coord(kH - kB + 18) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
         pixel_fraction_text(r.epsilon) + "</text>\n";
  }
  s += "<text x=\"" + coord(kL + plot_w / 2) + "\" y=\"" + coord(kH - 12) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">perturbation budget</text>\n";
  s += "<text x=\"18\" y=\"" + coord(kT + plot_h / 2) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 18 " +
       coord(kT + plot_h / 2) + ")\">accuracy</text>\n";

  // axes
  s += "<line x1=\"" + coord(kL) + "\" y1=\"" + coord(kT) + "\" x2=\"" + coord(kL) + "\" y2=\"" +
       coord(kH - kB) + "\" stroke=\"#444\"/>\n";
  s += "<line x1=\"" + coord(kL) + "\" y1=\"" + coord(kH - kB) + "\" x2=\"" + coord(kW - kR) +
       "\" y2=\"" + coord(kH - kB) + "\" stroke=\"#444\"/>\n";

  if (!report.rows.empty()) {
    // clean-accuracy reference from the first row
    const double cy = py(report.rows.front().clean_acc);
    s += "<line x1=\"" + coord(kL) + "\" y1=\"" + coord(cy) + "\" x2=\"" + coord(kW - kR) +
         "\" y2=\"" + coord(cy) + "\" stroke=\"#2a7\" stroke-dasharray=\"6 4\"/>\n";
    s += "<text x=\"" + coord(kW - kR - 4) + "\" y=\"" + coord(cy - 5) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#2a7\">clean</text>\n";

    std::string points;
    for (const auto& r : report.rows) {
      if (!points.empty()) points += ' ';
      points += coord(px(r.epsilon)) + "," + coord(py(r.attacked_acc));
    }
    s += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"#c33\" stroke-width=\"2\"/>\n";
    for (const auto& r : report.rows) {
      s += "<circle cx=\"" + coord(px(r.epsilon)) + "\" cy=\"" + coord(py(r.attacked_acc)) +
           "\" r=\"3\" fill=\"#c33\"/>\n";
    }
  }
  s += "</svg>\n";
  return s;
}

void write_report_svg(const std::filesystem::path& path, const AccuracyReport& report,
                      const std::string& title) {
  write_text(path, report_svg(report, title));
}

}  // namespace shuffleguard
