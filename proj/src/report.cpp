#include "boundarylab/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace boundarylab::harness {

const char* kCodeVersion = "boundary-lab 1.0.0";

std::string format_double(double x) {
  if (x == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

namespace {

std::string format_tick(double x) {
  if (x == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4g", x);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    const unsigned char u = static_cast<unsigned char>(c);
    if (c == '"' || c == '\\') {
      out.push_back('\\');
      out.push_back(c);
    } else if (u < 0x20) {
      char buf[8];
      std::snprintf(buf, sizeof(buf), "\\u%04x", u);
      out += buf;
    } else {
      out.push_back(c);
    }
  }
  return out;
}

bool needs_quoting(const std::string& field) {
  return field.find_first_of(",\"\r\n") != std::string::npos;
}

std::string csv_field(const std::string& field) {
  if (!needs_quoting(field)) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

}  // namespace

void Csv::add_row(std::vector<std::string> cells) {
  if (cells.size() != header.size()) {
    throw std::invalid_argument("csv row has " + std::to_string(cells.size()) +
                                " cells for " + std::to_string(header.size()) +
                                " columns");
  }
  rows.push_back(std::move(cells));
}

std::string Csv::to_string() const {
  std::string out;
  const auto emit = [&](const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out.push_back(',');
      out += csv_field(cells[i]);
    }
    out += "\r\n";
  };
  emit(header);
  for (const auto& row : rows) emit(row);
  return out;
}

std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label,
                           const std::vector<Series>& series, bool log2_x) {
  const double width = 860, height = 520;
  const double left = 80, right = 840, top = 40, bottom = 460;

  const auto xval = [&](double x) { return log2_x ? std::log2(x) : x; };

  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool any = false;
  for (const auto& s : series) {
    for (size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i]) || !std::isfinite(s.x[i])) continue;
      if (log2_x && !(s.x[i] > 0)) continue;
      const double xv = xval(s.x[i]);
      if (!any) {
        xmin = xmax = xv;
        ymin = ymax = s.y[i];
        any = true;
      } else {
        xmin = std::min(xmin, xv);
        xmax = std::max(xmax, xv);
        ymin = std::min(ymin, s.y[i]);
        ymax = std::max(ymax, s.y[i]);
      }
    }
  }
  if (xmax - xmin < 1e-12) {
    xmin -= 1.0;
    xmax += 1.0;
  }
  if (ymax - ymin < 1e-12) {
    const double pad = std::max(1.0, std::abs(ymax)) * 0.1;
    ymin -= pad;
    ymax += pad;
  } else {
    const double pad = (ymax - ymin) * 0.05;
    ymin -= pad;
    ymax += pad;
  }

  const auto px = [&](double x) {
    return left + (xval(x) - xmin) / (xmax - xmin) * (right - left);
  };
  const auto py = [&](double y) {
    return bottom - (y - ymin) / (ymax - ymin) * (bottom - top);
  };

  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                   "#9467bd", "#ff7f0e", "#8c564b"};
  const int palette_size = 6;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         format_double(width) + "\" height=\"" + format_double(height) +
         "\" viewBox=\"0 0 " + format_double(width) + " " +
         format_double(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"430\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"monospace\" font-size=\"16\">" +
         xml_escape(title) + "</text>\n";

  // Grid and ticks.
  for (int i = 0; i <= 4; ++i) {
    const double fx = xmin + (xmax - xmin) * i / 4.0;
    const double fy = ymin + (ymax - ymin) * i / 4.0;
    const double gx = left + (right - left) * i / 4.0;
    const double gy = bottom - (bottom - top) * i / 4.0;
    svg += "<line x1=\"" + format_double(gx) + "\" y1=\"" +
           format_double(top) + "\" x2=\"" + format_double(gx) + "\" y2=\"" +
           format_double(bottom) + "\" stroke=\"#dddddd\"/>\n";
    svg += "<line x1=\"" + format_double(left) + "\" y1=\"" +
           format_double(gy) + "\" x2=\"" + format_double(right) +
           "\" y2=\"" + format_double(gy) + "\" stroke=\"#dddddd\"/>\n";
    const double tick_value = log2_x ? std::exp2(fx) : fx;
    svg += "<text x=\"" + format_double(gx) + "\" y=\"" +
           format_double(bottom + 18) +
           "\" text-anchor=\"middle\" font-family=\"monospace\" "
           "font-size=\"12\">" +
           format_tick(tick_value) + "</text>\n";
    svg += "<text x=\"" + format_double(left - 8) + "\" y=\"" +
           format_double(gy + 4) +
           "\" text-anchor=\"end\" font-family=\"monospace\" "
           "font-size=\"12\">" +
           format_tick(fy) + "</text>\n";
  }
  svg += "<rect x=\"" + format_double(left) + "\" y=\"" + format_double(top) +
         "\" width=\"" + format_double(right - left) + "\" height=\"" +
         format_double(bottom - top) + "\" fill=\"none\" stroke=\"black\"/>\n";
  svg += "<text x=\"430\" y=\"500\" text-anchor=\"middle\" "
         "font-family=\"monospace\" font-size=\"13\">" +
         xml_escape(x_label) + "</text>\n";
  svg += "<text x=\"20\" y=\"250\" text-anchor=\"middle\" "
         "font-family=\"monospace\" font-size=\"13\" "
         "transform=\"rotate(-90 20 250)\">" +
         xml_escape(y_label) + "</text>\n";

  for (size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % palette_size];
    std::string points;
    for (size_t i = 0; i < series[s].x.size() && i < series[s].y.size(); ++i) {
      const double x = series[s].x[i], y = series[s].y[i];
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (log2_x && !(x > 0)) continue;
      points += format_double(px(x)) + "," + format_double(py(y)) + " ";
      svg += "<circle cx=\"" + format_double(px(x)) + "\" cy=\"" +
             format_double(py(y)) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
    }
    if (!points.empty()) points.pop_back();
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
    const double ly = top + 16 + 18 * static_cast<double>(s);
    svg += "<line x1=\"" + format_double(right - 180) + "\" y1=\"" +
           format_double(ly - 4) + "\" x2=\"" + format_double(right - 156) +
           "\" y2=\"" + format_double(ly - 4) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + format_double(right - 150) + "\" y=\"" +
           format_double(ly) +
           "\" font-family=\"monospace\" font-size=\"12\">" +
           xml_escape(series[s].label) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string manifest_timestamp() {
  std::time_t t;
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
    t = static_cast<std::time_t>(std::strtoll(env, nullptr, 10));
  } else {
    t = std::time(nullptr);
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string RunManifest::to_json() const {
  std::string out = "{\n";
  out += "  \"subcommand\": \"" + json_escape(subcommand) + "\",\n";
  out += "  \"config_hash\": \"" + json_escape(config_hash) + "\",\n";
  out += "  \"code_version\": \"" + json_escape(code_version) + "\",\n";
  out += "  \"seed\": " + std::to_string(seed) + ",\n";
  out += "  \"created_utc\": \"" + json_escape(created_utc) + "\",\n";
  out += "  \"outputs\": [";
  for (size_t i = 0; i < outputs.size(); ++i) {
    if (i) out += ", ";
    out += "\"" + json_escape(outputs[i]) + "\"";
  }
  out += "]\n}\n";
  return out;
}

void write_file(const std::string& path, const std::string& bytes) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::filesystem::create_directories(p.parent_path());
  }
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace boundarylab::harness
