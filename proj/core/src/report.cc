#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "vloc/error.h"
#include "vloc/pipeline.h"

namespace vloc {
namespace {

namespace fs = std::filesystem;

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.flush();
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot write " + path.string());
  }
}

// Round axis maximum up to 1, 2 or 5 times a power of ten.
double NiceCeil(double v) {
  if (!(v > 0.0)) return 1.0;
  const double p = std::pow(10.0, std::floor(std::log10(v)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * p >= v) return m * p;
  }
  return 10.0 * p;
}

std::string Fixed(double v, int digits) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

}  // namespace

std::string FormatDouble(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

std::string FormatErrorsCsv(const EvaluationResult& result) {
  std::string out = "step,mean_meas_m,std_meas_m,mean_est_m,std_est_m\n";
  for (std::size_t k = 0; k < result.steps.size(); ++k) {
    const StepStats& s = result.steps[k];
    out += std::to_string(k + 1) + ',' + FormatDouble(s.mean_meas_m) + ',' +
           FormatDouble(s.std_meas_m) + ',' + FormatDouble(s.mean_est_m) +
           ',' + FormatDouble(s.std_est_m) + '\n';
  }
  return out;
}

std::string FormatTraceCsv(const LocalizationTrace& trace) {
  std::string out =
      "step,query_ts,matched_frame_id,meas_lat,meas_lon,est_lat,est_lon,"
      "truth_lat,truth_lon,meas_err_m,est_err_m\n";
  auto opt = [](const std::optional<double>& v) {
    return v ? FormatDouble(*v) : std::string();
  };
  for (const TraceStep& s : trace.steps) {
    out += std::to_string(s.step) + ',' + std::to_string(s.query_ts_ns) + ',' +
           std::to_string(s.matched_frame_id) + ',' +
           FormatDouble(s.measurement.lat()) + ',' +
           FormatDouble(s.measurement.lon()) + ',' +
           FormatDouble(s.estimate.lat()) + ',' +
           FormatDouble(s.estimate.lon()) + ',';
    if (s.truth) {
      out += FormatDouble(s.truth->lat()) + ',' + FormatDouble(s.truth->lon());
    } else {
      out += ',';
    }
    out += ',' + opt(s.measurement_error_m) + ',' + opt(s.estimation_error_m) +
           '\n';
  }
  return out;
}

std::string FormatErrorsSvg(const EvaluationResult& result) {
  constexpr double kW = 640, kH = 400;
  constexpr double kLeft = 64, kRight = 24, kTop = 40, kBottom = 56;
  const double plot_w = kW - kLeft - kRight;
  const double plot_h = kH - kTop - kBottom;

  const std::size_t n = result.steps.size();
  double y_max = 0.0;
  for (const StepStats& s : result.steps) {
    y_max = std::max({y_max, s.mean_meas_m, s.mean_est_m});
  }
  y_max = NiceCeil(y_max);

  auto x_of = [&](std::size_t k) {
    return n == 1 ? kLeft + plot_w / 2
                  : kLeft + plot_w * static_cast<double>(k) /
                                static_cast<double>(n - 1);
  };
  auto y_of = [&](double v) { return kTop + plot_h * (1.0 - v / y_max); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
      << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW << ' ' << kH
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" "
         "font-size=\"14\">Average measurement and estimation error ("
      << result.traces << " traces)</text>\n";

  // Axes, ticks, grid.
  svg << "<g stroke=\"black\" stroke-width=\"1\">\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\""
      << kLeft + plot_w << "\" y2=\"" << kTop + plot_h << "\"/>\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft
      << "\" y2=\"" << kTop + plot_h << "\"/>\n</g>\n";
  constexpr int kYTicks = 5;
  for (int i = 0; i <= kYTicks; ++i) {
    const double v = y_max * i / kYTicks;
    const double y = y_of(v);
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << y << "\" x2=\""
        << kLeft + plot_w << "\" y2=\"" << y
        << "\" stroke=\"#dddddd\"/>\n"
        << "<text x=\"" << kLeft - 6 << "\" y=\"" << y + 4
        << "\" text-anchor=\"end\">" << Fixed(v, v < 10 ? 1 : 0)
        << "</text>\n";
  }
  for (std::size_t k = 0; k < n; ++k) {
    svg << "<text x=\"" << x_of(k) << "\" y=\"" << kTop + plot_h + 18
        << "\" text-anchor=\"middle\">" << k + 1 << "</text>\n";
  }
  svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kH - 12
      << "\" text-anchor=\"middle\">step</text>\n"
      << "<text x=\"16\" y=\"" << kTop + plot_h / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << kTop + plot_h / 2 << ")\">error (m)</text>\n";

  auto series = [&](const char* color, auto value) {
    svg << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < n; ++k) {
      svg << (k ? " " : "") << Fixed(x_of(k), 2) << ','
          << Fixed(y_of(value(result.steps[k])), 2);
    }
    svg << "\"/>\n";
    for (std::size_t k = 0; k < n; ++k) {
      svg << "<circle cx=\"" << Fixed(x_of(k), 2) << "\" cy=\""
          << Fixed(y_of(value(result.steps[k])), 2) << "\" r=\"3\" fill=\""
          << color << "\"/>\n";
    }
  };
  series("#d62728", [](const StepStats& s) { return s.mean_meas_m; });
  series("#1f77b4", [](const StepStats& s) { return s.mean_est_m; });

  const double lx = kLeft + plot_w - 150;
  svg << "<line x1=\"" << lx << "\" y1=\"" << kTop + 10 << "\" x2=\""
      << lx + 20 << "\" y2=\"" << kTop + 10
      << "\" stroke=\"#d62728\" stroke-width=\"2\"/>\n"
      << "<text x=\"" << lx + 26 << "\" y=\"" << kTop + 14
      << "\">measurement</text>\n"
      << "<line x1=\"" << lx << "\" y1=\"" << kTop + 28 << "\" x2=\""
      << lx + 20 << "\" y2=\"" << kTop + 28
      << "\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n"
      << "<text x=\"" << lx + 26 << "\" y=\"" << kTop + 32
      << "\">estimation</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

void ExportReport(const EvaluationResult& result, const fs::path& out_dir) {
  if (result.steps.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty evaluation result");
  }
  const std::string csv = FormatErrorsCsv(result);
  const std::string svg = FormatErrorsSvg(result);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIo,
                "cannot create " + out_dir.string() + ": " + ec.message());
  }
  WriteText(out_dir / "errors.csv", csv);
  WriteText(out_dir / "errors.svg", svg);
}

}  // namespace vloc
