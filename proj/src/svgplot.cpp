#include "gridwave/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "gridwave/errors.hpp"

namespace gridwave::svg {

namespace {

constexpr double kWidth = 800.0, kHeight = 500.0;
constexpr double kLeft = 70.0, kRight = 30.0, kTop = 40.0, kBottom = 55.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    bool valid() const { return lo <= hi; }
    void pad() {
        if (lo == hi) {
            lo -= 1.0;
            hi += 1.0;
        } else {
            const double m = 0.05 * (hi - lo);
            lo -= m;
            hi += m;
        }
    }
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

/// Round 1-2-5 tick spacing covering roughly `target` intervals.
std::vector<double> linear_ticks(double lo, double hi, int target = 6) {
    const double span = hi - lo;
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double s : {1.0, 2.0, 5.0, 10.0}) {
        if (raw <= s * mag) {
            step = s * mag;
            break;
        }
    }
    std::vector<double> ticks;
    for (double t = std::ceil(lo / step) * step; t <= hi + 0.5 * step; t += step)
        ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
    return ticks;
}

std::vector<double> decade_ticks(double lo, double hi) {
    std::vector<double> ticks;
    for (int e = static_cast<int>(std::ceil(lo - 1e-9)); e <= std::floor(hi + 1e-9); ++e)
        ticks.push_back(static_cast<double>(e));
    return ticks;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

void write_plot(const std::filesystem::path& path, const PlotSpec& spec) {
    // Collect the drawable samples (log x drops non-positive values).
    Range rx, ry;
    std::vector<std::vector<std::pair<double, double>>> pts(spec.series.size());
    for (size_t s = 0; s < spec.series.size(); ++s) {
        const auto& ser = spec.series[s];
        const size_t n = std::min(ser.x.size(), ser.y.size());
        for (size_t i = 0; i < n; ++i) {
            double x = ser.x[i];
            const double y = ser.y[i];
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            if (spec.log_x) {
                if (x <= 0.0) continue;
                x = std::log10(x);
            }
            pts[s].emplace_back(x, y);
            rx.add(x);
            ry.add(y);
        }
    }
    if (!rx.valid() || !ry.valid())
        throw Error(ErrorCode::IoError, "plot '" + spec.title + "' has no finite samples");
    rx.pad();
    ry.pad();

    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - rx.lo) / (rx.hi - rx.lo) * pw; };
    auto py = [&](double y) { return kTop + (ry.hi - y) / (ry.hi - ry.lo) * ph; };

    std::ofstream f(path);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='" << kHeight
      << "' viewBox='0 0 " << kWidth << " " << kHeight << "'>\n"
      << "<rect width='100%' height='100%' fill='white'/>\n"
      << "<text x='" << kWidth / 2 << "' y='24' text-anchor='middle' font-size='16' "
      << "font-family='sans-serif'>" << escape(spec.title) << "</text>\n";

    const auto xticks = spec.log_x ? decade_ticks(rx.lo, rx.hi) : linear_ticks(rx.lo, rx.hi);
    const auto yticks = linear_ticks(ry.lo, ry.hi);
    f << "<g stroke='#dddddd' stroke-width='1'>\n";
    for (double t : xticks)
        f << "<line x1='" << px(t) << "' y1='" << kTop << "' x2='" << px(t) << "' y2='"
          << kTop + ph << "'/>\n";
    for (double t : yticks)
        f << "<line x1='" << kLeft << "' y1='" << py(t) << "' x2='" << kLeft + pw << "' y2='"
          << py(t) << "'/>\n";
    f << "</g>\n";

    f << "<g font-size='11' font-family='sans-serif' fill='#333333'>\n";
    for (double t : xticks) {
        const std::string label = spec.log_x ? ("1e" + fmt(t)) : fmt(t);
        f << "<text x='" << px(t) << "' y='" << kTop + ph + 18
          << "' text-anchor='middle'>" << label << "</text>\n";
    }
    for (double t : yticks)
        f << "<text x='" << kLeft - 8 << "' y='" << py(t) + 4
          << "' text-anchor='end'>" << fmt(t) << "</text>\n";
    f << "</g>\n";

    f << "<text x='" << kLeft + pw / 2 << "' y='" << kHeight - 12
      << "' text-anchor='middle' font-size='13' font-family='sans-serif'>"
      << escape(spec.x_label) << "</text>\n"
      << "<text x='18' y='" << kTop + ph / 2
      << "' text-anchor='middle' font-size='13' font-family='sans-serif' "
      << "transform='rotate(-90 18 " << kTop + ph / 2 << ")'>" << escape(spec.y_label)
      << "</text>\n";

    f << "<rect x='" << kLeft << "' y='" << kTop << "' width='" << pw << "' height='" << ph
      << "' fill='none' stroke='#333333'/>\n";

    for (size_t s = 0; s < spec.series.size(); ++s) {
        const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
        if (spec.series[s].markers) {
            f << "<g fill='" << color << "'>\n";
            for (const auto& [x, y] : pts[s])
                f << "<circle cx='" << px(x) << "' cy='" << py(y) << "' r='4'/>\n";
            f << "</g>\n";
        } else {
            f << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
            for (const auto& [x, y] : pts[s]) f << px(x) << "," << py(y) << " ";
            f << "'/>\n";
        }
        if (!spec.series[s].name.empty()) {
            const double lx = kLeft + pw - 150.0;
            const double ly = kTop + 18.0 + 16.0 * static_cast<double>(s);
            f << "<rect x='" << lx << "' y='" << ly - 9 << "' width='12' height='4' fill='"
              << color << "'/>\n"
              << "<text x='" << lx + 18 << "' y='" << ly
              << "' font-size='12' font-family='sans-serif'>" << escape(spec.series[s].name)
              << "</text>\n";
        }
    }
    f << "</svg>\n";
    if (!f.good()) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

}  // namespace gridwave::svg
