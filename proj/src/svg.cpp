#include "foehn/svg.hpp"

#include "foehn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace foehn {

namespace {

constexpr double kWidth = 800, kHeight = 420;
constexpr double kLeft = 70, kRight = 170, kTop = 40, kBottom = 50;
const char* const kPalette[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string label_num(double v) {
    char buf[32];
    double a = std::abs(v);
    if (a != 0 && (a < 1e-3 || a >= 1e5)) std::snprintf(buf, sizeof buf, "%.2e", v);
    else if (a < 1) std::snprintf(buf, sizeof buf, "%.3f", v);
    else std::snprintf(buf, sizeof buf, "%.4g", v);
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

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    bool empty() const { return !(lo <= hi); }
    void pad() {
        if (empty()) lo = 0, hi = 1;
        if (hi - lo < 1e-12) {
            double d = std::max(std::abs(lo) * 0.05, 0.05);
            lo -= d;
            hi += d;
        }
    }
};

class Chart {
public:
    Chart(const std::string& title, const std::string& xlabel, const std::string& ylabel, Range x, Range y)
        : x_(x), y_(y) {
        x_.pad();
        y_.pad();
        out_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
             << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
             << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
             << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
             << "<text x=\"" << num(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
             << escape(title) << "</text>\n";
        xlabel_ = xlabel;
        ylabel_ = ylabel;
    }

    double px(double x) const { return kLeft + (x - x_.lo) / (x_.hi - x_.lo) * (kWidth - kLeft - kRight); }
    double py(double y) const { return kHeight - kBottom - (y - y_.lo) / (y_.hi - y_.lo) * (kHeight - kTop - kBottom); }

    void axes(int xticks = 6, int yticks = 5, bool integer_x = false) {
        const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
        out_ << "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n"
             << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(x1) << "\" y2=\"" << num(y0)
             << "\"/>\n"
             << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(x0) << "\" y2=\"" << num(y1)
             << "\"/>\n</g>\n<g class=\"ticks\" font-size=\"11\">\n";
        for (int i = 0; i <= xticks; ++i) {
            double v = x_.lo + (x_.hi - x_.lo) * i / xticks;
            if (integer_x) v = std::round(v);
            double x = px(v);
            out_ << "<line x1=\"" << num(x) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(x) << "\" y2=\""
                 << num(y0 + 5) << "\" stroke=\"black\"/>"
                 << "<text x=\"" << num(x) << "\" y=\"" << num(y0 + 18) << "\" text-anchor=\"middle\">"
                 << (integer_x ? std::to_string(long(v)) : label_num(v)) << "</text>\n";
        }
        for (int i = 0; i <= yticks; ++i) {
            double v = y_.lo + (y_.hi - y_.lo) * i / yticks;
            double y = py(v);
            out_ << "<line x1=\"" << num(x0 - 5) << "\" y1=\"" << num(y) << "\" x2=\"" << num(x0) << "\" y2=\""
                 << num(y) << "\" stroke=\"black\"/>"
                 << "<text x=\"" << num(x0 - 8) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">"
                 << label_num(v) << "</text>\n";
        }
        out_ << "</g>\n"
             << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(kHeight - 12)
             << "\" text-anchor=\"middle\">" << escape(xlabel_) << "</text>\n"
             << "<text x=\"16\" y=\"" << num((y0 + y1) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
             << num((y0 + y1) / 2) << ")\">" << escape(ylabel_) << "</text>\n";
    }

    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& color, double width,
                  const std::string& cls) {
        // Missing values split the line into segments.
        std::vector<std::string> segs;
        std::string cur;
        for (auto [x, y] : pts) {
            if (!std::isfinite(y)) {
                if (!cur.empty()) segs.push_back(cur);
                cur.clear();
                continue;
            }
            cur += (cur.empty() ? "" : " ") + num(px(x)) + "," + num(py(y));
        }
        if (!cur.empty()) segs.push_back(cur);
        for (const auto& s : segs)
            out_ << "<polyline class=\"" << cls << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\""
                 << num(width) << "\" points=\"" << s << "\"/>\n";
    }

    void band(const std::vector<double>& x, const std::vector<double>& lo, const std::vector<double>& hi,
              const std::string& color) {
        std::string pts;
        for (std::size_t i = 0; i < x.size(); ++i) pts += (pts.empty() ? "" : " ") + num(px(x[i])) + "," + num(py(hi[i]));
        for (std::size_t i = x.size(); i-- > 0;) pts += " " + num(px(x[i])) + "," + num(py(lo[i]));
        out_ << "<polygon class=\"band\" fill=\"" << color << "\" fill-opacity=\"0.3\" stroke=\"none\" points=\"" << pts
             << "\"/>\n";
    }

    void rect(double x, double y, double w, double h, const std::string& color, const std::string& cls) {
        out_ << "<rect class=\"" << cls << "\" x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w)
             << "\" height=\"" << num(h) << "\" fill=\"" << color << "\"/>\n";
    }

    void legend(const std::vector<std::pair<std::string, std::string>>& entries) {
        double x = kWidth - kRight + 15, y = kTop + 5;
        out_ << "<g class=\"legend\">\n";
        for (const auto& [color, text] : entries) {
            out_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"14\" height=\"10\" fill=\"" << color
                 << "\"/><text x=\"" << num(x + 20) << "\" y=\"" << num(y + 9) << "\">" << escape(text) << "</text>\n";
            y += 18;
        }
        out_ << "</g>\n";
    }

    void raw(const std::string& s) { out_ << s; }

    std::string finish() {
        out_ << "</svg>\n";
        return out_.str();
    }

private:
    Range x_, y_;
    std::string xlabel_, ylabel_;
    std::ostringstream out_;
};

} // namespace

std::string render_annual_svg(const std::vector<ReconstructionYear>& rows, const std::string& title) {
    if (rows.empty()) throw ValueError("annual chart: no data");
    Range x, y;
    bool has_obs = false;
    for (const auto& r : rows) {
        x.add(r.year);
        y.add(r.recon_mean);
        y.add(r.obs_mean);
        has_obs |= std::isfinite(r.obs_mean);
    }
    if (y.empty()) throw ValueError("annual chart: no finite values");
    Chart c(title, "year", "annual mean of daily maxima", x, y);
    c.axes(6, 5, true);
    std::vector<std::pair<double, double>> rec, obs;
    for (const auto& r : rows) {
        rec.emplace_back(r.year, r.recon_mean);
        obs.emplace_back(r.year, r.obs_mean);
    }
    c.polyline(rec, kPalette[0], 2, "reconstruction");
    std::vector<std::pair<std::string, std::string>> legend{{kPalette[0], "reconstruction"}};
    if (has_obs) {
        c.polyline(obs, kPalette[1], 2, "observed");
        legend.emplace_back(kPalette[1], "observed (>= 80% available)");
    }
    c.legend(legend);
    return c.finish();
}

std::string render_trend_svg(const StrFit& fit, const std::string& title) {
    if (fit.size() == 0) throw ValueError("trend chart: no data");
    Range x, y;
    std::vector<double> t(fit.size());
    for (std::size_t i = 0; i < fit.size(); ++i) {
        t[i] = fit.year(i) + (fit.month(i) - 0.5) / 12.0;
        x.add(t[i]);
        y.add(fit.y[i]);
        y.add(fit.ci_lower[i]);
        y.add(fit.ci_upper[i]);
    }
    Chart c(title, "year", "monthly mean of daily maxima", x, y);
    c.axes(6, 5, false);
    std::vector<std::pair<double, double>> data, trend;
    for (std::size_t i = 0; i < fit.size(); ++i) {
        data.emplace_back(t[i], fit.y[i]);
        trend.emplace_back(t[i], fit.trend[i]);
    }
    c.polyline(data, "#bbbbbb", 1, "data");
    c.band(t, fit.ci_lower, fit.ci_upper, kPalette[2]);
    c.polyline(trend, kPalette[2], 2, "trend");
    c.legend({{"#bbbbbb", "monthly values"}, {kPalette[2], "trend with 95% band"}});
    return c.finish();
}

std::string render_decade_svg(const DecadeSeasonal& d, const std::string& title) {
    if (d.decades.empty()) throw ValueError("decade chart: no data");
    Range x{1, 12}, y;
    for (const auto& m : d.mean)
        for (double v : m) y.add(v);
    for (double v : d.overall) y.add(v);
    Chart c(title, "month", "seasonal component", x, y);
    c.axes(11, 5, true);
    std::vector<std::pair<std::string, std::string>> legend;
    for (std::size_t k = 0; k < d.decades.size(); ++k) {
        std::vector<std::pair<double, double>> pts;
        for (int m = 0; m < 12; ++m) pts.emplace_back(m + 1, d.mean[k][std::size_t(m)]);
        const char* color = kPalette[k % (sizeof kPalette / sizeof *kPalette)];
        c.polyline(pts, color, 1.5, "decade");
        legend.emplace_back(color, std::to_string(d.decades[k]) + "s");
    }
    std::vector<std::pair<double, double>> all;
    for (int m = 0; m < 12; ++m) all.emplace_back(m + 1, d.overall[std::size_t(m)]);
    c.polyline(all, "black", 3, "overall");
    legend.emplace_back("black", "all years");
    c.legend(legend);
    return c.finish();
}

std::string render_hovmoller_svg(const HovmollerMatrix& m, const std::string& title) {
    Range v;
    for (const auto& row : m.mean)
        for (double x : row) v.add(x);
    if (v.empty()) throw ValueError("heatmap: no data");
    Chart c(title, "hour of day (UTC)", "month", Range{0, 24}, Range{0, 12});
    constexpr int kBins = 10;
    auto bin = [&](double x) {
        if (v.hi - v.lo < 1e-12) return 0;
        return std::clamp(int((x - v.lo) / (v.hi - v.lo) * kBins), 0, kBins - 1);
    };
    auto color = [](int b) {
        // White to dark red.
        double f = (b + 0.5) / kBins;
        int g = int(std::lround(255 * (1 - 0.85 * f)));
        int r = int(std::lround(255 - 90 * f * f));
        char buf[8];
        std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, g);
        return std::string(buf);
    };
    std::vector<bool> used(kBins, false);
    for (int mo = 0; mo < 12; ++mo)
        for (int h = 0; h < 24; ++h) {
            double x = m.mean[std::size_t(mo)][std::size_t(h)];
            double x0 = c.px(h), x1 = c.px(h + 1), y0 = c.py(12 - mo), y1 = c.py(11 - mo);
            std::string col = "#dddddd";
            if (std::isfinite(x)) {
                int b = bin(x);
                used[std::size_t(b)] = true;
                col = color(b);
            }
            c.rect(x0, y0, x1 - x0, y1 - y0, col, "cell");
        }
    c.axes(6, 6, true);
    std::vector<std::pair<std::string, std::string>> legend;
    for (int b = kBins - 1; b >= 0; --b) {
        if (!used[std::size_t(b)]) continue;
        double lo = v.lo + (v.hi - v.lo) * b / kBins, hi = v.lo + (v.hi - v.lo) * (b + 1) / kBins;
        legend.emplace_back(color(b), v.hi - v.lo < 1e-12 ? label_num(v.lo) : label_num(lo) + " - " + label_num(hi));
    }
    c.legend(legend);
    return c.finish();
}

std::string render_brier_svg(const ScoreReport& report, const std::string& title) {
    struct Bar {
        std::string label;
        double value;
        VariableSet set;
    };
    std::vector<Bar> bars;
    for (const auto& r : report.rows)
        if (r.fold == "mean" && r.split == "test" && std::isfinite(r.brier))
            bars.push_back({r.station + " " + to_string(r.learner), r.brier, r.set});
    if (bars.empty())
        for (const auto& r : report.rows)
            if (r.split == "insample" && std::isfinite(r.brier))
                bars.push_back({r.station + " " + to_string(r.learner), r.brier, r.set});
    if (bars.empty()) throw ValueError("Brier chart: no scores");
    Range y{0, 0};
    for (const auto& b : bars) y.add(b.value);
    Chart c(title, "", "Brier score", Range{0, double(bars.size())}, y);
    const double slot = (kWidth - kLeft - kRight) / double(bars.size());
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const char* col = bars[i].set == VariableSet::full ? kPalette[0] : kPalette[1];
        double top = c.py(bars[i].value), base = c.py(0);
        c.rect(kLeft + slot * double(i) + slot * 0.15, top, slot * 0.7, base - top, col, "bar");
        double xm = kLeft + slot * (double(i) + 0.5);
        std::ostringstream t;
        t << "<text x=\"" << num(xm) << "\" y=\"" << num(kHeight - kBottom + 14)
          << "\" text-anchor=\"end\" font-size=\"9\" transform=\"rotate(-30 " << num(xm) << ' '
          << num(kHeight - kBottom + 14) << ")\">" << escape(bars[i].label) << "</text>\n";
        c.raw(t.str());
    }
    c.axes(0, 5, false);
    c.legend({{kPalette[0], "full"}, {kPalette[1], "direct"}});
    return c.finish();
}

} // namespace foehn
