#include "uwrap/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace uwrap {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

Rgb lerp(Rgb a, Rgb b, double t) {
    t = std::clamp(t, 0.0, 1.0);
    auto mix = [t](int x, int y) { return static_cast<int>(std::lround(x + (y - x) * t)); };
    return {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
}

constexpr Rgb kGreenLight{199, 233, 192};
constexpr Rgb kGreenDark{0, 68, 27};
constexpr Rgb kPurpleLight{218, 208, 235};
constexpr Rgb kPurpleDark{63, 0, 125};

struct Frame {
    double left = 70, top = 40, width = 520, height = 420;
    double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;

    double px(double x) const { return left + (x - x_lo) / (x_hi - x_lo) * width; }
    double py(double y) const { return top + height - (y - y_lo) / (y_hi - y_lo) * height; }
};

void fit_range(const std::vector<double>& v, double& lo, double& hi) {
    if (v.empty()) {
        lo = 0.0;
        hi = 1.0;
        return;
    }
    auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    lo = *mn;
    hi = *mx;
    const double pad = hi > lo ? 0.05 * (hi - lo) : 0.5;
    lo -= pad;
    hi += pad;
}

void draw_axes(SvgDocument& doc, const Frame& f, const std::string& xl, const std::string& yl) {
    doc.rect(f.left, f.top, f.width, f.height, "none", "#444444");
    for (int i = 0; i <= 4; ++i) {
        const double xv = f.x_lo + (f.x_hi - f.x_lo) * i / 4.0;
        const double yv = f.y_lo + (f.y_hi - f.y_lo) * i / 4.0;
        doc.line(f.px(xv), f.top + f.height, f.px(xv), f.top + f.height + 5, "#444444");
        doc.text(f.px(xv), f.top + f.height + 18, num(xv), 10, "middle");
        doc.line(f.left - 5, f.py(yv), f.left, f.py(yv), "#444444");
        doc.text(f.left - 8, f.py(yv) + 3, num(yv), 10, "end");
    }
    doc.text(f.left + f.width / 2, f.top + f.height + 36, xl, 12, "middle");
    doc.text(16, f.top + f.height / 2, yl, 12, "middle");
}

}  // namespace

std::string Rgb::hex() const {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return buf;
}

Rgb uncertainty_shade(Hue hue, double u) {
    return hue == Hue::Positive ? lerp(kGreenLight, kGreenDark, u) : lerp(kPurpleLight, kPurpleDark, u);
}

Rgb factor_shade(double t) {
    // Three-anchor sequential ramp (dark blue -> teal -> yellow).
    constexpr Rgb a{68, 1, 84}, b{33, 145, 140}, c{253, 231, 37};
    t = std::clamp(t, 0.0, 1.0);
    return t < 0.5 ? lerp(a, b, t * 2.0) : lerp(b, c, (t - 0.5) * 2.0);
}

std::string escape_xml(std::string_view s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += ch;
        }
    }
    return out;
}

SvgDocument::SvgDocument(double width, double height) : width_(width), height_(height) {}

void SvgDocument::rect(double x, double y, double w, double h, const std::string& fill, const std::string& stroke) {
    body_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" + num(h) +
             "\" fill=\"" + fill + "\" stroke=\"" + stroke + "\"/>\n";
}

void SvgDocument::circle(double cx, double cy, double r, const std::string& fill, const std::string& stroke) {
    body_ += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(r) + "\" fill=\"" + fill +
             "\" stroke=\"" + stroke + "\"/>\n";
}

void SvgDocument::line(double x1, double y1, double x2, double y2, const std::string& stroke, double width,
                       const std::string& dash) {
    body_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) +
             "\" stroke=\"" + stroke + "\" stroke-width=\"" + num(width) + "\"";
    if (!dash.empty()) body_ += " stroke-dasharray=\"" + dash + "\"";
    body_ += "/>\n";
}

void SvgDocument::text(double x, double y, std::string_view content, double size, const std::string& anchor,
                       const std::string& fill) {
    body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" + num(size) +
             "\" font-family=\"sans-serif\" text-anchor=\"" + anchor + "\" fill=\"" + fill + "\">" +
             escape_xml(content) + "</text>\n";
}

std::string SvgDocument::str() const {
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           num(width_) + "\" height=\"" + num(height_) + "\" viewBox=\"0 0 " + num(width_) + " " + num(height_) +
           "\">\n<rect x=\"0\" y=\"0\" width=\"" + num(width_) + "\" height=\"" + num(height_) +
           "\" fill=\"#ffffff\"/>\n" + body_ + "</svg>\n";
}

std::size_t plot_stride(std::size_t n, std::size_t max_points) {
    if (max_points == 0 || n <= max_points) return 1;
    return (n + max_points - 1) / max_points;
}

std::string gating_plot_svg(const GatingPlotInput& in) {
    SvgDocument doc(760, 520);
    Frame f;
    fit_range(in.xs, f.x_lo, f.x_hi);
    fit_range(in.ys, f.y_lo, f.y_hi);
    doc.text(f.left, 24, in.title, 14);
    draw_axes(doc, f, in.x_label, in.y_label);

    const auto stride = plot_stride(in.xs.size(), in.max_points);
    // Lighter (more certain) points first so dark ones stay visible on top.
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < in.xs.size(); i += stride) order.push_back(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return in.uncertainties[a] < in.uncertainties[b]; });
    for (auto i : order) {
        auto c = uncertainty_shade(in.predictions[i] ? Hue::Positive : Hue::Negative, in.uncertainties[i]);
        doc.circle(f.px(in.xs[i]), f.py(in.ys[i]), 1.6, c.hex());
    }
    if (in.gate) {
        if (in.gate->x > f.x_lo && in.gate->x < f.x_hi)
            doc.line(f.px(in.gate->x), f.top, f.px(in.gate->x), f.top + f.height, "#000000", 1.5);
        if (in.gate->y > f.y_lo && in.gate->y < f.y_hi)
            doc.line(f.left, f.py(in.gate->y), f.left + f.width, f.py(in.gate->y), "#000000", 1.5);
    }

    // Legend: one ramp per hue, uncertainty 0 (light) to 1 (dark).
    const double lx = f.left + f.width + 30;
    doc.text(lx, f.top + 10, "uncertainty", 11);
    for (int h = 0; h < 2; ++h) {
        const Hue hue = h == 0 ? Hue::Positive : Hue::Negative;
        const double x = lx + h * 40;
        for (int s = 0; s < 10; ++s)
            doc.rect(x, f.top + 20 + s * 20, 16, 20, uncertainty_shade(hue, s / 9.0).hex());
        doc.text(x + 8, f.top + 240, h == 0 ? "pos" : "neg", 10, "middle");
    }
    doc.text(lx - 4, f.top + 32, "0", 10, "end");
    doc.text(lx - 4, f.top + 216, "1", 10, "end");
    doc.text(lx, f.top + 270, "green: " + in.positive_label, 10);
    doc.text(lx, f.top + 286, "purple: " + in.negative_label, 10);
    if (stride > 1) doc.text(lx, f.top + 310, "every " + std::to_string(stride) + "th event", 10);
    return doc.str();
}

std::string factor_plot_svg(const FactorPlotInput& in) {
    SvgDocument doc(760, 520);
    Frame f;
    fit_range(in.xs, f.x_lo, f.x_hi);
    fit_range(in.ys, f.y_lo, f.y_hi);
    doc.text(f.left, 24, in.title, 14);
    draw_axes(doc, f, in.x_label, in.y_label);
    double lo = 0.0, hi = 1.0;
    if (!in.values.empty()) {
        auto [mn, mx] = std::minmax_element(in.values.begin(), in.values.end());
        lo = *mn;
        hi = *mx;
    }
    const auto stride = plot_stride(in.xs.size(), in.max_points);
    for (std::size_t i = 0; i < in.xs.size(); i += stride) {
        const double t = hi > lo ? (in.values[i] - lo) / (hi - lo) : 0.5;
        doc.circle(f.px(in.xs[i]), f.py(in.ys[i]), 1.6, factor_shade(t).hex());
    }
    const double lx = f.left + f.width + 30;
    doc.text(lx, f.top + 10, in.factor_name, 11);
    for (int s = 0; s < 10; ++s) doc.rect(lx, f.top + 20 + s * 20, 16, 20, factor_shade(1.0 - s / 9.0).hex());
    doc.text(lx + 22, f.top + 32, num(hi), 10);
    doc.text(lx + 22, f.top + 216, num(lo), 10);
    return doc.str();
}

std::string bounds_chart_svg(const std::string& cell_type, const std::vector<PopulationBounds>& all) {
    std::vector<PopulationBounds> b;
    for (const auto& r : all)
        if (r.cell_type == cell_type) b.push_back(r);
    std::stable_sort(b.begin(), b.end(), [](const auto& x, const auto& y) {
        return x.ratio_true.value_or(x.ratio_pred) < y.ratio_true.value_or(y.ratio_pred);
    });

    SvgDocument doc(760, 520);
    Frame f;
    f.width = 620;
    f.x_lo = -0.5;
    f.x_hi = std::max<double>(static_cast<double>(b.size()) - 0.5, 0.5);
    std::vector<double> ys;
    for (const auto& r : b) {
        ys.push_back(r.ratio_min);
        ys.push_back(r.ratio_max);
        if (r.ratio_true) ys.push_back(*r.ratio_true);
    }
    fit_range(ys, f.y_lo, f.y_hi);
    doc.text(f.left, 24, "Population bounds: " + cell_type, 14);
    draw_axes(doc, f, "test samples (ordered by true ratio)", "ratio");

    for (std::size_t i = 0; i < b.size(); ++i) {
        const double x = f.px(static_cast<double>(i));
        const auto& r = b[i];
        doc.line(x, f.py(r.ratio_min), x, f.py(r.ratio_max), "#6a51a3", 3.0);
        doc.line(x - 4, f.py(r.ratio_min), x + 4, f.py(r.ratio_min), "#6a51a3");
        doc.line(x - 4, f.py(r.ratio_max), x + 4, f.py(r.ratio_max), "#6a51a3");
        doc.circle(x, f.py(r.ratio_pred), 3.0, "#238b45");
        if (r.ratio_true) doc.rect(x - 2.5, f.py(*r.ratio_true) - 2.5, 5, 5, "#000000");
    }
    std::size_t with_truth = 0, inside = 0;
    for (const auto& r : b)
        if (r.inside) {
            ++with_truth;
            inside += *r.inside ? 1 : 0;
        }
    std::string footer = std::to_string(b.size()) + " samples";
    if (with_truth) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "; true ratio inside bounds for %zu/%zu (%.1f%%)", inside, with_truth,
                      100.0 * static_cast<double>(inside) / static_cast<double>(with_truth));
        footer += buf;
    }
    doc.text(f.left, 505, footer, 11);
    doc.text(f.left + f.width - 220, 24, "range = bounds, green = predicted, black = true", 10);
    return doc.str();
}

}  // namespace uwrap
