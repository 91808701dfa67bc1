#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "uwrap/aggregation.hpp"

namespace uwrap {

struct Rgb {
    int r = 0, g = 0, b = 0;
    std::string hex() const;
};

enum class Hue { Positive, Negative };

// Linear blend from the hue's light anchor (uncertainty 0) to its dark anchor (1); input clamped.
Rgb uncertainty_shade(Hue hue, double uncertainty);
// Sequential palette for factor values already normalized to [0, 1].
Rgb factor_shade(double t);

std::string escape_xml(std::string_view s);

class SvgDocument {
public:
    SvgDocument(double width, double height);

    void rect(double x, double y, double w, double h, const std::string& fill, const std::string& stroke = "none");
    void circle(double cx, double cy, double r, const std::string& fill, const std::string& stroke = "none");
    void line(double x1, double y1, double x2, double y2, const std::string& stroke, double width = 1.0,
              const std::string& dash = "");
    void text(double x, double y, std::string_view content, double size = 12.0, const std::string& anchor = "start",
              const std::string& fill = "#000000");
    std::string str() const;

private:
    double width_, height_;
    std::string body_;
};

struct ScatterPoint {
    double x = 0.0;  // transformed coordinates
    double y = 0.0;
    Rgb color;
};

struct GateLines {
    double x = 0.0;
    double y = 0.0;
};

struct GatingPlotInput {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<double> xs, ys, uncertainties;
    std::vector<bool> predictions;
    std::optional<GateLines> gate;
    std::string positive_label = "predicted positive";
    std::string negative_label = "predicted negative";
    std::size_t max_points = 20000;
};

// Deterministic stride used when a plot holds more than `max_points` events.
std::size_t plot_stride(std::size_t n, std::size_t max_points);

std::string gating_plot_svg(const GatingPlotInput& in);

struct FactorPlotInput {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::string factor_name;
    std::vector<double> xs, ys, values;
    std::size_t max_points = 20000;
};

std::string factor_plot_svg(const FactorPlotInput& in);

// Samples on the x axis ordered by true ratio (predicted ratio when truth is absent);
// vertical ranges for [ratio_min, ratio_max], markers for prediction and truth.
std::string bounds_chart_svg(const std::string& cell_type, const std::vector<PopulationBounds>& bounds);

}  // namespace uwrap
