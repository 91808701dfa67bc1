#pragma once

#include <string_view>
#include <vector>

#include "uwrap/data_model.hpp"
#include "uwrap/transform.hpp"

namespace uwrap {

enum class BandwidthRule { Scott };

BandwidthRule parse_bandwidth_rule(std::string_view s);
std::string_view to_string(BandwidthRule r);

// Product-Gaussian 2D KDE over the transformed values of one marker pair.
struct DensityModel {
    MarkerPair pair;
    MarkerTransform transform;
    double h_x = 1.0;
    double h_y = 1.0;
    std::vector<double> xs;  // support, sorted by x
    std::vector<double> ys;

    // Density at transformed coordinates.
    double eval(double tx, double ty) const;
};

inline constexpr double kMinBandwidth = 1e-6;

// Per-axis Scott's rule for two dimensions: sd * n^(-1/6), sd with n-1 denominator.
double scott_bandwidth(const std::vector<double>& values);

DensityModel fit_density(const Sample& sample, MarkerPair pair, const MarkerTransform& transform,
                         BandwidthRule rule = BandwidthRule::Scott);
double eval_density(const DensityModel& model, const Event& event);

}  // namespace uwrap
