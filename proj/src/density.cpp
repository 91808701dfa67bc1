#include "uwrap/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "uwrap/error.hpp"

namespace uwrap {

namespace {
// Kernel terms beyond this many bandwidths in x are below exp(-72) and skipped.
constexpr double kCutoff = 12.0;
}  // namespace

BandwidthRule parse_bandwidth_rule(std::string_view s) {
    if (s == "scott") return BandwidthRule::Scott;
    throw config_error("unknown KDE bandwidth rule '" + std::string(s) + "'");
}

std::string_view to_string(BandwidthRule) { return "scott"; }

double scott_bandwidth(const std::vector<double>& values) {
    const auto n = values.size();
    double sd = 0.0;
    if (n > 1) {
        double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        sd = std::sqrt(ss / static_cast<double>(n - 1));
    }
    double h = sd * std::pow(static_cast<double>(std::max<std::size_t>(n, 1)), -1.0 / 6.0);
    return std::max(h, kMinBandwidth);
}

DensityModel fit_density(const Sample& sample, MarkerPair pair, const MarkerTransform& transform, BandwidthRule) {
    if (sample.events.empty()) throw domain_error("density needs a nonempty sample");
    DensityModel m;
    m.pair = pair;
    m.transform = transform;
    std::vector<double> xs, ys;
    xs.reserve(sample.size());
    ys.reserve(sample.size());
    for (const auto& e : sample.events) {
        if (pair.first >= e.markers.size() || pair.second >= e.markers.size())
            throw input_error("density pair references a missing marker");
        xs.push_back(transform.apply(e.markers[pair.first]));
        ys.push_back(transform.apply(e.markers[pair.second]));
    }
    m.h_x = scott_bandwidth(xs);
    m.h_y = scott_bandwidth(ys);
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return xs[a] < xs[b]; });
    m.xs.reserve(xs.size());
    m.ys.reserve(xs.size());
    for (auto i : order) {
        m.xs.push_back(xs[i]);
        m.ys.push_back(ys[i]);
    }
    return m;
}

double DensityModel::eval(double tx, double ty) const {
    auto lo = std::lower_bound(xs.begin(), xs.end(), tx - kCutoff * h_x) - xs.begin();
    auto hi = std::upper_bound(xs.begin(), xs.end(), tx + kCutoff * h_x) - xs.begin();
    double sum = 0.0;
    for (auto i = lo; i < hi; ++i) {
        const double u = (tx - xs[i]) / h_x;
        const double v = (ty - ys[i]) / h_y;
        sum += std::exp(-0.5 * (u * u + v * v));
    }
    const double norm = 2.0 * std::numbers::pi * h_x * h_y * static_cast<double>(xs.size());
    return sum / norm;
}

double eval_density(const DensityModel& model, const Event& event) {
    return model.eval(model.transform.apply(event.markers.at(model.pair.first)),
                      model.transform.apply(event.markers.at(model.pair.second)));
}

}  // namespace uwrap
