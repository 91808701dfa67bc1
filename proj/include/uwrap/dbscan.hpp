#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "uwrap/data_model.hpp"
#include "uwrap/transform.hpp"

namespace uwrap {

inline constexpr int kNoise = -1;

// Row-major point cloud.
struct PointSet {
    std::size_t dim = 0;
    std::vector<double> coords;

    std::size_t size() const { return dim == 0 ? 0 : coords.size() / dim; }
    std::span<const double> point(std::size_t i) const { return {coords.data() + i * dim, dim}; }
};

struct DbscanResult {
    std::vector<int> labels;         // cluster id or kNoise
    std::vector<bool> core;
    std::size_t cluster_count = 0;
};

// Neighborhoods are closed balls (distance <= eps) that include the point itself; a point
// is core when its neighborhood holds at least min_pts points. Clusters are numbered by
// their lowest-index core point, and a border point joins the lowest-numbered cluster
// among its core neighbors.
DbscanResult dbscan(const PointSet& points, double eps, std::size_t min_pts);

struct HomogeneityModel {
    std::vector<std::size_t> markers;
    double eps = 0.3;
    std::size_t min_pts = 20;
    std::vector<int> cluster;                  // per event
    std::vector<double> cluster_positive_ratio;  // per cluster
    double noise_positive_ratio = 0.0;
    std::vector<bool> predictions;
};

HomogeneityModel fit_homogeneity(const Sample& sample, const std::vector<bool>& predictions,
                                 const CellTypeSpec& spec, const MarkerTransform& transform, double eps,
                                 std::size_t min_pts);

// Fraction of the event's cluster (or of all noise events) sharing its prediction.
double eval_homogeneity(const HomogeneityModel& model, std::size_t event_index);

}  // namespace uwrap
