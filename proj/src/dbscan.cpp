#include "uwrap/dbscan.hpp"

#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <unordered_map>

#include "uwrap/error.hpp"

namespace uwrap {

namespace {

constexpr std::size_t kMaxGridDim = 4;

struct CellKeyHash {
    std::size_t operator()(const std::vector<std::int64_t>& key) const noexcept {
        std::uint64_t h = 1469598103934665603ull;
        for (auto v : key) {
            h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        }
        return static_cast<std::size_t>(h);
    }
};

// Uniform grid with cell side just above eps: every eps-neighbor lies in an adjacent cell.
class NeighborIndex {
public:
    NeighborIndex(const PointSet& pts, double eps) : pts_(pts), eps_(eps * (1.0 + 1e-9)), eps2_(eps * eps) {
        use_grid_ = pts.dim > 0 && pts.dim <= kMaxGridDim;
        if (!use_grid_) return;
        for (std::size_t i = 0; i < pts.size(); ++i) cells_[key_of(i)].push_back(static_cast<std::uint32_t>(i));
    }

    template <class F>
    void for_each_neighbor(std::size_t i, F&& f) const {
        auto p = pts_.point(i);
        if (!use_grid_) {
            for (std::size_t j = 0; j < pts_.size(); ++j)
                if (within(p, pts_.point(j))) f(j);
            return;
        }
        auto base = key_of(i);
        std::vector<std::int64_t> key(base.size());
        const std::size_t d = base.size();
        std::size_t combos = 1;
        for (std::size_t k = 0; k < d; ++k) combos *= 3;
        for (std::size_t c = 0; c < combos; ++c) {
            std::size_t r = c;
            for (std::size_t k = 0; k < d; ++k) {
                key[k] = base[k] + static_cast<std::int64_t>(r % 3) - 1;
                r /= 3;
            }
            auto it = cells_.find(key);
            if (it == cells_.end()) continue;
            for (auto j : it->second)
                if (within(p, pts_.point(j))) f(j);
        }
    }

private:
    std::vector<std::int64_t> key_of(std::size_t i) const {
        auto p = pts_.point(i);
        std::vector<std::int64_t> key(p.size());
        for (std::size_t k = 0; k < p.size(); ++k) key[k] = static_cast<std::int64_t>(std::floor(p[k] / eps_));
        return key;
    }

    bool within(std::span<const double> a, std::span<const double> b) const {
        double s = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            double d = a[k] - b[k];
            s += d * d;
        }
        return s <= eps2_;
    }

    const PointSet& pts_;
    double eps_;
    double eps2_;
    bool use_grid_ = false;
    std::unordered_map<std::vector<std::int64_t>, std::vector<std::uint32_t>, CellKeyHash> cells_;
};

}  // namespace

DbscanResult dbscan(const PointSet& points, double eps, std::size_t min_pts) {
    if (!(eps > 0.0)) throw config_error("DBSCAN eps must be positive");
    if (min_pts < 1) throw config_error("DBSCAN min_pts must be at least 1");
    const std::size_t n = points.size();
    DbscanResult r;
    r.labels.assign(n, kNoise);
    r.core.assign(n, false);
    NeighborIndex index(points, eps);

    for (std::size_t i = 0; i < n; ++i) {
        std::size_t count = 0;
        index.for_each_neighbor(i, [&](std::size_t) { ++count; });
        r.core[i] = count >= min_pts;
    }

    int next = 0;
    std::deque<std::size_t> frontier;
    for (std::size_t i = 0; i < n; ++i) {
        if (!r.core[i] || r.labels[i] != kNoise) continue;
        const int id = next++;
        r.labels[i] = id;
        frontier.push_back(i);
        while (!frontier.empty()) {
            auto c = frontier.front();
            frontier.pop_front();
            index.for_each_neighbor(c, [&](std::size_t j) {
                if (r.labels[j] != kNoise) return;
                r.labels[j] = id;
                if (r.core[j]) frontier.push_back(j);
            });
        }
    }
    r.cluster_count = static_cast<std::size_t>(next);
    return r;
}

HomogeneityModel fit_homogeneity(const Sample& sample, const std::vector<bool>& predictions,
                                 const CellTypeSpec& spec, const MarkerTransform& transform, double eps,
                                 std::size_t min_pts) {
    if (predictions.size() != sample.size())
        throw input_error("homogeneity: predictions not aligned with sample events");
    HomogeneityModel m;
    m.markers = gated_markers(spec);
    m.eps = eps;
    m.min_pts = min_pts;
    m.predictions = predictions;

    PointSet pts;
    pts.dim = m.markers.size();
    pts.coords.reserve(sample.size() * pts.dim);
    for (const auto& e : sample.events)
        for (auto mi : m.markers) pts.coords.push_back(transform.apply(e.markers.at(mi)));

    if (pts.dim == 0) {
        // No gated markers: the whole sample is one cluster.
        m.cluster.assign(sample.size(), 0);
    } else {
        m.cluster = dbscan(pts, eps, min_pts).labels;
    }

    int clusters = 0;
    for (int c : m.cluster) clusters = std::max(clusters, c + 1);
    std::vector<std::size_t> size(clusters, 0), positive(clusters, 0);
    std::size_t noise = 0, noise_positive = 0;
    for (std::size_t i = 0; i < m.cluster.size(); ++i) {
        if (m.cluster[i] == kNoise) {
            ++noise;
            noise_positive += predictions[i] ? 1 : 0;
        } else {
            ++size[m.cluster[i]];
            positive[m.cluster[i]] += predictions[i] ? 1 : 0;
        }
    }
    m.cluster_positive_ratio.resize(clusters);
    for (int c = 0; c < clusters; ++c)
        m.cluster_positive_ratio[c] = static_cast<double>(positive[c]) / static_cast<double>(size[c]);
    m.noise_positive_ratio = noise ? static_cast<double>(noise_positive) / static_cast<double>(noise) : 0.0;
    return m;
}

double eval_homogeneity(const HomogeneityModel& model, std::size_t event_index) {
    if (event_index >= model.cluster.size()) throw input_error("homogeneity: event index out of range");
    const int c = model.cluster[event_index];
    const double pos = c == kNoise ? model.noise_positive_ratio : model.cluster_positive_ratio[c];
    return model.predictions[event_index] ? pos : 1.0 - pos;
}

}  // namespace uwrap
