#include "uwrap/transform.hpp"

#include <cmath>

#include "uwrap/error.hpp"

namespace uwrap {

double MarkerTransform::apply(double x) const {
    double m = std::log10(1.0 + std::abs(x) / offset);
    return std::signbit(x) ? -m : m;
}

double MarkerTransform::inverse(double y) const {
    double m = offset * (std::pow(10.0, std::abs(y)) - 1.0);
    return std::signbit(y) ? -m : m;
}

std::vector<double> MarkerTransform::apply(std::span<const double> xs) const {
    std::vector<double> out;
    out.reserve(xs.size());
    for (double x : xs) out.push_back(apply(x));
    return out;
}

MarkerTransform transform_from_json(const json& j) {
    MarkerTransform t;
    if (j.is_null()) return t;
    auto kind = j.value("kind", std::string("shifted-log"));
    if (kind != "shifted-log") throw config_error("unsupported marker transform '" + kind + "'");
    t.offset = j.value("offset", 1.0);
    if (!(t.offset > 0.0)) throw config_error("transform offset must be positive");
    return t;
}

json transform_to_json(const MarkerTransform& t) { return {{"kind", "shifted-log"}, {"offset", t.offset}}; }

}  // namespace uwrap
