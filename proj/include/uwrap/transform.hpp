#pragma once

#include <span>
#include <vector>

#include "uwrap/io_util.hpp"

namespace uwrap {

// Signed shifted log10: t(x) = sign(x) * log10(1 + |x| / offset).
// Odd, strictly increasing, t(0) = 0, defined on all reals.
struct MarkerTransform {
    double offset = 1.0;

    double apply(double x) const;
    double inverse(double y) const;
    std::vector<double> apply(std::span<const double> xs) const;
};

MarkerTransform transform_from_json(const json& j);
json transform_to_json(const MarkerTransform& t);

}  // namespace uwrap
