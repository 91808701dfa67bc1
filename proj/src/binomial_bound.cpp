#include "uwrap/binomial_bound.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "uwrap/error.hpp"

namespace uwrap {

double binomial_cdf(std::uint64_t k, std::uint64_t n, double p) {
    if (k >= n) return 1.0;
    if (p <= 0.0) return 1.0;
    if (p >= 1.0) return 0.0;
    const double nd = static_cast<double>(n);
    const double log_p = std::log(p);
    const double log_q = std::log1p(-p);
    const double log_nfact = std::lgamma(nd + 1.0);
    // Log-sum-exp over the pmf terms j = 0..k.
    std::vector<double> terms;
    terms.reserve(k + 1);
    double peak = -INFINITY;
    for (std::uint64_t j = 0; j <= k; ++j) {
        const double jd = static_cast<double>(j);
        double t = log_nfact - std::lgamma(jd + 1.0) - std::lgamma(nd - jd + 1.0) + jd * log_p + (nd - jd) * log_q;
        terms.push_back(t);
        if (t > peak) peak = t;
    }
    double sum = 0.0;
    for (double t : terms) sum += std::exp(t - peak);
    return std::min(1.0, std::exp(peak + std::log(sum)));
}

double clopper_pearson_upper(std::uint64_t k, std::uint64_t n, double confidence) {
    if (n == 0) throw domain_error("clopper_pearson_upper: n must be at least 1");
    if (k > n) throw domain_error("clopper_pearson_upper: k exceeds n");
    if (!(confidence > 0.0 && confidence < 1.0)) throw domain_error("confidence must lie in (0, 1)");
    if (k == n) return 1.0;
    const double alpha = 1.0 - confidence;
    // The CDF is strictly decreasing in p; hi always satisfies cdf(hi) <= alpha.
    double lo = 0.0, hi = 1.0;
    while (hi - lo > 1e-16) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (binomial_cdf(k, n, mid) <= alpha)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

}  // namespace uwrap
