#pragma once

#include <cstdint>

namespace uwrap {

// P(X <= k) for X ~ Binomial(n, p).
double binomial_cdf(std::uint64_t k, std::uint64_t n, double p);

// One-sided exact (Clopper-Pearson) upper confidence bound on an error probability after
// observing k errors in n trials: the smallest u with P(X <= k | n, u) <= 1 - confidence.
// Returns 1 when k == n; throws domain_error when n == 0, k > n or confidence outside (0, 1).
double clopper_pearson_upper(std::uint64_t k, std::uint64_t n, double confidence);

}  // namespace uwrap
