#pragma once

#include <cstdint>

#include "loosepack/types.hpp"

namespace loosepack {

/// Exact C(n, k). Rows with n < 4096 come from a shared table built on first
/// use; larger n fall back to the multiplicative formula.
Rank binomial_cached(std::uint64_t n, unsigned k);
Rank binomial(std::uint64_t n, unsigned k);

/// C(n, k) in long double, for closed-form bounds where n is large.
long double binomial_real(long double n, unsigned k);

/// Throws RangeError unless (n, k) lies in the exact rank domain.
void require_rank_domain(std::uint64_t n, unsigned k);

/// Rank -> double, rounding to nearest.
double to_double(const Rank& r);

}  // namespace loosepack
