#include "loosepack/binomial.hpp"

#include <array>
#include <string>
#include <vector>

namespace loosepack {
namespace {

constexpr std::uint64_t kTableRows = 4096;

struct BinomialTable {
    // rows[n][k] for k <= kMaxUniformity
    std::vector<std::array<Rank, kMaxUniformity + 1>> rows;

    BinomialTable() : rows(kTableRows) {
        for (std::uint64_t n = 0; n < kTableRows; ++n) {
            rows[n][0] = 1;
            for (unsigned k = 1; k <= kMaxUniformity; ++k) {
                if (n == 0) {
                    rows[n][k] = 0;
                } else {
                    rows[n][k] = rows[n - 1][k - 1] + rows[n - 1][k];
                }
            }
        }
    }
};

const BinomialTable& table() {
    static const BinomialTable t;
    return t;
}

}  // namespace

Rank binomial(std::uint64_t n, unsigned k) {
    if (k > n) return 0;
    if (k > n - k) k = static_cast<unsigned>(n - k);
    Rank result = 1;
    for (unsigned i = 1; i <= k; ++i) {
        // result * (n-k+i) / i stays integral at every step
        result *= Rank(n - k + i);
        result /= i;
    }
    return result;
}

Rank binomial_cached(std::uint64_t n, unsigned k) {
    if (n < kTableRows && k <= kMaxUniformity) return table().rows[n][k];
    return binomial(n, k);
}

long double binomial_real(long double n, unsigned k) {
    if (n < k) return 0.0L;
    long double result = 1.0L;
    for (unsigned i = 1; i <= k; ++i) {
        result *= (n - k + i) / static_cast<long double>(i);
    }
    return result;
}

void require_rank_domain(std::uint64_t n, unsigned k) {
    if (n > kMaxRankedVertices || k > kMaxUniformity) {
        throw RangeError("rank domain exceeded: n=" + std::to_string(n) + ", k=" + std::to_string(k) +
                         " (exact ranks need n <= 1000000 and k <= 8)");
    }
}

double to_double(const Rank& r) { return r.convert_to<double>(); }

}  // namespace loosepack
