// Compiled with -mavx2; only reached after a runtime CPU check.

#include <immintrin.h>

#include <cstring>

#include "loosepack/simd/kernels.hpp"

namespace loosepack::simd::detail {
namespace {

inline __m256i mullo64(__m256i a, __m256i b) {
    const __m256i a_hi = _mm256_srli_epi64(a, 32);
    const __m256i b_hi = _mm256_srli_epi64(b, 32);
    const __m256i lo_lo = _mm256_mul_epu32(a, b);
    const __m256i cross = _mm256_add_epi64(_mm256_mul_epu32(a, b_hi), _mm256_mul_epu32(a_hi, b));
    return _mm256_add_epi64(lo_lo, _mm256_slli_epi64(cross, 32));
}

inline __m256i mix64v(__m256i z) {
    const __m256i c1 = _mm256_set1_epi64x(static_cast<long long>(0xbf58476d1ce4e5b9ULL));
    const __m256i c2 = _mm256_set1_epi64x(static_cast<long long>(0x94d049bb133111ebULL));
    z = mullo64(_mm256_xor_si256(z, _mm256_srli_epi64(z, 30)), c1);
    z = mullo64(_mm256_xor_si256(z, _mm256_srli_epi64(z, 27)), c2);
    return _mm256_xor_si256(z, _mm256_srli_epi64(z, 31));
}

// Exact conversion of 53-bit integers: split into 21 + 32 bits and use the
// 2^52 exponent trick on each half.
inline __m256d u53_to_double(__m256i x) {
    const __m256i magic = _mm256_set1_epi64x(0x4330000000000000LL);
    const __m256d two52 = _mm256_set1_pd(0x1.0p52);
    const __m256i lo = _mm256_and_si256(x, _mm256_set1_epi64x(0xffffffffLL));
    const __m256i hi = _mm256_srli_epi64(x, 32);
    const __m256d lo_d = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(lo, magic)), two52);
    const __m256d hi_d = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(hi, magic)), two52);
    return _mm256_add_pd(_mm256_mul_pd(hi_d, _mm256_set1_pd(0x1.0p32)), lo_d);
}

void mix_uniforms_avx2(MixKey key, std::span<const std::uint64_t> ranks, std::span<double> out) {
    const std::size_t n = ranks.size();
    const __m256i lo = _mm256_set1_epi64x(static_cast<long long>(key.lo));
    const __m256i hi = _mm256_set1_epi64x(static_cast<long long>(key.hi));
    const __m256d scale = _mm256_set1_pd(0x1.0p-53);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256i r = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(ranks.data() + i));
        __m256i h = mix64v(_mm256_add_epi64(r, lo));
        h = mix64v(_mm256_xor_si256(h, hi));
        const __m256d u = _mm256_mul_pd(u53_to_double(_mm256_srli_epi64(h, 11)), scale);
        _mm256_storeu_pd(out.data() + i, u);
    }
    for (; i < n; ++i) out[i] = mix_uniform(key, ranks[i]);
}

void coupled_step_avx2(std::span<double> mass, std::span<const double> uniforms,
                       std::span<const double> coins, double prob, std::span<std::uint8_t> hits) {
    const std::size_t n = mass.size();
    const __m256d p = _mm256_set1_pd(prob);
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d before = _mm256_loadu_pd(mass.data() + i);
        const __m256d u = _mm256_loadu_pd(uniforms.data() + i);
        const __m256d coin = _mm256_loadu_pd(coins.data() + i);
        const __m256d after = _mm256_add_pd(before, _mm256_mul_pd(p, _mm256_sub_pd(one, before)));
        const __m256d coin_branch =
            _mm256_and_pd(_mm256_cmp_pd(u, before, _CMP_LT_OQ), _mm256_cmp_pd(coin, p, _CMP_LT_OQ));
        const __m256d fresh_branch =
            _mm256_and_pd(_mm256_cmp_pd(before, u, _CMP_LE_OQ), _mm256_cmp_pd(u, after, _CMP_LT_OQ));
        const int bits = _mm256_movemask_pd(_mm256_or_pd(coin_branch, fresh_branch));
        for (int lane = 0; lane < 4; ++lane) hits[i + lane] = static_cast<std::uint8_t>((bits >> lane) & 1);
        _mm256_storeu_pd(mass.data() + i, after);
    }
    for (; i < n; ++i) {
        const double before = mass[i];
        const double after = before + prob * (1.0 - before);
        const double u = uniforms[i];
        hits[i] = static_cast<std::uint8_t>((u < before && coins[i] < prob) || (before <= u && u < after));
        mass[i] = after;
    }
}

inline __m256d lane_mask(const std::uint8_t* mask) {
    std::int32_t packed;
    std::memcpy(&packed, mask, sizeof packed);
    const __m256i wide = _mm256_cvtepu8_epi64(_mm_cvtsi32_si128(packed));
    const __m256i zero = _mm256_cmpeq_epi64(wide, _mm256_setzero_si256());
    return _mm256_castsi256_pd(_mm256_xor_si256(zero, _mm256_set1_epi64x(-1)));
}

double masked_product_avx2(std::span<const double> factors, std::span<const std::uint8_t> mask) {
    const std::size_t n = factors.size();
    const __m256d one = _mm256_set1_pd(1.0);
    __m256d acc = one;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d f = _mm256_loadu_pd(factors.data() + i);
        acc = _mm256_mul_pd(acc, _mm256_blendv_pd(one, f, lane_mask(mask.data() + i)));
    }
    // tail stays in lane i % 4 so extending the input only multiplies lanes
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    for (; i < n; ++i) {
        if (mask[i]) lanes[i % 4] *= factors[i];
    }
    return (lanes[0] * lanes[1]) * (lanes[2] * lanes[3]);
}

double masked_sum_avx2(std::span<const double> values, std::span<const std::uint8_t> mask) {
    const std::size_t n = values.size();
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(values.data() + i);
        acc = _mm256_add_pd(acc, _mm256_and_pd(v, lane_mask(mask.data() + i)));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    for (; i < n; ++i) {
        if (mask[i]) lanes[i % 4] += values[i];
    }
    return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

}  // namespace

const KernelTable kAvx2Kernels{
    Isa::Avx2, mix_uniforms_avx2, coupled_step_avx2, masked_product_avx2, masked_sum_avx2,
};

}  // namespace loosepack::simd::detail
