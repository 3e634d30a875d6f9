// aarch64 variants. NEON has no 64-bit lane multiply, so mix_uniforms stays
// on the scalar path here.

#include <arm_neon.h>

#include "loosepack/simd/kernels.hpp"

namespace loosepack::simd::detail {
namespace {

void mix_uniforms_neon(MixKey key, std::span<const std::uint64_t> ranks, std::span<double> out) {
    for (std::size_t i = 0; i < ranks.size(); ++i) out[i] = mix_uniform(key, ranks[i]);
}

void coupled_step_neon(std::span<double> mass, std::span<const double> uniforms,
                       std::span<const double> coins, double prob, std::span<std::uint8_t> hits) {
    const std::size_t n = mass.size();
    const float64x2_t p = vdupq_n_f64(prob);
    const float64x2_t one = vdupq_n_f64(1.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t before = vld1q_f64(mass.data() + i);
        const float64x2_t u = vld1q_f64(uniforms.data() + i);
        const float64x2_t coin = vld1q_f64(coins.data() + i);
        const float64x2_t after = vaddq_f64(before, vmulq_f64(p, vsubq_f64(one, before)));
        const uint64x2_t coin_branch = vandq_u64(vcltq_f64(u, before), vcltq_f64(coin, p));
        const uint64x2_t fresh_branch = vandq_u64(vcleq_f64(before, u), vcltq_f64(u, after));
        const uint64x2_t hit = vorrq_u64(coin_branch, fresh_branch);
        hits[i] = static_cast<std::uint8_t>(vgetq_lane_u64(hit, 0) != 0);
        hits[i + 1] = static_cast<std::uint8_t>(vgetq_lane_u64(hit, 1) != 0);
        vst1q_f64(mass.data() + i, after);
    }
    for (; i < n; ++i) {
        const double before = mass[i];
        const double after = before + prob * (1.0 - before);
        const double u = uniforms[i];
        hits[i] = static_cast<std::uint8_t>((u < before && coins[i] < prob) || (before <= u && u < after));
        mass[i] = after;
    }
}

inline uint64x2_t lane_mask(const std::uint8_t* mask) {
    uint64x2_t m = vdupq_n_u64(0);
    m = vsetq_lane_u64(mask[0] ? ~0ULL : 0ULL, m, 0);
    m = vsetq_lane_u64(mask[1] ? ~0ULL : 0ULL, m, 1);
    return m;
}

double masked_product_neon(std::span<const double> factors, std::span<const std::uint8_t> mask) {
    const std::size_t n = factors.size();
    const float64x2_t one = vdupq_n_f64(1.0);
    float64x2_t acc = one;
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        acc = vmulq_f64(acc, vbslq_f64(lane_mask(mask.data() + i), vld1q_f64(factors.data() + i), one));
    }
    double lanes[2] = {vgetq_lane_f64(acc, 0), vgetq_lane_f64(acc, 1)};
    for (; i < n; ++i) {
        if (mask[i]) lanes[i % 2] *= factors[i];
    }
    return lanes[0] * lanes[1];
}

double masked_sum_neon(std::span<const double> values, std::span<const std::uint8_t> mask) {
    const std::size_t n = values.size();
    const float64x2_t zero = vdupq_n_f64(0.0);
    float64x2_t acc = zero;
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        acc = vaddq_f64(acc, vbslq_f64(lane_mask(mask.data() + i), vld1q_f64(values.data() + i), zero));
    }
    double lanes[2] = {vgetq_lane_f64(acc, 0), vgetq_lane_f64(acc, 1)};
    for (; i < n; ++i) {
        if (mask[i]) lanes[i % 2] += values[i];
    }
    return lanes[0] + lanes[1];
}

}  // namespace

const KernelTable kNeonKernels{
    Isa::Neon, mix_uniforms_neon, coupled_step_neon, masked_product_neon, masked_sum_neon,
};

}  // namespace loosepack::simd::detail
