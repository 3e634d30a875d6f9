#include "loosepack/simd/kernels.hpp"

namespace loosepack::simd::detail {
namespace {

void mix_uniforms_scalar(MixKey key, std::span<const std::uint64_t> ranks, std::span<double> out) {
    for (std::size_t i = 0; i < ranks.size(); ++i) out[i] = mix_uniform(key, ranks[i]);
}

void coupled_step_scalar(std::span<double> mass, std::span<const double> uniforms,
                         std::span<const double> coins, double prob, std::span<std::uint8_t> hits) {
    for (std::size_t i = 0; i < mass.size(); ++i) {
        const double before = mass[i];
        const double after = before + prob * (1.0 - before);
        const double u = uniforms[i];
        const bool coin_branch = u < before && coins[i] < prob;
        const bool fresh_branch = before <= u && u < after;
        hits[i] = static_cast<std::uint8_t>(coin_branch || fresh_branch);
        mass[i] = after;
    }
}

double masked_product_scalar(std::span<const double> factors, std::span<const std::uint8_t> mask) {
    double acc = 1.0;
    for (std::size_t i = 0; i < factors.size(); ++i) {
        if (mask[i]) acc *= factors[i];
    }
    return acc;
}

double masked_sum_scalar(std::span<const double> values, std::span<const std::uint8_t> mask) {
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (mask[i]) acc += values[i];
    }
    return acc;
}

}  // namespace

const KernelTable kScalarKernels{
    Isa::Scalar, mix_uniforms_scalar, coupled_step_scalar, masked_product_scalar, masked_sum_scalar,
};

}  // namespace loosepack::simd::detail
