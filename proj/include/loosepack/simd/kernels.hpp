#pragma once

// Data-parallel inner loops of the sprinkle engine. Every kernel has a scalar
// reference; AVX2 (x86-64) and NEON (aarch64) variants are selected at
// runtime. mix_uniforms and coupled_step are bit-exact across variants; the
// masked reductions re-associate and agree to within rounding.

#include <cstdint>
#include <span>
#include <string_view>

namespace loosepack::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa) noexcept;

struct MixKey {
    std::uint64_t lo = 0;
    std::uint64_t hi = 0;
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Per-rank uniform in [0,1) for ranks below 2^64.
constexpr double mix_uniform(MixKey key, std::uint64_t rank) noexcept {
    std::uint64_t h = mix64(rank + key.lo);
    h = mix64(h ^ key.hi);
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

struct KernelTable {
    Isa isa;

    /// out[i] = mix_uniform(key, ranks[i]).
    void (*mix_uniforms)(MixKey key, std::span<const std::uint64_t> ranks, std::span<double> out);

    /// One coupled query over a batch of tuples. For each i, with
    /// before = mass[i] and after = before + prob * (1 - before):
    /// hit[i] = (u < before && coin < prob) || (before <= u && u < after),
    /// then mass[i] = after.
    void (*coupled_step)(std::span<double> mass, std::span<const double> uniforms,
                         std::span<const double> coins, double prob, std::span<std::uint8_t> hits);

    /// Product of factors[i] over mask[i] != 0 (1.0 when none). For factors
    /// in [0,1] the result is non-increasing as the input is extended.
    double (*masked_product)(std::span<const double> factors, std::span<const std::uint8_t> mask);

    /// Sum of values[i] over mask[i] != 0.
    double (*masked_sum)(std::span<const double> values, std::span<const std::uint8_t> mask);
};

bool isa_supported(Isa isa) noexcept;

/// Kernel table for a specific ISA; throws std::runtime_error if the ISA is
/// not compiled in or not supported by this CPU.
const KernelTable& kernels_for(Isa isa);

/// Best supported table. LOOSEPACK_SIMD=scalar|avx2|neon overrides the choice.
const KernelTable& kernels();

namespace detail {
extern const KernelTable kScalarKernels;
#if defined(LOOSEPACK_HAVE_AVX2)
extern const KernelTable kAvx2Kernels;
#endif
#if defined(LOOSEPACK_HAVE_NEON)
extern const KernelTable kNeonKernels;
#endif
}  // namespace detail

}  // namespace loosepack::simd
