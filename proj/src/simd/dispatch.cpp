#include <cstdlib>
#include <stdexcept>
#include <string>

#include "loosepack/simd/kernels.hpp"

namespace loosepack::simd {

std::string_view to_string(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
        case Isa::Neon: return "neon";
    }
    return "?";
}

bool isa_supported(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar: return true;
        case Isa::Avx2:
#if defined(LOOSEPACK_HAVE_AVX2)
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
        case Isa::Neon:
#if defined(LOOSEPACK_HAVE_NEON)
            return true;
#else
            return false;
#endif
    }
    return false;
}

const KernelTable& kernels_for(Isa isa) {
    if (!isa_supported(isa)) {
        throw std::runtime_error("kernel ISA '" + std::string(to_string(isa)) + "' is not available");
    }
    switch (isa) {
#if defined(LOOSEPACK_HAVE_AVX2)
        case Isa::Avx2: return detail::kAvx2Kernels;
#endif
#if defined(LOOSEPACK_HAVE_NEON)
        case Isa::Neon: return detail::kNeonKernels;
#endif
        default: return detail::kScalarKernels;
    }
}

namespace {

const KernelTable& select() {
    if (const char* forced = std::getenv("LOOSEPACK_SIMD")) {
        const std::string name(forced);
        for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
            if (name == to_string(isa)) return kernels_for(isa);
        }
        throw std::runtime_error("LOOSEPACK_SIMD: unknown ISA '" + name + "'");
    }
    for (Isa isa : {Isa::Avx2, Isa::Neon}) {
        if (isa_supported(isa)) return kernels_for(isa);
    }
    return detail::kScalarKernels;
}

}  // namespace

const KernelTable& kernels() {
    static const KernelTable& chosen = select();
    return chosen;
}

}  // namespace loosepack::simd
