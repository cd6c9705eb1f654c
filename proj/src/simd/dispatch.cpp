#include <cstdlib>
#include <string_view>

#include "inag/simd/kernels.hpp"

namespace inag::simd {

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
    }
    return "unknown";
}

const KernelTable& scalar_kernels() {
    static const KernelTable table{Isa::scalar,       scalar::dot,       scalar::axpy,
                                   scalar::max_abs,   scalar::fake_quant, scalar::adam_step};
    return table;
}

const KernelTable* avx2_kernels() {
#if defined(INAG_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
    static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    static const KernelTable table{Isa::avx2,      avx2::dot,        avx2::axpy,
                                   avx2::max_abs,  avx2::fake_quant, avx2::adam_step};
    return supported ? &table : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active() {
    static const KernelTable& chosen = [&]() -> const KernelTable& {
        const char* env = std::getenv("INAG_SIMD");
        if (env != nullptr && std::string_view(env) == "scalar") return scalar_kernels();
        if (const KernelTable* t = avx2_kernels()) return *t;
        return scalar_kernels();
    }();
    return chosen;
}

}  // namespace inag::simd
