#include "kernels_impl.hpp"

#include <cstdlib>
#include <string_view>

namespace sweep::kernels {

const KernelTable& scalar_table() {
    static const KernelTable table{"scalar", &detail::min_segment_scalar,
                                   &detail::grid_quad_sup_scalar, &detail::max_half_gap_scalar};
    return table;
}

const KernelTable* avx2_table() {
#if defined(SWEEP_HAVE_AVX2_TU)
    static const bool supported = __builtin_cpu_supports("avx2");
    static const KernelTable table{"avx2", &detail::min_segment_avx2,
                                   &detail::grid_quad_sup_avx2, &detail::max_half_gap_avx2};
    return supported ? &table : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active() {
    static const KernelTable& chosen = []() -> const KernelTable& {
        const char* env = std::getenv("SWEEP_SIMD");
        if (env != nullptr && std::string_view(env) == "scalar") return scalar_table();
        if (const KernelTable* t = avx2_table()) return *t;
        return scalar_table();
    }();
    return chosen;
}

} // namespace sweep::kernels
