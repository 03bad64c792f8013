#include <cstdlib>
#include <string_view>

#include "btfp/kernels.hpp"

namespace btfp::kernels {

#if BTFP_WITH_AVX2
const KernelTable& avx2_table();
#endif

const KernelTable* avx2() {
#if BTFP_WITH_AVX2 && (defined(__GNUC__) || defined(__clang__))
    static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return supported ? &avx2_table() : nullptr;
#else
    return nullptr;
#endif
}

namespace {

const KernelTable& select() {
    const char* env = std::getenv("BTFP_KERNELS");
    const std::string_view want = env ? env : "";
    if (want == "scalar") return scalar();
    if (const KernelTable* t = avx2()) return *t;
    return scalar();
}

} // namespace

const KernelTable& active() {
    static const KernelTable& table = select();
    return table;
}

} // namespace btfp::kernels
