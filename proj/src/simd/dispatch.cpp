#include <array>
#include <cstdlib>
#include <string_view>

#include "mjls/simd/kernels.hpp"

namespace mjls::simd {

#if !defined(MJLS_HAVE_AVX2_TABLE)
const KernelTable* avx2_table() noexcept { return nullptr; }
#endif
#if !defined(MJLS_HAVE_NEON_TABLE)
const KernelTable* neon_table() noexcept { return nullptr; }
#endif

namespace {

bool cpu_has_avx2_fma() noexcept {
#if defined(MJLS_HAVE_AVX2_TABLE) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

struct Registry {
    std::array<const KernelTable*, 3> tables{};
    std::size_t count = 0;
    const KernelTable* best = nullptr;

    Registry() {
        tables[count++] = &scalar_table();
        if (const auto* t = avx2_table(); t != nullptr && cpu_has_avx2_fma()) tables[count++] = t;
        // AArch64 always has Advanced SIMD.
        if (const auto* t = neon_table(); t != nullptr) tables[count++] = t;
        best = tables[count - 1];
        if (const char* env = std::getenv("MJLS_SIMD"); env != nullptr && std::string_view(env) == "scalar") {
            best = &scalar_table();
        }
    }
};

const Registry& registry() noexcept {
    static const Registry r;
    return r;
}

}  // namespace

const KernelTable& active() noexcept { return *registry().best; }

std::span<const KernelTable* const> available_tables() noexcept {
    const auto& r = registry();
    return {r.tables.data(), r.count};
}

}  // namespace mjls::simd
