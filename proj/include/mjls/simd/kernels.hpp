#pragma once

// Data-parallel inner loops used by the dense linear algebra, the covariance
// recursion and the simulator. Each kernel has a scalar reference version and
// optional vector versions (AVX2+FMA on x86-64, NEON on AArch64). The active
// table is chosen once at first use from the CPU's capabilities; setting
// MJLS_SIMD=scalar in the environment forces the reference table.

#include <cassert>
#include <cstddef>
#include <span>
#include <string_view>

namespace mjls::simd {

struct KernelTable {
    std::string_view name;
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // y = alpha * x
    void (*scale)(double alpha, const double* x, double* y, std::size_t n);
    double (*abs_sum)(const double* x, std::size_t n);
    double (*sum_sq)(const double* x, std::size_t n);
};

const KernelTable& scalar_table() noexcept;
// Null when the binary was built without the corresponding translation unit.
const KernelTable* avx2_table() noexcept;
const KernelTable* neon_table() noexcept;

/// Best table supported by the running CPU (honours MJLS_SIMD=scalar).
const KernelTable& active() noexcept;

/// All tables usable on this machine, scalar first. Used by equivalence tests.
std::span<const KernelTable* const> available_tables() noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    assert(x.size() == y.size());
    active().axpy(alpha, x.data(), y.data(), x.size());
}

inline void scale(double alpha, std::span<const double> x, std::span<double> y) {
    assert(x.size() == y.size());
    active().scale(alpha, x.data(), y.data(), x.size());
}

inline double abs_sum(std::span<const double> x) { return active().abs_sum(x.data(), x.size()); }

inline double sum_sq(std::span<const double> x) { return active().sum_sq(x.data(), x.size()); }

}  // namespace mjls::simd
