#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <numbers>
#include <numeric>

#include "mjls/errors.hpp"
#include "mjls/linalg.hpp"
#include "oracle.hpp"

using mjls::DenseMatrix;

TEST_CASE("dense matrix arithmetic") {
    const DenseMatrix a{{1.0, 2.0}, {3.0, 4.0}};
    const DenseMatrix b{{0.0, 1.0}, {1.0, 0.0}};
    CHECK((a * b) == DenseMatrix{{2.0, 1.0}, {4.0, 3.0}});
    CHECK((a + b) == DenseMatrix{{1.0, 3.0}, {4.0, 4.0}});
    CHECK((a - a).is_zero());
    CHECK(a.transpose() == DenseMatrix{{1.0, 3.0}, {2.0, 4.0}});
    const std::vector<double> x{1.0, -1.0};
    CHECK(a * std::span<const double>(x) == std::vector<double>{-1.0, -1.0});
    CHECK(DenseMatrix::identity(3)(2, 2) == 1.0);
    CHECK(mjls::max_abs_diff(a, b) == 4.0);
}

TEST_CASE("kron follows the block definition") {
    const DenseMatrix a{{1.0, 2.0}, {3.0, 4.0}};
    const DenseMatrix b{{0.0, 5.0}, {6.0, 7.0}};
    const DenseMatrix k = mjls::kron(a, b);
    REQUIRE(k.rows() == 4);
    REQUIRE(k.cols() == 4);
    // Hand-expanded a (x) b.
    const DenseMatrix expected{{0, 5, 0, 10}, {6, 7, 12, 14}, {0, 15, 0, 20}, {18, 21, 24, 28}};
    CHECK(k == expected);

    const DenseMatrix rect = mjls::kron(DenseMatrix(2, 3, 1.0), DenseMatrix(1, 2, 2.0));
    CHECK(rect.rows() == 2);
    CHECK(rect.cols() == 6);
}

TEST_CASE("kron refuses results above the entry limit") {
    CHECK_THROWS_AS(mjls::kron(DenseMatrix(10, 10), DenseMatrix(10, 10), 9999), mjls::LimitError);
    CHECK_NOTHROW(mjls::kron(DenseMatrix(10, 10), DenseMatrix(10, 10), 10000));
}

TEST_CASE("kron_power") {
    const DenseMatrix p{{0.5, 0.5}, {0.3, 0.7}};
    CHECK(mjls::kron_power(p, 0) == DenseMatrix{{1.0}});
    CHECK(mjls::kron_power(p, 1) == p);
    const DenseMatrix p3 = mjls::kron_power(p, 3);
    CHECK(p3.rows() == 8);
    // Entry ((1,0,1),(0,1,1)) = p10 * p01 * p11.
    CHECK(p3(0b101, 0b011) == doctest::Approx(0.3 * 0.5 * 0.7));
    for (std::size_t r = 0; r < 8; ++r) {
        double sum = 0.0;
        for (double v : p3.row(r)) sum += v;
        CHECK(sum == doctest::Approx(1.0));
    }
}

TEST_CASE("inf_norm is the largest absolute row sum") {
    CHECK(mjls::inf_norm(DenseMatrix{{1.0, -2.0}, {0.5, 0.5}}) == 3.0);
    CHECK(mjls::inf_norm(DenseMatrix(3, 3)) == 0.0);
}

TEST_CASE("inf_norm of a Kronecker product factorises") {
    oracle::Rng rng(3);
    for (int t = 0; t < 50; ++t) {
        const DenseMatrix a = rng.matrix(1 + rng.index(4), 1 + rng.index(4));
        const DenseMatrix b = rng.matrix(1 + rng.index(4), 1 + rng.index(4));
        CHECK(mjls::inf_norm(mjls::kron(a, b)) == doctest::Approx(mjls::inf_norm(a) * mjls::inf_norm(b)).epsilon(1e-14));
    }
}

TEST_CASE("spectral radius of hand-solvable matrices") {
    CHECK(mjls::spectral_radius(DenseMatrix{{0.5}}) == doctest::Approx(0.5));
    CHECK(mjls::spectral_radius(DenseMatrix{{-2.0}}) == doctest::Approx(2.0));
    // Rotation by 30 degrees: eigenvalues on the unit circle.
    const double c = std::cos(std::numbers::pi / 6), s = std::sin(std::numbers::pi / 6);
    CHECK(mjls::spectral_radius(DenseMatrix{{c, -s}, {s, c}}) == doctest::Approx(1.0).epsilon(1e-12));
    // Nilpotent.
    CHECK(mjls::spectral_radius(DenseMatrix{{0.0, 1.0}, {0.0, 0.0}}) == doctest::Approx(0.0).epsilon(1e-12));
    // [[2,1],[1,2]] has eigenvalues 1 and 3.
    CHECK(mjls::spectral_radius(DenseMatrix{{2.0, 1.0}, {1.0, 2.0}}) == doctest::Approx(3.0));
}

TEST_CASE("dense spectral radius matches the characteristic-polynomial oracle") {
    oracle::Rng rng(4);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 1 + rng.index(8);
        const DenseMatrix m = rng.matrix(n, n);
        CAPTURE(n);
        CHECK(mjls::spectral_radius(m) == doctest::Approx(oracle::spectral_radius(m)).epsilon(1e-7));
    }
}

TEST_CASE("eigenvalue magnitudes of a triangular matrix are its diagonal") {
    const DenseMatrix t{{0.3, 5.0, 1.0}, {0.0, -0.9, 2.0}, {0.0, 0.0, 0.1}};
    auto mags = mjls::eigenvalue_magnitudes(t);
    std::sort(mags.begin(), mags.end());
    REQUIRE(mags.size() == 3);
    CHECK(mags[0] == doctest::Approx(0.1));
    CHECK(mags[1] == doctest::Approx(0.3));
    CHECK(mags[2] == doctest::Approx(0.9));
}

namespace {

// Permuted block-triangular matrix whose spectrum is known by construction:
// 1x1 blocks give real eigenvalues, 2x2 rotation blocks give r e^{+-i theta}.
DenseMatrix known_spectrum(oracle::Rng& rng, std::size_t n, double dominant, bool complex_dominant) {
    DenseMatrix t(n, n);
    std::size_t i = 0;
    if (complex_dominant) {
        const double th = 0.7;
        t(0, 0) = dominant * std::cos(th);
        t(0, 1) = -dominant * std::sin(th);
        t(1, 0) = dominant * std::sin(th);
        t(1, 1) = dominant * std::cos(th);
        i = 2;
    } else {
        t(0, 0) = -dominant;
        i = 1;
    }
    for (; i < n; ++i) t(i, i) = rng.uniform(-0.8, 0.8) * dominant;
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = r + 1; c < n; ++c)
            if (!(complex_dominant && r == 0 && c == 1) && rng.coin(0.02)) t(r, c) = rng.uniform(-0.5, 0.5);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng.engine());
    DenseMatrix out(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) out(perm[r], perm[c]) = t(r, c);
    return out;
}

}  // namespace

TEST_CASE("Arnoldi path recovers known dominant eigenvalues") {
    oracle::Rng rng(5);
    mjls::SpectralOptions opts;
    opts.dense_limit = 8;  // force the iterative path
    for (bool complex_dominant : {false, true}) {
        for (std::size_t n : {50u, 300u, 700u}) {
            CAPTURE(n);
            CAPTURE(complex_dominant);
            const DenseMatrix m = known_spectrum(rng, n, 0.93, complex_dominant);
            CHECK(mjls::spectral_radius(mjls::DenseOperator(m), opts) == doctest::Approx(0.93).epsilon(1e-7));
            CHECK(mjls::spectral_radius(m, opts) == doctest::Approx(0.93).epsilon(1e-7));
        }
    }
}

TEST_CASE("small operators are solved densely") {
    const DenseMatrix m{{0.0, 2.0}, {0.5, 0.0}};  // eigenvalues +-1
    CHECK(mjls::spectral_radius(mjls::DenseOperator(m)) == doctest::Approx(1.0).epsilon(1e-12));
}
