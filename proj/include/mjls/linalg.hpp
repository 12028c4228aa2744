#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mjls/dense_matrix.hpp"

namespace mjls {

/// Default cap on the number of entries any Kronecker construction may produce.
inline constexpr std::size_t kDefaultEntryLimit = 100'000'000;

/// Standard Kronecker product, (rA*rB) x (cA*cB).
/// Throws LimitError if the result would hold more than `entry_limit` entries.
DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b, std::size_t entry_limit = kDefaultEntryLimit);

/// L-fold Kronecker power; `kron_power(P, 0)` is the 1x1 identity.
DenseMatrix kron_power(const DenseMatrix& p, std::size_t power, std::size_t entry_limit = kDefaultEntryLimit);

/// Maximum absolute row sum.
double inf_norm(const DenseMatrix& m);

/// A square linear map known only through its action on vectors.
class LinearOperator {
public:
    virtual ~LinearOperator() = default;
    [[nodiscard]] virtual std::size_t dim() const = 0;
    /// y = Op x. `x` and `y` never alias.
    virtual void apply(std::span<const double> x, std::span<double> y) const = 0;
};

class DenseOperator final : public LinearOperator {
public:
    explicit DenseOperator(const DenseMatrix& m);
    [[nodiscard]] std::size_t dim() const override { return m_.rows(); }
    void apply(std::span<const double> x, std::span<double> y) const override;

private:
    const DenseMatrix& m_;
};

struct SpectralOptions {
    /// Relative accuracy target for the returned radius.
    double tol = 1e-9;
    /// Matrices up to this order use a full Hessenberg-QR eigensolve.
    std::size_t dense_limit = 512;
    /// Krylov subspace size of each restarted Arnoldi cycle.
    std::size_t krylov_dim = 40;
    std::size_t max_restarts = 400;
};

/// max |eigenvalue| of a square matrix. Orders up to `opts.dense_limit` are
/// solved exactly (up to rounding) by Hessenberg QR; larger orders fall back to
/// restarted Arnoldi iteration on the dominant eigenvalue.
/// Throws ConvergenceError when either method exhausts its budget.
double spectral_radius(const DenseMatrix& m, const SpectralOptions& opts = {});

/// Dominant-magnitude eigenvalue of an operator by restarted Arnoldi.
double spectral_radius(const LinearOperator& op, const SpectralOptions& opts = {});

/// All eigenvalue magnitudes of a small dense matrix, via Hessenberg QR.
std::vector<double> eigenvalue_magnitudes(const DenseMatrix& m);

}  // namespace mjls
