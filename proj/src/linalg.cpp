#include "mjls/linalg.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <string>

#include "mjls/errors.hpp"
#include "mjls/simd/kernels.hpp"

namespace mjls {

// --- DenseMatrix --------------------------------------------------------------

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows_ * cols_) {
        throw DimensionError("DenseMatrix: expected " + std::to_string(rows_ * cols_) + " values, got " +
                             std::to_string(values_.size()));
    }
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    values_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw DimensionError("DenseMatrix: ragged initializer");
        values_.insert(values_.end(), r.begin(), r.end());
    }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

void DenseMatrix::set_block(std::size_t r0, std::size_t c0, const DenseMatrix& block) {
    if (r0 + block.rows_ > rows_ || c0 + block.cols_ > cols_) {
        throw DimensionError("set_block: block does not fit");
    }
    for (std::size_t r = 0; r < block.rows_; ++r) {
        std::copy(block.row(r).begin(), block.row(r).end(), values_.begin() + static_cast<std::ptrdiff_t>((r0 + r) * cols_ + c0));
    }
}

DenseMatrix DenseMatrix::block(std::size_t r0, std::size_t c0, std::size_t rows, std::size_t cols) const {
    if (r0 + rows > rows_ || c0 + cols > cols_) throw DimensionError("block: out of range");
    DenseMatrix out(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const auto src = row(r0 + r).subspan(c0, cols);
        std::copy(src.begin(), src.end(), out.row(r).begin());
    }
    return out;
}

DenseMatrix DenseMatrix::transpose() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

bool DenseMatrix::all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

bool DenseMatrix::is_zero() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

DenseMatrix& DenseMatrix::operator*=(double s) noexcept {
    simd::scale(s, values_, values_);
    return *this;
}

DenseMatrix& DenseMatrix::operator+=(const DenseMatrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_) throw DimensionError("operator+=: shape mismatch");
    simd::axpy(1.0, other.values_, values_);
    return *this;
}

DenseMatrix& DenseMatrix::operator-=(const DenseMatrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_) throw DimensionError("operator-=: shape mismatch");
    simd::axpy(-1.0, other.values_, values_);
    return *this;
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) throw DimensionError("matrix product: inner dimensions differ");
    DenseMatrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto dst = out.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik != 0.0) simd::axpy(aik, b.row(k), dst);
        }
    }
    return out;
}

DenseMatrix operator*(double s, DenseMatrix m) {
    m *= s;
    return m;
}

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) {
    a += b;
    return a;
}

DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) {
    a -= b;
    return a;
}

std::vector<double> operator*(const DenseMatrix& m, std::span<const double> x) {
    if (m.cols() != x.size()) throw DimensionError("matrix-vector product: size mismatch");
    std::vector<double> y(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) y[r] = simd::dot(m.row(r), x);
    return y;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("max_abs_diff: shape mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::fabs(a.values()[i] - b.values()[i]));
    return worst;
}

// --- Kronecker products and norms --------------------------------------------

namespace {

std::size_t checked_entries(std::size_t rows, std::size_t cols, std::size_t limit, const char* what) {
    if (rows != 0 && cols > std::numeric_limits<std::size_t>::max() / rows) {
        throw LimitError(std::string(what) + ": size overflow");
    }
    const std::size_t entries = rows * cols;
    if (entries > limit) {
        throw LimitError(std::string(what) + ": " + std::to_string(rows) + "x" + std::to_string(cols) +
                         " exceeds the entry limit of " + std::to_string(limit));
    }
    return entries;
}

std::size_t checked_mul(std::size_t a, std::size_t b, const char* what) {
    if (a != 0 && b > std::numeric_limits<std::size_t>::max() / a) throw LimitError(std::string(what) + ": size overflow");
    return a * b;
}

}  // namespace

DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b, std::size_t entry_limit) {
    const std::size_t rows = checked_mul(a.rows(), b.rows(), "kron");
    const std::size_t cols = checked_mul(a.cols(), b.cols(), "kron");
    checked_entries(rows, cols, entry_limit, "kron");

    DenseMatrix out(rows, cols);
    for (std::size_t ia = 0; ia < a.rows(); ++ia) {
        for (std::size_t ib = 0; ib < b.rows(); ++ib) {
            auto dst = out.row(ia * b.rows() + ib);
            const auto src = b.row(ib);
            for (std::size_t ja = 0; ja < a.cols(); ++ja) {
                simd::scale(a(ia, ja), src, dst.subspan(ja * b.cols(), b.cols()));
            }
        }
    }
    return out;
}

DenseMatrix kron_power(const DenseMatrix& p, std::size_t power, std::size_t entry_limit) {
    DenseMatrix out = DenseMatrix::identity(1);
    for (std::size_t i = 0; i < power; ++i) out = kron(out, p, entry_limit);
    return out;
}

double inf_norm(const DenseMatrix& m) {
    double best = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) best = std::max(best, simd::abs_sum(m.row(r)));
    return best;
}

// --- Eigenvalues -----------------------------------------------------------

DenseOperator::DenseOperator(const DenseMatrix& m) : m_(m) {
    if (!m.square()) throw DimensionError("DenseOperator: matrix must be square");
}

void DenseOperator::apply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t r = 0; r < m_.rows(); ++r) y[r] = simd::dot(m_.row(r), x);
}

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::VectorXcd dense_eigenvalues(const DenseMatrix& m) {
    const Eigen::Map<const RowMajor> view(m.values().data(), static_cast<Eigen::Index>(m.rows()),
                                          static_cast<Eigen::Index>(m.cols()));
    Eigen::EigenSolver<Eigen::MatrixXd> solver(Eigen::MatrixXd(view), /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        // Eigen's real Schur iteration allows 40 sweeps per eigenvalue.
        throw ConvergenceError("Hessenberg QR did not converge for a " + std::to_string(m.rows()) + "x" +
                                   std::to_string(m.cols()) + " matrix",
                               40 * m.rows());
    }
    return solver.eigenvalues();
}

void require_square_finite(const DenseMatrix& m, const char* what) {
    if (!m.square()) throw DimensionError(std::string(what) + ": matrix must be square");
    if (!m.all_finite()) throw DimensionError(std::string(what) + ": matrix has non-finite entries");
}

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Restarted Arnoldi for the eigenvalue of largest modulus. Each cycle builds a
// Krylov basis with twice-applied modified Gram-Schmidt, takes the dominant
// Ritz pair of the Hessenberg projection and restarts from (the real part of)
// its Ritz vector.
double arnoldi_radius(const LinearOperator& op, const SpectralOptions& opts) {
    const std::size_t n = op.dim();
    const std::size_t k = std::max<std::size_t>(2, std::min(opts.krylov_dim, n));

    std::vector<std::vector<double>> basis(k + 1, std::vector<double>(n));
    std::vector<double> start(n);
    std::uint64_t seed = 0x5eed5eedULL;
    for (auto& v : start) v = 0.5 + static_cast<double>(splitmix64(seed) >> 11) * 0x1.0p-53;

    double previous = -1.0;
    std::size_t stable_cycles = 0;
    std::vector<double> w(n);

    for (std::size_t cycle = 0; cycle < opts.max_restarts; ++cycle) {
        const double start_norm = std::sqrt(simd::sum_sq(start));
        if (start_norm == 0.0) return 0.0;
        simd::scale(1.0 / start_norm, start, basis[0]);

        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k + 1), static_cast<Eigen::Index>(k));
        std::size_t used = k;
        bool breakdown = false;
        double op_scale = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            op.apply(basis[j], w);
            op_scale = std::max(op_scale, std::sqrt(simd::sum_sq(w)));
            for (int pass = 0; pass < 2; ++pass) {
                for (std::size_t i = 0; i <= j; ++i) {
                    const double c = simd::dot(basis[i], w);
                    h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += c;
                    simd::axpy(-c, basis[i], w);
                }
            }
            const double norm = std::sqrt(simd::sum_sq(w));
            h(static_cast<Eigen::Index>(j + 1), static_cast<Eigen::Index>(j)) = norm;
            if (norm <= 1e-13 * std::max(op_scale, 1e-300)) {
                used = j + 1;
                breakdown = true;
                break;
            }
            simd::scale(1.0 / norm, w, basis[j + 1]);
        }

        const auto m = static_cast<Eigen::Index>(used);
        Eigen::EigenSolver<Eigen::MatrixXd> solver(h.topLeftCorner(m, m), /*computeEigenvectors=*/true);
        if (solver.info() != Eigen::Success) {
            throw ConvergenceError("Arnoldi: projected eigenproblem did not converge", opts.max_restarts);
        }
        const Eigen::VectorXcd theta = solver.eigenvalues();
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < theta.size(); ++i) {
            if (std::abs(theta(i)) > std::abs(theta(best))) best = i;
        }
        const double radius = std::abs(theta(best));
        if (radius == 0.0 || breakdown) return radius;

        Eigen::VectorXcd y = solver.eigenvectors().col(best);
        y /= y.norm();
        const double residual =
            std::abs(h(m, m - 1)) * std::abs(y(m - 1)) / radius;

        if (previous >= 0.0 && std::fabs(radius - previous) <= opts.tol * radius) {
            ++stable_cycles;
        } else {
            stable_cycles = 0;
        }
        previous = radius;
        if (residual <= opts.tol || (stable_cycles >= 2 && residual <= std::sqrt(opts.tol))) return radius;

        std::fill(start.begin(), start.end(), 0.0);
        for (Eigen::Index i = 0; i < m; ++i) {
            const double coeff = y(i).real() + y(i).imag();
            simd::axpy(coeff, basis[static_cast<std::size_t>(i)], start);
        }
    }
    throw ConvergenceError("Arnoldi iteration for the spectral radius did not converge", opts.max_restarts);
}

}  // namespace

double spectral_radius(const DenseMatrix& m, const SpectralOptions& opts) {
    require_square_finite(m, "spectral_radius");
    if (m.rows() == 0) return 0.0;
    if (m.rows() <= opts.dense_limit) {
        const auto values = dense_eigenvalues(m);
        double best = 0.0;
        for (const auto& v : values) best = std::max(best, std::abs(v));
        return best;
    }
    return arnoldi_radius(DenseOperator(m), opts);
}

double spectral_radius(const LinearOperator& op, const SpectralOptions& opts) {
    const std::size_t n = op.dim();
    if (n == 0) return 0.0;
    if (n <= opts.dense_limit) {
        DenseMatrix dense(n, n);
        std::vector<double> unit(n, 0.0);
        std::vector<double> column(n);
        for (std::size_t c = 0; c < n; ++c) {
            unit[c] = 1.0;
            op.apply(unit, column);
            unit[c] = 0.0;
            for (std::size_t r = 0; r < n; ++r) dense(r, c) = column[r];
        }
        return spectral_radius(dense, opts);
    }
    return arnoldi_radius(op, opts);
}

std::vector<double> eigenvalue_magnitudes(const DenseMatrix& m) {
    require_square_finite(m, "eigenvalue_magnitudes");
    std::vector<double> out;
    if (m.rows() == 0) return out;
    for (const auto& v : dense_eigenvalues(m)) out.push_back(std::abs(v));
    return out;
}

}  // namespace mjls
