#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mjls/dense_matrix.hpp"
#include "mjls/linalg.hpp"
#include "mjls/model.hpp"
#include "mjls/switched.hpp"

namespace mjls {

enum class Verdict { stable, unstable, marginal };

std::string_view to_string(Verdict v) noexcept;

/// Half-width of the band around 1 reported as marginal.
inline constexpr double kMarginalBand = 1e-9;

/// stable iff rho < 1 - band, unstable iff rho > 1 + band, marginal otherwise.
Verdict classify(double rho, double band = kMarginalBand) noexcept;

/// (P^T (x) I) diag(W_j (x) W_j): block (s, r) is p_rs (W_r (x) W_r).
struct MssTestMatrix {
    DenseMatrix matrix;
    std::string scope;
};

MssTestMatrix mss_matrix(const ModeFamily& family, std::size_t entry_limit = kDefaultEntryLimit);

/// The same map as mss_matrix, applied without materialising it:
/// y_s = sum_r p_rs vec(W_r X_r W_r^T) for the stacked blocks X_r.
class MssOperator final : public LinearOperator {
public:
    explicit MssOperator(const ModeFamily& family);
    [[nodiscard]] std::size_t dim() const override;
    void apply(std::span<const double> x, std::span<double> y) const override;

private:
    const ModeFamily& family_;
};

/// rho of the test matrix, dense for small orders and matrix-free otherwise.
double mss_spectral_radius(const ModeFamily& family, const SpectralOptions& opts = {});

struct ScopeResult {
    std::string scope;
    std::optional<AgentId> agent;
    /// Agents represented by this entry (one agent, or a whole symmetry class).
    std::vector<AgentId> members;
    double rho = 0.0;
    Verdict verdict = Verdict::stable;
    std::uint64_t modes = 0;
    std::size_t dim = 0;
};

struct StabilityReport {
    std::vector<ScopeResult> scopes;
    Verdict overall = Verdict::stable;
    std::vector<std::vector<AgentId>> classes;

    [[nodiscard]] std::string to_json() const;
};

/// Worst verdict wins: any unstable scope makes the whole report unstable,
/// otherwise any marginal scope makes it marginal.
Verdict combine(std::span<const ScopeResult> scopes) noexcept;

/// Mean-square test on the global mode family. Throws LimitError once the
/// global family exceeds `mode_limit`.
StabilityReport mss_test_full(const DncsModel& model, std::uint64_t mode_limit = kDefaultModeLimit);

/// Per-agent reduced-mode test. With `dedup`, one representative per symmetry
/// class is evaluated.
StabilityReport mss_test_reduced(const DncsModel& model, bool dedup, std::uint64_t mode_limit = kDefaultModeLimit);

/// Relative entrywise tolerance under which two coupling blocks are treated as
/// identical when grouping agents.
inline constexpr double kBlockMatchTol = 1e-12;

/// Partitions agents into classes whose reduced subsystems coincide after
/// relabelling the neighbourhood. Classes are ordered by their smallest member.
std::vector<std::vector<AgentId>> dedup_agents(const DncsModel& model);

/// Row-block norm test on the MSS matrix: sum_r p_rs ||W_r (x) W_r||_inf < 1 for every s.
bool block_norm_sufficient(const ModeFamily& family);

/// Per-mode second moments Q_s(k) = E[x x^T 1{sigma(k) = s}] and mode
/// probabilities pi(k).
struct CovarianceState {
    std::vector<DenseMatrix> Q;
    std::vector<double> pi;
    std::size_t step = 0;

    [[nodiscard]] double total_trace() const;
    /// [vec(Q_1); ...; vec(Q_m)] with row-major vec.
    [[nodiscard]] std::vector<double> stacked() const;
};

/// Q_s(0) = pi_s(0) I.
CovarianceState initial_covariance(const ModeFamily& family);
/// Q_s(0) = pi_s(0) x0 x0^T for a deterministic augmented initial state.
CovarianceState initial_covariance(const ModeFamily& family, std::span<const double> x0);

/// Q_s(k+1) = sum_r p_rs W_r Q_r(k) W_r^T, pi(k+1) = pi(k) P.
CovarianceState covariance_step(const ModeFamily& family, const CovarianceState& state);

}  // namespace mjls
