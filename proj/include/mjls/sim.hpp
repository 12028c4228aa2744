#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mjls/model.hpp"
#include "mjls/switched.hpp"

namespace mjls {

struct SimConfig {
    std::size_t steps = 200;
    std::size_t trials = 100;
    std::uint64_t seed = 1;
    /// Explicit initial state (length N*n, agent-major). Empty: every
    /// coordinate is drawn uniformly from [-1, 1] per trial.
    std::optional<std::vector<double>> x0;

    /// Throws ValidationError when steps or trials is zero.
    void validate() const;
};

struct TrajectoryRecord {
    std::size_t agents = 0;
    std::size_t state_dim = 0;
    /// states[k] is x(k) for k = 0..steps-1, agent-major.
    std::vector<std::vector<double>> states;
    std::vector<double> sqnorm;
    LinkSet links;
    /// delays[k][t] is the delay carried by links[t] during the update k -> k+1.
    std::vector<std::vector<std::uint8_t>> delays;
};

/// Counter-based generator: a uniform double in [0, 1) that depends only on
/// the key. Exposed for tests.
double keyed_uniform(std::uint64_t seed, std::uint64_t trial, std::uint64_t step, std::uint64_t lane);

/// One realisation of x_i(k+1) = sum_j A_ij x_j(k - tau_ij(k)). Every stored
/// link runs its own copy of the delay chain; self terms are never delayed.
/// States before k = 0 equal x(0).
TrajectoryRecord simulate_trajectory(const DncsModel& model, const SimConfig& config, std::size_t trial);

/// Sample mean of ||x(k)||^2 over config.trials independent realisations.
std::vector<double> estimate_ms(const DncsModel& model, const SimConfig& config);

/// Mean of ||x(k)||^2 for a bare MJLS x(k+1) = W_{sigma(k)} x(k), with sigma
/// started from the family's pi0 and driven by its joint_P.
std::vector<double> estimate_ms(const ModeFamily& family, const SimConfig& config);

/// Least-squares slope of log(values[k]) against k over [first, values.size()).
/// exp(slope) estimates the per-step decay factor.
double log_slope(std::span<const double> values, std::size_t first = 0);

std::string trajectory_csv(const TrajectoryRecord& record);
std::string estimate_csv(std::span<const double> mean_sq);

/// Writes `text` to `path`; throws Error on I/O failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace mjls
