#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mjls/dense_matrix.hpp"

namespace mjls {

/// One-based agent index, as in the model file format.
using AgentId = std::size_t;

/// Per-link Markov chain over the delay values 0..q-1.
struct DelayChain {
    DenseMatrix P;            // q x q, row-stochastic
    std::vector<double> pi0;  // initial distribution

    [[nodiscard]] std::size_t q() const noexcept { return P.rows(); }

    /// Throws ValidationError (rooted at `path`) unless P is square and
    /// row-stochastic and pi0 is a distribution of matching length.
    void validate(const std::string& path = "/chain") const;

    /// pi(0) = [1, 0], P = [[0.5, 0.5], [0.3, 0.7]]: the chain used for the
    /// inverted-pendulum benchmark.
    static DelayChain pendulum_default();

    friend bool operator==(const DelayChain&, const DelayChain&) = default;
};

/// Physical constants of the spring-coupled inverted-pendulum chain.
struct PendulumParams {
    double a_end = 1.0;       // springs attached to pendulums 1 and N
    double a_interior = 2.0;  // springs attached to every other pendulum
    double h = 0.04;          // interaction term with neighbours
    double g = 9.8;
    double spring = 5.0;  // K
    double mass = 0.5;
    double length = 1.0;
    double dt = 0.1;

    void validate() const;
    /// Overrides one field by name (a_end, a_interior, h, g, K, mass, l, dt).
    void set(std::string_view key, double value);
};

/// Distributed networked control system x_i(k+1) = sum_j A_ij x_j(k - tau_ij(k))
/// with a shared delay chain on every directed link.
class DncsModel {
public:
    using BlockMap = std::map<std::pair<AgentId, AgentId>, DenseMatrix>;

    /// Validates every invariant; throws ValidationError naming the field.
    DncsModel(std::size_t agents, std::size_t state_dim, std::size_t tau_d, BlockMap blocks, DelayChain chain);

    [[nodiscard]] std::size_t agents() const noexcept { return agents_; }
    [[nodiscard]] std::size_t state_dim() const noexcept { return state_dim_; }
    [[nodiscard]] std::size_t tau_d() const noexcept { return tau_d_; }
    [[nodiscard]] std::size_t q() const noexcept { return tau_d_ + 1; }
    [[nodiscard]] const DelayChain& chain() const noexcept { return chain_; }
    [[nodiscard]] const BlockMap& blocks() const noexcept { return blocks_; }

    /// A_ij, or nullptr when the pair is not coupled.
    [[nodiscard]] const DenseMatrix* block(AgentId i, AgentId j) const;
    [[nodiscard]] bool has_block(AgentId i, AgentId j) const { return block(i, j) != nullptr; }

    friend bool operator==(const DncsModel&, const DncsModel&) = default;

private:
    std::size_t agents_;
    std::size_t state_dim_;
    std::size_t tau_d_;
    BlockMap blocks_;
    DelayChain chain_;
};

/// Parses and validates the JSON model format:
///   {"N", "n", "tau_d", "blocks": [{"i","j","values"}], "chain": {"P","pi0"}}
/// Agent indices are one-based and matrices row-major.
DncsModel load_model(std::string_view json_text);
DncsModel load_model_file(const std::filesystem::path& path);
std::string model_to_json(const DncsModel& model);

/// The Nn x Nn block matrix of the delay-free system.
DenseMatrix build_global_matrix(const DncsModel& model);

struct NominalStability {
    double rho = 0.0;
    bool stable = false;
};

NominalStability nominal_stability(const DncsModel& model);

/// N pendulums on a line joined by springs, closed with u_i = K_i x_i.
/// Throws ValidationError for N < 2.
DncsModel build_pendulum_model(std::size_t agents, const PendulumParams& params = {},
                               const DelayChain& chain = DelayChain::pendulum_default());

/// Ascending list {j : A_ij or A_ji stored, or j == i}.
std::vector<AgentId> neighborhood(const DncsModel& model, AgentId i);

}  // namespace mjls
