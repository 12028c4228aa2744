#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mjls/dense_matrix.hpp"
#include "mjls/model.hpp"

namespace mjls {

/// Either the whole network or the reduced subsystem over one agent's
/// neighbourhood.
class Scope {
public:
    static Scope global() { return Scope{}; }
    static Scope agent(AgentId i) { return Scope{i}; }

    [[nodiscard]] bool is_global() const noexcept { return !agent_.has_value(); }
    /// Precondition: !is_global().
    [[nodiscard]] AgentId agent_id() const { return *agent_; }
    [[nodiscard]] std::string label() const;

    friend bool operator==(const Scope&, const Scope&) = default;

private:
    Scope() = default;
    explicit Scope(AgentId i) : agent_(i) {}
    std::optional<AgentId> agent_;
};

/// Directed communication link: `receiver` reads the state of `sender`.
struct Link {
    AgentId receiver;
    AgentId sender;
    friend auto operator<=>(const Link&, const Link&) = default;
};

/// Links ordered ascending by (receiver, sender).
using LinkSet = std::vector<Link>;

/// One delay value per link. `index` is the big-endian base-q number formed by
/// the digits, first link most significant.
struct DelayConfig {
    std::vector<std::size_t> digits;
    std::uint64_t index = 0;

    static DelayConfig from_index(std::uint64_t index, std::size_t q, std::size_t links);
    static DelayConfig from_digits(std::vector<std::size_t> digits, std::size_t q);
};

/// q^L, with the value omitted when it exceeds 2^62.
struct ModeCount {
    std::size_t q = 1;
    std::size_t links = 0;
    std::optional<std::uint64_t> value;
};

ModeCount make_mode_count(std::size_t q, std::size_t links);

inline constexpr std::uint64_t kDefaultModeLimit = std::uint64_t{1} << 20;

/// Mode matrices of a Markov jump linear system together with the joint
/// transition matrix that drives them.
struct ModeFamily {
    Scope scope = Scope::global();
    /// Agents whose states make up one delay slot, in state order.
    std::vector<AgentId> scope_agents;
    LinkSet links;
    std::vector<DenseMatrix> matrices;
    DenseMatrix joint_P;
    std::vector<double> joint_pi0;

    [[nodiscard]] std::size_t mode_count() const noexcept { return matrices.size(); }
    [[nodiscard]] std::size_t state_dim() const noexcept { return matrices.empty() ? 0 : matrices.front().rows(); }

    /// Builds a family directly from mode matrices (e.g. a textbook MJLS that
    /// is not derived from a network). Uniform pi0 when `pi0` is empty.
    static ModeFamily from_matrices(std::vector<DenseMatrix> matrices, DenseMatrix transition,
                                    std::vector<double> pi0 = {});

    /// Throws ValidationError if the invariants do not hold.
    void validate() const;
};

/// Agents in a scope: all agents, or the neighbourhood of the scope's agent.
std::vector<AgentId> scope_agents(const DncsModel& model, const Scope& scope);

/// Stored directed links inside the scope. For an agent scope both endpoints
/// must lie in the agent's neighbourhood; couplings from outside are dropped.
LinkSet enumerate_links(const DncsModel& model, const Scope& scope);

ModeCount mode_count(const DncsModel& model, const Scope& scope);

/// Companion-form mode matrix: the top block row holds the scope's coupling
/// blocks, each placed in the delay slot given by its link's digit (self blocks
/// always in slot 0); identity blocks shift the history down.
DenseMatrix build_mode_matrix(const DncsModel& model, const Scope& scope, const DelayConfig& config);

/// All q^L mode matrices of a scope plus joint_P = P^{(x)L}. Throws LimitError
/// when q^L exceeds `mode_limit`.
ModeFamily build_mode_family(const DncsModel& model, const Scope& scope, std::uint64_t mode_limit = kDefaultModeLimit);

/// q^{N(N-1)}: every ordered pair of agents treated as a link.
ModeCount full_formula_count(const DncsModel& model);

/// sum_i q^{n_i (n_i - 1)} with n_i the neighbourhood size; empty on overflow.
std::optional<std::uint64_t> reduced_formula_total(const DncsModel& model);

}  // namespace mjls
