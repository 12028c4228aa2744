#include "mjls/switched.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mjls/errors.hpp"
#include "mjls/linalg.hpp"
#include "mjls/parallel.hpp"

namespace mjls {

std::string Scope::label() const { return is_global() ? "global" : "agent " + std::to_string(*agent_); }

DelayConfig DelayConfig::from_index(std::uint64_t index, std::size_t q, std::size_t links) {
    DelayConfig cfg;
    cfg.index = index;
    cfg.digits.assign(links, 0);
    std::uint64_t rest = index;
    for (std::size_t t = links; t-- > 0;) {
        cfg.digits[t] = static_cast<std::size_t>(rest % q);
        rest /= q;
    }
    if (rest != 0) throw ValidationError("/config", "index " + std::to_string(index) + " out of range");
    return cfg;
}

DelayConfig DelayConfig::from_digits(std::vector<std::size_t> digits, std::size_t q) {
    std::uint64_t index = 0;
    for (std::size_t t = 0; t < digits.size(); ++t) {
        if (digits[t] >= q) {
            throw ValidationError("/config/digits/" + std::to_string(t),
                                  "delay " + std::to_string(digits[t]) + " outside 0.." + std::to_string(q - 1));
        }
        index = index * q + digits[t];
    }
    return {std::move(digits), index};
}

ModeCount make_mode_count(std::size_t q, std::size_t links) {
    ModeCount out{q, links, std::nullopt};
    if (q <= 1 || links == 0) {
        out.value = 1;
        return out;
    }
    std::uint64_t value = 1;
    constexpr std::uint64_t cap = std::uint64_t{1} << 62;
    for (std::size_t t = 0; t < links; ++t) {
        if (value > cap / q) return out;
        value *= q;
    }
    out.value = value;
    return out;
}

ModeFamily ModeFamily::from_matrices(std::vector<DenseMatrix> matrices, DenseMatrix transition, std::vector<double> pi0) {
    ModeFamily family;
    if (pi0.empty()) pi0.assign(matrices.size(), matrices.empty() ? 0.0 : 1.0 / static_cast<double>(matrices.size()));
    family.matrices = std::move(matrices);
    family.joint_P = std::move(transition);
    family.joint_pi0 = std::move(pi0);
    family.validate();
    return family;
}

void ModeFamily::validate() const {
    if (matrices.empty()) throw ValidationError("/modes", "family has no modes");
    const std::size_t d = matrices.front().rows();
    for (std::size_t r = 0; r < matrices.size(); ++r) {
        if (!matrices[r].square() || matrices[r].rows() != d) {
            throw ValidationError("/modes/" + std::to_string(r), "mode matrices must all be square of order " + std::to_string(d));
        }
        if (!matrices[r].all_finite()) throw ValidationError("/modes/" + std::to_string(r), "non-finite entry");
    }
    if (joint_P.rows() != matrices.size() || !joint_P.square()) {
        throw ValidationError("/P", "transition matrix must be " + std::to_string(matrices.size()) + "x" +
                                        std::to_string(matrices.size()));
    }
    DelayChain{joint_P, joint_pi0}.validate("");
}

std::vector<AgentId> scope_agents(const DncsModel& model, const Scope& scope) {
    if (scope.is_global()) {
        std::vector<AgentId> all(model.agents());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i + 1;
        return all;
    }
    return neighborhood(model, scope.agent_id());
}

LinkSet enumerate_links(const DncsModel& model, const Scope& scope) {
    const auto agents = scope_agents(model, scope);
    LinkSet links;
    for (const auto& [key, a] : model.blocks()) {
        const auto [receiver, sender] = key;
        if (receiver == sender) continue;
        if (!scope.is_global() && (!std::binary_search(agents.begin(), agents.end(), receiver) ||
                                   !std::binary_search(agents.begin(), agents.end(), sender))) {
            continue;
        }
        links.push_back({receiver, sender});
    }
    // std::map iteration already yields (receiver, sender) order.
    return links;
}

ModeCount mode_count(const DncsModel& model, const Scope& scope) {
    return make_mode_count(model.q(), enumerate_links(model, scope).size());
}

namespace {

DenseMatrix assemble_mode(const DncsModel& model, const std::vector<AgentId>& agents, const LinkSet& links,
                          const DelayConfig& config) {
    const std::size_t n = model.state_dim();
    const std::size_t q = model.q();
    const std::size_t slot = agents.size() * n;
    auto position = [&](AgentId a) {
        return static_cast<std::size_t>(std::lower_bound(agents.begin(), agents.end(), a) - agents.begin());
    };

    DenseMatrix w(slot * q, slot * q);
    for (std::size_t p = 0; p < agents.size(); ++p) {
        w.set_block(p * n, p * n, *model.block(agents[p], agents[p]));
    }
    for (std::size_t t = 0; t < links.size(); ++t) {
        const auto& link = links[t];
        const std::size_t delay = config.digits[t];
        if (delay >= q) {
            throw ValidationError("/config/digits/" + std::to_string(t),
                                  "delay " + std::to_string(delay) + " outside 0.." + std::to_string(q - 1));
        }
        w.set_block(position(link.receiver) * n, delay * slot + position(link.sender) * n,
                    *model.block(link.receiver, link.sender));
    }
    for (std::size_t r = slot; r < slot * q; ++r) w(r, r - slot) = 1.0;
    return w;
}

}  // namespace

DenseMatrix build_mode_matrix(const DncsModel& model, const Scope& scope, const DelayConfig& config) {
    const auto agents = scope_agents(model, scope);
    const auto links = enumerate_links(model, scope);
    if (config.digits.size() != links.size()) {
        throw ValidationError("/config/digits", "expected " + std::to_string(links.size()) + " digits for scope " +
                                                    scope.label() + ", got " + std::to_string(config.digits.size()));
    }
    return assemble_mode(model, agents, links, config);
}

ModeFamily build_mode_family(const DncsModel& model, const Scope& scope, std::uint64_t mode_limit) {
    ModeFamily family;
    family.scope = scope;
    family.scope_agents = scope_agents(model, scope);
    family.links = enumerate_links(model, scope);

    const auto count = make_mode_count(model.q(), family.links.size());
    if (!count.value || *count.value > mode_limit) {
        throw LimitError("scope " + scope.label() + " has " + std::to_string(model.q()) + "^" +
                         std::to_string(family.links.size()) + " modes, above the enumeration cap of " +
                         std::to_string(mode_limit) + "; use the reduced per-agent test");
    }
    const std::size_t m = static_cast<std::size_t>(*count.value);
    const std::size_t q = model.q();
    const std::size_t L = family.links.size();
    const std::size_t order = family.scope_agents.size() * model.state_dim() * q;
    if (order * order > kDefaultEntryLimit / m) {
        throw LimitError("scope " + scope.label() + ": " + std::to_string(m) + " mode matrices of order " +
                         std::to_string(order) + " exceed the entry limit; use the reduced per-agent test");
    }

    family.matrices = parallel_map<DenseMatrix>(m, [&](std::size_t idx) {
        return assemble_mode(model, family.scope_agents, family.links, DelayConfig::from_index(idx, q, L));
    });
    family.joint_P = kron_power(model.chain().P, L);

    family.joint_pi0.assign(1, 1.0);
    for (std::size_t t = 0; t < L; ++t) {
        std::vector<double> next;
        next.reserve(family.joint_pi0.size() * q);
        for (double a : family.joint_pi0)
            for (double b : model.chain().pi0) next.push_back(a * b);
        family.joint_pi0 = std::move(next);
    }
    return family;
}

ModeCount full_formula_count(const DncsModel& model) {
    return make_mode_count(model.q(), model.agents() * (model.agents() - 1));
}

std::optional<std::uint64_t> reduced_formula_total(const DncsModel& model) {
    std::uint64_t total = 0;
    for (AgentId i = 1; i <= model.agents(); ++i) {
        const std::size_t size = neighborhood(model, i).size();
        const auto term = make_mode_count(model.q(), size * (size - 1));
        if (!term.value || total > std::numeric_limits<std::uint64_t>::max() - *term.value) return std::nullopt;
        total += *term.value;
    }
    return total;
}

}  // namespace mjls
