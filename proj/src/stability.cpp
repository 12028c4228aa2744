#include "mjls/stability.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mjls/errors.hpp"
#include "mjls/parallel.hpp"
#include "mjls/simd/kernels.hpp"

namespace mjls {

std::string_view to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::stable: return "stable";
        case Verdict::unstable: return "unstable";
        case Verdict::marginal: return "marginal";
    }
    return "unknown";
}

Verdict classify(double rho, double band) noexcept {
    if (rho < 1.0 - band) return Verdict::stable;
    if (rho > 1.0 + band) return Verdict::unstable;
    return Verdict::marginal;
}

Verdict combine(std::span<const ScopeResult> scopes) noexcept {
    Verdict out = Verdict::stable;
    for (const auto& s : scopes) {
        if (s.verdict == Verdict::unstable) return Verdict::unstable;
        if (s.verdict == Verdict::marginal) out = Verdict::marginal;
    }
    return out;
}

// --- Test matrix ----------------------------------------------------------------

MssTestMatrix mss_matrix(const ModeFamily& family, std::size_t entry_limit) {
    const std::size_t m = family.mode_count();
    const std::size_t d = family.state_dim();
    const std::size_t block = d * d;
    if (block != 0 && m * block > entry_limit / std::max<std::size_t>(1, m * block)) {
        throw LimitError("mss_matrix: order " + std::to_string(m * block) + " exceeds the entry limit");
    }
    DenseMatrix out(m * block, m * block);
    for (std::size_t r = 0; r < m; ++r) {
        const DenseMatrix kw = kron(family.matrices[r], family.matrices[r], entry_limit);
        for (std::size_t s = 0; s < m; ++s) {
            const double p = family.joint_P(r, s);
            if (p == 0.0) continue;
            for (std::size_t i = 0; i < block; ++i) {
                simd::scale(p, kw.row(i), out.row(s * block + i).subspan(r * block, block));
            }
        }
    }
    return {std::move(out), family.scope.label()};
}

MssOperator::MssOperator(const ModeFamily& family) : family_(family) {}

std::size_t MssOperator::dim() const {
    const std::size_t d = family_.state_dim();
    return family_.mode_count() * d * d;
}

void MssOperator::apply(std::span<const double> x, std::span<double> y) const {
    const std::size_t m = family_.mode_count();
    const std::size_t d = family_.state_dim();
    const std::size_t block = d * d;
    std::fill(y.begin(), y.end(), 0.0);
    DenseMatrix xr(d, d);
    for (std::size_t r = 0; r < m; ++r) {
        std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(r * block), block, xr.values().begin());
        const DenseMatrix& w = family_.matrices[r];
        const DenseMatrix z = (w * xr) * w.transpose();
        for (std::size_t s = 0; s < m; ++s) {
            const double p = family_.joint_P(r, s);
            if (p != 0.0) simd::axpy(p, z.values(), y.subspan(s * block, block));
        }
    }
}

double mss_spectral_radius(const ModeFamily& family, const SpectralOptions& opts) {
    const MssOperator op(family);
    if (op.dim() <= opts.dense_limit) return spectral_radius(mss_matrix(family).matrix, opts);
    return spectral_radius(op, opts);
}

// --- Reports --------------------------------------------------------------------

std::string StabilityReport::to_json() const {
    nlohmann::json doc;
    doc["overall"] = std::string(to_string(overall));
    auto scopes_json = nlohmann::json::array();
    for (const auto& s : scopes) {
        nlohmann::json entry{{"scope", s.scope}, {"rho", s.rho}, {"m", s.modes}, {"dim", s.dim},
                             {"verdict", std::string(to_string(s.verdict))}, {"members", s.members}};
        if (s.agent) entry["agent"] = *s.agent;
        scopes_json.push_back(std::move(entry));
    }
    doc["scopes"] = std::move(scopes_json);
    doc["classes"] = classes;
    return doc.dump(2);
}

namespace {

ScopeResult evaluate(const ModeFamily& family, std::vector<AgentId> members) {
    ScopeResult out;
    out.scope = family.scope.label();
    if (!family.scope.is_global()) out.agent = family.scope.agent_id();
    out.members = std::move(members);
    out.rho = mss_spectral_radius(family);
    out.verdict = classify(out.rho);
    out.modes = family.mode_count();
    out.dim = family.mode_count() * family.state_dim() * family.state_dim();
    return out;
}

}  // namespace

StabilityReport mss_test_full(const DncsModel& model, std::uint64_t mode_limit) {
    const ModeFamily family = build_mode_family(model, Scope::global(), mode_limit);
    std::vector<AgentId> all(model.agents());
    std::iota(all.begin(), all.end(), AgentId{1});

    StabilityReport report;
    report.scopes.push_back(evaluate(family, all));
    report.overall = combine(report.scopes);
    return report;
}

StabilityReport mss_test_reduced(const DncsModel& model, bool dedup, std::uint64_t mode_limit) {
    StabilityReport report;
    if (dedup) {
        report.classes = dedup_agents(model);
    } else {
        for (AgentId i = 1; i <= model.agents(); ++i) report.classes.push_back({i});
    }
    report.scopes = parallel_map<ScopeResult>(report.classes.size(), [&](std::size_t c) {
        const auto& members = report.classes[c];
        return evaluate(build_mode_family(model, Scope::agent(members.front()), mode_limit), members);
    });
    report.overall = combine(report.scopes);
    return report;
}

// --- Symmetry classes -----------------------------------------------------------

namespace {

/// Blocks built from different physical constants can agree exactly in exact
/// arithmetic yet differ in the last bits; those still count as equal.
bool same_block(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    double scale = 1.0;
    for (double v : a.values()) scale = std::max(scale, std::fabs(v));
    return max_abs_diff(a, b) <= kBlockMatchTol * scale;
}

/// Tries to map agent `a`'s neighbourhood onto agent `b`'s so that every
/// block inside the neighbourhood coincides.
bool same_reduced_subsystem(const DncsModel& model, AgentId a, AgentId b) {
    const auto na = neighborhood(model, a);
    const auto nb = neighborhood(model, b);
    if (na.size() != nb.size()) return false;

    std::vector<AgentId> others_a;
    std::vector<AgentId> others_b;
    for (auto j : na)
        if (j != a) others_a.push_back(j);
    for (auto j : nb)
        if (j != b) others_b.push_back(j);

    auto matches = [&](const std::vector<AgentId>& image) {
        // image[k] is the partner of others_a[k]; the centres map to each other.
        auto map = [&](AgentId j) {
            if (j == a) return b;
            const auto k = static_cast<std::size_t>(std::find(others_a.begin(), others_a.end(), j) - others_a.begin());
            return image[k];
        };
        for (auto u : na) {
            for (auto v : na) {
                const DenseMatrix* lhs = model.block(u, v);
                const DenseMatrix* rhs = model.block(map(u), map(v));
                if ((lhs == nullptr) != (rhs == nullptr)) return false;
                if (lhs != nullptr && !same_block(*lhs, *rhs)) return false;
            }
        }
        return true;
    };

    // Exhaustive relabelling is affordable for small neighbourhoods; beyond
    // that only the order-preserving and order-reversing maps are tried.
    constexpr std::size_t kMaxPermuted = 7;
    std::vector<AgentId> image = others_b;
    if (others_b.size() <= kMaxPermuted) {
        do {
            if (matches(image)) return true;
        } while (std::next_permutation(image.begin(), image.end()));
        return false;
    }
    if (matches(image)) return true;
    std::reverse(image.begin(), image.end());
    return matches(image);
}

}  // namespace

std::vector<std::vector<AgentId>> dedup_agents(const DncsModel& model) {
    std::vector<std::vector<AgentId>> classes;
    for (AgentId i = 1; i <= model.agents(); ++i) {
        bool placed = false;
        for (auto& cls : classes) {
            if (same_reduced_subsystem(model, cls.front(), i)) {
                cls.push_back(i);
                placed = true;
                break;
            }
        }
        if (!placed) classes.push_back({i});
    }
    return classes;
}

// --- Block-norm sufficient test ---------------------------------------------------

bool block_norm_sufficient(const ModeFamily& family) {
    const std::size_t m = family.mode_count();
    std::vector<double> alpha(m);
    for (std::size_t r = 0; r < m; ++r) alpha[r] = inf_norm(kron(family.matrices[r], family.matrices[r]));
    for (std::size_t s = 0; s < m; ++s) {
        double row_sum = 0.0;
        for (std::size_t r = 0; r < m; ++r) row_sum += family.joint_P(r, s) * alpha[r];
        if (!(row_sum < 1.0)) return false;
    }
    return true;
}

// --- Covariance recursion --------------------------------------------------------

double CovarianceState::total_trace() const {
    double total = 0.0;
    for (const auto& q : Q)
        for (std::size_t i = 0; i < q.rows(); ++i) total += q(i, i);
    return total;
}

std::vector<double> CovarianceState::stacked() const {
    std::vector<double> out;
    for (const auto& q : Q) out.insert(out.end(), q.values().begin(), q.values().end());
    return out;
}

CovarianceState initial_covariance(const ModeFamily& family) {
    CovarianceState state;
    state.pi = family.joint_pi0;
    for (std::size_t s = 0; s < family.mode_count(); ++s) {
        state.Q.push_back(state.pi[s] * DenseMatrix::identity(family.state_dim()));
    }
    return state;
}

CovarianceState initial_covariance(const ModeFamily& family, std::span<const double> x0) {
    const std::size_t d = family.state_dim();
    if (x0.size() != d) throw DimensionError("initial_covariance: initial state has the wrong length");
    DenseMatrix outer(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) outer(i, j) = x0[i] * x0[j];
    CovarianceState state;
    state.pi = family.joint_pi0;
    for (std::size_t s = 0; s < family.mode_count(); ++s) state.Q.push_back(state.pi[s] * outer);
    return state;
}

CovarianceState covariance_step(const ModeFamily& family, const CovarianceState& state) {
    const std::size_t m = family.mode_count();
    const std::size_t d = family.state_dim();
    if (state.Q.size() != m || state.pi.size() != m) {
        throw DimensionError("covariance_step: state has " + std::to_string(state.Q.size()) + " modes, family has " +
                             std::to_string(m));
    }
    for (const auto& q : state.Q) {
        if (q.rows() != d || q.cols() != d) throw DimensionError("covariance_step: second-moment block has the wrong order");
    }

    CovarianceState next;
    next.step = state.step + 1;
    next.Q.assign(m, DenseMatrix(d, d));
    next.pi.assign(m, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        const DenseMatrix& w = family.matrices[r];
        const DenseMatrix propagated = (w * state.Q[r]) * w.transpose();
        for (std::size_t s = 0; s < m; ++s) {
            const double p = family.joint_P(r, s);
            if (p == 0.0) continue;
            simd::axpy(p, propagated.values(), next.Q[s].values());
            next.pi[s] += state.pi[r] * p;
        }
    }
    return next;
}

}  // namespace mjls
