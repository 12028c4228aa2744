#include <doctest.h>

#include <cmath>

#include "mjls/errors.hpp"
#include "mjls/stability.hpp"
#include "oracle.hpp"

using mjls::DenseMatrix;
using mjls::ModeFamily;
using mjls::Verdict;

namespace {

ModeFamily scalar_example() {
    return ModeFamily::from_matrices({DenseMatrix{{0.5}}, DenseMatrix{{1.25}}}, DenseMatrix{{0.4, 0.6}, {0.5, 0.5}});
}

// Trace growth over the second half of the horizon, with renormalisation so
// that neither overflow nor underflow can occur.
double covariance_log_rate(const ModeFamily& family, std::size_t steps) {
    auto state = mjls::initial_covariance(family);
    double log_scale = 0.0;
    double log_at_half = 0.0;
    for (std::size_t k = 1; k <= steps; ++k) {
        state = mjls::covariance_step(family, state);
        const double tr = state.total_trace();
        log_scale += std::log(tr);
        for (auto& q : state.Q) q *= 1.0 / tr;
        if (k == steps / 2) log_at_half = log_scale;
    }
    return (log_scale - log_at_half) / static_cast<double>(steps - steps / 2);
}

}  // namespace

TEST_CASE("classification band") {
    CHECK(mjls::classify(0.5) == Verdict::stable);
    CHECK(mjls::classify(1.5) == Verdict::unstable);
    CHECK(mjls::classify(1.0) == Verdict::marginal);
    CHECK(mjls::classify(1.0 - 5e-10) == Verdict::marginal);
    CHECK(mjls::classify(1.0 - 2e-9) == Verdict::stable);
    std::vector<mjls::ScopeResult> scopes(3);
    CHECK(mjls::combine(scopes) == Verdict::stable);
    scopes[1].verdict = Verdict::marginal;
    CHECK(mjls::combine(scopes) == Verdict::marginal);
    scopes[2].verdict = Verdict::unstable;
    CHECK(mjls::combine(scopes) == Verdict::unstable);
}

TEST_CASE("test matrix matches its entrywise definition") {
    oracle::Rng rng(21);
    for (int t = 0; t < 40; ++t) {
        const auto family = oracle::random_family(rng, 1 + rng.index(3), 1 + rng.index(3), 1.0);
        const auto m = mjls::mss_matrix(family).matrix;
        CHECK(mjls::max_abs_diff(m, oracle::mss_matrix(family.matrices, family.joint_P)) < 1e-14);
    }
}

TEST_CASE("matrix-free operator equals the dense test matrix") {
    oracle::Rng rng(22);
    for (int t = 0; t < 20; ++t) {
        const auto family = oracle::random_family(rng, 1 + rng.index(4), 1 + rng.index(4), 1.0);
        const auto dense = mjls::mss_matrix(family).matrix;
        const mjls::MssOperator op(family);
        REQUIRE(op.dim() == dense.rows());
        std::vector<double> x(op.dim()), y(op.dim());
        for (double& v : x) v = rng.uniform(-1.0, 1.0);
        op.apply(x, y);
        const auto expected = dense * std::span<const double>(x);
        for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == doctest::Approx(expected[i]).epsilon(1e-12));
    }
}

TEST_CASE("scalar two-mode radius has a closed form") {
    // M = [[p11 a1^2, p21 a2^2], [p12 a1^2, p22 a2^2]]; rho = (tr + sqrt(tr^2 - 4 det)) / 2.
    const double a1 = 0.25, a2 = 1.5625;
    const double tr = 0.4 * a1 + 0.5 * a2;
    const double det = 0.4 * a1 * 0.5 * a2 - 0.5 * a2 * 0.6 * a1;
    const double rho = (tr + std::sqrt(tr * tr - 4.0 * det)) / 2.0;
    CHECK(mjls::mss_spectral_radius(scalar_example()) == doctest::Approx(rho).epsilon(1e-12));
    // One mode: rho(a (x) a) = a^2.
    CHECK(mjls::mss_spectral_radius(ModeFamily::from_matrices({DenseMatrix{{0.9}}}, DenseMatrix{{1.0}})) ==
          doctest::Approx(0.81));
}

TEST_CASE("dense and matrix-free radii agree above the dense limit") {
    oracle::Rng rng(23);
    const auto family = oracle::random_family(rng, 4, 12, 0.3);  // order 576
    mjls::SpectralOptions dense;
    dense.dense_limit = 1000;
    const double reference = mjls::spectral_radius(mjls::mss_matrix(family).matrix, dense);
    CHECK(mjls::mss_spectral_radius(family) == doctest::Approx(reference).epsilon(1e-8));
}

TEST_CASE("covariance step is the test matrix acting on stacked moments") {
    oracle::Rng rng(24);
    for (int t = 0; t < 20; ++t) {
        const auto family = oracle::random_family(rng, 1 + rng.index(3), 1 + rng.index(3), 1.0);
        auto state = mjls::initial_covariance(family);
        for (int k = 0; k < 3; ++k) {
            const auto before = state.stacked();
            state = mjls::covariance_step(family, state);
            const auto expected = oracle::mss_matrix(family.matrices, family.joint_P) * std::span<const double>(before);
            const auto after = state.stacked();
            for (std::size_t i = 0; i < after.size(); ++i) CHECK(after[i] == doctest::Approx(expected[i]).epsilon(1e-12));
        }
        CHECK(state.step == 3);
    }
}

TEST_CASE("initial covariance") {
    const auto family = ModeFamily::from_matrices({DenseMatrix{{1.0, 0.0}, {0.0, 1.0}}, DenseMatrix{{0.0, 1.0}, {1.0, 0.0}}},
                                                  DenseMatrix{{0.5, 0.5}, {0.5, 0.5}}, {0.25, 0.75});
    const auto identity = mjls::initial_covariance(family);
    CHECK(identity.Q[1] == 0.75 * DenseMatrix::identity(2));
    CHECK(identity.total_trace() == doctest::Approx(2.0));
    const std::vector<double> x0{1.0, 2.0};
    const auto outer = mjls::initial_covariance(family, x0);
    CHECK(outer.Q[0] == DenseMatrix{{0.25, 0.5}, {0.5, 1.0}});
    CHECK_THROWS_AS(mjls::initial_covariance(family, std::vector<double>{1.0}), mjls::DimensionError);
}

TEST_CASE("block-norm test on the scalar example") {
    // Column sums sum_r p_rs alpha_r: 0.4*0.25 + 0.5*1.5625 = 0.88125 and
    // 0.6*0.25 + 0.5*1.5625 = 0.93125, both below one.
    CHECK(mjls::block_norm_sufficient(scalar_example()));
    // Sending everything into the expanding mode breaks the second column.
    const auto sticky = ModeFamily::from_matrices({DenseMatrix{{0.5}}, DenseMatrix{{1.25}}}, DenseMatrix{{0.0, 1.0}, {0.0, 1.0}});
    CHECK_FALSE(mjls::block_norm_sufficient(sticky));
}

TEST_CASE("block-norm acceptance implies a radius below one") {
    oracle::Rng rng(25);
    int accepted = 0;
    for (int t = 0; t < 2000 && accepted < 100; ++t) {
        const auto family = oracle::random_family(rng, 1 + rng.index(4), 1 + rng.index(3), 0.7);
        if (!mjls::block_norm_sufficient(family)) continue;
        ++accepted;
        CHECK(mjls::mss_spectral_radius(family) < 1.0);
    }
    CHECK(accepted == 100);
}

TEST_CASE("spectral verdict predicts second-moment decay") {
    oracle::Rng rng(26);
    int checked = 0;
    for (int t = 0; t < 200 && checked < 60; ++t) {
        const auto family = oracle::random_family(rng, 1 + rng.index(3), 1 + rng.index(3), rng.uniform(0.3, 1.3));
        const double rho = mjls::mss_spectral_radius(family);
        if (std::fabs(rho - 1.0) < 1e-3) continue;
        ++checked;
        CAPTURE(rho);
        const double rate = covariance_log_rate(family, 500);
        CHECK((rate < 0.0) == (rho < 1.0));
        // The trace grows like rho^k once transients are gone.
        CHECK(rate == doctest::Approx(std::log(rho)).epsilon(0.05).scale(1e-3));
    }
}

TEST_CASE("large margins show up as threshold crossings within 500 steps") {
    oracle::Rng rng(27);
    int checked = 0;
    for (int t = 0; t < 400 && checked < 40; ++t) {
        const auto family = oracle::random_family(rng, 1 + rng.index(3), 1 + rng.index(2), rng.uniform(0.2, 1.6));
        const double rho = mjls::mss_spectral_radius(family);
        if (std::fabs(std::log(rho)) * 500.0 < 2.0 * std::log(1e8)) continue;
        ++checked;
        auto state = mjls::initial_covariance(family);
        const double initial = state.total_trace();
        double log_trace = std::log(initial);
        for (int k = 0; k < 500; ++k) {
            state = mjls::covariance_step(family, state);
            const double tr = state.total_trace();
            if (tr == 0.0) {
                log_trace = -1e300;
                break;
            }
            log_trace += std::log(tr);
            for (auto& q : state.Q) q *= 1.0 / tr;
        }
        if (rho < 1.0) {
            CHECK(log_trace < std::log(1e-8 * initial));
        } else {
            CHECK(log_trace > std::log(1e8 * initial));
        }
    }
    CHECK(checked == 40);
}

TEST_CASE("pendulum reduced test") {
    const auto model = mjls::build_pendulum_model(100);
    const auto report = mjls::mss_test_reduced(model, true);
    REQUIRE(report.classes.size() == 2);
    CHECK(report.classes[0] == std::vector<mjls::AgentId>{1, 100});
    CHECK(report.classes[1].size() == 98);
    CHECK(std::fabs(report.scopes[0].rho - 0.8682) < 1e-3);
    CHECK(std::fabs(report.scopes[1].rho - 0.8864) < 1e-3);
    CHECK(report.scopes[0].modes == 4);
    CHECK(report.scopes[1].modes == 16);
    CHECK(report.overall == Verdict::stable);

    const auto small = mjls::build_pendulum_model(6);
    const auto every = mjls::mss_test_reduced(small, false);
    CHECK(every.scopes.size() == 6);
    CHECK(every.scopes[2].rho == doctest::Approx(report.scopes[1].rho).epsilon(1e-10));
}

TEST_CASE("full test reports one global scope") {
    const auto model = mjls::build_pendulum_model(3);
    const auto report = mjls::mss_test_full(model);
    REQUIRE(report.scopes.size() == 1);
    CHECK(report.scopes[0].scope == "global");
    CHECK(report.scopes[0].modes == 16);
    CHECK(report.scopes[0].members == std::vector<mjls::AgentId>{1, 2, 3});
    // For N = 3 the middle agent's neighbourhood is the whole network.
    const auto reduced = mjls::mss_test_reduced(model, false);
    CHECK(reduced.scopes[1].rho == doctest::Approx(report.scopes[0].rho).epsilon(1e-12));
}

TEST_CASE("per-agent verdict agrees with the global verdict on small networks") {
    oracle::Rng rng(28);
    int checked = 0;
    for (int t = 0; t < 300 && checked < 40; ++t) {
        const auto model = oracle::random_model(rng, 2 + rng.index(2), 1, 1, rng.uniform(0.3, 1.0));
        const auto full = mjls::mss_test_full(model);
        const auto reduced = mjls::mss_test_reduced(model, false);
        bool near_one = std::fabs(full.scopes[0].rho - 1.0) < 1e-3;
        for (const auto& s : reduced.scopes) near_one = near_one || std::fabs(s.rho - 1.0) < 1e-3;
        if (near_one) continue;
        ++checked;
        CHECK(full.overall == reduced.overall);
    }
    CHECK(checked == 40);
}

TEST_CASE("symmetry classes") {
    // A ring of identical agents collapses into one class.
    mjls::DncsModel::BlockMap ring;
    for (mjls::AgentId i = 1; i <= 4; ++i) {
        ring.emplace(std::pair{i, i}, DenseMatrix{{0.3}});
        ring.emplace(std::pair{i, i % 4 + 1}, DenseMatrix{{0.1}});
        ring.emplace(std::pair{i % 4 + 1, i}, DenseMatrix{{0.1}});
    }
    const mjls::DncsModel model(4, 1, 1, std::move(ring), mjls::DelayChain::pendulum_default());
    CHECK(mjls::dedup_agents(model) == std::vector<std::vector<mjls::AgentId>>{{1, 2, 3, 4}});

    // Distinct self blocks keep agents apart.
    oracle::Rng rng(29);
    const auto random = oracle::random_model(rng, 3, 1, 1, 1.0);
    CHECK(mjls::dedup_agents(random).size() == 3);
}

TEST_CASE("report JSON") {
    const auto report = mjls::mss_test_reduced(mjls::build_pendulum_model(4), true);
    const auto text = report.to_json();
    CHECK(text.find("\"overall\": \"stable\"") != std::string::npos);
    CHECK(text.find("\"scopes\"") != std::string::npos);
}
