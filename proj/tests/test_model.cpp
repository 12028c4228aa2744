#include <doctest.h>

#include <cmath>
#include <string>

#include "mjls/errors.hpp"
#include "mjls/model.hpp"

using mjls::DenseMatrix;

namespace {

const char* kTwoAgent = R"({
  "N": 2, "n": 1, "tau_d": 1,
  "blocks": [
    {"i": 1, "j": 1, "values": [0.5]},
    {"i": 2, "j": 2, "values": [0.4]},
    {"i": 1, "j": 2, "values": [0.2]},
    {"i": 2, "j": 1, "values": [0.0]}
  ],
  "chain": {"P": [0.5, 0.5, 0.3, 0.7], "pi0": [1, 0]}
})";

std::string replace(std::string text, const std::string& from, const std::string& to) {
    const auto at = text.find(from);
    REQUIRE(at != std::string::npos);
    return text.replace(at, from.size(), to);
}

std::string error_path(const std::string& text) {
    try {
        mjls::load_model(text);
    } catch (const mjls::ValidationError& e) {
        return e.path();
    }
    return "<no error>";
}

}  // namespace

TEST_CASE("load_model parses blocks and drops zero couplings") {
    const auto model = mjls::load_model(kTwoAgent);
    CHECK(model.agents() == 2);
    CHECK(model.state_dim() == 1);
    CHECK(model.tau_d() == 1);
    CHECK(model.q() == 2);
    CHECK(model.has_block(1, 2));
    CHECK_FALSE(model.has_block(2, 1));
    CHECK((*model.block(1, 2))(0, 0) == 0.2);
    CHECK(model.chain().P == DenseMatrix{{0.5, 0.5}, {0.3, 0.7}});
}

TEST_CASE("load_model reports the offending field") {
    CHECK(error_path(replace(kTwoAgent, "\"P\": [0.5, 0.5, 0.3, 0.7]", "\"P\": [0.5, 0.6, 0.3, 0.7]")) == "/chain/P/0");
    CHECK(error_path(replace(kTwoAgent, "\"pi0\": [1, 0]", "\"pi0\": [1]")) == "/chain/pi0");
    CHECK(error_path(replace(kTwoAgent, "\"tau_d\": 1", "\"tau_d\": -1")) == "/tau_d");
    CHECK(error_path(replace(kTwoAgent, "{\"i\": 2, \"j\": 2, \"values\": [0.4]},", "")) == "/blocks");
    CHECK(error_path(replace(kTwoAgent, "{\"i\": 1, \"j\": 2, \"values\": [0.2]}", "{\"i\": 1, \"j\": 3, \"values\": [0.2]}")) ==
          "/blocks/2/j");
    CHECK(error_path(replace(kTwoAgent, "\"values\": [0.5]", "\"values\": [0.5, 1]")) == "/blocks/0/values");
    CHECK(error_path(replace(kTwoAgent, "{\"i\": 2, \"j\": 1, \"values\": [0.0]}", "{\"i\": 1, \"j\": 2, \"values\": [0.3]}")) ==
          "/blocks/3");
    CHECK(error_path("[1, 2]") == "/");
    CHECK(error_path("{not json") == "/");
}

TEST_CASE("model JSON round-trips") {
    const auto model = mjls::load_model(kTwoAgent);
    CHECK(mjls::load_model(mjls::model_to_json(model)) == model);
    const auto pendulum = mjls::build_pendulum_model(5);
    CHECK(mjls::load_model(mjls::model_to_json(pendulum)) == pendulum);
}

TEST_CASE("global matrix and nominal stability") {
    const auto model = mjls::load_model(kTwoAgent);
    CHECK(mjls::build_global_matrix(model) == DenseMatrix{{0.5, 0.2}, {0.0, 0.4}});
    const auto nominal = mjls::nominal_stability(model);
    CHECK(nominal.rho == doctest::Approx(0.5));
    CHECK(nominal.stable);
}

TEST_CASE("pendulum closed loop is independent of the spring constant a_i") {
    // A_ii + B_i K_i with the published gain:
    //   (g/l - a K/(m l^2)) dt + dt/(m l^2) (a K - m l^2 (8 + 4 g/l)/4) = -0.2
    //   1 + dt/(m l^2) (-3 m l^2) = 0.7
    const auto model = mjls::build_pendulum_model(4);
    const DenseMatrix expected{{1.0, 0.1}, {-0.2, 0.7}};
    for (mjls::AgentId i = 1; i <= 4; ++i) CHECK(mjls::max_abs_diff(*model.block(i, i), expected) < 1e-12);
    // Coupling h K/(m l^2) dt = 0.04 acting on the neighbour's angle.
    const DenseMatrix coupling{{0.0, 0.0}, {0.04, 0.0}};
    CHECK(mjls::max_abs_diff(*model.block(2, 1), coupling) < 1e-12);
    CHECK(mjls::max_abs_diff(*model.block(2, 3), coupling) < 1e-12);
    CHECK_FALSE(model.has_block(1, 3));
    CHECK(model.blocks().size() == 4 + 2 * 3);
}

TEST_CASE("pendulum parameters") {
    mjls::PendulumParams p;
    p.set("h", 0.1);
    CHECK(p.h == 0.1);
    CHECK_THROWS_AS(p.set("nonsense", 1.0), mjls::ValidationError);
    p.mass = -1.0;
    CHECK_THROWS_AS(p.validate(), mjls::ValidationError);
    CHECK_THROWS_AS(mjls::build_pendulum_model(1), mjls::ValidationError);
}

TEST_CASE("pendulum nominal radius") {
    const auto nominal = mjls::nominal_stability(mjls::build_pendulum_model(100));
    CHECK(std::fabs(nominal.rho - 0.9525) < 1e-3);
    CHECK(nominal.stable);
}

TEST_CASE("neighbourhoods") {
    const auto model = mjls::build_pendulum_model(100);
    CHECK(mjls::neighborhood(model, 1) == std::vector<mjls::AgentId>{1, 2});
    CHECK(mjls::neighborhood(model, 50) == std::vector<mjls::AgentId>{49, 50, 51});
    CHECK(mjls::neighborhood(model, 100) == std::vector<mjls::AgentId>{99, 100});
    // A one-way link still makes the agents neighbours of each other.
    const auto two = mjls::load_model(kTwoAgent);
    CHECK(mjls::neighborhood(two, 2) == std::vector<mjls::AgentId>{1, 2});
}

TEST_CASE("delay chain validation") {
    CHECK_NOTHROW(mjls::DelayChain::pendulum_default().validate());
    mjls::DelayChain bad{DenseMatrix{{0.5, 0.5}, {0.3, 0.7}}, {0.5, 0.6}};
    CHECK_THROWS_AS(bad.validate(), mjls::ValidationError);
}
