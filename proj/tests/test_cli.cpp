#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mjls/cli/commands.hpp"
#include "mjls/cli/manifest.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
    json doc() const { return json::parse(out); }
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = mjls::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "mjls_cli_tests";
    fs::create_directories(dir);
    return dir / name;
}

fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = scratch(name);
    std::ofstream(p) << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

const std::string kData = MJLS_TEST_DATA;

}  // namespace

TEST_CASE("sha256 of known strings") {
    CHECK(mjls::cli::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(mjls::cli::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("analyze the pendulum with symmetry classes") {
    const auto r = run({"analyze", "--pendulum", "100", "--reduced", "--dedup"});
    REQUIRE(r.code == 0);
    const auto doc = r.doc();
    CHECK(doc["overall"] == "stable");
    REQUIRE(doc["scopes"].size() == 2);
    CHECK(std::fabs(doc["scopes"][0]["rho"].get<double>() - 0.8682) < 1e-3);
    CHECK(std::fabs(doc["scopes"][1]["rho"].get<double>() - 0.8864) < 1e-3);
    CHECK(std::fabs(doc["nominal"]["rho"].get<double>() - 0.9525) < 1e-3);
    // The manifest goes to stderr.
    CHECK(json::parse(r.err)["command"] == "analyze");
}

TEST_CASE("full analysis of a large network hits the mode cap") {
    const auto r = run({"analyze", "--pendulum", "100", "--full"});
    CHECK(r.code == 1);
    const auto doc = r.doc();
    CHECK(doc["error"]["kind"] == "limit");
    CHECK(doc["error"]["hint"].get<std::string>().find("mode cap exceeded") != std::string::npos);
}

TEST_CASE("analyze exit codes follow the verdict") {
    CHECK(run({"analyze", "--model", kData + "/diag_toy.json", "--reduced"}).code == 0);
    CHECK(run({"analyze", "--model", kData + "/diag_toy.json", "--full"}).code == 0);
    const auto unstable = write("unstable.json", R"({"modes": [[[1.5]], [[0.2]]], "P": [[0.5, 0.5], [0.5, 0.5]]})");
    CHECK(run({"analyze", "--mjls", unstable.string()}).code == 2);
    const auto marginal = write("marginal.json", R"({"modes": [[[1.0]]], "P": [[1.0]]})");
    CHECK(run({"analyze", "--mjls", marginal.string()}).code == 3);
    CHECK(run({"analyze", "--mjls", kData + "/scalar_two_mode.json"}).code == 0);
}

TEST_CASE("usage errors produce an error object") {
    auto r = run({"analyze"});
    CHECK(r.code == 1);
    CHECK(r.doc()["error"]["path"] == "/source");
    r = run({"analyze", "--pendulum", "5", "--model", "x.json"});
    CHECK(r.code == 1);
    r = run({"analyze", "--pendulum", "5", "--full", "--reduced"});
    CHECK(r.code == 1);
    CHECK(r.doc()["error"]["kind"] == "usage");
    r = run({"bogus"});
    CHECK(r.code == 1);
    r = run({"analyze", "--model", scratch("missing.json").string()});
    CHECK(r.code == 1);
    const auto bad = write("bad_model.json", R"({"N": 1, "n": 1, "tau_d": 0, "blocks": [], "chain": {"P": [1], "pi0": [1]}})");
    r = run({"analyze", "--model", bad.string()});
    CHECK(r.code == 1);
    CHECK(r.doc()["error"]["path"] == "/blocks");
    r = run({"analyze", "--pendulum", "5", "--param", "h"});
    CHECK(r.code == 1);
    r = run({"analyze", "--pendulum", "5", "--param", "nope=1"});
    CHECK(r.code == 1);
}

TEST_CASE("pendulum parameter overrides change the model") {
    const auto base = run({"analyze", "--pendulum", "10"}).doc();
    const auto tweaked = run({"analyze", "--pendulum", "10", "--param", "h=0.2"}).doc();
    CHECK(base["scopes"][1]["rho"] != tweaked["scopes"][1]["rho"]);
}

TEST_CASE("inspect reports mode accounting") {
    auto r = run({"inspect", "--pendulum", "100"});
    REQUIRE(r.code == 0);
    auto doc = r.doc();
    CHECK(doc["N"] == 100);
    CHECK(doc["n"] == 2);
    CHECK(doc["tau_d"] == 1);
    CHECK(doc["full"]["q"] == 2);
    CHECK(doc["full"]["L"] == 198);
    CHECK(doc["full"]["count"].is_null());
    CHECK(doc["full_formula"]["L"] == 9900);
    CHECK(doc["reduced_formula_total"] == 6280);
    REQUIRE(doc["classes"].size() == 2);
    CHECK(doc["classes"][0]["modes"] == 4);
    CHECK(doc["classes"][1]["modes"] == 16);
    CHECK(doc["class_mode_total"] == 20);
    CHECK(doc["agents"][0]["links"] == 2);
    CHECK(doc["agents"][49]["links"] == 4);

    doc = run({"inspect", "--model", kData + "/diag_toy.json"}).doc();
    CHECK(doc["full"]["count"] == 1);

    // Complete graph on three agents: L = N(N-1) = 6 links, 2^6 modes.
    std::string blocks;
    for (int i = 1; i <= 3; ++i)
        for (int j = 1; j <= 3; ++j)
            blocks += (blocks.empty() ? "" : ",") + std::string("{\"i\":") + std::to_string(i) + ",\"j\":" + std::to_string(j) +
                      ",\"values\":[0.1]}";
    const auto complete = write("complete3.json", "{\"N\":3,\"n\":1,\"tau_d\":1,\"blocks\":[" + blocks +
                                                      "],\"chain\":{\"P\":[0.5,0.5,0.3,0.7],\"pi0\":[1,0]}}");
    doc = run({"inspect", "--model", complete.string()}).doc();
    CHECK(doc["full"]["count"] == 64);
    CHECK(doc["full_formula"]["count"] == 64);
}

TEST_CASE("robust bounds") {
    auto r = run({"robust", "--mjls", kData + "/scalar_two_mode.json"});
    REQUIRE(r.code == 0);
    auto eps = r.doc()["bounds"]["eps"];
    CHECK(std::fabs(eps[0].get<double>() - 0.4) < 1e-3);
    CHECK(std::fabs(eps[1].get<double>() - 0.02) < 1e-3);

    // A single mode leaves no room to move probability: eps = 0.
    const auto single = write("single.json", R"({"modes": [[[0.5]]], "P": [[1.0]]})");
    r = run({"robust", "--mjls", single.string()});
    REQUIRE(r.code == 0);
    CHECK(r.doc()["bounds"]["eps"][0] == 0.0);

    r = run({"robust", "--pendulum", "100"});
    REQUIRE(r.code == 0);
    const auto doc = r.doc();
    REQUIRE(doc["classes"].size() == 2);
    CHECK(doc["classes"][0]["bounds"]["eps"].size() == 4);
    CHECK(doc["classes"][1]["bounds"]["eps"].size() == 16);

    r = run({"robust", "--pendulum", "100", "--form", "absolute"});
    REQUIRE(r.code == 0);
    CHECK(r.doc()["classes"][0]["bounds"]["feasible"] == false);
    CHECK(run({"robust", "--pendulum", "4", "--form", "sideways"}).code == 1);
}

TEST_CASE("simulate writes a CSV and a manifest") {
    const auto out = scratch("sim.csv");
    auto r = run({"simulate", "--pendulum", "10", "--steps", "1", "--trials", "3", "--seed", "1", "--out", out.string()});
    REQUIRE(r.code == 0);
    CHECK(slurp(out).find("k,mean_sq\n0,") == 0);
    const std::string csv = slurp(out);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
    const auto manifest = json::parse(slurp(out.string() + ".manifest.json"));
    CHECK(manifest["command"] == "simulate");
    CHECK(manifest["result_digest"] == mjls::cli::sha256_hex(slurp(out)));
    CHECK(manifest["model_digest"].get<std::string>().size() == 64);
    CHECK(manifest["timings"].contains("total_s"));
}

TEST_CASE("simulate is reproducible for a fixed seed") {
    const auto a = scratch("rep_a.csv"), b = scratch("rep_b.csv");
    const std::vector<std::string> common{"simulate", "--pendulum", "20", "--steps", "50", "--trials", "10", "--seed", "7"};
    auto args = common;
    args.insert(args.end(), {"--out", a.string(), "--threads", "1"});
    REQUIRE(run(args).code == 0);
    args = common;
    args.insert(args.end(), {"--out", b.string(), "--threads", "3"});
    REQUIRE(run(args).code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(json::parse(slurp(a.string() + ".manifest.json"))["result_digest"] ==
          json::parse(slurp(b.string() + ".manifest.json"))["result_digest"]);
}

TEST_CASE("simulate exports a trajectory and handles bare MJLS input") {
    const auto traj = scratch("traj.csv");
    auto r = run({"simulate", "--pendulum", "3", "--steps", "4", "--trials", "2", "--trajectory", traj.string()});
    REQUIRE(r.code == 0);
    CHECK(slurp(traj).rfind("k,x_1_1,x_1_2,x_2_1,x_2_2,x_3_1,x_3_2,sqnorm\n", 0) == 0);
    CHECK(r.doc()["mean_sq"].size() == 4);

    r = run({"simulate", "--mjls", kData + "/scalar_two_mode.json", "--steps", "5", "--trials", "100"});
    REQUIRE(r.code == 0);
    CHECK(r.doc()["steps"] == 5);
    r = run({"simulate", "--mjls", kData + "/scalar_two_mode.json", "--trajectory", traj.string()});
    CHECK(r.code == 1);
    r = run({"simulate", "--pendulum", "3", "--steps", "0"});
    CHECK(r.code == 1);
}

TEST_CASE("help exits cleanly") {
    const auto r = run({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("analyze") != std::string::npos);
}
