#include "mjls/model.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mjls/errors.hpp"
#include "mjls/linalg.hpp"

namespace mjls {

using nlohmann::json;

namespace {

constexpr double kStochasticTol = 1e-12;

std::string idx_path(const std::string& base, std::size_t i) { return base + "/" + std::to_string(i); }

}  // namespace

// --- DelayChain -----------------------------------------------------------------

void DelayChain::validate(const std::string& path) const {
    if (!P.square() || P.rows() == 0) throw ValidationError(path + "/P", "transition matrix must be square and non-empty");
    if (pi0.size() != P.rows()) {
        throw ValidationError(path + "/pi0", "expected " + std::to_string(P.rows()) + " entries, got " +
                                                 std::to_string(pi0.size()));
    }
    for (std::size_t r = 0; r < P.rows(); ++r) {
        double sum = 0.0;
        for (std::size_t c = 0; c < P.cols(); ++c) {
            const double v = P(r, c);
            if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
                throw ValidationError(idx_path(path + "/P", r * P.cols() + c), "probability outside [0, 1]");
            }
            sum += v;
        }
        if (std::fabs(sum - 1.0) > kStochasticTol) {
            throw ValidationError(idx_path(path + "/P", r * P.cols()),
                                  "row " + std::to_string(r) + " not stochastic (sums to " + std::to_string(sum) + ")");
        }
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < pi0.size(); ++i) {
        if (!std::isfinite(pi0[i]) || pi0[i] < 0.0 || pi0[i] > 1.0) {
            throw ValidationError(idx_path(path + "/pi0", i), "probability outside [0, 1]");
        }
        sum += pi0[i];
    }
    if (std::fabs(sum - 1.0) > kStochasticTol) throw ValidationError(path + "/pi0", "distribution does not sum to 1");
}

DelayChain DelayChain::pendulum_default() {
    return DelayChain{DenseMatrix{{0.5, 0.5}, {0.3, 0.7}}, {1.0, 0.0}};
}

// --- PendulumParams -----------------------------------------------------------

void PendulumParams::validate() const {
    const std::pair<const char*, double> positive[] = {
        {"a_end", a_end}, {"a_interior", a_interior}, {"g", g}, {"K", spring},
        {"mass", mass},   {"l", length},              {"dt", dt},
    };
    for (const auto& [name, value] : positive) {
        if (!(value > 0.0) || !std::isfinite(value)) {
            throw ValidationError(std::string("/params/") + name, "must be strictly positive");
        }
    }
    if (!(h >= 0.0) || !std::isfinite(h)) throw ValidationError("/params/h", "must be non-negative");
}

void PendulumParams::set(std::string_view key, double value) {
    if (key == "a_end") a_end = value;
    else if (key == "a_interior") a_interior = value;
    else if (key == "h") h = value;
    else if (key == "g") g = value;
    else if (key == "K") spring = value;
    else if (key == "mass" || key == "m") mass = value;
    else if (key == "l" || key == "length") length = value;
    else if (key == "dt") dt = value;
    else throw ValidationError("/params/" + std::string(key), "unknown pendulum parameter");
}

// --- DncsModel ------------------------------------------------------------------

DncsModel::DncsModel(std::size_t agents, std::size_t state_dim, std::size_t tau_d, BlockMap blocks, DelayChain chain)
    : agents_(agents), state_dim_(state_dim), tau_d_(tau_d), blocks_(std::move(blocks)), chain_(std::move(chain)) {
    if (agents_ < 1) throw ValidationError("/N", "need at least one agent");
    if (state_dim_ < 1) throw ValidationError("/n", "state dimension must be positive");
    chain_.validate("/chain");
    if (chain_.q() != tau_d_ + 1) {
        throw ValidationError("/chain/P", "chain has " + std::to_string(chain_.q()) + " states but tau_d + 1 = " +
                                              std::to_string(tau_d_ + 1));
    }
    for (const auto& [key, a] : blocks_) {
        const auto [i, j] = key;
        const std::string where = "/blocks/(" + std::to_string(i) + "," + std::to_string(j) + ")";
        if (i < 1 || i > agents_ || j < 1 || j > agents_) throw ValidationError(where, "agent index out of range");
        if (a.rows() != state_dim_ || a.cols() != state_dim_) {
            throw ValidationError(where, "block dimension mismatch (expected " + std::to_string(state_dim_) + "x" +
                                             std::to_string(state_dim_) + ")");
        }
        if (!a.all_finite()) throw ValidationError(where, "non-finite entry");
        if (i != j && a.is_zero()) throw ValidationError(where, "stored coupling block is zero");
    }
    for (AgentId i = 1; i <= agents_; ++i) {
        if (!blocks_.contains({i, i})) {
            throw ValidationError("/blocks", "missing diagonal block (" + std::to_string(i) + "," + std::to_string(i) + ")");
        }
    }
}

const DenseMatrix* DncsModel::block(AgentId i, AgentId j) const {
    const auto it = blocks_.find({i, j});
    return it == blocks_.end() ? nullptr : &it->second;
}

// --- JSON -------------------------------------------------------------------------

namespace {

std::size_t read_count(const json& doc, const char* key, std::size_t min_value) {
    const std::string path = std::string("/") + key;
    if (!doc.contains(key)) throw ValidationError(path, "missing required field");
    const auto& v = doc.at(key);
    if (!v.is_number_integer()) throw ValidationError(path, "expected an integer");
    const auto value = v.get<long long>();
    if (value < static_cast<long long>(min_value)) {
        throw ValidationError(path, "must be at least " + std::to_string(min_value));
    }
    return static_cast<std::size_t>(value);
}

std::vector<double> read_numbers(const json& v, const std::string& path, std::size_t expected) {
    if (!v.is_array()) throw ValidationError(path, "expected an array of numbers");
    if (v.size() != expected) {
        throw ValidationError(path, "expected " + std::to_string(expected) + " values, got " + std::to_string(v.size()));
    }
    std::vector<double> out;
    out.reserve(expected);
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) throw ValidationError(idx_path(path, i), "expected a number");
        const double x = v[i].get<double>();
        if (!std::isfinite(x)) throw ValidationError(idx_path(path, i), "non-finite value");
        out.push_back(x);
    }
    return out;
}

}  // namespace

DncsModel load_model(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError("/", std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ValidationError("/", "expected a JSON object");

    const std::size_t agents = read_count(doc, "N", 1);
    const std::size_t n = read_count(doc, "n", 1);
    const std::size_t tau_d = read_count(doc, "tau_d", 0);
    const std::size_t q = tau_d + 1;

    if (!doc.contains("chain") || !doc["chain"].is_object()) throw ValidationError("/chain", "missing chain object");
    const auto& jc = doc["chain"];
    if (!jc.contains("P")) throw ValidationError("/chain/P", "missing required field");
    if (!jc.contains("pi0")) throw ValidationError("/chain/pi0", "missing required field");
    DelayChain chain{DenseMatrix(q, q, read_numbers(jc["P"], "/chain/P", q * q)), read_numbers(jc["pi0"], "/chain/pi0", q)};
    chain.validate("/chain");

    if (!doc.contains("blocks") || !doc["blocks"].is_array()) throw ValidationError("/blocks", "expected an array");
    DncsModel::BlockMap blocks;
    const auto& jb = doc["blocks"];
    for (std::size_t b = 0; b < jb.size(); ++b) {
        const std::string path = idx_path("/blocks", b);
        const auto& entry = jb[b];
        if (!entry.is_object()) throw ValidationError(path, "expected an object");
        std::size_t ij[2];
        const char* keys[2] = {"i", "j"};
        for (int k = 0; k < 2; ++k) {
            if (!entry.contains(keys[k]) || !entry[keys[k]].is_number_integer()) {
                throw ValidationError(path + "/" + keys[k], "expected an integer agent index");
            }
            const auto v = entry[keys[k]].get<long long>();
            if (v < 1 || static_cast<std::size_t>(v) > agents) {
                throw ValidationError(path + "/" + keys[k], "agent index out of range 1.." + std::to_string(agents));
            }
            ij[k] = static_cast<std::size_t>(v);
        }
        if (!entry.contains("values")) throw ValidationError(path + "/values", "missing required field");
        DenseMatrix a(n, n, read_numbers(entry["values"], path + "/values", n * n));
        if (ij[0] != ij[1] && a.is_zero()) continue;  // A_ij = 0 means "not coupled"
        if (!blocks.emplace(std::pair{ij[0], ij[1]}, std::move(a)).second) {
            throw ValidationError(path, "duplicate block (" + std::to_string(ij[0]) + "," + std::to_string(ij[1]) + ")");
        }
    }
    return DncsModel(agents, n, tau_d, std::move(blocks), std::move(chain));
}

DncsModel load_model_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open model file '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return load_model(text.str());
}

std::string model_to_json(const DncsModel& model) {
    json doc;
    doc["N"] = model.agents();
    doc["n"] = model.state_dim();
    doc["tau_d"] = model.tau_d();
    json blocks = json::array();
    for (const auto& [key, a] : model.blocks()) {
        blocks.push_back({{"i", key.first}, {"j", key.second}, {"values", std::vector<double>(a.values().begin(), a.values().end())}});
    }
    doc["blocks"] = std::move(blocks);
    const auto& p = model.chain().P;
    doc["chain"] = {{"P", std::vector<double>(p.values().begin(), p.values().end())}, {"pi0", model.chain().pi0}};
    return doc.dump(2);
}

// --- Analysis -------------------------------------------------------------------

DenseMatrix build_global_matrix(const DncsModel& model) {
    const std::size_t n = model.state_dim();
    DenseMatrix global(model.agents() * n, model.agents() * n);
    for (const auto& [key, a] : model.blocks()) global.set_block((key.first - 1) * n, (key.second - 1) * n, a);
    return global;
}

NominalStability nominal_stability(const DncsModel& model) {
    const double rho = spectral_radius(build_global_matrix(model));
    return {rho, rho < 1.0};
}

DncsModel build_pendulum_model(std::size_t agents, const PendulumParams& params, const DelayChain& chain) {
    if (agents < 2) throw ValidationError("/N", "pendulum chain needs at least two agents");
    params.validate();

    const double ml2 = params.mass * params.length * params.length;
    const double dt = params.dt;
    DncsModel::BlockMap blocks;
    for (AgentId i = 1; i <= agents; ++i) {
        const bool endpoint = i == 1 || i == agents;
        const double a = endpoint ? params.a_end : params.a_interior;

        const DenseMatrix open_loop{{1.0, dt}, {(params.g / params.length - a * params.spring / ml2) * dt, 1.0}};
        const DenseMatrix input{{0.0}, {dt / ml2}};
        const DenseMatrix gain{{a * params.spring - ml2 / 4.0 * (8.0 + 4.0 * params.g / params.length), -3.0 * ml2}};
        blocks.emplace(std::pair{i, i}, open_loop + input * gain);

        if (params.h > 0.0) {
            const DenseMatrix coupling{{0.0, 0.0}, {params.h * params.spring / ml2 * dt, 0.0}};
            if (i > 1) blocks.emplace(std::pair{i, i - 1}, coupling);
            if (i < agents) blocks.emplace(std::pair{i, i + 1}, coupling);
        }
    }
    return DncsModel(agents, 2, chain.q() - 1, std::move(blocks), chain);
}

std::vector<AgentId> neighborhood(const DncsModel& model, AgentId i) {
    if (i < 1 || i > model.agents()) {
        throw ValidationError("/agent", "agent index " + std::to_string(i) + " out of range 1.." +
                                            std::to_string(model.agents()));
    }
    std::set<AgentId> out{i};
    for (const auto& [key, a] : model.blocks()) {
        if (key.first == i) out.insert(key.second);
        if (key.second == i) out.insert(key.first);
    }
    return {out.begin(), out.end()};
}

}  // namespace mjls
