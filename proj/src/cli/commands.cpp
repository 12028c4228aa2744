#include "mjls/cli/commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include "mjls/cli/manifest.hpp"
#include "mjls/errors.hpp"
#include "mjls/model.hpp"
#include "mjls/parallel.hpp"
#include "mjls/robust.hpp"
#include "mjls/sim.hpp"
#include "mjls/stability.hpp"
#include "mjls/switched.hpp"

namespace mjls::cli {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

struct SourceOptions {
    std::string model_path;
    std::size_t pendulum = 0;
    std::string mjls_path;
    std::vector<std::string> params;
};

/// Either a network model or a bare MJLS family, plus the canonical text
/// that identifies it in the manifest.
struct Loaded {
    std::optional<DncsModel> model;
    std::optional<ModeFamily> family;
    std::string canonical;
};

void add_source_options(CLI::App& cmd, SourceOptions& src) {
    cmd.add_option("--model", src.model_path, "Network model JSON file");
    cmd.add_option("--pendulum", src.pendulum, "Built-in inverted-pendulum chain with N agents");
    cmd.add_option("--mjls", src.mjls_path, "Markov jump linear system JSON file {modes, P, pi0}");
    cmd.add_option("--param", src.params, "Pendulum parameter override key=value (repeatable)");
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ValidationError("/source", "cannot read " + path);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

DenseMatrix matrix_from_json(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw ValidationError(path, "expected a non-empty array of rows");
    const std::size_t rows = j.size();
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    DenseMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) {
            throw ValidationError(path + "/" + std::to_string(r), "expected " + std::to_string(cols) + " entries");
        }
        for (std::size_t c = 0; c < cols; ++c) {
            if (!j[r][c].is_number()) throw ValidationError(path + "/" + std::to_string(r) + "/" + std::to_string(c), "not a number");
            m(r, c) = j[r][c].get<double>();
        }
    }
    return m;
}

ModeFamily load_family(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError("", std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("modes") || !doc["modes"].is_array() || doc["modes"].empty()) {
        throw ValidationError("/modes", "expected a non-empty array of mode matrices");
    }
    if (!doc.contains("P")) throw ValidationError("/P", "missing transition matrix");
    std::vector<DenseMatrix> modes;
    for (std::size_t r = 0; r < doc["modes"].size(); ++r) {
        modes.push_back(matrix_from_json(doc["modes"][r], "/modes/" + std::to_string(r)));
    }
    DenseMatrix p = matrix_from_json(doc["P"], "/P");
    std::vector<double> pi0;
    if (doc.contains("pi0")) {
        if (!doc["pi0"].is_array()) throw ValidationError("/pi0", "expected an array");
        for (std::size_t i = 0; i < doc["pi0"].size(); ++i) {
            if (!doc["pi0"][i].is_number()) throw ValidationError("/pi0/" + std::to_string(i), "not a number");
            pi0.push_back(doc["pi0"][i].get<double>());
        }
    }
    return ModeFamily::from_matrices(std::move(modes), std::move(p), std::move(pi0));
}

Loaded load_source(const SourceOptions& src) {
    const int given = static_cast<int>(!src.model_path.empty()) + static_cast<int>(src.pendulum != 0) +
                      static_cast<int>(!src.mjls_path.empty());
    if (given != 1) throw ValidationError("/source", "give exactly one of --model, --pendulum, --mjls");
    if (!src.params.empty() && src.pendulum == 0) throw ValidationError("/param", "--param applies to --pendulum only");

    Loaded out;
    if (!src.mjls_path.empty()) {
        out.canonical = read_file(src.mjls_path);
        out.family = load_family(out.canonical);
        return out;
    }
    if (src.pendulum != 0) {
        PendulumParams params;
        for (const auto& kv : src.params) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw ValidationError("/param", "expected key=value, got '" + kv + "'");
            double value = 0.0;
            try {
                std::size_t used = 0;
                value = std::stod(kv.substr(eq + 1), &used);
                if (used != kv.size() - eq - 1) throw std::invalid_argument(kv);
            } catch (const std::exception&) {
                throw ValidationError("/param/" + kv.substr(0, eq), "not a number: '" + kv.substr(eq + 1) + "'");
            }
            params.set(kv.substr(0, eq), value);
        }
        out.model = build_pendulum_model(src.pendulum, params);
    } else {
        out.model = load_model(read_file(src.model_path));
    }
    out.canonical = model_to_json(*out.model);
    return out;
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

json scope_json(const ScopeResult& s) {
    json entry{{"scope", s.scope},       {"rho", s.rho}, {"m", s.modes}, {"dim", s.dim},
               {"verdict", std::string(to_string(s.verdict))}, {"members", s.members}};
    if (s.agent) entry["agent"] = *s.agent;
    return entry;
}

int verdict_exit(Verdict v) {
    switch (v) {
        case Verdict::stable: return kExitStable;
        case Verdict::unstable: return kExitUnstable;
        case Verdict::marginal: return kExitMarginal;
    }
    return kExitError;
}

/// Shared tail of every successful command: write outputs and the manifest.
struct Emitter {
    std::ostream& out;
    std::ostream& err;
    RunManifest manifest;
    std::string out_path;

    void finish(const std::string& stdout_text, const std::string& file_text, Clock::time_point start) {
        manifest.result_digest = sha256_hex(file_text);
        manifest.timings["total_s"] = seconds_since(start);
        if (!out_path.empty()) {
            write_text_file(out_path, file_text);
            write_text_file(out_path + ".manifest.json", manifest.to_json() + "\n");
        }
        out << stdout_text << '\n';
        err << manifest.to_json() << '\n';
    }
};

int cmd_analyze(const SourceOptions& src, bool full, bool dedup, Emitter& em) {
    const auto start = Clock::now();
    const Loaded loaded = load_source(src);
    em.manifest.model_digest = sha256_hex(loaded.canonical);

    json doc;
    Verdict overall = Verdict::stable;
    if (loaded.family) {
        ScopeResult s;
        s.scope = "mjls";
        s.rho = mss_spectral_radius(*loaded.family);
        s.verdict = classify(s.rho);
        s.modes = loaded.family->mode_count();
        s.dim = s.modes * loaded.family->state_dim() * loaded.family->state_dim();
        overall = s.verdict;
        doc["mode"] = "mjls";
        doc["scopes"] = json::array({scope_json(s)});
        doc["block_norm_sufficient"] = block_norm_sufficient(*loaded.family);
    } else {
        const DncsModel& model = *loaded.model;
        const auto t_nominal = Clock::now();
        const auto nominal = nominal_stability(model);
        em.manifest.timings["nominal_s"] = seconds_since(t_nominal);
        const auto t_test = Clock::now();
        const StabilityReport report = full ? mss_test_full(model) : mss_test_reduced(model, dedup);
        em.manifest.timings["mss_s"] = seconds_since(t_test);
        overall = report.overall;
        doc["mode"] = full ? "full" : "reduced";
        doc["nominal"] = {{"rho", nominal.rho}, {"stable", nominal.stable}};
        doc["scopes"] = json::array();
        for (const auto& s : report.scopes) doc["scopes"].push_back(scope_json(s));
        doc["classes"] = report.classes;
    }
    doc["overall"] = std::string(to_string(overall));
    const std::string text = doc.dump(2);
    em.finish(text, text + "\n", start);
    return verdict_exit(overall);
}

int cmd_robust(const SourceOptions& src, bool dedup, const BoundOptions& opts, Emitter& em) {
    const auto start = Clock::now();
    const Loaded loaded = load_source(src);
    em.manifest.model_digest = sha256_hex(loaded.canonical);

    json doc;
    doc["form"] = std::string(to_string(opts.form));
    doc["margin"] = opts.margin;
    if (loaded.family) {
        doc["bounds"] = json::parse(compute_bounds(*loaded.family, opts).to_json());
    } else {
        const DncsModel& model = *loaded.model;
        std::vector<std::vector<AgentId>> classes;
        if (dedup) {
            classes = dedup_agents(model);
        } else {
            for (AgentId i = 1; i <= model.agents(); ++i) classes.push_back({i});
        }
        const auto results = parallel_map<std::string>(classes.size(), [&](std::size_t c) {
            const ModeFamily family = build_mode_family(model, Scope::agent(classes[c].front()));
            return compute_bounds(family, opts).to_json();
        });
        doc["classes"] = json::array();
        for (std::size_t c = 0; c < classes.size(); ++c) {
            doc["classes"].push_back({{"agent", classes[c].front()},
                                      {"members", classes[c]},
                                      {"bounds", json::parse(results[c])}});
        }
    }
    const std::string text = doc.dump(2);
    em.finish(text, text + "\n", start);
    return kExitStable;
}

int cmd_simulate(const SourceOptions& src, const SimConfig& config, const std::string& trajectory_path,
                 std::size_t trajectory_trial, Emitter& em) {
    const auto start = Clock::now();
    const Loaded loaded = load_source(src);
    em.manifest.model_digest = sha256_hex(loaded.canonical);
    config.validate();

    const std::vector<double> mean_sq = loaded.family ? estimate_ms(*loaded.family, config) : estimate_ms(*loaded.model, config);
    const std::string csv = estimate_csv(mean_sq);

    json doc{{"steps", config.steps},
             {"trials", config.trials},
             {"seed", config.seed},
             {"initial_mean_sq", mean_sq.front()},
             {"final_mean_sq", mean_sq.back()},
             {"decay_ratio", mean_sq.front() > 0.0 ? mean_sq.back() / mean_sq.front() : 0.0},
             {"csv_sha256", sha256_hex(csv)}};
    if (em.out_path.empty()) doc["mean_sq"] = mean_sq;
    if (!trajectory_path.empty()) {
        if (!loaded.model) throw ValidationError("/trajectory", "trajectory export needs a network model");
        const std::string traj = trajectory_csv(simulate_trajectory(*loaded.model, config, trajectory_trial));
        write_text_file(trajectory_path, traj);
        doc["trajectory_sha256"] = sha256_hex(traj);
    }
    em.finish(doc.dump(2), csv, start);
    return kExitStable;
}

json mode_count_json(const ModeCount& c) {
    json j{{"q", c.q}, {"L", c.links}};
    j["count"] = c.value ? json(*c.value) : json(nullptr);
    return j;
}

int cmd_inspect(const SourceOptions& src, Emitter& em) {
    const auto start = Clock::now();
    const Loaded loaded = load_source(src);
    em.manifest.model_digest = sha256_hex(loaded.canonical);

    json doc;
    if (loaded.family) {
        doc = {{"modes", loaded.family->mode_count()}, {"state_dim", loaded.family->state_dim()}};
    } else {
        const DncsModel& model = *loaded.model;
        doc["N"] = model.agents();
        doc["n"] = model.state_dim();
        doc["tau_d"] = model.tau_d();
        json agents = json::array();
        for (AgentId i = 1; i <= model.agents(); ++i) {
            const auto count = mode_count(model, Scope::agent(i));
            agents.push_back({{"agent", i}, {"neighborhood", neighborhood(model, i).size()}, {"links", count.links}});
        }
        doc["agents"] = std::move(agents);
        doc["full"] = mode_count_json(mode_count(model, Scope::global()));
        doc["full_formula"] = mode_count_json(full_formula_count(model));
        const auto reduced = reduced_formula_total(model);
        doc["reduced_formula_total"] = reduced ? json(*reduced) : json(nullptr);

        json classes = json::array();
        std::uint64_t link_aware_total = 0;
        bool overflow = false;
        for (const auto& members : dedup_agents(model)) {
            const auto count = mode_count(model, Scope::agent(members.front()));
            json c{{"agent", members.front()}, {"members", members}, {"links", count.links}};
            c["modes"] = count.value ? json(*count.value) : json(nullptr);
            if (count.value) {
                link_aware_total += *count.value;
            } else {
                overflow = true;
            }
            classes.push_back(std::move(c));
        }
        doc["classes"] = std::move(classes);
        doc["class_mode_total"] = overflow ? json(nullptr) : json(link_aware_total);
    }
    const std::string text = doc.dump(2);
    em.finish(text, text + "\n", start);
    return kExitStable;
}

json error_json(std::string_view kind, const std::string& message, const std::string& path = {},
                const std::string& hint = {}) {
    json e{{"kind", kind}, {"message", message}};
    if (!path.empty()) e["path"] = path;
    if (!hint.empty()) e["hint"] = hint;
    return json{{"error", e}};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Mean-square stability analysis for networks with Markov communication delays", "mjls-stab"};
    app.require_subcommand(1);
    std::size_t threads = 0;
    app.add_option("--threads", threads, "Worker threads (default: MJLS_STAB_THREADS or all cores)");

    SourceOptions src;
    std::string out_path;

    bool full = false;
    bool reduced = false;
    bool dedup = false;
    auto* analyze = app.add_subcommand("analyze", "Mean-square stability verdict");
    add_source_options(*analyze, src);
    auto* full_flag = analyze->add_flag("--full", full, "Test the global mode family");
    analyze->add_flag("--reduced", reduced, "Per-agent reduced test (default)")->excludes(full_flag);
    analyze->add_flag("--dedup", dedup, "Evaluate one agent per symmetry class");
    analyze->add_option("--out", out_path, "Also write the report here");

    BoundOptions bound_opts;
    std::string form = "signed";
    bool robust_all = false;
    auto* robust = app.add_subcommand("robust", "Uncertainty bounds on the transition matrix");
    add_source_options(*robust, src);
    robust->add_option("--form", form, "Norm constraint form: signed or absolute");
    robust->add_option("--margin", bound_opts.margin, "Subtracted from every beta_s");
    robust->add_flag("--all-agents", robust_all, "One result per agent instead of per symmetry class");
    robust->add_option("--out", out_path, "Also write the bounds here");

    SimConfig sim_config;
    std::string trajectory_path;
    std::size_t trajectory_trial = 0;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo mean-square estimate");
    add_source_options(*simulate, src);
    simulate->add_option("--steps", sim_config.steps, "Horizon");
    simulate->add_option("--trials", sim_config.trials, "Realisations");
    simulate->add_option("--seed", sim_config.seed, "Generator seed");
    simulate->add_option("--out", out_path, "mean_sq CSV path");
    simulate->add_option("--trajectory", trajectory_path, "Also export one realisation as CSV");
    simulate->add_option("--trial", trajectory_trial, "Realisation exported by --trajectory");

    auto* inspect = app.add_subcommand("inspect", "Model summary and mode counts");
    add_source_options(*inspect, src);

    // Global options such as --threads may also follow the subcommand.
    for (auto* sub : {analyze, robust, simulate, inspect}) sub->fallthrough();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        out << error_json("usage", e.what()).dump(2) << '\n';
        return kExitError;
    }

    Emitter em{out, err, {}, out_path};
    em.manifest.arguments = args;
    try {
        if (threads != 0) set_thread_limit(threads);
        if (*analyze) {
            em.manifest.command = "analyze";
            return cmd_analyze(src, full, dedup, em);
        }
        if (*robust) {
            em.manifest.command = "robust";
            bound_opts.form = parse_constraint_form(form);
            return cmd_robust(src, !robust_all, bound_opts, em);
        }
        if (*simulate) {
            em.manifest.command = "simulate";
            return cmd_simulate(src, sim_config, trajectory_path, trajectory_trial, em);
        }
        em.manifest.command = "inspect";
        return cmd_inspect(src, em);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        out << error_json("validation", e.what(), e.path()).dump(2) << '\n';
    } catch (const LimitError& e) {
        err << "error: " << e.what() << '\n';
        out << error_json("limit", e.what(), {}, "mode cap exceeded; rerun with --reduced").dump(2) << '\n';
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        out << error_json("error", e.what()).dump(2) << '\n';
    }
    return kExitError;
}

}  // namespace mjls::cli
