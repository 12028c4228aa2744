#include "mjls/sim.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "mjls/errors.hpp"
#include "mjls/parallel.hpp"

namespace mjls {

void SimConfig::validate() const {
    if (steps == 0) throw ValidationError("/steps", "need at least one step");
    if (trials == 0) throw ValidationError("/trials", "need at least one trial");
}

namespace {

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Lane reserved for initial-state draws so they never collide with link lanes.
constexpr std::uint64_t kInitStep = std::numeric_limits<std::uint64_t>::max();

std::size_t sample(std::span<const double> dist, double u) {
    double acc = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        acc += dist[i];
        if (u < acc) return i;
    }
    // Rounding left u above the cumulative sum: take the last reachable state.
    for (std::size_t i = dist.size(); i-- > 0;)
        if (dist[i] > 0.0) return i;
    return 0;
}

std::vector<double> row_of(const DenseMatrix& p, std::size_t r) {
    const auto row = p.row(r);
    return {row.begin(), row.end()};
}

std::vector<double> initial_state(const SimConfig& config, std::size_t dim, std::size_t trial) {
    if (config.x0) {
        if (config.x0->size() != dim) {
            throw ValidationError("/x0", "expected " + std::to_string(dim) + " entries, got " +
                                             std::to_string(config.x0->size()));
        }
        return *config.x0;
    }
    std::vector<double> x(dim);
    for (std::size_t c = 0; c < dim; ++c) x[c] = 2.0 * keyed_uniform(config.seed, trial, kInitStep, c) - 1.0;
    return x;
}

double sqnorm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

// Per-step mean across trials, summing trial rows pairwise so the result does
// not depend on how trials were scheduled.
std::vector<double> pairwise_mean(std::vector<std::vector<double>> rows) {
    const std::size_t count = rows.size();
    for (std::size_t width = 1; width < rows.size(); width *= 2) {
        for (std::size_t i = 0; i + width < rows.size(); i += 2 * width) {
            auto& dst = rows[i];
            const auto& src = rows[i + width];
            for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
        }
    }
    std::vector<double> out = std::move(rows.front());
    for (double& v : out) v /= static_cast<double>(count);
    return out;
}

}  // namespace

double keyed_uniform(std::uint64_t seed, std::uint64_t trial, std::uint64_t step, std::uint64_t lane) {
    std::uint64_t h = splitmix(seed);
    h = splitmix(h ^ trial);
    h = splitmix(h ^ step);
    h = splitmix(h ^ lane);
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

TrajectoryRecord simulate_trajectory(const DncsModel& model, const SimConfig& config, std::size_t trial) {
    config.validate();
    const std::size_t N = model.agents();
    const std::size_t n = model.state_dim();
    const std::size_t dim = N * n;
    const std::size_t history = model.tau_d() + 1;
    const auto& chain = model.chain();

    TrajectoryRecord rec;
    rec.agents = N;
    rec.state_dim = n;
    rec.links = enumerate_links(model, Scope::global());
    const std::size_t L = rec.links.size();

    // ring[k % history] holds x(k); warm start fills every slot with x(0).
    std::vector<std::vector<double>> ring(history, initial_state(config, dim, trial));
    std::vector<std::size_t> tau(L);
    for (std::size_t t = 0; t < L; ++t) tau[t] = sample(chain.pi0, keyed_uniform(config.seed, trial, 0, t));

    std::vector<const DenseMatrix*> link_block(L);
    for (std::size_t t = 0; t < L; ++t) link_block[t] = model.block(rec.links[t].receiver, rec.links[t].sender);
    std::vector<std::vector<double>> transition(chain.q());
    for (std::size_t r = 0; r < chain.q(); ++r) transition[r] = row_of(chain.P, r);

    rec.states.reserve(config.steps);
    rec.sqnorm.reserve(config.steps);
    rec.delays.reserve(config.steps);
    std::vector<double> next(dim);
    for (std::size_t k = 0; k < config.steps; ++k) {
        const auto& x = ring[k % history];
        rec.states.push_back(x);
        rec.sqnorm.push_back(sqnorm(x));
        rec.delays.emplace_back(tau.begin(), tau.end());
        if (k + 1 == config.steps) break;

        std::fill(next.begin(), next.end(), 0.0);
        for (AgentId i = 1; i <= N; ++i) {
            const DenseMatrix& a = *model.block(i, i);
            const auto out = std::span<double>(next).subspan((i - 1) * n, n);
            const auto in = std::span<const double>(x).subspan((i - 1) * n, n);
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < n; ++c) out[r] += a(r, c) * in[c];
        }
        for (std::size_t t = 0; t < L; ++t) {
            const auto& link = rec.links[t];
            const auto& delayed = ring[(k + history - tau[t]) % history];
            const DenseMatrix& a = *link_block[t];
            const auto out = std::span<double>(next).subspan((link.receiver - 1) * n, n);
            const auto in = std::span<const double>(delayed).subspan((link.sender - 1) * n, n);
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < n; ++c) out[r] += a(r, c) * in[c];
        }
        ring[(k + 1) % history] = next;
        for (std::size_t t = 0; t < L; ++t) tau[t] = sample(transition[tau[t]], keyed_uniform(config.seed, trial, k + 1, t));
    }
    return rec;
}

std::vector<double> estimate_ms(const DncsModel& model, const SimConfig& config) {
    config.validate();
    auto rows = parallel_map<std::vector<double>>(config.trials, [&](std::size_t trial) {
        return simulate_trajectory(model, config, trial).sqnorm;
    });
    return pairwise_mean(std::move(rows));
}

std::vector<double> estimate_ms(const ModeFamily& family, const SimConfig& config) {
    config.validate();
    family.validate();
    const std::size_t d = family.state_dim();
    std::vector<std::vector<double>> transition(family.mode_count());
    for (std::size_t r = 0; r < transition.size(); ++r) transition[r] = row_of(family.joint_P, r);

    auto rows = parallel_map<std::vector<double>>(config.trials, [&](std::size_t trial) {
        std::vector<double> x = initial_state(config, d, trial);
        std::vector<double> out;
        out.reserve(config.steps);
        std::size_t mode = sample(family.joint_pi0, keyed_uniform(config.seed, trial, 0, 0));
        for (std::size_t k = 0; k < config.steps; ++k) {
            out.push_back(sqnorm(x));
            if (k + 1 == config.steps) break;
            x = family.matrices[mode] * std::span<const double>(x);
            mode = sample(transition[mode], keyed_uniform(config.seed, trial, k + 1, 0));
        }
        return out;
    });
    return pairwise_mean(std::move(rows));
}

double log_slope(std::span<const double> values, std::size_t first) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    double count = 0.0;
    for (std::size_t k = first; k < values.size(); ++k) {
        if (!(values[k] > 0.0) || !std::isfinite(values[k])) continue;
        const double x = static_cast<double>(k);
        const double y = std::log(values[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        count += 1.0;
    }
    if (count < 2.0) return std::numeric_limits<double>::quiet_NaN();
    return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

namespace {

void append_number(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

}  // namespace

std::string trajectory_csv(const TrajectoryRecord& record) {
    std::string out = "k";
    for (std::size_t i = 1; i <= record.agents; ++i) {
        if (record.state_dim == 1) {
            out += ",x_" + std::to_string(i);
            continue;
        }
        for (std::size_t c = 1; c <= record.state_dim; ++c) out += ",x_" + std::to_string(i) + "_" + std::to_string(c);
    }
    out += ",sqnorm\n";
    for (std::size_t k = 0; k < record.states.size(); ++k) {
        out += std::to_string(k);
        for (double v : record.states[k]) {
            out += ',';
            append_number(out, v);
        }
        out += ',';
        append_number(out, record.sqnorm[k]);
        out += '\n';
    }
    return out;
}

std::string estimate_csv(std::span<const double> mean_sq) {
    std::string out = "k,mean_sq\n";
    for (std::size_t k = 0; k < mean_sq.size(); ++k) {
        out += std::to_string(k);
        out += ',';
        append_number(out, mean_sq[k]);
        out += '\n';
    }
    return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open " + path.string() + " for writing");
    f << text;
    f.close();
    if (!f) throw Error("failed writing " + path.string());
}

}  // namespace mjls
