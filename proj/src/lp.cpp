#include "mjls/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mjls/errors.hpp"

namespace mjls {

std::string_view to_string(LpStatus s) noexcept {
    switch (s) {
        case LpStatus::optimal: return "optimal";
        case LpStatus::infeasible: return "infeasible";
        case LpStatus::unbounded: return "unbounded";
    }
    return "unknown";
}

void LpProblem::validate() const {
    const std::size_t n = variables();
    if (lower.size() != n || upper.size() != n) throw ValidationError("/bounds", "bound vectors must match the objective");
    for (std::size_t j = 0; j < n; ++j) {
        if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j] || lower[j] == std::numeric_limits<double>::infinity() ||
            upper[j] == -std::numeric_limits<double>::infinity()) {
            throw ValidationError("/bounds/" + std::to_string(j), "need lower <= upper");
        }
        if (!std::isfinite(objective[j])) throw ValidationError("/objective/" + std::to_string(j), "non-finite coefficient");
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].coeffs.size() != n) {
            throw ValidationError("/rows/" + std::to_string(i), "expected " + std::to_string(n) + " coefficients");
        }
        if (!std::isfinite(rows[i].bound)) throw ValidationError("/rows/" + std::to_string(i) + "/bound", "non-finite bound");
    }
}

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Original variable j expressed through non-negative tableau columns.
struct Substitution {
    enum class Kind { shift, reflect, split } kind;
    std::size_t column;  // first tableau column
    double offset;       // lower bound (shift) or upper bound (reflect)
};

class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols, 0.0) {}
    double& operator()(std::size_t r, std::size_t c) { return a_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return a_[r * cols_ + c]; }
    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }

    void pivot(std::size_t pr, std::size_t pc) {
        const double inv = 1.0 / (*this)(pr, pc);
        double* prow = &a_[pr * cols_];
        for (std::size_t c = 0; c < cols_; ++c) prow[c] *= inv;
        prow[pc] = 1.0;
        for (std::size_t r = 0; r < rows_; ++r) {
            if (r == pr) continue;
            double* row = &a_[r * cols_];
            const double f = row[pc];
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < cols_; ++c) row[c] -= f * prow[c];
            row[pc] = 0.0;
        }
    }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> a_;
};

// Bounded-variable primal simplex state over columns with 0 <= y_j <= upper_j.
struct Simplex {
    Tableau t;
    std::vector<double> upper;
    std::vector<std::size_t> basis;     // basic column of each row
    std::vector<double> basic_value;    // value of basis[i]
    std::vector<char> at_upper;         // nonbasic column sits at its upper bound
    std::vector<char> is_basic;
    const LpOptions& opts;
    std::size_t iterations = 0;
    bool bland = false;

    Simplex(Tableau tab, std::vector<double> ub, std::vector<std::size_t> initial_basis, std::vector<double> values,
            const LpOptions& o)
        : t(std::move(tab)),
          upper(std::move(ub)),
          basis(std::move(initial_basis)),
          basic_value(std::move(values)),
          at_upper(t.cols(), 0),
          is_basic(t.cols(), 0),
          opts(o) {
        for (auto b : basis) is_basic[b] = 1;
    }

    [[nodiscard]] double value(std::size_t col) const {
        if (is_basic[col]) {
            for (std::size_t i = 0; i < basis.size(); ++i)
                if (basis[i] == col) return basic_value[i];
        }
        return at_upper[col] ? upper[col] : 0.0;
    }

    // Maximises cost . y. Returns false when the objective is unbounded.
    bool optimise(const std::vector<double>& cost) {
        const std::size_t m = t.rows();
        const std::size_t n = t.cols();
        std::size_t degenerate = 0;
        std::vector<double> reduced(n);
        for (;;) {
            if (++iterations > opts.max_iterations) {
                throw ConvergenceError("simplex: iteration cap reached (Bland's rule " +
                                           std::string(bland ? "engaged" : "not engaged") + ")",
                                       opts.max_iterations);
            }
            for (std::size_t j = 0; j < n; ++j) {
                double d = cost[j];
                for (std::size_t i = 0; i < m; ++i) d -= cost[basis[i]] * t(i, j);
                reduced[j] = d;
            }

            std::size_t entering = n;
            double best = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (is_basic[j] || upper[j] <= 0.0) continue;
                const double gain = at_upper[j] ? -reduced[j] : reduced[j];
                if (gain <= opts.tol) continue;
                if (bland) {
                    entering = j;
                    break;
                }
                if (gain > best) {
                    best = gain;
                    entering = j;
                }
            }
            if (entering == n) return true;

            const double dir = at_upper[entering] ? -1.0 : 1.0;
            double step = upper[entering];
            std::size_t leaving_row = m;
            bool leaving_to_upper = false;
            for (std::size_t i = 0; i < m; ++i) {
                const double alpha = dir * t(i, entering);
                double limit = kInfinity;
                bool to_upper = false;
                if (alpha > opts.tol) {
                    limit = std::max(0.0, basic_value[i]) / alpha;
                } else if (alpha < -opts.tol && std::isfinite(upper[basis[i]])) {
                    limit = std::max(0.0, upper[basis[i]] - basic_value[i]) / -alpha;
                    to_upper = true;
                } else {
                    continue;
                }
                const bool better = limit < step - 1e-15 ||
                                    (limit <= step + 1e-15 && leaving_row < m && basis[i] < basis[leaving_row]);
                if (better || (leaving_row == m && limit <= step)) {
                    step = limit;
                    leaving_row = i;
                    leaving_to_upper = to_upper;
                }
            }
            if (!std::isfinite(step)) return false;

            degenerate = step <= opts.tol ? degenerate + 1 : 0;
            if (degenerate >= opts.degenerate_streak) bland = true;

            for (std::size_t i = 0; i < m; ++i) basic_value[i] -= dir * step * t(i, entering);

            if (leaving_row == m) {
                at_upper[entering] = at_upper[entering] ? 0 : 1;  // bound flip
                continue;
            }
            const std::size_t leaving = basis[leaving_row];
            const double entering_value = at_upper[entering] ? upper[entering] - step : step;
            is_basic[leaving] = 0;
            at_upper[leaving] = leaving_to_upper ? 1 : 0;
            is_basic[entering] = 1;
            at_upper[entering] = 0;
            basis[leaving_row] = entering;
            basic_value[leaving_row] = entering_value;
            t.pivot(leaving_row, entering);
        }
    }
};

}  // namespace

LpResult lp_solve(const LpProblem& problem, const LpOptions& opts) {
    problem.validate();
    const std::size_t n = problem.variables();
    if (n > opts.max_variables) {
        throw LimitError("lp_solve: " + std::to_string(n) + " variables exceed the limit of " +
                         std::to_string(opts.max_variables));
    }
    const std::size_t m = problem.rows.size();
    const double sense = problem.sense == LpSense::maximize ? 1.0 : -1.0;

    // Map original variables onto non-negative columns.
    std::vector<Substitution> subs;
    std::vector<double> col_upper;
    for (std::size_t j = 0; j < n; ++j) {
        const double lo = problem.lower[j];
        const double hi = problem.upper[j];
        if (std::isfinite(lo)) {
            subs.push_back({Substitution::Kind::shift, col_upper.size(), lo});
            col_upper.push_back(hi - lo);
        } else if (std::isfinite(hi)) {
            subs.push_back({Substitution::Kind::reflect, col_upper.size(), hi});
            col_upper.push_back(kInfinity);
        } else {
            subs.push_back({Substitution::Kind::split, col_upper.size(), 0.0});
            col_upper.push_back(kInfinity);
            col_upper.push_back(kInfinity);
        }
    }
    const std::size_t structural = col_upper.size();

    std::vector<double> cost(structural, 0.0);
    std::vector<double> rhs(m);
    for (std::size_t i = 0; i < m; ++i) rhs[i] = problem.rows[i].bound;
    auto coefficient_at = [&](std::size_t i, std::size_t col) {
        for (std::size_t j = 0; j < n; ++j) {
            const auto& s = subs[j];
            const double a = problem.rows[i].coeffs[j];
            if (s.column == col) return s.kind == Substitution::Kind::reflect ? -a : a;
            if (s.kind == Substitution::Kind::split && s.column + 1 == col) return -a;
        }
        return 0.0;
    };
    for (std::size_t j = 0; j < n; ++j) {
        const auto& s = subs[j];
        const double c = sense * problem.objective[j];
        switch (s.kind) {
            case Substitution::Kind::shift: cost[s.column] = c; break;
            case Substitution::Kind::reflect: cost[s.column] = -c; break;
            case Substitution::Kind::split:
                cost[s.column] = c;
                cost[s.column + 1] = -c;
                break;
        }
        if (s.kind != Substitution::Kind::split) {
            for (std::size_t i = 0; i < m; ++i) rhs[i] -= problem.rows[i].coeffs[j] * s.offset;
        }
    }

    // Columns: structural | slacks | artificials (rows with negative rhs).
    std::vector<std::size_t> artificial_rows;
    for (std::size_t i = 0; i < m; ++i)
        if (rhs[i] < 0.0) artificial_rows.push_back(i);
    const std::size_t cols = structural + m + artificial_rows.size();

    Tableau tab(m, cols);
    std::vector<std::size_t> basis(m);
    std::vector<double> values(m);
    std::vector<double> upper(cols, kInfinity);
    std::copy(col_upper.begin(), col_upper.end(), upper.begin());
    for (std::size_t i = 0, next_art = structural + m; i < m; ++i) {
        const double sign = rhs[i] < 0.0 ? -1.0 : 1.0;
        for (std::size_t c = 0; c < structural; ++c) tab(i, c) = sign * coefficient_at(i, c);
        tab(i, structural + i) = sign;
        if (sign < 0.0) {
            tab(i, next_art) = 1.0;
            basis[i] = next_art++;
        } else {
            basis[i] = structural + i;
        }
        values[i] = sign * rhs[i];
    }

    Simplex simplex(std::move(tab), std::move(upper), std::move(basis), std::move(values), opts);

    if (!artificial_rows.empty()) {
        std::vector<double> phase1(cols, 0.0);
        for (std::size_t c = structural + m; c < cols; ++c) phase1[c] = -1.0;
        simplex.optimise(phase1);
        double infeasibility = 0.0;
        double scale = 1.0;
        for (std::size_t i = 0; i < m; ++i) scale = std::max(scale, std::fabs(problem.rows[i].bound));
        for (std::size_t c = structural + m; c < cols; ++c) infeasibility += simplex.value(c);
        if (infeasibility > opts.tol * scale) {
            LpResult out;
            out.status = LpStatus::infeasible;
            out.iterations = simplex.iterations;
            return out;
        }
        for (std::size_t c = structural + m; c < cols; ++c) simplex.upper[c] = 0.0;
    }

    std::vector<double> phase2(cols, 0.0);
    std::copy(cost.begin(), cost.end(), phase2.begin());
    LpResult out;
    if (!simplex.optimise(phase2)) {
        out.status = LpStatus::unbounded;
        out.iterations = simplex.iterations;
        return out;
    }

    out.status = LpStatus::optimal;
    out.iterations = simplex.iterations;
    out.x.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const auto& s = subs[j];
        switch (s.kind) {
            case Substitution::Kind::shift: out.x[j] = s.offset + simplex.value(s.column); break;
            case Substitution::Kind::reflect: out.x[j] = s.offset - simplex.value(s.column); break;
            case Substitution::Kind::split: out.x[j] = simplex.value(s.column) - simplex.value(s.column + 1); break;
        }
        out.x[j] = std::clamp(out.x[j], problem.lower[j], problem.upper[j]);
    }
    out.objective = 0.0;
    for (std::size_t j = 0; j < n; ++j) out.objective += problem.objective[j] * out.x[j];
    return out;
}

}  // namespace mjls
