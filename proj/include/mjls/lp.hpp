#pragma once

#include <cstddef>
#include <limits>
#include <string_view>
#include <vector>

namespace mjls {

enum class LpSense { maximize, minimize };
enum class LpStatus { optimal, infeasible, unbounded };

std::string_view to_string(LpStatus s) noexcept;

/// coeffs . x <= bound
struct LpRow {
    std::vector<double> coeffs;
    double bound = 0.0;
};

/// Dense linear program over box-bounded variables:
///   optimise objective . x  s.t.  rows,  lower <= x <= upper.
/// Bounds may be infinite.
struct LpProblem {
    LpSense sense = LpSense::maximize;
    std::vector<double> objective;
    std::vector<LpRow> rows;
    std::vector<double> lower;
    std::vector<double> upper;

    [[nodiscard]] std::size_t variables() const noexcept { return objective.size(); }
    /// Throws ValidationError on inconsistent sizes or lower > upper.
    void validate() const;
};

struct LpResult {
    LpStatus status = LpStatus::infeasible;
    std::vector<double> x;
    double objective = std::numeric_limits<double>::quiet_NaN();
    std::size_t iterations = 0;
};

struct LpOptions {
    double tol = 1e-9;
    std::size_t max_iterations = 100'000;
    /// Consecutive degenerate pivots tolerated before switching from
    /// Dantzig's rule to Bland's rule for the rest of the solve.
    std::size_t degenerate_streak = 50;
    std::size_t max_variables = 10'000;
};

/// Two-phase bounded-variable primal simplex on a dense tableau.
/// Throws ConvergenceError if the iteration cap is hit.
LpResult lp_solve(const LpProblem& problem, const LpOptions& opts = {});

}  // namespace mjls
