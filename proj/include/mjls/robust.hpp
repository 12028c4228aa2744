#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mjls/dense_matrix.hpp"
#include "mjls/lp.hpp"
#include "mjls/switched.hpp"

namespace mjls {

enum class BoundDirection { upper, lower };

/// How a column perturbation z_s enters the norm constraint.
///   signed_sum: sum_r alpha_r z_s[r] <= beta_s - margin
///   absolute:   sum_r alpha_r |z_s[r]| <= beta_s - margin  (z = z+ - z- split)
/// The absolute form is the literal sufficient condition; the signed form is the
/// relaxation whose optima reproduce the published scalar example.
enum class ConstraintForm { signed_sum, absolute };

std::string_view to_string(ConstraintForm f) noexcept;
ConstraintForm parse_constraint_form(std::string_view text);

struct BoundOptions {
    ConstraintForm form = ConstraintForm::signed_sum;
    double margin = 0.0;
    LpOptions lp;
};

/// alpha_r = ||W_r (x) W_r||_inf.
std::vector<double> alphas(const ModeFamily& family);

/// beta_s = 1 - sum_r nominal(r, s) alpha_r. May be negative.
std::vector<double> betas(std::span<const double> alpha, const DenseMatrix& nominal);

/// One column LP: optimise sum(z) in `direction` subject to the norm constraint
/// and lb <= z <= ub.
LpResult solve_column_lp(std::span<const double> alpha, double beta_s, std::span<const double> lb,
                         std::span<const double> ub, BoundDirection direction, const BoundOptions& opts = {});

/// Optimal perturbations z(r, s), one decoupled LP per column s with box
/// [-nominal(r, s), 1 - nominal(r, s)]. Throws Error when a column LP is
/// infeasible.
DenseMatrix solve_bound_lp(const ModeFamily& family, const DenseMatrix& nominal, BoundDirection direction,
                           const BoundOptions& opts = {});

/// The same optimum obtained from a single LP over all m^2 variables.
DenseMatrix solve_bound_lp_joint(const ModeFamily& family, const DenseMatrix& nominal, BoundDirection direction,
                                 const BoundOptions& opts = {});

/// eps_r = min( min_s |z_lb(r, s)|, min_s |z_ub(r, s)| ).
std::vector<double> feasible_bound(const DenseMatrix& z_lb, const DenseMatrix& z_ub);

/// sum_r alpha_r |delta(r, s)| < beta_s for every column s.
/// Throws ValidationError when delta rows do not sum to zero (1e-10) or
/// nominal + delta leaves [0, 1].
bool robust_sufficient(const ModeFamily& family, const DenseMatrix& nominal, const DenseMatrix& delta);

struct BoundResult {
    std::vector<double> alpha;
    std::vector<double> beta;
    DenseMatrix z_ub;
    DenseMatrix z_lb;
    std::vector<double> eps;
    /// Every column LP was solved to optimality.
    bool feasible = false;
    /// beta_s > 0 for every s: the nominal chain passes the norm condition.
    bool nominal_certified = false;
    ConstraintForm form = ConstraintForm::signed_sum;

    [[nodiscard]] std::string to_json() const;
};

/// Both LP directions followed by feasible_bound. With the absolute form a
/// non-positive beta yields eps = 0 and feasible = false instead of an error.
BoundResult compute_bounds(const ModeFamily& family, const DenseMatrix& nominal, const BoundOptions& opts = {});

inline BoundResult compute_bounds(const ModeFamily& family, const BoundOptions& opts = {}) {
    return compute_bounds(family, family.joint_P, opts);
}

}  // namespace mjls
