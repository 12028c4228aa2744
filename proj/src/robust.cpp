#include "mjls/robust.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <string>

#include "mjls/errors.hpp"
#include "mjls/linalg.hpp"
#include "mjls/parallel.hpp"

namespace mjls {

std::string_view to_string(ConstraintForm f) noexcept {
    return f == ConstraintForm::absolute ? "absolute" : "signed";
}

ConstraintForm parse_constraint_form(std::string_view text) {
    if (text == "signed") return ConstraintForm::signed_sum;
    if (text == "absolute") return ConstraintForm::absolute;
    throw ValidationError("/form", "expected 'signed' or 'absolute', got '" + std::string(text) + "'");
}

std::vector<double> alphas(const ModeFamily& family) {
    family.validate();
    std::vector<double> out(family.mode_count());
    for (std::size_t r = 0; r < out.size(); ++r) {
        // ||A (x) B||_inf = ||A||_inf ||B||_inf; building the product keeps
        // this the literal definition and stays cheap at reduced-scope sizes.
        out[r] = inf_norm(kron(family.matrices[r], family.matrices[r]));
    }
    return out;
}

std::vector<double> betas(std::span<const double> alpha, const DenseMatrix& nominal) {
    if (nominal.rows() != alpha.size() || nominal.cols() != alpha.size()) {
        throw DimensionError("betas: nominal chain is " + std::to_string(nominal.rows()) + "x" +
                             std::to_string(nominal.cols()) + " for " + std::to_string(alpha.size()) + " modes");
    }
    std::vector<double> out(alpha.size(), 1.0);
    for (std::size_t s = 0; s < alpha.size(); ++s)
        for (std::size_t r = 0; r < alpha.size(); ++r) out[s] -= nominal(r, s) * alpha[r];
    return out;
}

namespace {

// Appends the variables of one column to `lp`. `offset` is the first variable
// index; returns the number of variables added.
std::size_t add_column(LpProblem& lp, std::size_t total_vars, std::size_t offset, std::span<const double> alpha,
                       double beta_s, std::span<const double> lb, std::span<const double> ub, double sign,
                       const BoundOptions& opts) {
    const std::size_t m = alpha.size();
    LpRow norm_row{std::vector<double>(total_vars, 0.0), beta_s - opts.margin};
    if (opts.form == ConstraintForm::signed_sum) {
        for (std::size_t r = 0; r < m; ++r) {
            lp.objective[offset + r] = sign;
            lp.lower[offset + r] = lb[r];
            lp.upper[offset + r] = ub[r];
            norm_row.coeffs[offset + r] = alpha[r];
        }
        lp.rows.push_back(std::move(norm_row));
        return m;
    }
    for (std::size_t r = 0; r < m; ++r) {
        const std::size_t plus = offset + r;
        const std::size_t minus = offset + m + r;
        lp.objective[plus] = sign;
        lp.objective[minus] = -sign;
        lp.lower[plus] = 0.0;
        lp.lower[minus] = 0.0;
        lp.upper[plus] = std::max(ub[r], 0.0);
        lp.upper[minus] = std::max(-lb[r], 0.0);
        norm_row.coeffs[plus] = alpha[r];
        norm_row.coeffs[minus] = alpha[r];
        if (lb[r] > 0.0) {
            LpRow row{std::vector<double>(total_vars, 0.0), -lb[r]};
            row.coeffs[plus] = -1.0;
            row.coeffs[minus] = 1.0;
            lp.rows.push_back(std::move(row));
        }
        if (ub[r] < 0.0) {
            LpRow row{std::vector<double>(total_vars, 0.0), ub[r]};
            row.coeffs[plus] = 1.0;
            row.coeffs[minus] = -1.0;
            lp.rows.push_back(std::move(row));
        }
    }
    lp.rows.push_back(std::move(norm_row));
    return 2 * m;
}

std::size_t vars_per_column(std::size_t m, ConstraintForm form) { return form == ConstraintForm::absolute ? 2 * m : m; }

double column_value(const std::vector<double>& x, std::size_t offset, std::size_t m, std::size_t r, ConstraintForm form) {
    return form == ConstraintForm::absolute ? x[offset + r] - x[offset + m + r] : x[offset + r];
}

void check_nominal(const ModeFamily& family, const DenseMatrix& nominal) {
    const std::size_t m = family.mode_count();
    if (nominal.rows() != m || nominal.cols() != m) {
        throw DimensionError("nominal chain must be " + std::to_string(m) + "x" + std::to_string(m));
    }
    DelayChain{nominal, std::vector<double>(m, 1.0 / static_cast<double>(m))}.validate("/nominal");
}

void box(const DenseMatrix& nominal, std::size_t s, std::vector<double>& lb, std::vector<double>& ub) {
    const std::size_t m = nominal.rows();
    lb.resize(m);
    ub.resize(m);
    for (std::size_t r = 0; r < m; ++r) {
        lb[r] = -nominal(r, s);
        ub[r] = 1.0 - nominal(r, s);
    }
}

}  // namespace

LpResult solve_column_lp(std::span<const double> alpha, double beta_s, std::span<const double> lb,
                         std::span<const double> ub, BoundDirection direction, const BoundOptions& opts) {
    const std::size_t m = alpha.size();
    if (lb.size() != m || ub.size() != m) throw DimensionError("solve_column_lp: box size does not match alpha");
    const std::size_t vars = vars_per_column(m, opts.form);
    LpProblem lp;
    lp.sense = LpSense::maximize;
    lp.objective.assign(vars, 0.0);
    lp.lower.assign(vars, 0.0);
    lp.upper.assign(vars, 0.0);
    const double sign = direction == BoundDirection::upper ? 1.0 : -1.0;
    add_column(lp, vars, 0, alpha, beta_s, lb, ub, sign, opts);

    LpResult raw = lp_solve(lp, opts.lp);
    if (raw.status != LpStatus::optimal) return raw;
    LpResult out;
    out.status = raw.status;
    out.iterations = raw.iterations;
    out.x.resize(m);
    out.objective = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
        out.x[r] = column_value(raw.x, 0, m, r, opts.form);
        out.objective += out.x[r];
    }
    return out;
}

DenseMatrix solve_bound_lp(const ModeFamily& family, const DenseMatrix& nominal, BoundDirection direction,
                           const BoundOptions& opts) {
    check_nominal(family, nominal);
    const std::size_t m = family.mode_count();
    const auto alpha = alphas(family);
    const auto beta = betas(alpha, nominal);

    const auto columns = parallel_map<LpResult>(m, [&](std::size_t s) {
        std::vector<double> lb;
        std::vector<double> ub;
        box(nominal, s, lb, ub);
        return solve_column_lp(alpha, beta[s], lb, ub, direction, opts);
    });

    DenseMatrix z(m, m);
    for (std::size_t s = 0; s < m; ++s) {
        if (columns[s].status != LpStatus::optimal) {
            throw Error("bound LP for column " + std::to_string(s) + " is " + std::string(to_string(columns[s].status)) +
                        " (beta = " + std::to_string(beta[s]) + ", margin = " + std::to_string(opts.margin) + ")");
        }
        for (std::size_t r = 0; r < m; ++r) z(r, s) = columns[s].x[r];
    }
    return z;
}

DenseMatrix solve_bound_lp_joint(const ModeFamily& family, const DenseMatrix& nominal, BoundDirection direction,
                                 const BoundOptions& opts) {
    check_nominal(family, nominal);
    const std::size_t m = family.mode_count();
    const auto alpha = alphas(family);
    const auto beta = betas(alpha, nominal);
    const std::size_t per = vars_per_column(m, opts.form);
    const std::size_t vars = per * m;

    LpProblem lp;
    lp.sense = LpSense::maximize;
    lp.objective.assign(vars, 0.0);
    lp.lower.assign(vars, 0.0);
    lp.upper.assign(vars, 0.0);
    const double sign = direction == BoundDirection::upper ? 1.0 : -1.0;
    std::vector<double> lb;
    std::vector<double> ub;
    for (std::size_t s = 0; s < m; ++s) {
        box(nominal, s, lb, ub);
        add_column(lp, vars, s * per, alpha, beta[s], lb, ub, sign, opts);
    }
    const LpResult res = lp_solve(lp, opts.lp);
    if (res.status != LpStatus::optimal) {
        throw Error("joint bound LP is " + std::string(to_string(res.status)));
    }
    DenseMatrix z(m, m);
    for (std::size_t s = 0; s < m; ++s)
        for (std::size_t r = 0; r < m; ++r) z(r, s) = column_value(res.x, s * per, m, r, opts.form);
    return z;
}

std::vector<double> feasible_bound(const DenseMatrix& z_lb, const DenseMatrix& z_ub) {
    if (z_lb.rows() != z_ub.rows() || z_lb.cols() != z_ub.cols()) {
        throw DimensionError("feasible_bound: LP solutions differ in shape");
    }
    std::vector<double> eps(z_lb.rows());
    for (std::size_t r = 0; r < z_lb.rows(); ++r) {
        double e = std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < z_lb.cols(); ++s) e = std::min({e, std::fabs(z_lb(r, s)), std::fabs(z_ub(r, s))});
        eps[r] = z_lb.cols() == 0 ? 0.0 : e;
    }
    return eps;
}

bool robust_sufficient(const ModeFamily& family, const DenseMatrix& nominal, const DenseMatrix& delta) {
    check_nominal(family, nominal);
    const std::size_t m = family.mode_count();
    if (delta.rows() != m || delta.cols() != m) throw DimensionError("robust_sufficient: perturbation has the wrong shape");
    for (std::size_t r = 0; r < m; ++r) {
        double sum = 0.0;
        for (std::size_t s = 0; s < m; ++s) {
            sum += delta(r, s);
            const double p = nominal(r, s) + delta(r, s);
            if (!(p >= -1e-12 && p <= 1.0 + 1e-12)) {
                throw ValidationError("/delta/" + std::to_string(r) + "/" + std::to_string(s),
                                      "perturbed probability " + std::to_string(p) + " outside [0, 1]");
            }
        }
        if (std::fabs(sum) > 1e-10) {
            throw ValidationError("/delta/" + std::to_string(r), "perturbation row must sum to zero");
        }
    }
    const auto alpha = alphas(family);
    const auto beta = betas(alpha, nominal);
    for (std::size_t s = 0; s < m; ++s) {
        double lhs = 0.0;
        for (std::size_t r = 0; r < m; ++r) lhs += alpha[r] * std::fabs(delta(r, s));
        if (!(lhs < beta[s])) return false;
    }
    return true;
}

BoundResult compute_bounds(const ModeFamily& family, const DenseMatrix& nominal, const BoundOptions& opts) {
    check_nominal(family, nominal);
    const std::size_t m = family.mode_count();
    BoundResult out;
    out.form = opts.form;
    out.alpha = alphas(family);
    out.beta = betas(out.alpha, nominal);
    out.nominal_certified = std::all_of(out.beta.begin(), out.beta.end(), [](double b) { return b > 0.0; });
    out.z_ub = DenseMatrix(m, m);
    out.z_lb = DenseMatrix(m, m);
    out.eps.assign(m, 0.0);

    if (opts.form == ConstraintForm::absolute &&
        std::any_of(out.beta.begin(), out.beta.end(), [&](double b) { return b <= opts.margin; })) {
        return out;
    }
    try {
        out.z_ub = solve_bound_lp(family, nominal, BoundDirection::upper, opts);
        out.z_lb = solve_bound_lp(family, nominal, BoundDirection::lower, opts);
    } catch (const ConvergenceError&) {
        throw;
    } catch (const Error&) {
        out.z_ub = DenseMatrix(m, m);
        out.z_lb = DenseMatrix(m, m);
        return out;
    }
    out.eps = feasible_bound(out.z_lb, out.z_ub);
    out.feasible = true;
    return out;
}

std::string BoundResult::to_json() const {
    auto rows_of = [](const DenseMatrix& z) {
        auto arr = nlohmann::json::array();
        for (std::size_t r = 0; r < z.rows(); ++r) {
            auto row = nlohmann::json::array();
            for (std::size_t s = 0; s < z.cols(); ++s) row.push_back(z(r, s));
            arr.push_back(std::move(row));
        }
        return arr;
    };
    nlohmann::json doc{{"alpha", alpha},
                       {"beta", beta},
                       {"eps", eps},
                       {"feasible", feasible},
                       {"nominal_certified", nominal_certified},
                       {"form", std::string(mjls::to_string(form))},
                       {"z_ub", rows_of(z_ub)},
                       {"z_lb", rows_of(z_lb)}};
    return doc.dump(2);
}

}  // namespace mjls
