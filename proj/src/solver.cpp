#include "pullin/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pullin {

namespace {

// Residual F(u) = A u - lambda (1-u)^{-2} at interior nodes, u itself at
// Dirichlet rows (the boundary value is 0).
Eigen::VectorXd residual_vector(const Grid& g, const OperatorMatrix& a, double lambda,
                                const Eigen::VectorXd& u) {
    Eigen::VectorXd f = a.apply(u);
    for (int i = 0; i < g.node_count(); ++i) {
        if (g.is_boundary(i)) continue;
        const double one_minus = 1.0 - u[i];
        f[i] -= lambda / (one_minus * one_minus);
    }
    return f;
}

}  // namespace

NewtonResult newton_solve(const Grid& grid, const VectorField& c, double lambda,
                          const Field& u0, double tol) {
    if (lambda < 0.0) throw std::invalid_argument("newton_solve: lambda must be >= 0");
    if (!(tol > 0.0 && tol <= 1e-8)) {
        throw std::invalid_argument("newton_solve: tol must lie in (0, 1e-8]");
    }
    if (&u0.grid() != &grid) {
        throw std::invalid_argument("newton_solve: u0 lives on a different grid");
    }
    if (u0.min_value() < -1e-12 || u0.max_value() >= 1.0) {
        throw std::invalid_argument("newton_solve: u0 must lie in [0, 1)");
    }

    const OperatorMatrix a = assemble_advection_diffusion(grid, c);
    const int n = grid.node_count();
    Eigen::Map<const Eigen::VectorXd> u0_map(u0.values().data(), n);
    Eigen::VectorXd u = u0_map.cwiseMax(0.0);  // shed warm-start rounding dust

    Eigen::VectorXd f = residual_vector(grid, a, lambda, u);
    double f_norm = f.cwiseAbs().maxCoeff();

    const int max_iters = 60;
    NewtonResult result;
    for (int iter = 0; iter < max_iters; ++iter) {
        if (f_norm <= tol) {
            result.converged = true;
            result.u = Field(grid, std::vector<double>(u.data(), u.data() + n));
            result.iterations = iter;
            result.residual_norm = f_norm;
            return result;
        }

        // J = A - diag(2 lambda / (1-u)^3) at interior rows.
        Eigen::SparseMatrix<double, Eigen::RowMajor> jac = a.raw();
        for (int i = 0; i < n; ++i) {
            if (grid.is_boundary(i)) continue;
            const double one_minus = 1.0 - u[i];
            jac.coeffRef(i, i) -= 2.0 * lambda / (one_minus * one_minus * one_minus);
        }
        Eigen::SparseMatrix<double> col_major = jac;
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(col_major);
        if (lu.info() != Eigen::Success) {
            result.residual_norm = f_norm;
            result.iterations = iter;
            return result;  // singular Jacobian: at/beyond the fold
        }
        const Eigen::VectorXd delta = lu.solve(-f);

        double step = 1.0;
        bool accepted = false;
        while (step > 1e-12) {
            Eigen::VectorXd candidate = u + step * delta;
            if (candidate.maxCoeff() < 1.0 && candidate.allFinite()) {
                Eigen::VectorXd fc = residual_vector(grid, a, lambda, candidate);
                const double fc_norm = fc.cwiseAbs().maxCoeff();
                if (fc_norm < f_norm) {
                    u = std::move(candidate);
                    f = std::move(fc);
                    f_norm = fc_norm;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if (!accepted) {
            result.residual_norm = f_norm;
            result.iterations = iter;
            return result;  // damping underflow
        }
    }
    result.residual_norm = f_norm;
    result.iterations = max_iters;
    return result;
}

namespace {

std::map<double, double> record_lp_norms(const Field& u, std::span<const double> exponents) {
    std::map<double, double> norms;
    for (double p : exponents) {
        const Field integrand = u.map([p](double ui) {
            return std::pow(1.0 - ui, -2.0 * p);
        });
        norms[p] = std::pow(integrate(integrand), 1.0 / p);
    }
    return norms;
}

BranchPoint make_point(double lambda, Field u, int iters,
                       std::span<const double> lp_exponents) {
    BranchPoint pt{lambda, std::move(u), 0.0, std::numeric_limits<double>::quiet_NaN(), iters, {}};
    pt.sup_u = pt.u.max_value();
    if (pt.u.min_value() < -1e-12 || pt.sup_u >= 1.0) {
        throw std::runtime_error("continue_branch: branch point left [0, 1)");
    }
    pt.lp_norms = record_lp_norms(pt.u, lp_exponents);
    return pt;
}

// Tracks the branch with the peak-node gap as the stepping parameter: pin
// u[pin] = sigma and solve for the remaining values and lambda together.
// Iterating in w = 1/(1-u) removes the u < 1 barrier, so the stiff core of
// near-fold profiles no longer throttles the line search.
class GapContinuation {
public:
    struct Result {
        bool converged = false;
        double lambda = 0.0;
        int iterations = 0;
    };

    GapContinuation(const Grid& grid, const VectorField& c, int pin, double tol)
        : grid_(grid), op_(assemble_advection_diffusion(grid, c)), pin_(pin), tol_(tol),
          w_(grid.node_count()), w_prev_(grid.node_count()) {}

    void set_state(const Field& u, double lambda) {
        for (int i = 0; i < grid_.node_count(); ++i) w_[i] = 1.0 / (1.0 - u[i]);
        lambda_ = lambda;
        have_prev_ = false;
    }

    double pinned_value() const { return 1.0 - 1.0 / w_[pin_]; }

    Field solution() const {
        std::vector<double> u(static_cast<size_t>(grid_.node_count()));
        for (int i = 0; i < grid_.node_count(); ++i) {
            u[static_cast<size_t>(i)] = 1.0 - 1.0 / w_[i];
        }
        return Field(grid_, std::move(u));
    }

    Result advance(double sigma) {
        const int n = grid_.node_count();
        const double w_target = 1.0 / (1.0 - sigma);

        Eigen::VectorXd w = w_;
        double lambda = lambda_;
        if (have_prev_ && w_[pin_] != w_prev_[pin_]) {
            // Secant predictor along the previous step.
            const double scale = (w_target - w_[pin_]) / (w_[pin_] - w_prev_[pin_]);
            w = w_ + scale * (w_ - w_prev_);
            lambda = lambda_ + scale * (lambda_ - lambda_prev_);
            for (int i = 0; i < n; ++i) w[i] = std::max(w[i], 0.5);
            if (!(lambda > 0.0)) lambda = lambda_;
        }
        w[pin_] = w_target;

        Eigen::VectorXd f = residual(w, lambda);
        double fn = merit(f, w, w_target, lambda);
        Result out;
        const int cap = 50;
        for (int iter = 0; iter < cap; ++iter) {
            if (fn <= tol_) {
                w_prev_ = w_;
                lambda_prev_ = lambda_;
                have_prev_ = true;
                w_ = w;
                lambda_ = lambda;
                out.converged = true;
                out.lambda = lambda;
                out.iterations = iter;
                return out;
            }

            Eigen::SparseMatrix<double, Eigen::RowMajor> jac = op_.raw();
            for (int row = 0; row < n; ++row) {
                for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(jac, row);
                     it; ++it) {
                    it.valueRef() /= w[it.col()] * w[it.col()];
                }
            }
            Eigen::VectorXd dlambda_col = Eigen::VectorXd::Zero(n);
            for (int i = 0; i < n; ++i) {
                if (grid_.is_boundary(i)) continue;
                jac.coeffRef(i, i) -= 2.0 * lambda * w[i];
                dlambda_col[i] = w[i] * w[i];
            }
            Eigen::SparseMatrix<double> col_major = jac;
            Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
            lu.compute(col_major);
            if (lu.info() != Eigen::Success) return out;
            const Eigen::VectorXd base = lu.solve(-f);
            const Eigen::VectorXd vs_lambda = lu.solve(dlambda_col);
            if (vs_lambda[pin_] == 0.0) return out;
            const double dlambda = (w_target - w[pin_] - base[pin_]) / vs_lambda[pin_];
            const Eigen::VectorXd dw = base + dlambda * vs_lambda;

            double s = 1.0;
            for (int i = 0; i < n; ++i) {
                if (dw[i] < 0.0) s = std::min(s, 0.9 * w[i] / (-dw[i]));
            }
            bool accepted = false;
            while (s > 1e-13) {
                const Eigen::VectorXd cand = w + s * dw;
                const double cand_lambda = lambda + s * dlambda;
                if (cand_lambda > 0.0 && cand.minCoeff() > 0.0) {
                    const Eigen::VectorXd fc = residual(cand, cand_lambda);
                    const double fcn = merit(fc, cand, w_target, cand_lambda);
                    if (std::isfinite(fcn) && fcn < fn) {
                        w = cand;
                        lambda = cand_lambda;
                        f = fc;
                        fn = fcn;
                        accepted = true;
                        break;
                    }
                }
                s *= 0.5;
            }
            if (!accepted) return out;
        }
        return out;
    }

private:
    Eigen::VectorXd residual(const Eigen::VectorXd& w, double lambda) const {
        const int n = grid_.node_count();
        Eigen::VectorXd u(n);
        for (int i = 0; i < n; ++i) u[i] = 1.0 - 1.0 / w[i];
        Eigen::VectorXd f = op_.apply(u);
        for (int i = 0; i < n; ++i) {
            if (grid_.is_boundary(i)) {
                f[i] = u[i];
            } else {
                f[i] -= lambda * w[i] * w[i];
            }
        }
        return f;
    }

    double merit(const Eigen::VectorXd& f, const Eigen::VectorXd& w, double w_target,
                 double lambda) const {
        return std::max(f.cwiseAbs().maxCoeff(),
                        std::abs(w[pin_] - w_target) * 2.0 * lambda * w_target);
    }

    const Grid& grid_;
    OperatorMatrix op_;
    int pin_;
    double tol_;
    Eigen::VectorXd w_;
    Eigen::VectorXd w_prev_;
    double lambda_ = 0.0;
    double lambda_prev_ = 0.0;
    bool have_prev_ = false;
};

void check_monotone(const BranchPoint& prev, const BranchPoint& next) {
    for (int i = 0; i < next.u.size(); ++i) {
        if (next.u[i] < prev.u[i] - 1e-12) {
            throw std::runtime_error(
                "continue_branch: branch is not nodewise monotone between lambda = " +
                std::to_string(prev.lambda) + " and " + std::to_string(next.lambda) +
                " (discretization artifact)");
        }
    }
}

}  // namespace

Branch continue_branch(const Grid& grid, const VectorField& c,
                       const ContinuationOptions& options) {
    if (!(options.lambda_step0 > 0.0)) {
        throw std::invalid_argument("continue_branch: lambda_step0 must be positive");
    }
    if (!(options.bracket_tol > 0.0)) {
        throw std::invalid_argument("continue_branch: bracket_tol must be positive");
    }

    Branch branch;
    branch.grid = &grid;
    branch.points.push_back(make_point(0.0, Field(grid, 0.0), 0, options.lp_exponents));

    double step = options.lambda_step0;
    double lambda_lo = 0.0;
    double lambda_hi = std::numeric_limits<double>::quiet_NaN();
    int solves = 0;

    auto bracket_done = [&]() {
        return !std::isnan(lambda_hi) &&
               lambda_hi - lambda_lo <= options.bracket_tol * std::max(1.0, lambda_lo);
    };
    auto record = [&](double lambda, Field u, int iters) {
        BranchPoint pt = make_point(lambda, std::move(u), iters, options.lp_exponents);
        check_monotone(branch.points.back(), pt);
        branch.points.push_back(std::move(pt));
    };

    // Phase 1: advance in lambda with adaptive steps, then bisect the bracket.
    while (solves < options.max_solves && !bracket_done()) {
        const double lambda_try =
            std::isnan(lambda_hi) ? lambda_lo + step : 0.5 * (lambda_lo + lambda_hi);
        NewtonResult res =
            newton_solve(grid, c, lambda_try, branch.points.back().u, options.newton_tol);
        ++solves;
        if (res.converged) {
            record(lambda_try, std::move(*res.u), res.iterations);
            lambda_lo = lambda_try;
            if (std::isnan(lambda_hi) && res.iterations <= 4) step *= 1.3;
        } else {
            lambda_hi = lambda_try;
            step *= 0.5;
        }
    }
    if (!bracket_done()) {
        throw std::runtime_error("continue_branch: bracket not achieved within the solve cap");
    }

    // Phase 2: march the gap at the peak node toward the fold. Steep branches
    // (the supercritical radial cases) are nearly vertical in lambda, so the
    // lambda bisection above exhausts Newton well below the fold; pinning the
    // peak value and solving for (u, lambda) tracks the remaining segment.
    {
        const Field& u_last = branch.points.back().u;
        int pin = 0;
        for (int i = 0; i < grid.node_count(); ++i) {
            if (u_last[i] > u_last[pin]) pin = i;
        }
        GapContinuation march(grid, c, pin, options.newton_tol);
        march.set_state(u_last, branch.points.back().lambda);

        double gap_factor = 0.95;
        int declines = 0;
        int fails = 0;
        while (solves < options.max_solves && declines < 2 && fails < 25) {
            const double sigma = 1.0 - (1.0 - march.pinned_value()) * gap_factor;
            ++solves;
            GapContinuation::Result res = march.advance(sigma);
            if (!res.converged) {
                gap_factor = std::sqrt(gap_factor);  // halve the log-step
                ++fails;
                if (1.0 - gap_factor < 1e-4) break;
                continue;
            }
            fails = 0;
            if (res.lambda > lambda_lo) {
                declines = 0;
                record(res.lambda, march.solution(), res.iterations);
                lambda_lo = res.lambda;
                lambda_hi = std::max(lambda_hi, lambda_lo + 2.0 * options.bracket_tol *
                                                                std::max(1.0, lambda_lo));
            } else {
                ++declines;  // past the fold top
            }
            gap_factor = std::max(0.6, gap_factor * gap_factor);
        }

        // Re-confirm the bracket against the deepened branch: the first direct
        // Newton failure just above lambda_lo is the honest upper end.
        while (solves < options.max_solves) {
            const double lambda_try =
                lambda_lo + 0.9 * options.bracket_tol * std::max(1.0, lambda_lo);
            NewtonResult res =
                newton_solve(grid, c, lambda_try, branch.points.back().u, options.newton_tol);
            ++solves;
            if (res.converged) {
                lambda_lo = lambda_try;
                record(lambda_try, std::move(*res.u), res.iterations);
            } else {
                lambda_hi = lambda_try;
                break;
            }
        }
    }
    if (!bracket_done()) {
        throw std::runtime_error("continue_branch: bracket lost while deepening the branch");
    }

    branch.lambda_lo = lambda_lo;
    branch.lambda_hi = lambda_hi;
    return branch;
}

namespace {

struct ShotOutcome {
    bool overshoot = false;  // u climbed to 1 before r = 1 (voltage too small)
    double end_value = 0.0;  // u(1) when the integration reaches the boundary
};

// RK4 on u'' = -((N-1)/r) u' + c_r u' - lambda/(1-u)^2 from r = 0 with
// u(0) = eta, u'(0) = 0. The r = 0 stage uses the symmetry limit
// u''(0) = (c_r(0) u' - lambda/(1-u)^2)/N.
ShotOutcome shoot(int dimension, const std::function<double(double)>& c_r, double lambda,
                  double eta, double step) {
    const double nd = static_cast<double>(dimension);
    auto accel = [&](double r, double u, double p) {
        const double one_minus = 1.0 - u;
        const double forcing = lambda / (one_minus * one_minus);
        const double adv = c_r ? c_r(r) : 0.0;
        if (r == 0.0) return (adv * p - forcing) / nd;
        return -(nd - 1.0) / r * p + adv * p - forcing;
    };

    double r = 0.0, u = eta, p = 0.0;
    const double cutoff = 1.0 - 1e-9;
    while (r < 1.0) {
        const double h = std::min(step, 1.0 - r);
        const double k1u = p;
        const double k1p = accel(r, u, p);
        const double k2u = p + 0.5 * h * k1p;
        const double k2p = accel(r + 0.5 * h, u + 0.5 * h * k1u, p + 0.5 * h * k1p);
        const double k3u = p + 0.5 * h * k2p;
        const double k3p = accel(r + 0.5 * h, u + 0.5 * h * k2u, p + 0.5 * h * k2p);
        const double k4u = p + h * k3p;
        const double k4p = accel(r + h, u + h * k3u, p + h * k3p);
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        r += h;
        if (!std::isfinite(u) || u >= cutoff) return {true, 0.0};
        if (u < -50.0) return {false, u};  // hopeless undershoot, stop early
    }
    return {false, u};
}

double bisect_lambda(int dimension, const std::function<double(double)>& c_r, double eta,
                     double step) {
    // u(1; 0) = eta > 0; treat blow-up as positive end value.
    double lo = 0.0, hi = 100.0;
    ShotOutcome top = shoot(dimension, c_r, hi, eta, step);
    if (top.overshoot || top.end_value > 0.0) {
        return hi;  // cap reached; callers only use the interior of the map
    }
    for (int i = 0; i < 80 && hi - lo > 1e-10 * std::max(1.0, lo); ++i) {
        const double mid = 0.5 * (lo + hi);
        const ShotOutcome out = shoot(dimension, c_r, mid, eta, step);
        if (out.overshoot || out.end_value > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double shot_step(double eta) {
    // Resolve the near-contact core when eta approaches 1.
    const double core = std::pow(1.0 - eta, 1.5) / 20.0;
    return std::clamp(core, 1e-7, 1e-4);
}

}  // namespace

ShootingResult shooting_oracle(int dimension,
                               const std::function<double(double)>& radial_advection,
                               int eta_grid) {
    if (dimension < 1 || dimension > 10) {
        throw std::invalid_argument("shooting_oracle: dimension must be in [1, 10]");
    }
    if (eta_grid < 100) {
        throw std::invalid_argument("shooting_oracle: eta grid needs at least 100 points");
    }

    ShootingResult result;
    result.lambda_of_eta.reserve(static_cast<size_t>(eta_grid));
    for (int j = 1; j <= eta_grid; ++j) {
        const double eta = static_cast<double>(j) / static_cast<double>(eta_grid + 1);
        const double lambda = bisect_lambda(dimension, radial_advection, eta, shot_step(eta));
        result.lambda_of_eta.emplace_back(eta, lambda);
    }

    size_t best = 0;
    for (size_t k = 1; k < result.lambda_of_eta.size(); ++k) {
        if (result.lambda_of_eta[k].second > result.lambda_of_eta[best].second) best = k;
    }
    result.lambda_star = result.lambda_of_eta[best].second;

    if (best > 0 && best + 1 < result.lambda_of_eta.size()) {
        // Interior peak: one parabolic refinement through the three best points.
        const auto [e0, l0] = result.lambda_of_eta[best - 1];
        const auto [e1, l1] = result.lambda_of_eta[best];
        const auto [e2, l2] = result.lambda_of_eta[best + 1];
        const double denom = (l0 - 2.0 * l1 + l2);
        if (denom < 0.0) {
            const double de = e1 - e0;
            const double eta_fit = e1 - 0.5 * de * (l2 - l0) / denom;
            if (eta_fit > 0.0 && eta_fit < 1.0) {
                const double l_fit = bisect_lambda(dimension, radial_advection, eta_fit,
                                                   shot_step(eta_fit));
                result.lambda_star = std::max(result.lambda_star, l_fit);
            }
        }
    } else if (best + 1 == result.lambda_of_eta.size()) {
        // Monotone toward eta = 1 (supercritical dimensions): push a short
        // geometric tail toward the contact limit.
        double gap = 1.0 - result.lambda_of_eta[best].first;
        for (int k = 0; k < 4; ++k) {
            gap *= 0.5;
            if (gap < 1e-3) break;
            const double eta = 1.0 - gap;
            const double l = bisect_lambda(dimension, radial_advection, eta, shot_step(eta));
            result.lambda_star = std::max(result.lambda_star, l);
        }
    }
    return result;
}

}  // namespace pullin
