#pragma once

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "pullin/grid.hpp"
#include "pullin/operators.hpp"

namespace pullin {

struct NewtonResult {
    bool converged = false;
    std::optional<Field> u;
    int iterations = 0;
    double residual_norm = 0.0;
};

/// Damped Newton for A u = lambda / (1-u)^2 with A the advection-diffusion
/// operator. Steps are halved until the max-norm residual decreases and the
/// iterate stays below 1; running out of damping or iterations returns a
/// non-converged result (failure is data, not an error).
NewtonResult newton_solve(const Grid& grid, const VectorField& c, double lambda,
                          const Field& u0, double tol);

/// One point of the minimal branch. The stability eigenvalue is filled in by
/// the caller (NaN until then); lp_norms maps p to ||(1-u)^{-2}||_p.
struct BranchPoint {
    double lambda = 0.0;
    Field u;
    double sup_u = 0.0;
    double eigenvalue_k = 0.0;
    int newton_iters = 0;
    std::map<double, double> lp_norms;
};

struct Branch {
    std::vector<BranchPoint> points;  // strictly increasing lambda
    double lambda_lo = 0.0;           // last Newton success
    double lambda_hi = 0.0;           // first Newton failure, refined by bisection
    const Grid* grid = nullptr;
};

struct ContinuationOptions {
    double lambda_step0 = 0.1;
    double bracket_tol = 1e-6;
    double newton_tol = 1e-10;
    std::vector<double> lp_exponents;  // p values recorded per point
    int max_solves = 3000;
};

/// Tracks the minimal branch from (0, 0) with adaptive steps (halve on
/// failure, grow 1.3x after <= 4-iteration convergence), warm starts from the
/// previous point, and bisects the terminal bracket down to
/// bracket_tol * max(1, lambda_lo). Verifies nodewise monotonicity.
Branch continue_branch(const Grid& grid, const VectorField& c,
                       const ContinuationOptions& options);

struct ShootingResult {
    double lambda_star = 0.0;
    std::vector<std::pair<double, double>> lambda_of_eta;  // uniform eta grid
};

/// Independent radial oracle: for each center height eta the IVP
/// u(0) = eta, u'(0) = 0 is integrated with classical RK4 and the voltage is
/// bisected until u(1) = 0; blow-up toward 1 counts as overshoot. Returns the
/// eta -> lambda map and its maximum (refined near the peak).
ShootingResult shooting_oracle(int dimension,
                               const std::function<double(double)>& radial_advection,
                               int eta_grid);

}  // namespace pullin
