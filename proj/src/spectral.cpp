#include "pullin/spectral.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace pullin {

namespace {

double weighted_rayleigh(const Grid& g, const Eigen::VectorXd& mv, const Eigen::VectorXd& v) {
    double num = 0.0, den = 0.0;
    for (int i = 0; i < g.node_count(); ++i) {
        const double w = g.quad_weight(i);
        num += w * mv[i] * v[i];
        den += w * v[i] * v[i];
    }
    return num / den;
}

double interior_gershgorin_lower(const OperatorMatrix& m) {
    const Grid& g = m.grid();
    std::vector<double> diag(static_cast<size_t>(m.rows()), 0.0);
    std::vector<double> radius(static_cast<size_t>(m.rows()), 0.0);
    m.for_each_entry([&](int row, int col, double value) {
        if (row == col) {
            diag[static_cast<size_t>(row)] = value;
        } else {
            radius[static_cast<size_t>(row)] += std::abs(value);
        }
    });
    double lo = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m.rows(); ++i) {
        if (g.is_boundary(i)) continue;
        lo = std::min(lo, diag[static_cast<size_t>(i)] - radius[static_cast<size_t>(i)]);
    }
    return lo;
}

struct ShiftedSolver {
    Eigen::SparseMatrix<double> matrix;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    bool ok = false;

    void factor(const Eigen::SparseMatrix<double, Eigen::RowMajor>& raw, double sigma) {
        Eigen::SparseMatrix<double, Eigen::RowMajor> shifted = raw;
        for (int i = 0; i < shifted.rows(); ++i) shifted.coeffRef(i, i) -= sigma;
        matrix = shifted;
        lu.compute(matrix);
        ok = lu.info() == Eigen::Success;
    }

    // One step of iterative refinement keeps the solve noise well below the
    // eigen-residual target.
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
        Eigen::VectorXd w = lu.solve(rhs);
        const Eigen::VectorXd linres = rhs - matrix * w;
        w += lu.solve(linres);
        return w;
    }
};

}  // namespace

EigenPair principal_eigenpair(const OperatorMatrix& m, double tol) {
    if (m.boundary_tag() != BoundaryTag::Dirichlet) {
        throw std::invalid_argument("principal_eigenpair: operator must be Dirichlet-tagged");
    }
    if (!(tol > 0.0 && tol <= 1e-8)) {
        throw std::invalid_argument("principal_eigenpair: tol must lie in (0, 1e-8]");
    }
    const Grid& g = m.grid();
    const int n = m.rows();

    const double gersh = interior_gershgorin_lower(m);
    double sigma = gersh - std::max(1e-3, 1e-3 * std::abs(gersh));

    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = g.is_boundary(i) ? 0.0 : 1.0;
    v /= v.cwiseAbs().maxCoeff();

    double eigenvalue = 0.0;
    double residual = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_v = v;
    double best_eigenvalue = 0.0;
    double best_residual = std::numeric_limits<double>::infinity();
    int total_iters = 0;
    int stale_rounds = 0;
    const int max_outer = 40;
    const int max_inner = 10;

    ShiftedSolver solver;
    for (int outer = 0; outer < max_outer; ++outer) {
        solver.factor(m.raw(), sigma);
        if (!solver.ok) {
            sigma -= std::max(1.0, 1e-6 * std::abs(sigma));
            continue;
        }

        double prev_eigenvalue = std::numeric_limits<double>::infinity();
        for (int inner = 0; inner < max_inner; ++inner) {
            Eigen::VectorXd w = solver.solve(v);
            for (int b : g.boundary_nodes()) w[b] = 0.0;
            const double nrm = w.cwiseAbs().maxCoeff();
            if (!(nrm > 0.0) || !std::isfinite(nrm)) {
                throw std::runtime_error("principal_eigenpair: iteration broke down");
            }
            if (w.dot(v) < 0.0) w = -w;
            v = w / nrm;
            const Eigen::VectorXd mv = m.apply(v);
            eigenvalue = weighted_rayleigh(g, mv, v);
            residual = (mv - eigenvalue * v).cwiseAbs().maxCoeff();
            ++total_iters;
            if (residual < best_residual) {
                best_residual = residual;
                best_eigenvalue = eigenvalue;
                best_v = v;
            }
            if (residual <= tol) break;
            // Once the Rayleigh estimate stops moving, a closer shift is the
            // only way to purify the iterate further.
            if (std::abs(eigenvalue - prev_eigenvalue) <= 1e-9 * (1.0 + std::abs(eigenvalue))) {
                break;
            }
            prev_eigenvalue = eigenvalue;
        }
        if (residual <= tol) break;

        const double margin =
            3.0 * residual + 1e-5 * (1.0 + std::abs(eigenvalue));
        const double sigma_new = eigenvalue - margin;
        if (std::abs(sigma_new - sigma) <= 1e-12 * (1.0 + std::abs(sigma))) {
            if (++stale_rounds >= 3) break;
        } else {
            stale_rounds = 0;
        }
        sigma = sigma_new;
    }

    if (best_residual > tol) {
        char msg[160];
        std::snprintf(msg, sizeof(msg),
                      "principal_eigenpair: no convergence (best residual %.3e, tol %.3e)",
                      best_residual, tol);
        throw std::runtime_error(msg);
    }
    v = best_v;
    eigenvalue = best_eigenvalue;

    // Normalize to max component +1, then demand interior positivity.
    int arg_max = 0;
    double max_abs = 0.0;
    for (int i = 0; i < n; ++i) {
        if (std::abs(v[i]) > max_abs) {
            max_abs = std::abs(v[i]);
            arg_max = i;
        }
    }
    v /= v[arg_max];
    for (int i = 0; i < n; ++i) {
        if (!g.is_boundary(i) && !(v[i] > 0.0)) {
            throw std::runtime_error(
                "principal_eigenpair: converged eigenvector is not positive; the principal "
                "pair is not isolated at this discretization");
        }
    }

    Field phi(g, std::vector<double>(v.data(), v.data() + n));
    return EigenPair{std::move(phi), eigenvalue, best_residual, total_iters};
}

EigenPair linearized_stability(const Grid& grid, const VectorField& c, const Field& u,
                               double lambda, double tol) {
    if (&u.grid() != &grid) {
        throw std::invalid_argument("linearized_stability: u lives on a different grid");
    }
    const Field rho = u.map([lambda](double ui) {
        const double one_minus = 1.0 - ui;
        return 2.0 * lambda / (one_minus * one_minus * one_minus);
    });
    const OperatorMatrix linearized = assemble_advection_diffusion(grid, c, rho);
    return principal_eigenpair(linearized, tol);
}

}  // namespace pullin
