#pragma once

#include "pullin/grid.hpp"
#include "pullin/operators.hpp"

namespace pullin {

/// Principal eigenpair of a Dirichlet-tagged operator: positive interior
/// eigenfunction with max value 1, zero on the boundary.
struct EigenPair {
    Field phi;
    double eigenvalue = 0.0;
    double residual = 0.0;
    int iterations = 0;
};

/// Shifted inverse power iteration with quadrature-weighted Rayleigh updates.
/// The shift starts below the smallest interior Gershgorin bound and walks up
/// toward the eigenvalue as the residual shrinks. Iterates are confined to
/// the zero-boundary subspace, which the identity boundary rows preserve.
/// Throws on non-convergence or if the converged vector is not positive.
EigenPair principal_eigenpair(const OperatorMatrix& m, double tol);

/// Principal eigenpair of the linearization -Lap + c.grad - 2 lambda/(1-u)^3
/// at a solution u; eigenvalue >= 0 (up to tolerance) certifies semi-stability.
EigenPair linearized_stability(const Grid& grid, const VectorField& c, const Field& u,
                               double lambda, double tol);

}  // namespace pullin
