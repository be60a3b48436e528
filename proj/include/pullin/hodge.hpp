#pragma once

#include <string>
#include <vector>

#include "pullin/grid.hpp"
#include "pullin/operators.hpp"

namespace pullin {

struct DecompositionResiduals {
    double div_residual = 0.0;  // max conservative divergence of the e^gamma a flux
    double bc_residual = 0.0;   // max one-sided boundary flux (grad alpha + alpha c).n
    double eig_residual = 0.0;  // max |M alpha - mu alpha|
};

/// c = -grad(gamma) + a with div(e^gamma a) = 0 in the conservative discrete
/// sense. alpha = e^gamma is the positive null vector of the flux generator,
/// normalized so max alpha = 1 (gamma <= 0 with max gamma = 0); gamma is only
/// meaningful up to this additive constant.
struct Decomposition {
    Field gamma;
    VectorField a;
    Field alpha;
    double mu = 0.0;
    DecompositionResiduals residuals;
};

/// Builds the decomposition via shifted inverse iteration on the generator,
/// targeting the exact discrete eigenvalue 0. Throws if the iteration stalls
/// or the computed density fails strict positivity (a coarse-grid symptom).
Decomposition decompose(const Grid& grid, const VectorField& c, double tol);

/// Assembles a Decomposition from a raw (unnormalized) density; used by
/// decompose and exposed so rescaling invariance can be exercised directly.
Decomposition decomposition_from_density(const Grid& grid, const VectorField& c,
                                         const Field& alpha_raw);

struct DecompositionCheck {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

struct DecompositionReport {
    std::vector<DecompositionCheck> checks;
    bool all_pass = false;
};

/// Recomputes every residual and invariant of `d` from scratch against the
/// advection field it claims to decompose. Reports, never throws.
DecompositionReport verify_decomposition(const Decomposition& d, const VectorField& c);

/// Conservative-face realization of the pairing  integral of e^gamma a . grad v.
/// Telescopes against the generator stencil, so it vanishes to solver accuracy
/// for any v (this is the discrete divergence-free certificate).
double divergence_free_pairing(const Decomposition& d, const Field& v);

}  // namespace pullin
