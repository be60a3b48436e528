#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pullin/grid.hpp"
#include "pullin/hodge.hpp"
#include "pullin/solver.hpp"
#include "pullin/spectral.hpp"

namespace pullin {

/// Upper end of the admissible test-exponent range: beta + sqrt(beta^2 + beta).
/// The stability coefficient beta - t^2/(2t+1) is positive on (0, t_upper) and
/// vanishes at t_upper. Accepts the closed range beta in [1, 2].
double t_upper(double beta);

double stability_coefficient(double beta, double t);

/// Supremum of p for which the uniform L^p bound on (1-u)^{-2} follows:
/// 7/2 + sqrt(6); equals (2 t_upper(2) + 3)/2.
double lp_critical_exponent();

struct HardyProbe {
    Field weight;            // scalar weight w (the matrix is w I)
    Field e;                 // positive on interior nodes
    double beta = 1.0;       // in [1, 2]
    std::vector<Field> psis; // each zero on boundary nodes
};

struct SlackSample {
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
};

struct SlackStats {
    std::vector<SlackSample> per_psi;
    double min_slack = 0.0;
    double tolerance = 0.0;  // slack >= -tolerance counts as a pass
    bool pass = false;
};

/// Weighted lower bound for the Dirichlet energy:
/// int w |grad psi|^2 >= beta(2-beta)/4 int w|grad E|^2/E^2 psi^2
///                       + beta/2 int (-div(w grad E))/E psi^2.
/// div(w grad E) uses the face-weighted flux stencil; boundary nodes (where
/// every psi vanishes) are excluded from the E-quotient integrands.
SlackStats hardy_check(const HardyProbe& probe);

/// Energy bound carried by the principal eigenpair (phi from the linearized
/// operator, rho = 2 lambda/(1-u)^3):
/// int e^g |grad psi|^2 >= beta(2-beta)/4 int e^g |grad phi|^2/phi^2 psi^2
///   + beta/2 int e^g rho psi^2 - beta/2 int e^g (a.grad phi)/phi psi^2.
SlackStats energy_inequality_check(const Grid& grid, const Decomposition& d, const Field& phi,
                                   const Field& rho, double beta, std::span<const Field> psis);

struct EstimateReport {
    double beta = 0.0;
    double t = 0.0;
    double lambda = 0.0;
    double lhs = 0.0;
    double rhs_first = 0.0;
    double rhs_second = 0.0;
    double slack = 0.0;        // rhs - lhs
    double coefficient = 0.0;  // beta - t^2/(2t+1)
    double lambda_sup = 0.0;   // max of a.grad(phi)/phi - (2-beta)/2 |grad phi|^2/phi^2
    double lambda_cap = 0.0;   // ||a||_inf^2 / (2(2-beta))
    double h_value = 0.0;
    bool slack_pass = false;
    bool cap_pass = false;
};

/// The main weighted integral estimate at one branch point:
/// lambda (beta - t^2/(2t+1)) int e^g (1-u)^{-(2t+3)}
///   <= 2 beta lambda int e^g (1-u)^{-(t+3)}
///      + beta ||a||^2/(4(2-beta)) int e^g (1-u)^{-2t}.
/// Computes the eigenpair internally unless one is supplied.
EstimateReport main_estimate_check(const Grid& grid, const Decomposition& d, const Field& u,
                                   double lambda, double beta, double t,
                                   const EigenPair* eig = nullptr, double eig_tol = 1e-8);

struct FluxOrthogonality {
    double h_value = 0.0;
    double scale = 0.0;  // int e^g |a| |grad u| (1-u)^{-(2t+2)}
    bool pass = false;   // |H| <= 1e-8 scale + 1e-12
};

/// H = int e^g a . grad((1-u)^{-(2t+1)} - 1), evaluated through the
/// conservative face pairing so the divergence-free certificate applies.
FluxOrthogonality flux_orthogonality_check(const Decomposition& d, const Field& u, double t);

struct RegularityEntry {
    double p = 0.0;
    std::vector<double> norms;     // ||(1-u)^{-2}||_p per branch point
    double growth_factor = 0.0;    // last / first
    double increment_ratio = 0.0;  // trend metric, see regularity_diagnostic
    std::string trend;             // "bounded", "diverging", or "unclear"
};

struct RegularityReport {
    std::vector<RegularityEntry> entries;
    std::string verdict;  // "regular regime", "singular trend", or "no verdict"
};

/// Trend test for the uniform L^p bounds along a computed branch, at
/// p in {2, 3N/4, 0.99 p0, 1.01 p0}. The increment ratio splits the branch at
/// three quarters of the log-range of the distance to the bracket top and
/// compares tail against head norm variation: saturating norms leave a
/// vanishing tail share, diverging ones keep it alive. An entry reads
/// bounded when the ratio stays below 0.5 and the p-th power of the norm
/// grew by less than 10x, diverging when the ratio exceeds 1 or the p-power
/// growth reaches 10x with a live tail. The verdict follows the 3N/4 entry
/// for N >= 3 and is withheld below that.
RegularityReport regularity_diagnostic(const Branch& branch, int dimension);

/// Seeded smooth test functions vanishing on the boundary: random +-1
/// coefficient mixes of the first sine modes (tensor products on rectangles).
std::vector<Field> random_test_functions(const Grid& grid, int count, std::uint64_t seed);

}  // namespace pullin
