#include <cmath>
#include <numbers>
#include <stdexcept>

#include "doctest.h"
#include "pullin/ineq.hpp"

using namespace pullin;

namespace {

constexpr double kPi = std::numbers::pi;

struct IntervalCase {
    Grid grid;
    VectorField c;
    Decomposition d;
    Branch branch;

    IntervalCase()
        : grid(build_grid(GridKind::Interval, 1, 257)),
          c(grid, 0.0),
          d(decompose(grid, c, 1e-8)),
          branch(continue_branch(grid, c, make_options())) {}

    static ContinuationOptions make_options() {
        ContinuationOptions opts;
        opts.lambda_step0 = 0.1;
        opts.bracket_tol = 1e-5;
        opts.newton_tol = 1e-9;
        return opts;
    }
};

const IntervalCase& interval_case() {
    static IntervalCase c;
    return c;
}

}  // namespace

TEST_CASE("admissible range closed forms") {
    CHECK(std::abs(t_upper(1.0) - (1.0 + std::sqrt(2.0))) <= 1e-12);
    CHECK(std::abs(t_upper(2.0) - (2.0 + std::sqrt(6.0))) <= 1e-12);
    CHECK(std::abs((2.0 * t_upper(2.0) + 3.0) / 2.0 - lp_critical_exponent()) <= 1e-12);
    CHECK(std::abs(lp_critical_exponent() - 5.949489742783178) <= 1e-12);
    CHECK_THROWS_AS(t_upper(0.9), std::invalid_argument);
    CHECK_THROWS_AS(t_upper(2.1), std::invalid_argument);
}

TEST_CASE("stability coefficient is positive inside and zero at the edge") {
    for (double beta : {1.0, 1.25, 1.5, 1.75, 2.0}) {
        CHECK(stability_coefficient(beta, 0.0) == beta);
        const double tmax = t_upper(beta);
        CHECK(std::abs(stability_coefficient(beta, tmax)) <= 1e-12);
        for (double frac : {0.1, 0.5, 0.9, 0.99}) {
            CHECK(stability_coefficient(beta, frac * tmax) > 0.0);
        }
    }
}

TEST_CASE("hardy check with trivial inputs") {
    const Grid g = build_grid(GridKind::Interval, 1, 129);
    HardyProbe probe{Field(g, 1.0), Field(g, 1.0), 1.5, {Field(g, 0.0)}};
    const SlackStats zero = hardy_check(probe);
    CHECK(zero.per_psi[0].lhs == 0.0);
    CHECK(zero.per_psi[0].rhs == 0.0);
    CHECK(zero.pass);

    // Constant E kills both right-hand terms.
    HardyProbe const_probe{Field(g, 1.0), Field(g, 2.0), 1.5,
                           random_test_functions(g, 5, 11)};
    const SlackStats stats = hardy_check(const_probe);
    for (const auto& s : stats.per_psi) {
        CHECK(s.rhs == 0.0);
        CHECK(s.slack == s.lhs);
        CHECK(s.lhs > 0.0);
    }
}

TEST_CASE("hardy closed form: E = sin(pi x), beta = 1") {
    const Grid g = build_grid(GridKind::Interval, 1, 513);
    std::vector<double> vals(static_cast<size_t>(g.node_count()));
    for (int i = 0; i < g.node_count(); ++i) {
        vals[static_cast<size_t>(i)] = g.is_boundary(i) ? 0.0 : std::sin(kPi * g.coord(i, 0));
    }
    const Field mode(g, std::move(vals));
    std::vector<Field> psis{mode};
    HardyProbe probe{Field(g, 1.0), mode, 1.0, std::move(psis)};
    const SlackStats stats = hardy_check(probe);
    const double lhs = kPi * kPi / 2.0;
    const double rhs = 3.0 * kPi * kPi / 8.0;
    CHECK(std::abs(stats.per_psi[0].lhs - lhs) <= 1e-4);
    CHECK(std::abs(stats.per_psi[0].rhs - rhs) <= 1e-4);
    CHECK(std::abs(stats.min_slack - kPi * kPi / 8.0) <= 1e-4);
}

TEST_CASE("hardy slack stays nonnegative over seeded test functions") {
    const Grid g = build_grid(GridKind::Interval, 1, 257);
    const Field e = Field::from_function(
        g, [](double x, double) { return 1.0 + 0.5 * std::sin(kPi * x); });
    for (double beta : {1.0, 1.5, 2.0}) {
        HardyProbe probe{Field(g, 1.0), e, beta, random_test_functions(g, 200, 42)};
        const SlackStats stats = hardy_check(probe);
        CHECK(stats.pass);
        CHECK(stats.min_slack >= -stats.tolerance);
    }
}

TEST_CASE("hardy check rejects bad probes") {
    const Grid g = build_grid(GridKind::Interval, 1, 65);
    CHECK_THROWS_AS(hardy_check(HardyProbe{Field(g, 1.0), Field(g, -1.0), 1.5, {}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(hardy_check(HardyProbe{Field(g, 1.0), Field(g, 1.0), 0.5, {}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(hardy_check(HardyProbe{Field(g, 1.0), Field(g, 1.0), 1.5, {Field(g, 1.0)}}),
                    std::invalid_argument);
}

TEST_CASE("energy inequality at beta = 2 reduces to the plain stability bound") {
    const auto& cs = interval_case();
    const BranchPoint& pt = cs.branch.points[cs.branch.points.size() / 2];
    const EigenPair eig = linearized_stability(cs.grid, cs.c, pt.u, pt.lambda, 1e-8);
    REQUIRE(eig.eigenvalue > 0.0);

    const Field rho = pt.u.map([&](double ui) {
        return 2.0 * pt.lambda / std::pow(1.0 - ui, 3.0);
    });
    const auto psis = random_test_functions(cs.grid, 50, 7);
    const SlackStats stats = energy_inequality_check(cs.grid, cs.d, eig.phi, rho, 2.0, psis);
    CHECK(stats.pass);

    // Direct form: 2 lambda int psi^2/(1-u)^3 <= int |grad psi|^2.
    for (size_t k = 0; k < psis.size(); ++k) {
        const VectorField grad_psi = discrete_gradient(psis[k]);
        double lhs = 0.0, rhs = 0.0;
        for (int i = 0; i < cs.grid.node_count(); ++i) {
            const double w = cs.grid.quad_weight(i);
            lhs += w * grad_psi.component(0, i) * grad_psi.component(0, i);
            rhs += w * rho[i] * psis[k][i] * psis[k][i];
        }
        CHECK(stats.per_psi[k].lhs == doctest::Approx(lhs).epsilon(1e-9));
        CHECK(stats.per_psi[k].rhs == doctest::Approx(rhs).epsilon(1e-6));
        CHECK(stats.per_psi[k].slack >= -1e-8 * std::max(1.0, lhs));
    }
}

TEST_CASE("main estimate without advection drops every a-term") {
    const auto& cs = interval_case();
    const BranchPoint& pt = cs.branch.points[cs.branch.points.size() / 2];
    const EigenPair eig = linearized_stability(cs.grid, cs.c, pt.u, pt.lambda, 1e-8);

    const EstimateReport report =
        main_estimate_check(cs.grid, cs.d, pt.u, pt.lambda, 1.5, 1.0, &eig);
    CHECK(report.rhs_second <= 1e-18);
    CHECK(std::abs(report.h_value) <= 1e-10);
    CHECK(report.slack_pass);
    CHECK(report.coefficient == doctest::Approx(1.5 - 1.0 / 3.0));
    // With a = 0 the drift bound degenerates to lambda_sup <= 0 = cap.
    CHECK(report.lambda_cap <= 1e-18);
    CHECK(report.lambda_sup <= 1e-10);
    CHECK(report.cap_pass);
}

TEST_CASE("main estimate holds across the admissible sweep") {
    const auto& cs = interval_case();
    for (double beta : {1.25, 1.5, 1.75}) {
        for (double frac : {0.5, 0.9, 0.99}) {
            const double t = frac * t_upper(beta);
            for (size_t k : {size_t(1), cs.branch.points.size() / 2,
                             cs.branch.points.size() - 1}) {
                const BranchPoint& pt = cs.branch.points[k];
                const EigenPair eig =
                    linearized_stability(cs.grid, cs.c, pt.u, pt.lambda, 1e-8);
                const EstimateReport rep =
                    main_estimate_check(cs.grid, cs.d, pt.u, pt.lambda, beta, t, &eig);
                INFO("beta ", beta, " t ", t, " lambda ", pt.lambda, " slack ", rep.slack);
                CHECK(rep.slack_pass);
                CHECK(rep.cap_pass);
                CHECK(rep.coefficient > 0.0);
            }
        }
    }
}

TEST_CASE("main estimate validates parameters") {
    const auto& cs = interval_case();
    const BranchPoint& pt = cs.branch.points[1];
    CHECK_THROWS_AS(main_estimate_check(cs.grid, cs.d, pt.u, pt.lambda, 1.0, 0.5),
                    std::invalid_argument);
    CHECK_THROWS_AS(main_estimate_check(cs.grid, cs.d, pt.u, pt.lambda, 1.5, 10.0),
                    std::invalid_argument);
}

TEST_CASE("flux orthogonality vanishes without advection or deflection") {
    const auto& cs = interval_case();
    const FluxOrthogonality zero_u = flux_orthogonality_check(cs.d, Field(cs.grid, 0.0), 1.0);
    CHECK(zero_u.h_value == 0.0);
    CHECK(zero_u.pass);

    const BranchPoint& pt = cs.branch.points.back();
    const FluxOrthogonality along = flux_orthogonality_check(cs.d, pt.u, 1.0);
    CHECK(std::abs(along.h_value) <= 1e-10);
    CHECK(along.pass);
}

TEST_CASE("regularity diagnostic needs five points and reports flat norms at zero voltage") {
    const auto& cs = interval_case();
    Branch stub;
    stub.grid = &cs.grid;
    stub.points.push_back(cs.branch.points.front());
    CHECK_THROWS_AS(regularity_diagnostic(stub, 1), std::invalid_argument);

    // At lambda = 0 the norms are |Omega|^{1/p} = 1 on the unit interval.
    const RegularityReport report = regularity_diagnostic(cs.branch, 1);
    CHECK(report.verdict == "no verdict");
    for (const auto& entry : report.entries) {
        CHECK(entry.norms.front() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("random test functions are reproducible and vanish on the boundary") {
    const Grid g = build_grid(GridKind::TensorRectangle, 2, 17);
    const auto a = random_test_functions(g, 3, 42);
    const auto b = random_test_functions(g, 3, 42);
    const auto c = random_test_functions(g, 3, 43);
    for (int i = 0; i < g.node_count(); ++i) {
        CHECK(a[0][i] == b[0][i]);
    }
    bool differs = false;
    for (int i = 0; i < g.node_count(); ++i) {
        if (a[0][i] != c[0][i]) differs = true;
    }
    CHECK(differs);
    for (int bnode : g.boundary_nodes()) CHECK(a[0][bnode] == 0.0);
    CHECK(a[0].max_abs() > 0.0);
}

TEST_CASE("regularity verdicts for the radial reference dimensions") {
    auto run = [](int n, int m) {
        const Grid g = build_grid(GridKind::RadialBall, n, m);
        ContinuationOptions opts;
        opts.lambda_step0 = 0.2;
        opts.bracket_tol = 1e-6;
        opts.newton_tol = 1e-8;
        const Branch b = continue_branch(g, VectorField(g, 0.0), opts);
        return regularity_diagnostic(b, n);
    };
    // Verdicts hold and are stable under m -> 2m-1.
    for (int m : {513, 1025}) {
        const RegularityReport smooth = run(3, m);
        CHECK(smooth.verdict == "regular regime");
        const RegularityReport singular = run(8, m);
        CHECK(singular.verdict == "singular trend");
        for (const auto& e : singular.entries) {
            if (std::abs(e.p - 6.0) < 1e-9) CHECK(e.trend == "diverging");
            if (std::abs(e.p - 2.0) < 1e-9) CHECK(e.trend == "bounded");
        }
    }
}

TEST_CASE("supercritical branch deepens past the lambda stall") {
    const Grid g = build_grid(GridKind::RadialBall, 8, 513);
    ContinuationOptions opts;
    opts.lambda_step0 = 0.2;
    opts.bracket_tol = 1e-6;
    opts.newton_tol = 1e-8;
    const Branch b = continue_branch(g, VectorField(g, 0.0), opts);
    CHECK(b.points.back().sup_u >= 0.9);
    CHECK(std::abs(b.lambda_lo - 40.0 / 9.0) <= 0.02 * (40.0 / 9.0));
    CHECK(b.lambda_hi - b.lambda_lo <= 1e-6 * std::max(1.0, b.lambda_lo));
}
