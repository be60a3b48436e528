#include <cmath>
#include <numbers>
#include <stdexcept>

#include "doctest.h"
#include "pullin/hodge.hpp"
#include "pullin/ineq.hpp"

using namespace pullin;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("zero advection decomposes trivially") {
    const Grid g = build_grid(GridKind::Interval, 1, 65);
    const Decomposition d = decompose(g, VectorField(g, 0.0), 1e-8);
    CHECK(d.gamma.max_abs() <= 1e-12);
    CHECK(d.a.max_abs() <= 1e-10);
    CHECK(std::abs(d.mu) <= 1e-12);
    CHECK(d.alpha.min_value() > 0.0);
    CHECK(d.alpha.max_value() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(d.residuals.div_residual <= 5e-12);
    CHECK(d.residuals.eig_residual <= 5e-12);
}

TEST_CASE("gradient advection on a fine interval") {
    const Grid g = build_grid(GridKind::Interval, 1, 513);
    const Decomposition d = decompose(g, VectorField(g, 1.0), 1e-8);  // c = grad(x)

    CHECK(d.a.max_abs() <= 1e-6);
    CHECK(std::abs(d.mu) <= 1e-10);

    // gamma(x) - gamma(0) = -x up to O(h^2).
    double err = 0.0;
    for (int i = 0; i < g.node_count(); ++i) {
        err = std::max(err, std::abs(d.gamma[i] - d.gamma[0] + g.coord(i, 0)));
    }
    CHECK(err <= 1e-5);
}

TEST_CASE("gamma differences converge at second order for gradient fields") {
    auto gamma_err = [](int m) {
        const Grid g = build_grid(GridKind::Interval, 1, m);
        const VectorField c = VectorField::from_function(g, [](double x, double) {
            return std::array<double, 2>{x, 0.0};  // c = grad(x^2/2)
        });
        const Decomposition d = decompose(g, c, 1e-8);
        double err = 0.0;
        for (int i = 0; i < g.node_count(); ++i) {
            const double x = g.coord(i, 0);
            err = std::max(err, std::abs(d.gamma[i] - d.gamma[0] + 0.5 * x * x));
        }
        return err;
    };
    const double ratio = gamma_err(129) / gamma_err(257);
    CHECK(ratio >= 3.2);
    CHECK(ratio <= 4.8);

    auto a_err = [](int m) {
        const Grid g = build_grid(GridKind::Interval, 1, m);
        const VectorField c = VectorField::from_function(g, [](double x, double) {
            return std::array<double, 2>{x, 0.0};
        });
        return decompose(g, c, 1e-8).a.max_abs();
    };
    const double a_ratio = a_err(129) / a_err(257);
    CHECK(a_ratio >= 3.0);
    CHECK(a_ratio <= 5.0);
}

TEST_CASE("divergence-free advection on the rectangle") {
    const Grid g = build_grid(GridKind::TensorRectangle, 2, 17);
    const VectorField c = VectorField::from_function(g, [](double, double y) {
        return std::array<double, 2>{std::sin(kPi * y), 0.0};
    });
    const Decomposition d = decompose(g, c, 1e-8);
    CHECK(d.residuals.div_residual <= 1e-8);
    CHECK(std::abs(d.mu) <= 1e-8);
    CHECK(d.alpha.min_value() > 0.0);

    const DecompositionReport report = verify_decomposition(d, c);
    for (const auto& chk : report.checks) {
        INFO(chk.name, " value ", chk.value, " threshold ", chk.threshold);
        CHECK(chk.pass);
    }
    CHECK(report.all_pass);
}

TEST_CASE("weak-form orthogonality of the divergence-free part") {
    const Grid g = build_grid(GridKind::TensorRectangle, 2, 17);
    const VectorField c = VectorField::from_function(g, [](double x, double y) {
        return std::array<double, 2>{std::sin(kPi * y), 0.5 * std::cos(kPi * x)};
    });
    const Decomposition d = decompose(g, c, 1e-8);
    for (const Field& psi : random_test_functions(g, 20, 42)) {
        const VectorField grad_psi = discrete_gradient(psi);
        CHECK(std::abs(divergence_free_pairing(d, psi)) <=
              1e-8 * std::max(1.0, grad_psi.max_abs()));
    }
}

TEST_CASE("tampered decomposition fails verification") {
    const Grid g = build_grid(GridKind::Interval, 1, 129);
    const VectorField c(g, 1.0);
    const Decomposition d = decompose(g, c, 1e-8);

    Decomposition tampered{d.gamma.map([](double v) { return 2.0 * v; }),
                           d.a,
                           d.gamma.map([](double v) { return std::exp(2.0 * v); }),
                           d.mu,
                           d.residuals};
    const DecompositionReport report = verify_decomposition(tampered, c);
    CHECK_FALSE(report.all_pass);
    bool div_failed = false;
    for (const auto& chk : report.checks) {
        if (chk.name == "div_residual" && !chk.pass) div_failed = true;
    }
    CHECK(div_failed);
}

TEST_CASE("normalization is invariant under eigenvector rescaling") {
    const Grid g = build_grid(GridKind::Interval, 1, 65);
    const VectorField c(g, 1.0);
    const Decomposition d = decompose(g, c, 1e-8);

    const Field rescaled = d.alpha.map([](double v) { return -2.5 * v; });
    const Decomposition d2 = decomposition_from_density(g, c, rescaled);
    for (int i = 0; i < g.node_count(); ++i) {
        CHECK(d2.gamma[i] == doctest::Approx(d.gamma[i]).epsilon(1e-14));
        CHECK(d2.a.component(0, i) == doctest::Approx(d.a.component(0, i)).epsilon(1e-12));
    }
    CHECK(d2.residuals.div_residual == doctest::Approx(d.residuals.div_residual).epsilon(1e-10));
}

TEST_CASE("decompose validates its inputs") {
    const Grid g = build_grid(GridKind::Interval, 1, 65);
    CHECK_THROWS_AS(decompose(g, VectorField(g, 0.0), 1e-3), std::invalid_argument);
    CHECK_THROWS_AS(decompose(g, VectorField(g, 0.0), 0.0), std::invalid_argument);
}

TEST_CASE("weighted form built from a decomposition tracks e^gamma times the plain form") {
    const Grid g = build_grid(GridKind::Interval, 1, 129);
    const VectorField c = VectorField::from_function(g, [](double x, double) {
        return std::array<double, 2>{std::sin(kPi * x), 0.0};
    });
    const Decomposition d = decompose(g, c, 1e-8);

    const OperatorMatrix weighted = assemble_weighted_form(g, d.gamma, d.a);
    const OperatorMatrix plain = assemble_advection_diffusion(g, c);
    const Field u = Field::from_function(g, [](double x, double) {
        return std::sin(kPi * x) * (1.0 + 0.5 * x);
    });
    const Field lhs = weighted.apply(u);
    const Field rhs = plain.apply(u);
    double err = 0.0;
    for (int i = 0; i < g.node_count(); ++i) {
        if (g.is_boundary(i)) continue;
        err = std::max(err, std::abs(lhs[i] - std::exp(d.gamma[i]) * rhs[i]));
    }
    const double h = g.spacing(0);
    CHECK(err <= 50.0 * h * h * plain.apply(u).max_abs());
}
