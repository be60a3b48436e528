#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "doctest.h"
#include "pullin/grid.hpp"

using namespace pullin;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("interval grid basics") {
    const AxisBounds b{0.0, 1.0};
    const Grid g = build_grid(GridKind::Interval, 1, 11, std::span(&b, 1));
    CHECK(g.node_count() == 11);
    CHECK(g.spacing(0) == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(g.is_boundary(0));
    CHECK(g.is_boundary(10));
    CHECK_FALSE(g.is_boundary(5));
    CHECK(g.coord(0, 0) == 0.0);
    CHECK(g.coord(10, 0) == doctest::Approx(1.0));
    CHECK(g.outward_normal(0)[0] == -1.0);
    CHECK(g.outward_normal(10)[0] == 1.0);
    CHECK(g.boundary_nodes().size() == 2);
}

TEST_CASE("every node is classified exactly once") {
    for (const Grid& g : {build_grid(GridKind::Interval, 1, 11),
                          build_grid(GridKind::RadialBall, 3, 21),
                          build_grid(GridKind::TensorRectangle, 2, 9)}) {
        int boundary_from_flags = 0;
        for (int i = 0; i < g.node_count(); ++i) {
            if (g.is_boundary(i)) ++boundary_from_flags;
        }
        CHECK(boundary_from_flags == static_cast<int>(g.boundary_nodes().size()));
        CHECK(g.interior_count() + boundary_from_flags == g.node_count());
    }
}

TEST_CASE("radial ball quadrature matches the ball volume") {
    for (int n : {1, 2, 3, 8}) {
        const Grid g = build_grid(GridKind::RadialBall, n, 101);
        double sum = 0.0;
        for (double w : g.quad_weights()) {
            CHECK(w >= 0.0);
            sum += w;
        }
        const double volume = sphere_surface_measure(n) / static_cast<double>(n);
        CHECK(std::abs(sum - volume) <= 1e-10 * volume);
        CHECK(g.domain_measure() == doctest::Approx(volume).epsilon(1e-13));
    }
    // N = 3: weights sum to 4 pi / 3.
    const Grid g3 = build_grid(GridKind::RadialBall, 3, 101);
    double sum = 0.0;
    for (double w : g3.quad_weights()) sum += w;
    CHECK(std::abs(sum - 4.0 * kPi / 3.0) <= 1e-10 * (4.0 * kPi / 3.0));
    CHECK(g3.is_symmetry_node(0));
    CHECK_FALSE(g3.is_boundary(0));
    CHECK(g3.is_boundary(100));
}

TEST_CASE("rectangle node and boundary counts") {
    const Grid g = build_grid(GridKind::TensorRectangle, 2, 33);
    CHECK(g.node_count() == 1089);
    CHECK(static_cast<int>(g.boundary_nodes().size()) == 128);  // 4 * (33 - 1) by enumeration
    double sum = 0.0;
    for (double w : g.quad_weights()) {
        CHECK(w >= 0.0);
        sum += w;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

    // Corner normals point outward diagonally.
    const auto n00 = g.outward_normal(g.node_at(0, 0));
    CHECK(n00[0] == doctest::Approx(-1.0 / std::sqrt(2.0)));
    CHECK(n00[1] == doctest::Approx(-1.0 / std::sqrt(2.0)));
}

TEST_CASE("build_grid rejects bad input") {
    CHECK_THROWS_AS(build_grid(GridKind::Interval, 1, 2), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(GridKind::Interval, 2, 11), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(GridKind::RadialBall, 0, 11), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(GridKind::RadialBall, 11, 11), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(GridKind::TensorRectangle, 2, 7), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(GridKind::TensorRectangle, 2, 10), std::invalid_argument);
    const AxisBounds bad{1.0, 0.0};
    CHECK_THROWS_AS(build_grid(GridKind::Interval, 1, 11, std::span(&bad, 1)),
                    std::invalid_argument);
}

TEST_CASE("integrate constants exactly") {
    const Grid g = build_grid(GridKind::Interval, 1, 101);
    CHECK(integrate(Field(g, 1.0)) == doctest::Approx(1.0).epsilon(1e-14));

    const Grid ball = build_grid(GridKind::RadialBall, 3, 101);
    const double volume = 4.0 * kPi / 3.0;
    CHECK(std::abs(integrate(Field(ball, 1.0)) - volume) <= 1e-10 * volume);
}

TEST_CASE("integrate sin^2 on a fine interval") {
    const Grid g = build_grid(GridKind::Interval, 1, 513);
    const Field f = Field::from_function(g, [](double x, double) {
        const double s = std::sin(kPi * x);
        return s * s;
    });
    CHECK(std::abs(integrate(f) - 0.5) <= 1e-6);  // closed form: 1/2
}

TEST_CASE("integrate rejects mismatched grids") {
    const Grid a = build_grid(GridKind::Interval, 1, 11);
    const Grid b = build_grid(GridKind::Interval, 1, 11);
    CHECK_THROWS_AS(integrate(Field(a, 1.0), Field(b, 1.0)), std::invalid_argument);
}

TEST_CASE("integrate refinement is second order") {
    auto error_at = [](int m) {
        const Grid g = build_grid(GridKind::Interval, 1, m);
        const Field f = Field::from_function(g, [](double x, double) { return std::exp(x); });
        return std::abs(integrate(f) - (std::exp(1.0) - 1.0));
    };
    const double ratio = error_at(129) / error_at(257);
    CHECK(ratio >= 3.2);
    CHECK(ratio <= 4.8);

    auto radial_error_at = [](int m) {
        const Grid g = build_grid(GridKind::RadialBall, 3, m);
        const Field f = Field::from_function(g, [](double r, double) { return std::exp(r); });
        // int_0^1 e^r 4 pi r^2 dr = 4 pi (e - 2)
        return std::abs(integrate(f) - 4.0 * kPi * (std::exp(1.0) - 2.0));
    };
    const double radial_ratio = radial_error_at(129) / radial_error_at(257);
    CHECK(radial_ratio >= 3.2);
    CHECK(radial_ratio <= 4.8);
}

TEST_CASE("discrete gradient exactness") {
    const Grid g = build_grid(GridKind::Interval, 1, 11);

    const VectorField zero = discrete_gradient(Field(g, 3.5));
    for (int i = 0; i < g.node_count(); ++i) CHECK(zero.component(0, i) == 0.0);

    const Field linear = Field::from_function(g, [](double x, double) { return x; });
    const VectorField one = discrete_gradient(linear);
    for (int i = 0; i < g.node_count(); ++i) {
        CHECK(one.component(0, i) == doctest::Approx(1.0).epsilon(1e-13));
    }

    // Centered differences are exact on quadratics: ((x+h)^2-(x-h)^2)/2h = 2x.
    const Field quad = Field::from_function(g, [](double x, double) { return x * x; });
    const VectorField dq = discrete_gradient(quad);
    CHECK(dq.component(0, 5) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("radial gradient vanishes at the symmetry node") {
    const Grid g = build_grid(GridKind::RadialBall, 3, 41);
    const Field f = Field::from_function(g, [](double r, double) { return std::cos(r); });
    const VectorField df = discrete_gradient(f);
    CHECK(df.component(0, 0) == 0.0);
    CHECK(df.component(0, 20) == doctest::Approx(-std::sin(0.5)).epsilon(1e-3));
}

TEST_CASE("integration by parts against compactly supported fields") {
    // On flat grids the centered/trapezoid pairing telescopes exactly, so the
    // defect sits at rounding level (well inside the O(h^2) contract).
    for (int m : {33, 129}) {
        const Grid g = build_grid(GridKind::Interval, 1, m);
        const Field f = Field::from_function(g, [](double x, double) { return std::sin(kPi * x); });
        const Field gg =
            Field::from_function(g, [](double x, double) { return x * x * (1.0 - x); });
        const VectorField df = discrete_gradient(f);
        const VectorField dg = discrete_gradient(gg);
        double sum = 0.0;
        for (int i = 0; i < g.node_count(); ++i) {
            sum += g.quad_weight(i) * (f[i] * dg.component(0, i) + gg[i] * df.component(0, i));
        }
        CHECK(std::abs(sum) <= 1e-13);
    }

    // The radial identity carries the curvature term; its defect is genuinely
    // O(h^2), with refinement ratio near 4.
    auto radial_defect = [](int m) {
        const Grid g = build_grid(GridKind::RadialBall, 3, m);
        const Field f =
            Field::from_function(g, [](double r, double) { return std::cos(kPi * r / 2.0); });
        const Field gg = Field::from_function(
            g, [](double r, double) { return (1.0 - r * r) * std::exp(r); });
        const VectorField df = discrete_gradient(f);
        const VectorField dg = discrete_gradient(gg);
        double sum = 0.0;
        for (int i = 0; i < g.node_count(); ++i) {
            const double r = g.coord(i, 0);
            const double curv = (i == 0) ? 0.0 : 2.0 * f[i] * gg[i] / r;
            sum += g.quad_weight(i) *
                   (f[i] * dg.component(0, i) + gg[i] * df.component(0, i) + curv);
        }
        return std::abs(sum);
    };
    const double ratio = radial_defect(65) / radial_defect(129);
    CHECK(ratio >= 3.2);
    CHECK(ratio <= 4.8);
}

TEST_CASE("field validation") {
    const Grid g = build_grid(GridKind::Interval, 1, 11);
    std::vector<double> bad(11, 0.0);
    bad[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(Field(g, std::move(bad)), std::invalid_argument);
    CHECK_THROWS_AS(Field(g, std::vector<double>(10, 0.0)), std::invalid_argument);

    CHECK_THROWS_AS(VectorField(g, std::vector<std::vector<double>>{
                                       std::vector<double>(11, 0.0),
                                       std::vector<double>(11, 0.0)}),
                    std::invalid_argument);
}
