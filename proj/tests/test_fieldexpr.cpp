#include <cmath>

#include "doctest.h"
#include "pullin/fieldexpr.hpp"

using namespace pullin;

TEST_CASE("constants and literals") {
    EvalPoint p;
    CHECK(parse_expression("0").evaluate(p) == 0.0);
    CHECK(parse_expression("pi").evaluate(p) == doctest::Approx(3.141592653589793).epsilon(1e-16));
    CHECK(parse_expression("exp(0)").evaluate(p) == 1.0);
    CHECK(parse_expression("1.5e2").evaluate(p) == 150.0);
}

TEST_CASE("hand-evaluated expressions") {
    EvalPoint p;
    p.x = 3.0;
    CHECK(parse_expression("2*x^2+1").evaluate(p) == doctest::Approx(19.0).epsilon(1e-15));
    CHECK(std::abs(parse_expression("sin(pi*0.5)").evaluate(p) - 1.0) <= 1e-15);

    p.x = 2.0;
    CHECK(parse_expression("-x^2").evaluate(p) == -4.0);     // ^ binds tighter than unary -
    CHECK(parse_expression("2-3-4").evaluate(p) == -5.0);    // left associative
    CHECK(parse_expression("2*3^2").evaluate(p) == 18.0);
    CHECK(parse_expression("(1+2)*2").evaluate(p) == 6.0);
    CHECK(parse_expression("x^-1").evaluate(p) == 0.5);
    CHECK(parse_expression("4^(1/2)").evaluate(p) == 2.0);
}

TEST_CASE("variables and structure") {
    const Expr e = parse_expression("sin(pi*y)");
    CHECK(e.variables().size() == 1);
    CHECK(e.variables().count("y") == 1);
    EvalPoint p;
    p.y = 0.5;
    CHECK(e.evaluate(p) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("parse errors carry 1-based columns") {
    try {
        parse_expression("1+*2");
        FAIL("expected ParseError");
    } catch (const ParseError& err) {
        CHECK(err.column() == 3);
    }
    try {
        parse_expression("foo(1)");
        FAIL("expected ParseError");
    } catch (const ParseError& err) {
        CHECK(err.column() == 1);
        CHECK(std::string(err.what()).find("foo") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_expression(""), ParseError);
    CHECK_THROWS_AS(parse_expression("sin(pi"), ParseError);
    CHECK_THROWS_AS(parse_expression("x^y"), ParseError);  // exponent must be constant
    CHECK_THROWS_AS(parse_expression("1 $ 2"), ParseError);
}

TEST_CASE("evaluation errors") {
    EvalPoint p;
    CHECK_THROWS_AS(parse_expression("x").evaluate(p), EvalError);
    CHECK_THROWS_AS(parse_expression("1/0").evaluate(p), EvalError);
    CHECK_THROWS_AS(parse_expression("log(0-1)").evaluate(p), EvalError);
    CHECK_THROWS_AS(parse_expression("sqrt(0-4)").evaluate(p), EvalError);
    CHECK_THROWS_AS(parse_expression("0^-1").evaluate(p), EvalError);
    try {
        p.x = 2.0;
        parse_expression("1+log(1-x)").evaluate(p);
        FAIL("expected EvalError");
    } catch (const EvalError& err) {
        CHECK(err.column() == 3);  // the log node
    }
}

TEST_CASE("print/parse round trip is idempotent") {
    for (const char* text : {"0", "sin(pi*y)", "2*x^2+1", "-(x+1)*cos(2*x)/3",
                             "sqrt(x)^3-exp(-x)", "1/(1+x)", "x^2^3", "-x^2+pi"}) {
        const std::string once = parse_expression(text).print();
        const std::string twice = parse_expression(once).print();
        CHECK(once == twice);
        // And the reprinted expression evaluates identically.
        EvalPoint p;
        p.x = 0.37;
        p.y = 0.61;
        const double v1 = parse_expression(text).evaluate(p);
        const double v2 = parse_expression(once).evaluate(p);
        CHECK(v1 == doctest::Approx(v2).epsilon(1e-15));
    }
}

TEST_CASE("variable legality per grid kind") {
    const Expr ex = parse_expression("x");
    const Expr ey = parse_expression("sin(pi*y)");
    const Expr er = parse_expression("r");
    std::string bad;

    CHECK(variables_legal_for(ex, GridKind::Interval, 1));
    CHECK(variables_legal_for(er, GridKind::Interval, 1));
    CHECK_FALSE(variables_legal_for(ey, GridKind::Interval, 1, &bad));
    CHECK(bad == "y");

    CHECK(variables_legal_for(er, GridKind::RadialBall, 1));
    CHECK_FALSE(variables_legal_for(ex, GridKind::RadialBall, 1));

    CHECK(variables_legal_for(ey, GridKind::TensorRectangle, 2));
    CHECK_FALSE(variables_legal_for(er, GridKind::TensorRectangle, 2));
    CHECK_FALSE(variables_legal_for(ey, GridKind::TensorRectangle, 1));
}

TEST_CASE("sampling onto grids") {
    const Grid g = build_grid(GridKind::Interval, 1, 11);
    const Field f = sample(g, parse_expression("2*x"));
    CHECK(f[5] == doctest::Approx(1.0));

    const Expr comps[] = {parse_expression("x"), parse_expression("0-y")};
    const Grid rect = build_grid(GridKind::TensorRectangle, 2, 9);
    const VectorField v = sample_vector(rect, comps);
    const int node = rect.node_at(4, 2);
    CHECK(v.component(0, node) == doctest::Approx(0.5));
    CHECK(v.component(1, node) == doctest::Approx(-0.25));
}
