#include <catch2/catch_amalgamated.hpp>

#include "toric/io.hpp"
#include "toric/polynomial.hpp"

using namespace toric;

TEST_CASE("poly spec parsing") {
    auto p = Polynomial::parse("poly:2*x0^2*x1 - 3/4*x1 + 1", 2);
    RationalVec x{Rational(2), Rational(3)};
    // 2*4*3 - 3/4*3 + 1 = 24 - 9/4 + 1 = 91/4
    CHECK(p.evaluate_exact(x) == Rational(91, 4));
    Eigen::VectorXd xd(2);
    xd << 2.0, 3.0;
    CHECK(p(xd) == Catch::Approx(22.75));
    CHECK(p.degree() == 3);

    auto c = Polynomial::parse("poly:1", 1);
    CHECK(c.evaluate_exact({Rational(5)}) == 1);

    auto dec = Polynomial::parse("poly:0.5*x0 + 0.25", 1);
    CHECK(dec.evaluate_exact({Rational(1)}) == Rational(3, 4));

    CHECK_THROWS(Polynomial::parse("poly:x5", 2));
    CHECK_THROWS(Polynomial::parse("poly:", 2));
    CHECK_THROWS(Polynomial::parse("poly:x0^", 2));
}

TEST_CASE("derivatives and arithmetic") {
    auto p = Polynomial::parse("poly:x0^3 + 2*x0*x1", 2);
    auto dx = p.partial_derivative(0);
    RationalVec x{Rational(2), Rational(5)};
    CHECK(dx.evaluate_exact(x) == 3 * 4 + 2 * 5);
    auto dy = p.partial_derivative(1);
    CHECK(dy.evaluate_exact(x) == 4);
    auto sum = p + p.scaled(-1);
    CHECK(sum.terms().empty());
}

TEST_CASE("multi-index json format") {
    auto p = polynomial_from_json(
        nlohmann::json::parse(R"({"terms":[{"exps":[1,0],"coef":"1/3"},{"exps":[0,2],"coef":2}]})"),
        2);
    CHECK(p.evaluate_exact({Rational(3), Rational(1)}) == Rational(3));
    auto q = parse_polynomial_arg(R"({"terms":[{"exps":[1],"coef":1}]})", 1);
    CHECK(q.evaluate_exact({Rational(7)}) == 7);
    auto r = parse_polynomial_arg("poly:x0", 1);
    CHECK(r.evaluate_exact({Rational(7)}) == 7);
}

TEST_CASE("rational text parsing") {
    CHECK(Polynomial::parse_rational("3/4") == Rational(3, 4));
    CHECK(Polynomial::parse_rational("-2") == Rational(-2));
    CHECK(Polynomial::parse_rational("2.5") == Rational(5, 2));
    CHECK(Polynomial::parse_rational("-0.125") == Rational(-1, 8));
    CHECK_THROWS(Polynomial::parse_rational("1/0"));
}
