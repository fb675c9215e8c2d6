#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "toric/asymptotics.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace toric;

namespace {
Eigen::VectorXd vec1(double a) {
    Eigen::VectorXd v(1);
    v << a;
    return v;
}
Eigen::VectorXd vec2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}
QuadratureOptions tight() {
    QuadratureOptions o;
    o.abs_tol = 1e-12;
    o.log_rel_tol = 1e-11;
    o.max_evals = 6'000'000;
    return o;
}
}  // namespace

TEST_CASE("hessian form on model points") {
    auto iv = fixtures::interval();
    auto h = hessian_form(iv, vec1(0.5));
    CHECK(h.determinant == Catch::Approx(4.0));

    auto sq = fixtures::unit_square();
    auto h2 = hessian_form(sq, vec2(0.5, 0.5));
    CHECK(h2.determinant == Catch::Approx(16.0));

    CHECK(hessian_form(iv, vec1(1e-4)).determinant > 1e3);  // blows up at the facet
    CHECK_THROWS_AS(hessian_form(iv, vec1(0.0)), std::domain_error);
}

TEST_CASE("hessian form equals minus the phase hessian at y=x") {
    std::mt19937_64 rng(1234);
    for (const auto& poly : fixtures::fleet()) {
        PhaseFamily ph = PhaseFamily::from_polytope(poly);
        for (int rep = 0; rep < 12; ++rep) {
            Eigen::VectorXd x = fixtures::random_interior_point(poly, rng, 0.08);
            auto h = hessian_form(poly, x);
            auto ev = ph.evaluate(x, x, true);
            CHECK((h.matrix + *ev.hessian_y).lpNorm<Eigen::Infinity>() <
                  1e-10 * h.matrix.lpNorm<Eigen::Infinity>());
            // and against finite differences of phi
            auto f = [&](const Eigen::VectorXd& yy) { return ph.phi(x, yy); };
            Eigen::MatrixXd hfd = oracles::fd_hessian(f, x);
            CHECK((h.matrix + hfd).lpNorm<Eigen::Infinity>() <
                  1e-6 * h.matrix.lpNorm<Eigen::Infinity>());
        }
    }
}

TEST_CASE("laplace normalization ratio near 1 at large N") {
    auto iv = fixtures::interval();
    KernelContext ctx(iv, 200, tight());
    double pred = log_laplace_normalization(iv, 200, vec1(0.5));
    double ratio = std::exp(ctx.log_c(vec1(0.5)) - pred);
    CHECK(ratio > 0.98);
    CHECK(ratio < 1.02);
    // exact Beta oracle: c_200(1/2) = e^{-200} B(101, 101)
    double exact_ratio = std::exp(-200.0 + oracles::log_beta(101.0, 101.0) - pred);
    CHECK(ratio == Catch::Approx(exact_ratio).epsilon(1e-8));

    auto sq = fixtures::unit_square();
    KernelContext ctx2(sq, 200, tight());
    double ratio2 =
        std::exp(ctx2.log_c(vec2(0.5, 0.5)) - log_laplace_normalization(sq, 200, vec2(0.5, 0.5)));
    CHECK(std::abs(ratio2 - 1.0) < 0.02);

    // orthant chart: same leading constant with h = 1/x
    OrthantModel model(1, 0.0, tight());
    double x = 1.0, n_level = 400.0;
    double model_pred = 0.5 * std::log(2.0 * kPi / n_level) - 0.5 * std::log(1.0 / x) +
                        n_level * (x * std::log(x) - x);
    double ratio3 = std::exp(model.log_c(vec1(x), n_level) - model_pred);
    CHECK(std::abs(ratio3 - 1.0) < 0.01);
}

TEST_CASE("pointwise norm asymptotics") {
    auto iv = fixtures::interval();
    double n_level = 400.0;
    Eigen::VectorXd x = vec1(0.5);
    // at y = x the prediction is (N/2pi)^{1/2} h^{1/2}
    CHECK(pointwise_norm_asymptotic(iv, n_level, x, x) ==
          Catch::Approx(std::sqrt(n_level / (2.0 * kPi) * 4.0)));
    // boundary y with positive coefficient: exact zero
    CHECK(pointwise_norm_asymptotic(iv, n_level, x, vec1(1.0)) == 0.0);

    KernelContext ctx(iv, 400, tight());
    double actual = ctx.section_norm(IntVec{200}, vec1(0.6));
    double predicted = pointwise_norm_asymptotic(iv, n_level, x, vec1(0.6));
    CHECK(actual / predicted == Catch::Approx(1.0).margin(0.05));
}

TEST_CASE("expansion extraction on the orthant model is exact for monomials") {
    OrthantModel model(1, 0.0, tight());
    auto f = [](const Eigen::VectorXd& y) { return y(0) * y(0); };
    auto rep = extract_expansion_orthant(model, {20, 28, 40, 57, 80, 113, 160}, f, vec1(1.0), 2);
    REQUIRE(rep.coefficients.size() == 3);
    CHECK(rep.coefficients[0] == Catch::Approx(1.0).margin(2e-8));
    CHECK(rep.coefficients[1] == Catch::Approx(3.0).margin(2e-5));
    CHECK(rep.coefficients[2] == Catch::Approx(2.0).margin(2e-2));
}

TEST_CASE("expansion extraction on the interval matches the Beta series") {
    auto iv = fixtures::interval();
    auto f = [](const Eigen::VectorXd& y) { return y(0); };
    double x = 0.3;
    auto rep = extract_expansion(iv, default_level_grid(), f, vec1(x), 3, tight());
    CHECK(rep.coefficients[0] == Catch::Approx(x).margin(1e-7));
    CHECK(rep.coefficients[1] == Catch::Approx(1.0 - 2.0 * x).margin(1e-4));
    CHECK(rep.tail_order > 1.9);
    CHECK(rep.condition < 1e12);
}

TEST_CASE("expansion at boundary points recovers f(x)") {
    auto iv = fixtures::interval();
    auto f = [](const Eigen::VectorXd& y) { return y(0); };
    // vertex x = 0: exact transform 1/(N+2), so a0 = 0, a1 = 1
    auto rep = extract_expansion(iv, default_level_grid(), f, vec1(0.0), 3, tight());
    CHECK(rep.coefficients[0] == Catch::Approx(0.0).margin(1e-7));
    CHECK(rep.coefficients[1] == Catch::Approx(1.0).margin(1e-4));
}

TEST_CASE("expansion extraction validates its inputs") {
    auto iv = fixtures::interval();
    auto f = [](const Eigen::VectorXd& y) { return y(0); };
    CHECK_THROWS_AS(extract_expansion(iv, {50, 100, 200}, f, vec1(0.5), 2, tight()),
                    std::invalid_argument);
}

TEST_CASE("model P1 reference operator") {
    Eigen::VectorXd x = vec1(0.7);
    CHECK(model_p1(Polynomial::parse("poly:x0", 1), x) == Catch::Approx(1.0));
    CHECK(model_p1(Polynomial::parse("poly:x0^2", 1), x) == Catch::Approx(3.0 * 0.7));
    CHECK(model_p1(Polynomial::parse("poly:x0^3", 1), x) == Catch::Approx(6.0 * 0.49));

    // agreement with the N^{-1} coefficient of the orthant transform
    OrthantModel model(1, 0.0, tight());
    for (int m : {1, 2, 3}) {
        auto f = [m](const Eigen::VectorXd& y) { return std::pow(y(0), m); };
        auto rep = extract_expansion_orthant(model, {20, 28, 40, 57, 80, 113, 160}, f, x, 3);
        Polynomial pf = Polynomial::monomial(1, {m}, 1);
        CHECK(rep.coefficients[1] == Catch::Approx(model_p1(pf, x)).margin(2e-4));
    }
}

TEST_CASE("pinched averages") {
    auto iv = fixtures::interval();
    auto one = [](const Eigen::VectorXd&) { return 1.0; };
    // psi == 1 integrates the whole normalized section norm
    auto rep = pinched_average(iv, IntVec{25}, 50, 0.25, one, {1, 2}, tight());
    for (double v : rep.values) CHECK(v == Catch::Approx(1.0).margin(1e-8));

    auto bump = [](const Eigen::VectorXd& u) { return bump_window(u); };
    auto rep2 = pinched_average(iv, IntVec{25}, 50, 0.25, bump, {1, 2, 4}, tight());
    CHECK(rep2.values[0] > 0.1);
    CHECK(std::abs(rep2.values[2] - rep2.values[1]) < std::abs(rep2.values[1] - rep2.values[0]));
    CHECK(!rep2.window_escaped);

    // vertex weight stays bounded
    auto rep3 = pinched_average(iv, IntVec{0}, 50, 0.25, bump, {1, 2, 4}, tight());
    for (double v : rep3.values) {
        CHECK(v > 0.0);
        CHECK(v < 2.0);
    }

    CHECK_THROWS_AS(pinched_average(iv, IntVec{25}, 50, 0.7, bump, {1, 2}, tight()),
                    std::invalid_argument);
}

TEST_CASE("dimension drop of the normalization slope at a facet") {
    auto sq = fixtures::unit_square();
    std::vector<std::int64_t> grid{50, 100, 200, 400};

    auto interior = dimension_drop(sq, vec2(0.5, 0.5), grid, tight());
    CHECK(interior.slope_full == Catch::Approx(-1.0).margin(0.1));  // -n/2

    auto facet = dimension_drop(sq, vec2(0.5, 0.0), grid, tight());
    CHECK(facet.face_dimension == 1);
    // restricted to the facet the Gaussian dimension drops to dim F
    CHECK(facet.slope_face == Catch::Approx(-0.5).margin(0.1));
    // the full integral also picks up one power of 1/N from the normal direction
    CHECK(facet.slope_full == Catch::Approx(-1.5).margin(0.1));
}
