#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "toric/io.hpp"
#include "toric/polytope.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace toric;

TEST_CASE("load_polytope accepts the interval document") {
    auto poly = load_polytope(R"({"dim":1,"facets":[
        {"normal":[-1],"offset":0},{"normal":[1],"offset":1}]})");
    REQUIRE(poly.dim() == 1);
    REQUIRE(poly.facet_count() == 2);
    auto vs = poly.vertices();
    REQUIRE(vs.size() == 2);
    CHECK(vs[0][0] == 0);
    CHECK(vs[1][0] == 1);
}

TEST_CASE("load_polytope accepts the projective-plane simplex") {
    auto poly = load_polytope(R"({"dim":2,"facets":[
        {"normal":[-1,0],"offset":0},{"normal":[0,-1],"offset":0},
        {"normal":[1,1],"offset":1}]})");
    REQUIRE(poly.vertices().size() == 3);
    // every vertex pair of normals has determinant +-1
    for (const auto& v : poly.body().vertices()) {
        REQUIRE(v.active.size() == 2);
        const auto& u1 = poly.facets()[v.active[0]].normal;
        const auto& u2 = poly.facets()[v.active[1]].normal;
        auto det = u1[0] * u2[1] - u1[1] * u2[0];
        CHECK((det == 1 || det == -1));
    }
}

TEST_CASE("load_polytope rejects the non-Delzant triangle") {
    // facets 1 and 3 meet with determinant -2
    auto doc = R"({"dim":2,"facets":[
        {"normal":[-1,0],"offset":0},{"normal":[0,-1],"offset":0},
        {"normal":[1,2],"offset":2}]})";
    try {
        load_polytope(doc);
        FAIL("expected rejection");
    } catch (const PolytopeError& e) {
        CHECK(e.code() == PolytopeErrorCode::NonUnimodularVertex);
    }
}

TEST_CASE("load_polytope reports distinct failures") {
    CHECK_THROWS_AS(load_polytope("{not json"), PolytopeError);
    try {
        load_polytope(R"({"dim":2,"facets":[{"normal":[-1,0],"offset":0},
            {"normal":[0,-1],"offset":0}]})");
        FAIL("expected unbounded rejection");
    } catch (const PolytopeError& e) {
        CHECK(e.code() == PolytopeErrorCode::Unbounded);
    }
    try {
        load_polytope(R"({"dim":1,"facets":[{"normal":[-2],"offset":0},
            {"normal":[1],"offset":1}]})");
        FAIL("expected primitivity rejection");
    } catch (const PolytopeError& e) {
        CHECK(e.code() == PolytopeErrorCode::NonPrimitiveNormal);
    }
    try {
        // square plus a loose inequality that only touches the corner
        load_polytope(R"({"dim":2,"facets":[
            {"normal":[-1,0],"offset":0},{"normal":[0,-1],"offset":0},
            {"normal":[1,0],"offset":1},{"normal":[0,1],"offset":1},
            {"normal":[1,1],"offset":2}]})");
        FAIL("expected redundancy rejection");
    } catch (const PolytopeError& e) {
        CHECK(e.code() == PolytopeErrorCode::RedundantFacet);
    }
}

TEST_CASE("lattice_distances matches the affine formula") {
    auto iv = fixtures::interval();
    Eigen::VectorXd x(1);
    x << 0.25;
    auto l = iv.lattice_distances(x);
    CHECK(l(0) == Catch::Approx(0.25));
    CHECK(l(1) == Catch::Approx(0.75));
    x << 1.5;
    l = iv.lattice_distances(x);
    CHECK(l(0) == Catch::Approx(1.5));
    CHECK(l(1) == Catch::Approx(-0.5));

    auto s2 = fixtures::simplex2();
    Eigen::VectorXd y(2);
    y << 0.2, 0.3;
    auto l2 = s2.lattice_distances(y);
    CHECK(l2(0) == Catch::Approx(0.2));
    CHECK(l2(1) == Catch::Approx(0.3));
    CHECK(l2(2) == Catch::Approx(0.5));

    Eigen::VectorXd bad(3);
    bad.setZero();
    CHECK_THROWS_AS(iv.lattice_distances(bad), PolytopeError);
}

TEST_CASE("lattice point enumeration") {
    auto iv = fixtures::interval();
    auto pts = iv.lattice_points(3);
    REQUIRE(pts.size() == 4);
    for (std::int64_t k = 0; k <= 3; ++k) CHECK(pts[size_t(k)][0] == k);

    CHECK(fixtures::simplex2().lattice_points(2).size() == 6);
    CHECK(fixtures::unit_square().lattice_points(10).size() == 121);
}

TEST_CASE("lattice point counts match brute force on the fleet") {
    for (const auto& poly : fixtures::fleet())
        for (std::int64_t n : {1, 2, 3, 5, 8, 13, 20})
            CHECK(poly.lattice_points(n).size() == oracles::brute_force_lattice_count(poly, n));
}

TEST_CASE("lattice points come out lexicographically sorted") {
    auto pts = fixtures::hirzebruch().lattice_points(7);
    auto sorted = pts;
    std::sort(sorted.begin(), sorted.end());
    CHECK(pts == sorted);
    std::set<IntVec> uniq(pts.begin(), pts.end());
    CHECK(uniq.size() == pts.size());
}

TEST_CASE("vertex charts") {
    auto iv = fixtures::interval();
    auto c0 = iv.vertex_chart(RationalVec{Rational(0)});
    Eigen::VectorXd x(1);
    x << 0.3;
    CHECK(c0.apply(x)(0) == Catch::Approx(0.3));
    auto c1 = iv.vertex_chart(RationalVec{Rational(1)});
    CHECK(c1.apply(x)(0) == Catch::Approx(0.7));

    auto sq = fixtures::unit_square();
    auto c11 = sq.vertex_chart(RationalVec{Rational(1), Rational(1)});
    Eigen::VectorXd p(2);
    p << 0.25, 0.5;
    auto t = c11.apply(p);
    CHECK(t(0) == Catch::Approx(0.75));
    CHECK(t(1) == Catch::Approx(0.5));

    CHECK_THROWS_AS(iv.vertex_chart(RationalVec{Rational(1, 2)}), PolytopeError);
}

TEST_CASE("vertex chart coordinates equal lattice distances at random points") {
    std::mt19937_64 rng(20240811);
    for (const auto& poly : fixtures::fleet()) {
        for (const auto& v : poly.vertices()) {
            auto chart = poly.vertex_chart(v);
            Rational det = chart.linear_det();
            CHECK((det == 1 || det == -1));
            for (int rep = 0; rep < 100; ++rep) {
                Eigen::VectorXd x = fixtures::random_point(poly, rng);
                Eigen::VectorXd t = chart.apply(x);
                Eigen::VectorXd l = poly.lattice_distances(x);
                for (size_t j = 0; j < poly.dim(); ++j) {
                    CHECK(std::abs(t(Eigen::Index(j)) - l(Eigen::Index(chart.facet_indices[j]))) <
                          1e-12);
                    CHECK(t(Eigen::Index(j)) >= -1e-12);  // chart lands in the positive orthant
                }
            }
        }
    }
}

TEST_CASE("shift keeps or rejects the combinatorial type") {
    auto iv = fixtures::interval();
    auto r = iv.shift({0.1, 0.1});
    REQUIRE(r.vertices().size() == 2);
    CHECK(to_double(r.vertices()[0].point[0]) == Catch::Approx(-0.1));
    CHECK(to_double(r.vertices()[1].point[0]) == Catch::Approx(1.1));

    auto same = iv.shift({0.0, 0.0});
    CHECK(same.vertices().size() == 2);
    CHECK(same.volume() == 1);

    auto sq = fixtures::unit_square();
    auto moved = sq.shift({0.05, 0.0, 0.0, 0.0});
    CHECK(to_double(moved.volume()) == Catch::Approx(1.05));

    CHECK_THROWS_AS(sq.shift({0.0, 0.0, -1.2, 0.0}), PolytopeError);
    // pushing the top of the trapezoid past the slanted facet kills a vertex
    CHECK_THROWS_AS(fixtures::hirzebruch().shift({0.0, 0.0, 1.5, 0.0}), PolytopeError);
}

TEST_CASE("contains is exact on rationals and matches distance signs") {
    auto tz = fixtures::hirzebruch();
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> num(-6, 12), den(1, 7);
    for (int rep = 0; rep < 300; ++rep) {
        RationalVec x{Rational(num(rng), den(rng)), Rational(num(rng), den(rng))};
        bool inside = tz.contains(x);
        auto l = tz.lattice_distances_exact(x);
        bool allnn = std::all_of(l.begin(), l.end(), [](const Rational& r) { return r >= 0; });
        CHECK(inside == allnn);
    }
}

TEST_CASE("lattice distances are equivariant under unimodular maps") {
    std::mt19937_64 rng(99);
    std::vector<IntVec> m{{1, 1}, {0, 1}};
    IntVec t{3, -2};
    for (const auto& poly :
         {fixtures::unit_square(), fixtures::simplex2(), fixtures::hirzebruch()}) {
        auto image = poly.transformed(m, t);
        for (int rep = 0; rep < 50; ++rep) {
            Eigen::VectorXd x = fixtures::random_point(poly, rng);
            Eigen::VectorXd tx(2);
            tx << x(0) + x(1) + 3, x(1) - 2;
            Eigen::VectorXd a = poly.lattice_distances(x);
            Eigen::VectorXd b = image.lattice_distances(tx);
            std::vector<double> av(a.data(), a.data() + a.size());
            std::vector<double> bv(b.data(), b.data() + b.size());
            std::sort(av.begin(), av.end());
            std::sort(bv.begin(), bv.end());
            for (size_t i = 0; i < av.size(); ++i) CHECK(av[i] == Catch::Approx(bv[i]).margin(1e-12));
        }
    }
}

TEST_CASE("faces and exact volumes") {
    auto sq = fixtures::unit_square();
    auto faces = sq.faces();
    size_t edges = 0, corners = 0;
    for (const auto& f : faces) {
        if (f.dimension == 1) ++edges;
        if (f.dimension == 0) ++corners;
    }
    CHECK(edges == 4);
    CHECK(corners == 4);
    CHECK(sq.body().volume() == 1);
    CHECK(fixtures::simplex2().body().volume() == Rational(1, 2));
    CHECK(fixtures::hirzebruch().body().volume() == Rational(3, 2));

    auto tri = sq.body().triangulation_exact();
    CHECK(tri.size() == 4);
}

TEST_CASE("active_set and dilate") {
    auto sq = fixtures::unit_square();
    Eigen::VectorXd x(2);
    x << 0.0, 0.5;
    auto act = sq.active_set(x);
    REQUIRE(act.size() == 1);
    CHECK(act[0] == 0);
    auto big = sq.dilate(3);
    CHECK(big.lattice_points(1).size() == 16);  // (3+1)^2
}

TEST_CASE("polytope json round-trip and hash stability") {
    auto tz = fixtures::hirzebruch();
    auto j = polytope_to_json(tz);
    auto back = polytope_from_json(j);
    CHECK(polytope_hash(back) == polytope_hash(tz));
    CHECK(back.facet_count() == tz.facet_count());
    CHECK(polytope_hash(fixtures::unit_square()) != polytope_hash(tz));
}
