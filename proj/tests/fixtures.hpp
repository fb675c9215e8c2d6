#pragma once

#include <random>
#include <vector>

#include "toric/polytope.hpp"

namespace fixtures {

using toric::DelzantPolytope;
using toric::IntVec;
using toric::PolytopeFacet;

inline DelzantPolytope interval() {
    return DelzantPolytope(1, {{IntVec{-1}, 0}, {IntVec{1}, 1}});
}

inline DelzantPolytope interval_to(std::int64_t b) {
    return DelzantPolytope(1, {{IntVec{-1}, 0}, {IntVec{1}, b}});
}

inline DelzantPolytope unit_square() {
    return DelzantPolytope(
        2, {{IntVec{-1, 0}, 0}, {IntVec{0, -1}, 0}, {IntVec{1, 0}, 1}, {IntVec{0, 1}, 1}});
}

inline DelzantPolytope simplex2() {
    return DelzantPolytope(2, {{IntVec{-1, 0}, 0}, {IntVec{0, -1}, 0}, {IntVec{1, 1}, 1}});
}

inline DelzantPolytope hirzebruch() {
    return DelzantPolytope(
        2, {{IntVec{-1, 0}, 0}, {IntVec{0, -1}, 0}, {IntVec{0, 1}, 1}, {IntVec{1, 1}, 2}});
}

inline std::vector<DelzantPolytope> fleet() {
    return {interval(), unit_square(), simplex2(), hirzebruch()};
}

/// Rejection-samples a point of the (closed) polytope, uniformly.
inline Eigen::VectorXd random_point(const DelzantPolytope& poly, std::mt19937_64& rng) {
    const size_t n = poly.dim();
    Eigen::VectorXd lo(n), hi(n);
    lo.setConstant(1e300);
    hi.setConstant(-1e300);
    for (const auto& v : poly.vertices())
        for (size_t j = 0; j < n; ++j) {
            double c = toric::to_double(v[j]);
            lo(j) = std::min(lo(j), c);
            hi(j) = std::max(hi(j), c);
        }
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    while (true) {
        Eigen::VectorXd x(n);
        for (size_t j = 0; j < n; ++j) x(j) = lo(j) + (hi(j) - lo(j)) * unif(rng);
        if (poly.contains(x)) return x;
    }
}

/// A point of the polytope with all lattice distances >= margin.
inline Eigen::VectorXd random_interior_point(const DelzantPolytope& poly, std::mt19937_64& rng,
                                             double margin = 0.05) {
    while (true) {
        Eigen::VectorXd x = random_point(poly, rng);
        if ((poly.lattice_distances(x).array() >= margin).all()) return x;
    }
}

}  // namespace fixtures
