#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "toric/exact.hpp"
#include "toric/numerics.hpp"
#include "toric/polynomial.hpp"
#include "toric/polytope.hpp"
#include "toric/quadrature.hpp"

namespace toric {

/// Truncated coefficients of tau(s) = s / (1 - e^{-s}).
struct TauSeries {
    int order = 0;
    std::vector<Rational> coefficients;  // t_0 .. t_order

    std::vector<double> as_doubles() const {
        std::vector<double> out(coefficients.size());
        for (size_t i = 0; i < coefficients.size(); ++i) out[i] = to_double(coefficients[i]);
        return out;
    }
};

/// Exact power-series division: with A(s) = (1 - e^{-s})/s the coefficients
/// solve tau * A = 1.
inline TauSeries tau_coefficients(int order) {
    if (order < 0) throw std::invalid_argument("tau order must be >= 0");
    std::vector<Rational> a(order + 1);
    Rational fact = 1;
    for (int j = 0; j <= order; ++j) {
        fact *= (j + 1);  // (j+1)!
        a[j] = Rational((j % 2 == 0) ? 1 : -1) / fact;
    }
    TauSeries tau;
    tau.order = order;
    tau.coefficients.resize(order + 1);
    tau.coefficients[0] = 1;
    for (int k = 1; k <= order; ++k) {
        Rational s = 0;
        for (int j = 1; j <= k; ++j) s += a[j] * tau.coefficients[k - j];
        tau.coefficients[k] = -s;
    }
    return tau;
}

/// (1/N^n) sum over lattice points of N*Delta of f(k/N), in deterministic
/// lexicographic order with compensated accumulation.
inline double riemann_sum(const DelzantPolytope& poly,
                          const std::function<double(const Eigen::VectorXd&)>& f,
                          std::int64_t n_level) {
    CompensatedSum s;
    Eigen::VectorXd x(Eigen::Index(poly.dim()));
    for (const auto& k : poly.lattice_points(n_level)) {
        for (size_t j = 0; j < poly.dim(); ++j) x(Eigen::Index(j)) = double(k[j]) / double(n_level);
        s.add(f(x));
    }
    return s.value() / std::pow(double(n_level), double(poly.dim()));
}

/// Exact rational Riemann sum for rational-coefficient polynomials.
inline Rational riemann_sum_exact(const DelzantPolytope& poly, const Polynomial& f,
                                  std::int64_t n_level) {
    Rational s = 0;
    RationalVec x(poly.dim());
    for (const auto& k : poly.lattice_points(n_level)) {
        for (size_t j = 0; j < poly.dim(); ++j) x[j] = Rational(k[j], n_level);
        s += f.evaluate_exact(x);
    }
    Rational den = 1;
    for (size_t j = 0; j < poly.dim(); ++j) den *= n_level;
    return s / den;
}

namespace emdetail {

// central 5-point stencils on offsets {-2..2}; first/second derivatives are
// fourth-order accurate, third/fourth second-order
inline const std::array<std::array<double, 5>, 5>& stencils() {
    static const std::array<std::array<double, 5>, 5> s = {{
        {0.0, 0.0, 1.0, 0.0, 0.0},
        {1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0},
        {-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0},
        {-0.5, 1.0, 0.0, -1.0, 0.5},
        {1.0, -4.0, 6.0, -4.0, 1.0},
    }};
    return s;
}

inline void enumerate_multi_indices(size_t d, int per_facet_cap, std::vector<int>& cur,
                                    const std::function<void(const std::vector<int>&)>& emit) {
    if (cur.size() == d) {
        emit(cur);
        return;
    }
    for (int b = 0; b <= per_facet_cap; ++b) {
        cur.push_back(b);
        enumerate_multi_indices(d, per_facet_cap, cur, emit);
        cur.pop_back();
    }
}

}  // namespace emdetail

struct EMOptions {
    double quadrature_tol = 1e-13;     // per-stencil-node integral tolerance
    double step_tol = 1e-9;            // enters the h* = tol^{1/(m+2)} step rule
    std::size_t max_evals = 4'000'000;
};

/// Truncation of prod_i tau((1/N) d/dh_i) applied to h -> int_{Delta_h} f at
/// h = 0, with each facet's tau series truncated at degree <= order and the
/// product expanded in full (so that the sum factors exactly over product
/// polytopes). Shifted-polytope derivatives are realized by central finite
/// differences on a 5-point tensor stencil with step
/// h* = step_tol^{1/(order+2)}, shrunk if a stencil shift would change the
/// combinatorial type.
inline double em_sum(const DelzantPolytope& poly,
                     const std::function<double(const Eigen::VectorXd&)>& f, std::int64_t n_level,
                     int order, const EMOptions& em_opts = {}) {
    if (order < 0) throw std::invalid_argument("em order must be >= 0");
    if (order > 4) throw std::invalid_argument("em order is capped at 4");
    const size_t d = poly.facet_count();
    if (order >= 3 && d > 8)
        throw std::invalid_argument("mixed stencils capped at 8 facets for high orders");

    TauSeries tau = tau_coefficients(order);
    std::vector<double> t = tau.as_doubles();
    QuadratureOptions qopts;
    qopts.abs_tol = em_opts.quadrature_tol;
    qopts.max_evals = em_opts.max_evals;

    double step = std::pow(em_opts.step_tol, 1.0 / double(order + 2));

    for (int attempt = 0;; ++attempt) {
        std::map<std::vector<int>, double> cache;
        bool shift_failed = false;
        auto integral_at = [&](const std::vector<int>& offsets) -> double {
            auto it = cache.find(offsets);
            if (it != cache.end()) return it->second;
            std::vector<double> h(d);
            for (size_t i = 0; i < d; ++i) h[i] = step * double(offsets[i]);
            ConvexBody body = poly.shift(h);
            double v = integrate(body, f, qopts).value;
            cache.emplace(offsets, v);
            return v;
        };

        try {
            CompensatedSum total;
            std::vector<int> cur;
            const int cap = std::min(order, 4);
            emdetail::enumerate_multi_indices(d, cap, cur, [&](const std::vector<int>& beta) {
                double coeff = 1.0;
                int total_order = 0;
                for (size_t i = 0; i < d; ++i) {
                    coeff *= t[size_t(beta[i])];
                    total_order += beta[i];
                }
                if (coeff == 0.0) return;
                // tensor stencil over the support of beta
                std::vector<size_t> supp;
                for (size_t i = 0; i < d; ++i)
                    if (beta[i] > 0) supp.push_back(i);
                double deriv = 0.0;
                std::vector<int> node(supp.size(), -2);
                while (true) {
                    double w = 1.0;
                    std::vector<int> offsets(d, 0);
                    for (size_t s = 0; s < supp.size(); ++s) {
                        w *= emdetail::stencils()[size_t(beta[supp[s]])][size_t(node[s] + 2)];
                        offsets[supp[s]] = node[s];
                    }
                    if (w != 0.0) deriv += w * integral_at(offsets);
                    size_t j = supp.size();
                    bool done = true;
                    while (j > 0) {
                        --j;
                        if (node[j] < 2) {
                            ++node[j];
                            for (size_t l = j + 1; l < supp.size(); ++l) node[l] = -2;
                            done = false;
                            break;
                        }
                    }
                    if (done) break;
                    if (supp.empty()) break;
                }
                deriv /= std::pow(step, double(total_order));
                total.add(coeff * deriv * std::pow(double(n_level), -double(total_order)));
            });
            return total.value();
        } catch (const PolytopeError& e) {
            if (e.code() != PolytopeErrorCode::CombinatorialChange) throw;
            shift_failed = true;
        }
        if (shift_failed) {
            step *= 0.5;
            if (attempt > 40)
                throw std::runtime_error("em stencil cannot fit inside the valid shift range");
        }
    }
}

struct EMReportRow {
    std::int64_t n_level = 0;
    int order = 0;
    double riemann = 0.0;
    double em = 0.0;
    double abs_error = 0.0;
};

struct EMReport {
    std::vector<EMReportRow> rows;
    std::map<int, double> fitted_slopes;  // per order: decay slope of |error| in N
};

inline EMReport em_error_report(const DelzantPolytope& poly,
                                const std::function<double(const Eigen::VectorXd&)>& f,
                                const std::vector<std::int64_t>& n_grid,
                                const std::vector<int>& orders, const EMOptions& opts = {}) {
    EMReport rep;
    for (int m : orders) {
        std::vector<double> logn, loge;
        for (std::int64_t n_level : n_grid) {
            EMReportRow row;
            row.n_level = n_level;
            row.order = m;
            row.riemann = riemann_sum(poly, f, n_level);
            row.em = em_sum(poly, f, n_level, m, opts);
            row.abs_error = std::abs(row.riemann - row.em);
            rep.rows.push_back(row);
            if (row.abs_error > 0) {
                logn.push_back(std::log(double(n_level)));
                loge.push_back(std::log(row.abs_error));
            }
        }
        if (logn.size() >= 2) rep.fitted_slopes[m] = -fit_line(logn, loge).slope;
    }
    return rep;
}

}  // namespace toric
