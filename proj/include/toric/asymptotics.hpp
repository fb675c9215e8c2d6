#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "toric/kernel.hpp"
#include "toric/numerics.hpp"
#include "toric/parallel.hpp"
#include "toric/polynomial.hpp"
#include "toric/polytope.hpp"
#include "toric/quadrature.hpp"

namespace toric {

/// The quadratic form sum_i (1/l_i(x)) dl_i (x) dl_i and its determinant h(x);
/// equals minus the y-hessian of the phase at y = x.
struct HessianForm {
    Eigen::MatrixXd matrix;
    double determinant = 0.0;
};

inline HessianForm hessian_form(const DelzantPolytope& poly, const Eigen::VectorXd& x) {
    Eigen::VectorXd l = poly.lattice_distances(x);
    if ((l.array() <= 0.0).any())
        throw std::domain_error("hessian form requires an interior point");
    const size_t n = poly.dim();
    HessianForm out;
    out.matrix = Eigen::MatrixXd::Zero(Eigen::Index(n), Eigen::Index(n));
    for (size_t i = 0; i < poly.facet_count(); ++i) {
        auto u = Eigen::VectorXd(Eigen::Index(n));
        for (size_t j = 0; j < n; ++j) u(Eigen::Index(j)) = double(poly.facets()[i].normal[j]);
        out.matrix += (u * u.transpose()) / l(Eigen::Index(i));
    }
    out.determinant = out.matrix.determinant();
    return out;
}

/// Leading steepest-descent prediction for c_N(x), in log form:
///   (n/2) log(2 pi / N) - (1/2) log h(x) + N phi(x, x).
inline double log_laplace_normalization(const DelzantPolytope& poly, double n_level,
                                        const Eigen::VectorXd& x) {
    HessianForm h = hessian_form(poly, x);
    PhaseFamily phase = PhaseFamily::from_polytope(poly);
    double phixx = phase.phi(x, x);
    return 0.5 * double(poly.dim()) * std::log(2.0 * kPi / n_level) -
           0.5 * std::log(h.determinant) + n_level * phixx;
}

/// Pointwise prediction for the weight-k section norm at interior x = k/N:
///   (N/2 pi)^{n/2} h(x)^{1/2} e^{N (phi(x,y) - phi(x,x))}, as a log value
///   (-inf where the exponential factor vanishes).
inline double log_pointwise_norm_asymptotic(const DelzantPolytope& poly, double n_level,
                                            const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    HessianForm h = hessian_form(poly, x);
    PhaseFamily phase = PhaseFamily::from_polytope(poly);
    double gap = phase.phi(x, y) - phase.phi(x, x);
    if (gap == kNegInf) return kNegInf;
    return 0.5 * double(poly.dim()) * std::log(n_level / (2.0 * kPi)) +
           0.5 * std::log(h.determinant) + n_level * gap;
}

inline double pointwise_norm_asymptotic(const DelzantPolytope& poly, double n_level,
                                        const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    double l = log_pointwise_norm_asymptotic(poly, n_level, x, y);
    return l == kNegInf ? 0.0 : std::exp(l);
}

/// Default level grid: geometric from 50 to 400, rounded.
inline std::vector<std::int64_t> default_level_grid() { return {50, 71, 100, 141, 200, 283, 400}; }

struct ExpansionReport {
    Eigen::VectorXd x;
    std::vector<std::int64_t> n_grid;
    std::vector<double> values;        // transform values per level
    std::vector<double> coefficients;  // a_0 .. a_m
    double residual_norm = 0.0;
    double condition = 0.0;
    double tail_order = 0.0;  // fitted decay order of the order-1 truncation residual
};

/// Richardson extraction of the transform expansion: least squares of
/// transform(N, f, x) against sum a_i N^{-i} over the level grid.
inline ExpansionReport extract_expansion(const DelzantPolytope& poly,
                                         const std::vector<std::int64_t>& n_grid,
                                         const std::function<double(const Eigen::VectorXd&)>& f,
                                         const Eigen::VectorXd& x, int order,
                                         const QuadratureOptions& opts = {}) {
    if (order < 0) throw std::invalid_argument("expansion order must be >= 0");
    if (n_grid.size() < size_t(order) + 3)
        throw std::invalid_argument("need at least order+3 levels in the grid");
    ExpansionReport rep;
    rep.x = x;
    rep.n_grid = n_grid;
    rep.values.resize(n_grid.size());
    parallel_for(n_grid.size(), [&](size_t i) {
        KernelContext ctx(poly, n_grid[i], opts);
        rep.values[i] = ctx.transform(f, x);
    });

    Eigen::MatrixXd design(n_grid.size(), order + 1);
    Eigen::VectorXd rhs(n_grid.size());
    for (size_t i = 0; i < n_grid.size(); ++i) {
        rhs(Eigen::Index(i)) = rep.values[i];
        double p = 1.0;
        for (int j = 0; j <= order; ++j) {
            design(Eigen::Index(i), j) = p;
            p /= double(n_grid[i]);
        }
    }
    LeastSquaresFit fit = fit_least_squares(design, rhs);
    rep.condition = fit.condition;
    if (rep.condition > 1e12)
        throw std::runtime_error("expansion fit is ill-conditioned (condition " +
                                 std::to_string(rep.condition) + ")");
    rep.coefficients.assign(fit.coefficients.data(),
                            fit.coefficients.data() + fit.coefficients.size());
    rep.residual_norm = fit.residual_norm;

    if (order >= 1) {
        std::vector<double> logn, logr;
        for (size_t i = 0; i < n_grid.size(); ++i) {
            double r = std::abs(rep.values[i] - rep.coefficients[0] -
                                rep.coefficients[1] / double(n_grid[i]));
            if (r > 0) {
                logn.push_back(std::log(double(n_grid[i])));
                logr.push_back(std::log(r));
            }
        }
        if (logn.size() >= 2) rep.tail_order = -fit_line(logn, logr).slope;
    }
    return rep;
}

/// Same extraction on the truncated-orthant model chart.
inline ExpansionReport extract_expansion_orthant(const OrthantModel& model,
                                                 const std::vector<std::int64_t>& n_grid,
                                                 const std::function<double(const Eigen::VectorXd&)>& f,
                                                 const Eigen::VectorXd& x, int order) {
    if (n_grid.size() < size_t(order) + 3)
        throw std::invalid_argument("need at least order+3 levels in the grid");
    ExpansionReport rep;
    rep.x = x;
    rep.n_grid = n_grid;
    rep.values.resize(n_grid.size());
    parallel_for(n_grid.size(), [&](size_t i) {
        rep.values[i] = model.transform(f, x, double(n_grid[i]));
    });
    Eigen::MatrixXd design(n_grid.size(), order + 1);
    Eigen::VectorXd rhs(n_grid.size());
    for (size_t i = 0; i < n_grid.size(); ++i) {
        rhs(Eigen::Index(i)) = rep.values[i];
        double p = 1.0;
        for (int j = 0; j <= order; ++j) {
            design(Eigen::Index(i), j) = p;
            p /= double(n_grid[i]);
        }
    }
    LeastSquaresFit fit = fit_least_squares(design, rhs);
    rep.condition = fit.condition;
    if (rep.condition > 1e12)
        throw std::runtime_error("expansion fit is ill-conditioned");
    rep.coefficients.assign(fit.coefficients.data(),
                            fit.coefficients.data() + fit.coefficients.size());
    rep.residual_norm = fit.residual_norm;
    return rep;
}

/// The N^{-1} operator of the orthant model chart:
///   (P_1 f)(x) = sum_j (x_j / 2) d^2 f / dx_j^2 + df/dx_j.
inline double model_p1(const Polynomial& f, const Eigen::VectorXd& x) {
    double s = 0.0;
    for (size_t j = 0; j < f.nvars(); ++j) {
        Polynomial d1 = f.partial_derivative(j);
        Polynomial d2 = d1.partial_derivative(j);
        s += 0.5 * x(Eigen::Index(j)) * d2(x) + d1(x);
    }
    return s;
}

struct PinchedAverageReport {
    double delta = 0.0;
    std::string window = "bump";
    std::vector<std::int64_t> n_grid;
    std::vector<double> values;
    double sigma0 = 0.0;            // extrapolated leading coefficient
    double second_exponent = 0.0;   // fitted decay exponent of the second term
    double exponent_r_squared = 0.0;
    bool window_escaped = false;    // the window missed the polytope entirely
};

/// delta-pinched averages int <s_k,s_k> psi(N^delta (k/N - y)) dy over a grid
/// of levels N = multiplier * n_base (so that x = k/n_base stays a lattice
/// ratio at every level), with fits of the leading coefficient and the decay
/// exponent of the second term.
inline PinchedAverageReport pinched_average(
    const DelzantPolytope& poly, const IntVec& k, std::int64_t n_base, double delta,
    const std::function<double(const Eigen::VectorXd&)>& psi,
    const std::vector<std::int64_t>& multipliers, const QuadratureOptions& opts = {}) {
    if (!(delta > 0.0 && delta < 0.5))
        throw std::invalid_argument("delta must lie in (0, 1/2)");
    PinchedAverageReport rep;
    rep.delta = delta;
    rep.values.resize(multipliers.size());
    rep.n_grid.resize(multipliers.size());
    for (size_t i = 0; i < multipliers.size(); ++i) rep.n_grid[i] = multipliers[i] * n_base;

    parallel_for(multipliers.size(), [&](size_t i) {
        std::int64_t n_level = rep.n_grid[i];
        IntVec kn(k.size());
        for (size_t j = 0; j < k.size(); ++j) kn[j] = k[j] * multipliers[i];
        KernelContext ctx(poly, n_level, opts);
        Eigen::VectorXd x = ctx.lattice_to_point(kn);
        double lc = ctx.log_c(x);
        double scale = std::pow(double(n_level), delta);
        Eigen::VectorXd a = ctx.phase().clamped_distances(x, "x");
        auto g = [&](const Eigen::VectorXd& y) {
            double w = psi(scale * (x - y));
            if (w == 0.0) return 0.0;
            double lw = double(n_level) * ctx.phase().phi_from_coeffs(a, ctx.phase().distances(y));
            return (lw == kNegInf) ? 0.0 : std::exp(lw - lc) * w;
        };
        rep.values[i] = integrate(poly.body(), g, opts).value;
    });

    bool all_zero = true;
    for (double v : rep.values)
        if (v != 0.0) all_zero = false;
    rep.window_escaped = all_zero;

    // successive differences of v ~ sigma0 + C N^{-e} decay like N^{-e}
    std::vector<double> logn, logd;
    for (size_t i = 0; i + 1 < rep.values.size(); ++i) {
        double d = std::abs(rep.values[i + 1] - rep.values[i]);
        if (d > 0) {
            logn.push_back(std::log(double(rep.n_grid[i])));
            logd.push_back(std::log(d));
        }
    }
    if (logn.size() >= 2) {
        LineFit lf = fit_line(logn, logd);
        rep.second_exponent = -lf.slope;
        rep.exponent_r_squared = lf.r_squared;
        // refit sigma0 against {1, N^{-e}}
        Eigen::MatrixXd design(rep.values.size(), 2);
        Eigen::VectorXd rhs(rep.values.size());
        for (size_t i = 0; i < rep.values.size(); ++i) {
            design(Eigen::Index(i), 0) = 1.0;
            design(Eigen::Index(i), 1) = std::pow(double(rep.n_grid[i]), -rep.second_exponent);
            rhs(Eigen::Index(i)) = rep.values[i];
        }
        rep.sigma0 = fit_least_squares(design, rhs).coefficients(0);
    } else if (!rep.values.empty()) {
        rep.sigma0 = rep.values.back();
    }
    return rep;
}

struct DimensionDropReport {
    double slope_full = 0.0;     // fitted power of N in c_N(x) e^{-N phi(x,x)}
    double r_squared_full = 0.0;
    double slope_face = 0.0;     // same for the integral restricted to the face of x
    double r_squared_face = 0.0;
    size_t face_dimension = 0;
};

/// Fits the logarithmic N-slope of the normalization at x, both for the full
/// polytope integral and for the integral restricted to the face containing
/// x. For interior x the two coincide.
inline DimensionDropReport dimension_drop(const DelzantPolytope& poly, const Eigen::VectorXd& x,
                                          const std::vector<std::int64_t>& n_grid,
                                          const QuadratureOptions& opts = {}) {
    PhaseFamily phase = PhaseFamily::from_polytope(poly);
    double phixx = phase.phi(x, x);
    Eigen::VectorXd a = phase.clamped_distances(x, "x");
    std::vector<size_t> active;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        if (a(i) <= 1e-12) active.push_back(size_t(i));

    DimensionDropReport rep;
    std::vector<double> logn(n_grid.size()), full(n_grid.size()), face(n_grid.size());
    KernelContext base(poly, 1, opts);

    std::unique_ptr<FaceChart> chart;
    size_t face_dim = poly.dim();
    if (!active.empty()) {
        const Face& f = poly.face_of_active_set(active);
        face_dim = f.dimension;
        if (f.dimension >= 1 && f.dimension < poly.dim())
            chart = std::make_unique<FaceChart>(make_face_chart(poly, f));
    }
    rep.face_dimension = face_dim;

    parallel_for(n_grid.size(), [&](size_t i) {
        double n_level = double(n_grid[i]);
        logn[i] = std::log(n_level);
        full[i] = base.log_phase_integral(x, n_level) - n_level * phixx;
        if (chart) {
            auto log_g = [&](const Eigen::VectorXd& t) {
                Eigen::VectorXd y = chart->embed(t);
                return n_level * phase.phi_from_coeffs(a, phase.distances(y));
            };
            face[i] = integrate_log(chart->domain, log_g, opts).log_value - n_level * phixx;
        } else if (face_dim == 0) {
            face[i] = 0.0;  // the point integral is e^{N phi(x,x)} itself
        } else {
            face[i] = full[i];
        }
    });

    LineFit ff = fit_line(logn, full);
    rep.slope_full = ff.slope;
    rep.r_squared_full = ff.r_squared;
    LineFit fc = fit_line(logn, face);
    rep.slope_face = fc.slope;
    rep.r_squared_face = fc.r_squared;
    return rep;
}

}  // namespace toric
