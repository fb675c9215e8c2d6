#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "toric/asymptotics.hpp"
#include "toric/kernel.hpp"
#include "toric/numerics.hpp"
#include "toric/parallel.hpp"
#include "toric/polytope.hpp"
#include "toric/quadrature.hpp"

namespace toric {

struct MomentResult {
    double value = 0.0;                    // c_{km}(x) / c_k(x)^m
    std::optional<double> prediction;      // (N/2pi)^{(m-1)n/2} m^{-n/2} h(x)^{(m-1)/2}
    std::optional<double> ratio;
};

/// The pushforward spectral measure at level N: the lattice set of N*Delta
/// with per-weight normalizers; densities, pairings, moments, distribution
/// functions.
class SpectralMeasure {
  public:
    SpectralMeasure(const DelzantPolytope& poly, std::int64_t level, QuadratureOptions opts = {})
        : ctx_(std::make_shared<KernelContext>(poly, level, opts)),
          weights_(poly.lattice_points(level)) {}

    const KernelContext& context() const { return *ctx_; }
    const std::vector<IntVec>& weights() const { return weights_; }
    std::int64_t level() const { return ctx_->level(); }

    /// Density of mu-sharp against Lebesgue measure: sum_k <s_k,s_k>(y),
    /// accumulated from the largest log-magnitude down with compensation.
    double spectral_density(const Eigen::VectorXd& y) const {
        ensure_normalizers();
        const double n_level = double(ctx_->level());
        Eigen::VectorXd ly = ctx_->phase().clamped_distances(y, "y");
        std::vector<double> logs(weights_.size());
        for (size_t i = 0; i < weights_.size(); ++i) {
            Eigen::VectorXd x = ctx_->lattice_to_point(weights_[i]);
            Eigen::VectorXd a = ctx_->phase().clamped_distances(x, "x");
            logs[i] = n_level * ctx_->phase().phi_from_coeffs(a, ly) - log_norms_[i];
        }
        std::sort(logs.begin(), logs.end(), std::greater<double>());
        CompensatedSum s;
        for (double l : logs)
            if (l != kNegInf) s.add(std::exp(l));
        return s.value();
    }

    /// int f d(mu-sharp) as the lattice sum of transform values.
    double pair(const std::function<double(const Eigen::VectorXd&)>& f) const {
        std::vector<double> terms(weights_.size());
        parallel_for(weights_.size(), [&](size_t i) {
            terms[i] = ctx_->transform(f, ctx_->lattice_to_point(weights_[i]));
        });
        CompensatedSum s;
        for (double t : terms) s.add(t);
        return s.value();
    }

    /// Cross-check route: direct quadrature of f times the density.
    double pair_quadrature(const std::function<double(const Eigen::VectorXd&)>& f,
                           const QuadratureOptions& opts = {}) const {
        ensure_normalizers();
        return integrate(ctx_->polytope().body(),
                         [&](const Eigen::VectorXd& y) { return f(y) * spectral_density(y); },
                         opts)
            .value;
    }

    /// int f d(mu_{Nk}) in pushforward form: the transform at x = k/N.
    double eigensection_average(const IntVec& k,
                                const std::function<double(const Eigen::VectorXd&)>& f) const {
        return ctx_->transform(f, ctx_->lattice_to_point(k));
    }

    /// m-th moment of the norm-square random variable: c_{km}/c_k^m with the
    /// interior steepest-descent prediction when h(x) exists.
    MomentResult moment(const IntVec& k, int m) const {
        if (m < 1) throw std::invalid_argument("moment order must be >= 1");
        Eigen::VectorXd x = ctx_->lattice_to_point(k);
        const double n_level = double(ctx_->level());
        double log_ck = ctx_->log_c(x);
        double log_ckm = ctx_->log_phase_integral(x, n_level * double(m));
        MomentResult out;
        out.value = std::exp(log_ckm - double(m) * log_ck);
        bool interior = (ctx_->polytope().lattice_distances(x).array() > 1e-12).all();
        if (interior) {
            const double n = double(ctx_->polytope().dim());
            HessianForm h = hessian_form(ctx_->polytope(), x);
            double logp = 0.5 * (m - 1) * n * std::log(n_level / (2.0 * kPi)) -
                          0.5 * n * std::log(double(m)) + 0.5 * (m - 1) * std::log(h.determinant);
            out.prediction = std::exp(logp);
            out.ratio = out.value / *out.prediction;
        }
        return out;
    }

    /// Distribution function of <s_k,s_k>: volumes of superlevel sets over a
    /// threshold grid.
    std::vector<std::pair<double, double>> distribution_function(
        const IntVec& k, const std::vector<double>& t_grid,
        const QuadratureOptions& opts = {}) const {
        Eigen::VectorXd x = ctx_->lattice_to_point(k);
        double log_ck = ctx_->log_c(x);
        const double n_level = double(ctx_->level());
        Eigen::VectorXd a = ctx_->phase().clamped_distances(x, "x");
        auto norm_fn = [&](const Eigen::VectorXd& y) {
            double l = n_level * ctx_->phase().phi_from_coeffs(a, ctx_->phase().distances(y)) -
                       log_ck;
            return l == kNegInf ? 0.0 : std::exp(l);
        };
        std::vector<std::pair<double, double>> out(t_grid.size());
        parallel_for(t_grid.size(), [&](size_t i) {
            out[i] = {t_grid[i],
                      superlevel_volume(ctx_->polytope().body(), norm_fn, t_grid[i], opts)};
        });
        return out;
    }

  private:
    void ensure_normalizers() const {
        std::lock_guard<std::mutex> lock(norm_mutex_);
        if (log_norms_.size() == weights_.size()) return;
        log_norms_.resize(weights_.size());
        std::vector<double>& slot = log_norms_;
        const auto& ctx = *ctx_;
        const auto& ws = weights_;
        parallel_for(ws.size(), [&](size_t i) { slot[i] = ctx.log_c(ctx.lattice_to_point(ws[i])); });
    }

    std::shared_ptr<KernelContext> ctx_;
    std::vector<IntVec> weights_;
    mutable std::mutex norm_mutex_;
    mutable std::vector<double> log_norms_;
};

struct PairingExpansion {
    std::vector<std::int64_t> n_grid;
    std::vector<double> values;        // N^{-n} pair(f) per level
    std::vector<double> coefficients;  // series in N^{-1}; leading term ~ int f
    double residual_norm = 0.0;
    double condition = 0.0;
};

/// N-expansion of the normalized pairing N^{-n} int f d(mu-sharp), extracted
/// by Richardson fitting over a level grid; the leading coefficient must
/// reproduce int_Delta f.
inline PairingExpansion asymptotic_pairing(const DelzantPolytope& poly,
                                           const std::function<double(const Eigen::VectorXd&)>& f,
                                           int order,
                                           std::vector<std::int64_t> n_grid = {},
                                           const QuadratureOptions& opts = {}) {
    if (order < 0 || order > 2) throw std::invalid_argument("pairing expansion order must be 0..2");
    if (n_grid.empty()) n_grid = {8, 11, 16, 23, 32};
    if (n_grid.size() < size_t(order) + 3)
        throw std::invalid_argument("need at least order+3 levels");
    PairingExpansion rep;
    rep.n_grid = n_grid;
    rep.values.resize(n_grid.size());
    for (size_t i = 0; i < n_grid.size(); ++i) {
        SpectralMeasure mu(poly, n_grid[i], opts);
        rep.values[i] =
            mu.pair(f) / std::pow(double(n_grid[i]), double(poly.dim()));
    }
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
    rep.coefficients.assign(fit.coefficients.data(),
                            fit.coefficients.data() + fit.coefficients.size());
    rep.residual_norm = fit.residual_norm;
    rep.condition = fit.condition;
    return rep;
}

}  // namespace toric
