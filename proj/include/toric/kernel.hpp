#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "toric/numerics.hpp"
#include "toric/polytope.hpp"
#include "toric/quadrature.hpp"

namespace toric {

struct PhaseEvaluation {
    double value = kNegInf;
    std::optional<Eigen::VectorXd> gradient_y;
    std::optional<Eigen::MatrixXd> hessian_y;
};

class OptimizationError : public std::runtime_error {
  public:
    OptimizationError(const std::string& what, int iterations, double gradient_norm)
        : std::runtime_error(what), iterations_(iterations), gradient_norm_(gradient_norm) {}
    int iterations() const { return iterations_; }
    double gradient_norm() const { return gradient_norm_; }

  private:
    int iterations_;
    double gradient_norm_;
};

/// The affine-functional family behind the phase
///   phi(x, y) = sum_i l_i(x) log l_i(y) - l_i(y),  0 log 0 = 0,
/// shared by polytope kernels and the orthant model chart.
class PhaseFamily {
  public:
    PhaseFamily() = default;
    PhaseFamily(Eigen::MatrixXd normals, Eigen::VectorXd offsets)
        : normals_(std::move(normals)), offsets_(std::move(offsets)) {}

    static PhaseFamily from_polytope(const DelzantPolytope& poly) {
        Eigen::MatrixXd u(poly.facet_count(), poly.dim());
        Eigen::VectorXd c(poly.facet_count());
        for (size_t i = 0; i < poly.facet_count(); ++i) {
            c(Eigen::Index(i)) = double(poly.facets()[i].offset);
            for (size_t j = 0; j < poly.dim(); ++j)
                u(Eigen::Index(i), Eigen::Index(j)) = double(poly.facets()[i].normal[j]);
        }
        return PhaseFamily(std::move(u), std::move(c));
    }

    /// Orthant chart: l_i(y) = y_i.
    static PhaseFamily orthant(size_t n) {
        Eigen::MatrixXd u = -Eigen::MatrixXd::Identity(Eigen::Index(n), Eigen::Index(n));
        Eigen::VectorXd c = Eigen::VectorXd::Zero(Eigen::Index(n));
        return PhaseFamily(std::move(u), std::move(c));
    }

    Eigen::Index count() const { return offsets_.size(); }
    Eigen::Index dim() const { return normals_.cols(); }
    const Eigen::MatrixXd& normals() const { return normals_; }
    const Eigen::VectorXd& offsets() const { return offsets_; }

    /// Facets whose integrand factor l_i^{beta_i} is a small fractional power
    /// (boundary-singular); integer exponents are smooth and large ones are
    /// flat enough for the plain rule.
    std::vector<std::pair<Eigen::VectorXd, double>> singular_facets(const Eigen::VectorXd& a,
                                                                    double scale) const {
        std::vector<std::pair<Eigen::VectorXd, double>> out;
        for (Eigen::Index i = 0; i < count(); ++i) {
            double beta = scale * a(i);
            if (beta < 6.0 && std::abs(beta - std::round(beta)) > 1e-9)
                out.push_back({normals_.row(i).transpose(), offsets_(i)});
        }
        return out;
    }

    Eigen::VectorXd distances(const Eigen::VectorXd& y) const { return offsets_ - normals_ * y; }

    /// Distances of a point expected to lie in the closed region; entries in
    /// (-tol, 0) are snapped to 0, anything lower is rejected.
    Eigen::VectorXd clamped_distances(const Eigen::VectorXd& y, const char* who,
                                      double tol = 1e-9) const {
        Eigen::VectorXd l = distances(y);
        for (Eigen::Index i = 0; i < l.size(); ++i) {
            if (l(i) < -tol)
                throw std::domain_error(std::string(who) + " lies outside the region");
            if (l(i) < 0) l(i) = 0.0;
        }
        return l;
    }

    /// phi with the coefficient vector a = l(x) precomputed.
    double phi_from_coeffs(const Eigen::VectorXd& a, const Eigen::VectorXd& l) const {
        double s = 0.0;
        for (Eigen::Index i = 0; i < a.size(); ++i) {
            if (a(i) > 0.0) {
                if (l(i) <= 0.0) return kNegInf;
                s += a(i) * std::log(l(i));
            }
            s -= l(i);
        }
        return s;
    }

    double phi(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
        return phi_from_coeffs(clamped_distances(x, "x"), clamped_distances(y, "y"));
    }

    PhaseEvaluation evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                             bool with_derivatives) const {
        Eigen::VectorXd a = clamped_distances(x, "x");
        Eigen::VectorXd l = clamped_distances(y, "y");
        PhaseEvaluation out;
        out.value = phi_from_coeffs(a, l);
        if (!with_derivatives || out.value == kNegInf) return out;
        const Eigen::Index n = dim();
        Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
        for (Eigen::Index i = 0; i < a.size(); ++i) {
            Eigen::VectorXd u = normals_.row(i).transpose();
            if (a(i) > 0.0) {
                g += u * (1.0 - a(i) / l(i));
                h -= (a(i) / (l(i) * l(i))) * (u * u.transpose());
            } else {
                g += u;
            }
        }
        out.gradient_y = std::move(g);
        out.hessian_y = std::move(h);
        return out;
    }

  private:
    Eigen::MatrixXd normals_;  // rows u_i; l_i(y) = offsets_i - <u_i, y>
    Eigen::VectorXd offsets_;
};

/// A polytope together with a level N and the cached log-normalizers
///   log c_N(x) = log int_Delta exp(N phi(x, y)) dy.
/// All kernel arithmetic stays in log space until the final exponentiation.
class KernelContext {
  public:
    KernelContext(DelzantPolytope poly, std::int64_t level, QuadratureOptions opts = {})
        : poly_(std::move(poly)),
          level_(level),
          opts_(opts),
          phase_(PhaseFamily::from_polytope(poly_)),
          decomposition_(decompose(poly_.body())) {
        if (level_ < 1) throw std::invalid_argument("kernel level N must be >= 1");
    }

    const DelzantPolytope& polytope() const { return poly_; }
    std::int64_t level() const { return level_; }
    const PhaseFamily& phase() const { return phase_; }
    const QuadratureOptions& options() const { return opts_; }

    double phi(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
        return phase_.phi(x, y);
    }

    /// log int exp(scale * phi(x, .)) dy, memoized per (scale, x).
    double log_phase_integral(const Eigen::VectorXd& x, double scale) const {
        std::vector<double> key(size_t(x.size()) + 1);
        key[0] = scale;
        for (Eigen::Index i = 0; i < x.size(); ++i) key[size_t(i) + 1] = x(i);
        {
            std::lock_guard<std::mutex> lock(cache_mutex_);
            auto it = cache_.find(key);
            if (it != cache_.end()) return it->second;
        }
        Eigen::VectorXd a = phase_.clamped_distances(x, "x");
        auto log_g = [&](const Eigen::VectorXd& y) {
            return scale * phase_.phi_from_coeffs(a, phase_.distances(y));
        };
        double value = integrate_log(decomposition_for(a, scale), log_g, opts_).log_value;
        std::lock_guard<std::mutex> lock(cache_mutex_);
        return cache_.emplace(std::move(key), value).first->second;
    }

    double log_c(const Eigen::VectorXd& x) const {
        return log_phase_integral(x, double(level_));
    }

    /// Checks k in N*Delta and returns x = k/N.
    Eigen::VectorXd lattice_to_point(const IntVec& k) const {
        if (k.size() != poly_.dim())
            throw std::invalid_argument("lattice weight has wrong dimension");
        for (const auto& f : poly_.facets()) {
            std::int64_t s = 0;
            for (size_t j = 0; j < k.size(); ++j) s += f.normal[j] * k[j];
            if (s > f.offset * level_)
                throw std::invalid_argument("weight is not a lattice point of N*Delta");
        }
        Eigen::VectorXd x(Eigen::Index(k.size()));
        for (size_t j = 0; j < k.size(); ++j) x(Eigen::Index(j)) = double(k[j]) / double(level_);
        return x;
    }

    /// K_N(x, y) = exp(N phi(x,y) - log c_N(x)); integrates to 1 in y.
    double kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
        double lp = double(level_) * phi(x, y);
        if (lp == kNegInf) return 0.0;
        return std::exp(lp - log_c(x));
    }

    /// f |-> int K_N(x, y) f(y) dy.
    double transform(const std::function<double(const Eigen::VectorXd&)>& f,
                     const Eigen::VectorXd& x) const {
        return transform_many({f}, x)[0];
    }

    /// Several transforms at the same x share one adaptive pass.
    std::vector<double> transform_many(
        const std::vector<std::function<double(const Eigen::VectorXd&)>>& fs,
        const Eigen::VectorXd& x) const {
        double lc = log_c(x);
        Eigen::VectorXd a = phase_.clamped_distances(x, "x");
        auto fn = [&](const Eigen::VectorXd& y, double* out) {
            double lw = double(level_) * phase_.phi_from_coeffs(a, phase_.distances(y)) - lc;
            double w = (lw == kNegInf) ? 0.0 : std::exp(lw);
            for (size_t c = 0; c < fs.size(); ++c) out[c] = w * fs[c](y);
        };
        auto res = integrate_many(decomposition_for(a, double(level_)), fs.size(), fn, opts_);
        std::vector<double> vals(fs.size());
        for (size_t c = 0; c < fs.size(); ++c) vals[c] = res[c].value;
        return vals;
    }

    double log_section_norm(const IntVec& k, const Eigen::VectorXd& y) const {
        Eigen::VectorXd x = lattice_to_point(k);
        return double(level_) * phi(x, y) - log_c(x);
    }

    /// <s_k, s_k> pushed forward to Delta: exp(N phi(k/N, y)) / c_k.
    double section_norm(const IntVec& k, const Eigen::VectorXd& y) const {
        double l = log_section_norm(k, y);
        return (l == kNegInf) ? 0.0 : std::exp(l);
    }

  private:
    SimplexDecomposition decomposition_for(const Eigen::VectorXd& a, double scale) const {
        auto sing = phase_.singular_facets(a, scale);
        if (sing.empty()) return decomposition_;
        return grade_toward_facets(decomposition_, sing);
    }

    DelzantPolytope poly_;
    std::int64_t level_;
    QuadratureOptions opts_;
    PhaseFamily phase_;
    SimplexDecomposition decomposition_;
    mutable std::mutex cache_mutex_;
    mutable std::map<std::vector<double>, double> cache_;
};

struct ArgmaxReport {
    Eigen::VectorXd point;
    double gradient_norm = 0.0;
    int iterations = 0;
};

/// Maximizer of phi(x, .) over the closed polytope, located by damped Newton
/// ascent within the face containing x (the maximum lives there). The
/// certificate is |grad(phi restricted to the face)| < gtol at the result.
inline ArgmaxReport argmax_phi_report(const DelzantPolytope& poly, const Eigen::VectorXd& x,
                                      double gtol = 1e-10, double face_tol = 1e-12) {
    PhaseFamily phase = PhaseFamily::from_polytope(poly);
    Eigen::VectorXd a = phase.clamped_distances(x, "x");
    std::vector<size_t> active;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        if (a(i) <= face_tol) active.push_back(size_t(i));

    const size_t n = poly.dim();
    ArgmaxReport rep;

    // Vertex: the face is a point.
    if (!active.empty()) {
        const Face& face = poly.face_of_active_set(active);
        if (face.dimension == 0) {
            const auto& p = poly.body().vertices()[face.vertex_indices[0]].point;
            rep.point = Eigen::VectorXd(Eigen::Index(n));
            for (size_t j = 0; j < n; ++j) rep.point(Eigen::Index(j)) = to_double(p[j]);
            return rep;
        }
    }

    // Parameterize the face (or the whole polytope) as p0 + B t.
    Eigen::MatrixXd basis;
    Eigen::VectorXd p0;
    ConvexBody domain;
    if (active.empty()) {
        basis = Eigen::MatrixXd::Identity(Eigen::Index(n), Eigen::Index(n));
        p0 = Eigen::VectorXd::Zero(Eigen::Index(n));
        domain = poly.body();
    } else {
        const Face& face = poly.face_of_active_set(active);
        FaceChart chart = make_face_chart(poly, face);
        basis = Eigen::MatrixXd(Eigen::Index(n), Eigen::Index(face.dimension));
        for (size_t c = 0; c < face.dimension; ++c)
            for (size_t j = 0; j < n; ++j)
                basis(Eigen::Index(j), Eigen::Index(c)) =
                    chart.basis_columns[c][j].convert_to<double>();
        p0 = Eigen::VectorXd(Eigen::Index(n));
        for (size_t j = 0; j < n; ++j) p0(Eigen::Index(j)) = to_double(chart.base[j]);
        domain = std::move(chart.domain);
    }

    // start from the face barycenter (relative interior)
    Eigen::VectorXd t = Eigen::VectorXd::Zero(basis.cols());
    for (const auto& v : domain.vertices())
        for (Eigen::Index c = 0; c < t.size(); ++c) t(c) += to_double(v.point[size_t(c)]);
    t /= double(domain.vertices().size());

    auto embed = [&](const Eigen::VectorXd& tt) { return (p0 + basis * tt).eval(); };
    auto objective = [&](const Eigen::VectorXd& tt) {
        return phase.phi_from_coeffs(a, phase.distances(embed(tt)));
    };

    double fval = objective(t);
    for (int iter = 0; iter < 200; ++iter) {
        PhaseEvaluation ev = phase.evaluate(x, embed(t), true);
        Eigen::VectorXd g = basis.transpose() * (*ev.gradient_y);
        rep.gradient_norm = g.lpNorm<Eigen::Infinity>();
        rep.iterations = iter;
        if (rep.gradient_norm < gtol) {
            rep.point = embed(t);
            return rep;
        }
        Eigen::MatrixXd h = basis.transpose() * (*ev.hessian_y) * basis;
        Eigen::VectorXd dt = (-h).ldlt().solve(g);
        // Newton endgame: near the maximum the quadratic gain drops below
        // rounding, so take the full step without demanding strict ascent.
        if (dt.lpNorm<Eigen::Infinity>() < 1e-7 * (1.0 + t.lpNorm<Eigen::Infinity>())) {
            Eigen::VectorXd cand = t + dt;
            double fc = objective(cand);
            if (fc != kNegInf) {
                t = cand;
                fval = fc;
                continue;
            }
        }
        double beta = 1.0;
        bool moved = false;
        for (int back = 0; back < 60; ++back) {
            Eigen::VectorXd cand = t + beta * dt;
            double fc = objective(cand);
            if (fc > fval && fc != kNegInf) {
                t = cand;
                fval = fc;
                moved = true;
                break;
            }
            beta *= 0.5;
        }
        if (!moved)
            throw OptimizationError("argmax ascent stalled", iter, rep.gradient_norm);
    }
    throw OptimizationError("argmax ascent did not converge", 200, rep.gradient_norm);
}

inline Eigen::VectorXd argmax_phi(const DelzantPolytope& poly, const Eigen::VectorXd& x) {
    return argmax_phi_report(poly, x).point;
}

struct LocalizationResult {
    double log_ratio = kNegInf;  // log(|num| / |den|)
    double ratio = 0.0;
};

/// |int e^{N phi(x,.)} g| / |int e^{N phi(x,.)} f| in log space; verifies the
/// exponential localization away from supp g.
inline LocalizationResult localization_ratio(const KernelContext& ctx,
                                             const std::function<double(const Eigen::VectorXd&)>& f,
                                             const std::function<double(const Eigen::VectorXd&)>& g,
                                             const Eigen::VectorXd& x) {
    const PhaseFamily& phase = ctx.phase();
    Eigen::VectorXd a = phase.clamped_distances(x, "x");
    double n_level = double(ctx.level());
    auto signed_log_integral = [&](const std::function<double(const Eigen::VectorXd&)>& fn) {
        auto part = [&](bool positive) {
            auto log_g = [&](const Eigen::VectorXd& y) {
                double v = fn(y);
                if (positive ? (v <= 0.0) : (v >= 0.0)) return kNegInf;
                return n_level * phase.phi_from_coeffs(a, phase.distances(y)) +
                       std::log(positive ? v : -v);
            };
            return integrate_log(decompose(ctx.polytope().body()), log_g, ctx.options()).log_value;
        };
        double pos = part(true), neg = part(false);
        return qdetail::log_abs_diff(pos, neg);
    };
    LocalizationResult out;
    double num = signed_log_integral(g);
    double den = signed_log_integral(f);
    if (den == kNegInf) throw std::domain_error("localization denominator vanishes");
    out.log_ratio = (num == kNegInf) ? kNegInf : num - den;
    out.ratio = (out.log_ratio == kNegInf) ? 0.0 : std::exp(out.log_ratio);
    return out;
}

/// Reference transform on the truncated orthant chart: the phase is
/// sum_i x_i log y_i - y_i over a box [0, T]^n with T chosen so the tail is
/// negligible at the requested level.
class OrthantModel {
  public:
    explicit OrthantModel(size_t n, double truncation = 0.0, QuadratureOptions opts = {})
        : n_(n), truncation_(truncation), opts_(opts), phase_(PhaseFamily::orthant(n)) {}

    const PhaseFamily& phase() const { return phase_; }

    double box_extent(const Eigen::VectorXd& x, double n_level) const {
        if (truncation_ > 0.0) return truncation_;
        double t = 4.0;
        for (Eigen::Index i = 0; i < x.size(); ++i) t = std::max(t, 4.0 * x(i) + 4.0);
        // grow until the per-axis exponent has dropped ~90 below its peak
        auto drop = [&](double tt) {
            double worst = 0.0;
            for (Eigen::Index i = 0; i < x.size(); ++i) {
                double peak = x(i) > 0 ? x(i) * std::log(x(i)) - x(i) : 0.0;
                worst = std::min(worst, x(i) * std::log(tt) - tt - peak);
            }
            return worst * n_level;
        };
        while (drop(t) > -(90.0 + 8.0 * std::log(t) * double(n_))) t *= 1.5;
        return t;
    }

    ConvexBody box(double extent) const {
        std::vector<RationalVec> normals;
        RationalVec offsets;
        for (size_t j = 0; j < n_; ++j) {
            RationalVec u(n_, Rational(0));
            u[j] = -1;
            normals.push_back(u);
            offsets.push_back(Rational(0));
            RationalVec v(n_, Rational(0));
            v[j] = 1;
            normals.push_back(v);
            offsets.push_back(Rational(extent));
        }
        return ConvexBody::build(n_, std::move(normals), std::move(offsets));
    }

    double log_c(const Eigen::VectorXd& x, double n_level) const {
        ConvexBody body = box(box_extent(x, n_level));
        SimplexDecomposition dec =
            grade_toward_facets(decompose(body), phase_.singular_facets(x, n_level));
        auto log_g = [&](const Eigen::VectorXd& y) {
            return n_level * phase_.phi_from_coeffs(x, y);
        };
        return integrate_log(dec, log_g, opts_).log_value;
    }

    std::vector<double> transform_many(
        const std::vector<std::function<double(const Eigen::VectorXd&)>>& fs,
        const Eigen::VectorXd& x, double n_level) const {
        ConvexBody body = box(box_extent(x, n_level));
        SimplexDecomposition dec =
            grade_toward_facets(decompose(body), phase_.singular_facets(x, n_level));
        auto log_g = [&](const Eigen::VectorXd& y) {
            return n_level * phase_.phi_from_coeffs(x, y);
        };
        double lc = integrate_log(dec, log_g, opts_).log_value;
        auto fn = [&](const Eigen::VectorXd& y, double* out) {
            double lw = n_level * phase_.phi_from_coeffs(x, y) - lc;
            double w = (lw == kNegInf) ? 0.0 : std::exp(lw);
            for (size_t c = 0; c < fs.size(); ++c) out[c] = w * fs[c](y);
        };
        auto res = integrate_many(dec, fs.size(), fn, opts_);
        std::vector<double> vals(fs.size());
        for (size_t c = 0; c < fs.size(); ++c) vals[c] = res[c].value;
        return vals;
    }

    double transform(const std::function<double(const Eigen::VectorXd&)>& f,
                     const Eigen::VectorXd& x, double n_level) const {
        return transform_many({f}, x, n_level)[0];
    }

  private:
    size_t n_;
    double truncation_;
    QuadratureOptions opts_;
    PhaseFamily phase_;
};

}  // namespace toric
