#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace toric {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846264338327950288;

/// Neumaier-compensated accumulator; deterministic for a fixed input order.
class CompensatedSum {
  public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double log_add_exp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    double hi = std::max(a, b), lo = std::min(a, b);
    return hi + std::log1p(std::exp(lo - hi));
}

/// log(sum exp(v_i)) with a global max shift and compensated accumulation
/// in descending order of magnitude.
inline double log_sum_exp(std::vector<double> vals) {
    if (vals.empty()) return kNegInf;
    std::sort(vals.begin(), vals.end(), std::greater<double>());
    double m = vals.front();
    if (m == kNegInf) return kNegInf;
    CompensatedSum s;
    for (double v : vals) s.add(std::exp(v - m));
    return m + std::log(s.value());
}

/// Gauss-Legendre nodes/weights on [0,1], computed once per order by Newton
/// iteration on the Legendre recurrence.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline GaussRule make_gauss_rule(int order) {
    if (order < 1) throw std::invalid_argument("gauss rule order must be >= 1");
    GaussRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const int n = order;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Chebyshev initial guess on [-1,1].
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.nodes[i] = 0.5 * (1.0 - x);
        rule.nodes[n - 1 - i] = 0.5 * (1.0 + x);
        double w = 1.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

inline const GaussRule& gauss_rule(int order) {
    static thread_local std::vector<GaussRule> cache(64);
    if (order < 1 || order >= 64) throw std::invalid_argument("gauss rule order out of range");
    if (cache[order].nodes.empty()) cache[order] = make_gauss_rule(order);
    return cache[order];
}

/// Least-squares fit y ~ X b with per-column scaling; reports the scaled
/// condition number and the residual norm.
struct LeastSquaresFit {
    Eigen::VectorXd coefficients;
    double condition = 0.0;
    double residual_norm = 0.0;
};

inline LeastSquaresFit fit_least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() != y.size() || X.rows() < X.cols())
        throw std::invalid_argument("least squares: need rows >= cols and matching y");
    Eigen::VectorXd scale(X.cols());
    for (int j = 0; j < X.cols(); ++j) {
        double s = X.col(j).norm();
        scale(j) = (s > 0) ? s : 1.0;
    }
    Eigen::MatrixXd Xs = X * scale.cwiseInverse().asDiagonal();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Xs, Eigen::ComputeThinU | Eigen::ComputeThinV);
    double smax = svd.singularValues()(0);
    double smin = svd.singularValues()(svd.singularValues().size() - 1);
    LeastSquaresFit fit;
    fit.condition = (smin > 0) ? smax / smin : std::numeric_limits<double>::infinity();
    Eigen::VectorXd bs = svd.solve(y);
    fit.coefficients = scale.cwiseInverse().asDiagonal() * bs;
    fit.residual_norm = (X * fit.coefficients - y).norm();
    return fit;
}

/// Ordinary least-squares line a + b*x with the coefficient of determination.
struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double r_squared = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("line fit: need >= 2 matching points");
    const double n = double(x.size());
    double sx = std::accumulate(x.begin(), x.end(), 0.0);
    double sy = std::accumulate(y.begin(), y.end(), 0.0);
    double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r_squared = (syy > 0) ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

/// The standard compactly supported bump on |u| < 1, normalized so that the
/// value at the origin is 1.
inline double bump_window(const Eigen::VectorXd& u) {
    double r2 = u.squaredNorm();
    if (r2 >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - r2));
}

inline double bump_window(double u) {
    Eigen::VectorXd v(1);
    v(0) = u;
    return bump_window(v);
}

}  // namespace toric
