#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <queue>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "toric/numerics.hpp"
#include "toric/polytope.hpp"

namespace toric {

struct QuadratureOptions {
    double abs_tol = 1e-9;       // plain mode: absolute tolerance
    double log_rel_tol = 1e-8;   // log mode: relative tolerance on the linear value
    std::size_t max_evals = 2'000'000;
    int order = 12;              // tensor Gauss-Legendre order per axis
    int low_order = 7;           // embedded estimate for the error
    bool throw_on_budget = true;
};

struct QuadratureResult {
    double value = 0.0;
    double log_value = kNegInf;
    double error_estimate = 0.0;  // absolute (plain) or relative (log mode)
    std::size_t cells_used = 0;
    std::size_t evaluations = 0;
    bool converged = true;
};

class QuadratureError : public std::runtime_error {
  public:
    QuadratureError(const std::string& what, QuadratureResult partial)
        : std::runtime_error(what), partial_(partial) {}
    const QuadratureResult& partial() const { return partial_; }

  private:
    QuadratureResult partial_;
};

struct Simplex {
    std::vector<Eigen::VectorXd> v;

    double volume() const {
        const size_t n = v.size() - 1;
        Eigen::MatrixXd e(n, n);
        for (size_t i = 0; i < n; ++i) e.col(Eigen::Index(i)) = v[i + 1] - v[0];
        double det = e.determinant();
        double fact = 1.0;
        for (size_t i = 2; i <= n; ++i) fact *= double(i);
        return std::abs(det) / fact;
    }
};

struct SimplexDecomposition {
    std::vector<Simplex> simplices;

    double total_volume() const {
        CompensatedSum s;
        for (const auto& sx : simplices) s.add(sx.volume());
        return s.value();
    }
};

/// Deterministic triangulation of a body (fan from face barycenters with
/// lexicographic vertex order), in double precision.
inline SimplexDecomposition decompose(const ConvexBody& body) {
    SimplexDecomposition out;
    for (const auto& sx : body.triangulation_exact()) {
        Simplex s;
        for (const auto& p : sx) {
            Eigen::VectorXd vd(Eigen::Index(p.size()));
            for (size_t j = 0; j < p.size(); ++j) vd(Eigen::Index(j)) = to_double(p[j]);
            s.v.push_back(std::move(vd));
        }
        out.simplices.push_back(std::move(s));
    }
    return out;
}

/// Geometric grading of a decomposition toward the given facets (normal u,
/// offset c with distance c - <u,y>). Cells with a full face on a facet are
/// split into layers with ratio sigma so that fractional-power boundary
/// behavior is confined to cells of negligible mass; everything else is left
/// to the adaptive refinement.
inline SimplexDecomposition grade_toward_facets(
    SimplexDecomposition dec, const std::vector<std::pair<Eigen::VectorXd, double>>& facets,
    double sigma = 0.2, int levels = 10) {
    for (const auto& [u, c] : facets) {
        std::vector<Simplex> next;
        const double tol = 1e-11 * (1.0 + std::abs(c));
        for (auto& s : dec.simplices) {
            const size_t n = s.v.size() - 1;
            std::vector<size_t> on, off;
            for (size_t i = 0; i <= n; ++i) {
                double l = c - u.dot(s.v[i]);
                (std::abs(l) <= tol ? on : off).push_back(i);
            }
            if (on.size() != n || off.size() != 1) {
                next.push_back(std::move(s));
                continue;
            }
            const Eigen::VectorXd apex = s.v[off[0]];
            auto cross = [&](double t) {
                std::vector<Eigen::VectorXd> pts;
                for (size_t i : on) pts.push_back(s.v[i] + t * (apex - s.v[i]));
                return pts;
            };
            auto staircase = [&](const std::vector<Eigen::VectorXd>& a,
                                 const std::vector<Eigen::VectorXd>& b) {
                // frustum between parallel cross-sections a (near facet) and b
                for (size_t m = 0; m < n; ++m) {
                    Simplex piece;
                    for (size_t i = 0; i <= m; ++i) piece.v.push_back(a[i]);
                    for (size_t i = m; i < n; ++i) piece.v.push_back(b[i]);
                    next.push_back(std::move(piece));
                }
            };
            double t_hi = std::pow(sigma, double(levels));
            std::vector<Eigen::VectorXd> base;
            for (size_t i : on) base.push_back(s.v[i]);
            staircase(base, cross(t_hi));
            for (int j = levels; j >= 2; --j)
                staircase(cross(std::pow(sigma, double(j))), cross(std::pow(sigma, double(j - 1))));
            Simplex top;
            for (const auto& p : cross(sigma)) top.v.push_back(p);
            top.v.push_back(apex);
            next.push_back(std::move(top));
        }
        dec.simplices = std::move(next);
    }
    return dec;
}

namespace qdetail {

using ScalarFn = std::function<double(const Eigen::VectorXd&)>;
using MultiFn = std::function<void(const Eigen::VectorXd&, double*)>;

/// Tensor Gauss-Legendre on [0,1]^n mapped to the simplex through the corner
/// (Duffy) transform; fills one value per component.
inline std::size_t eval_simplex_rule(const Simplex& s, const MultiFn& fn, std::size_t ncomp,
                                     int order, double* out) {
    const size_t n = s.v.size() - 1;
    const GaussRule& rule = gauss_rule(order);
    Eigen::MatrixXd e(n, n);
    for (size_t i = 0; i < n; ++i) e.col(Eigen::Index(i)) = s.v[i + 1] - s.v[0];
    double jac0 = std::abs(e.determinant());

    std::vector<CompensatedSum> acc(ncomp);
    std::vector<int> idx(n, 0);
    auto y = Eigen::VectorXd(Eigen::Index(n));
    std::vector<double> fy(ncomp);
    std::size_t evals = 0;
    while (true) {
        double w = jac0;
        double s_partial = 0.0;
        y = s.v[0];
        for (size_t i = 0; i < n; ++i) {
            double u = rule.nodes[size_t(idx[i])];
            double xi = u * (1.0 - s_partial);
            w *= rule.weights[size_t(idx[i])] * (1.0 - s_partial);
            s_partial += xi;
            y += xi * e.col(Eigen::Index(i));
        }
        fn(y, fy.data());
        ++evals;
        for (size_t c = 0; c < ncomp; ++c) acc[c].add(w * fy[c]);
        size_t j = n;
        bool done = true;
        while (j > 0) {
            --j;
            if (idx[j] + 1 < order) {
                ++idx[j];
                for (size_t l = j + 1; l < n; ++l) idx[l] = 0;
                done = false;
                break;
            }
        }
        if (done) break;
    }
    for (size_t c = 0; c < ncomp; ++c) out[c] = acc[c].value();
    return evals;
}

/// Log-space rule evaluation: returns log of the (positive) integral estimate.
inline std::size_t eval_simplex_rule_log(const Simplex& s, const ScalarFn& log_fn, int order,
                                         double* out_log) {
    const size_t n = s.v.size() - 1;
    const GaussRule& rule = gauss_rule(order);
    Eigen::MatrixXd e(n, n);
    for (size_t i = 0; i < n; ++i) e.col(Eigen::Index(i)) = s.v[i + 1] - s.v[0];
    double log_jac0 = std::log(std::abs(e.determinant()));

    std::vector<double> logs;
    std::vector<int> idx(n, 0);
    auto y = Eigen::VectorXd(Eigen::Index(n));
    std::size_t evals = 0;
    while (true) {
        double logw = log_jac0;
        double s_partial = 0.0;
        y = s.v[0];
        for (size_t i = 0; i < n; ++i) {
            double u = rule.nodes[size_t(idx[i])];
            double xi = u * (1.0 - s_partial);
            logw += std::log(rule.weights[size_t(idx[i])] * (1.0 - s_partial));
            s_partial += xi;
            y += xi * e.col(Eigen::Index(i));
        }
        double g = log_fn(y);
        ++evals;
        if (g != kNegInf && std::isfinite(logw + g)) logs.push_back(logw + g);
        size_t j = n;
        bool done = true;
        while (j > 0) {
            --j;
            if (idx[j] + 1 < order) {
                ++idx[j];
                for (size_t l = j + 1; l < n; ++l) idx[l] = 0;
                done = false;
                break;
            }
        }
        if (done) break;
    }
    *out_log = log_sum_exp(std::move(logs));
    return evals;
}

inline std::pair<size_t, size_t> longest_edge(const Simplex& s) {
    size_t bi = 0, bj = 1;
    double best = -1.0;
    for (size_t i = 0; i + 1 < s.v.size(); ++i)
        for (size_t j = i + 1; j < s.v.size(); ++j) {
            double d = (s.v[i] - s.v[j]).squaredNorm();
            if (d > best) {
                best = d;
                bi = i;
                bj = j;
            }
        }
    return {bi, bj};
}

inline std::pair<Simplex, Simplex> bisect(const Simplex& s) {
    auto [i, j] = longest_edge(s);
    Eigen::VectorXd mid = 0.5 * (s.v[i] + s.v[j]);
    Simplex a = s, b = s;
    a.v[j] = mid;
    b.v[i] = mid;
    return {a, b};
}

/// abs-difference in log space: log|e^a - e^b|.
inline double log_abs_diff(double a, double b) {
    if (a == kNegInf && b == kNegInf) return kNegInf;
    double hi = std::max(a, b), lo = std::min(a, b);
    if (hi == lo) return kNegInf;
    double d = -std::expm1(lo - hi);  // 1 - e^{lo-hi} in (0,1]
    return hi + std::log(d);
}

/// Lazy max-heap over (priority, cell index); entries go stale when a cell is
/// replaced and are skipped on pop.
struct LazyHeap {
    std::priority_queue<std::pair<double, size_t>> heap;
    void push(double priority, size_t idx) { heap.push({priority, idx}); }
    template <typename Alive>
    long pop_worst(const Alive& alive) {
        while (!heap.empty()) {
            auto [p, idx] = heap.top();
            heap.pop();
            if (alive(idx, p)) return long(idx);
        }
        return -1;
    }
};

}  // namespace qdetail

/// Adaptive integration of ncomp components sharing one evaluation pass.
/// Refines the cell with the worst per-component error until every component
/// meets opts.abs_tol or the evaluation budget runs out.
inline std::vector<QuadratureResult> integrate_many(const SimplexDecomposition& decomposition,
                                                    std::size_t ncomp, const qdetail::MultiFn& fn,
                                                    const QuadratureOptions& opts = {}) {
    struct Cell {
        Simplex s;
        std::vector<double> val;
        std::vector<double> err_c;
        double err = 0.0;  // max over components
        bool alive = true;
    };
    std::vector<Cell> cells;
    std::size_t evals = 0;
    std::vector<double> total_err(ncomp, 0.0);
    qdetail::LazyHeap heap;

    auto add_cell = [&](Simplex s) {
        Cell c;
        c.s = std::move(s);
        c.val.resize(ncomp);
        c.err_c.resize(ncomp);
        std::vector<double> lo(ncomp);
        evals += qdetail::eval_simplex_rule(c.s, fn, ncomp, opts.order, c.val.data());
        evals += qdetail::eval_simplex_rule(c.s, fn, ncomp, opts.low_order, lo.data());
        for (size_t k = 0; k < ncomp; ++k) {
            c.err_c[k] = std::abs(c.val[k] - lo[k]);
            c.err = std::max(c.err, c.err_c[k]);
            total_err[k] += c.err_c[k];
        }
        cells.push_back(std::move(c));
        heap.push(cells.back().err, cells.size() - 1);
    };

    for (const auto& s : decomposition.simplices) add_cell(s);

    bool converged = true;
    while (true) {
        bool ok = true;
        for (size_t k = 0; k < ncomp; ++k)
            if (total_err[k] > opts.abs_tol) ok = false;
        if (ok) break;
        if (evals >= opts.max_evals) {
            converged = false;
            break;
        }
        long w = heap.pop_worst(
            [&](size_t idx, double p) { return cells[idx].alive && p == cells[idx].err; });
        if (w < 0) break;  // nothing refinable
        cells[size_t(w)].alive = false;
        for (size_t k = 0; k < ncomp; ++k) total_err[k] -= cells[size_t(w)].err_c[k];
        auto [a, b] = qdetail::bisect(cells[size_t(w)].s);
        add_cell(std::move(a));
        add_cell(std::move(b));
    }

    // exact totals in creation order
    std::vector<double> te(ncomp, 0.0);
    std::vector<CompensatedSum> sums(ncomp);
    size_t used = 0;
    for (const auto& c : cells) {
        if (!c.alive) continue;
        ++used;
        for (size_t k = 0; k < ncomp; ++k) {
            sums[k].add(c.val[k]);
            te[k] += c.err_c[k];
        }
    }
    std::vector<QuadratureResult> out(ncomp);
    for (size_t k = 0; k < ncomp; ++k) {
        out[k].value = sums[k].value();
        out[k].log_value = out[k].value > 0 ? std::log(out[k].value) : kNegInf;
        out[k].error_estimate = te[k];
        out[k].cells_used = used;
        out[k].evaluations = evals;
        out[k].converged = converged;
    }
    if (!converged && opts.throw_on_budget)
        throw QuadratureError("quadrature did not converge within the evaluation budget", out[0]);
    return out;
}

inline QuadratureResult integrate(const ConvexBody& body,
                                  const std::function<double(const Eigen::VectorXd&)>& g,
                                  const QuadratureOptions& opts = {}) {
    auto res = integrate_many(decompose(body), 1,
                              [&](const Eigen::VectorXd& y, double* out) { out[0] = g(y); }, opts);
    return res[0];
}

inline QuadratureResult integrate(const ConvexBody& body,
                                  const std::function<double(const Eigen::VectorXd&)>& g,
                                  double tol) {
    QuadratureOptions opts;
    opts.abs_tol = tol;
    return integrate(body, g, opts);
}

/// Adaptive log-space integration of exp(log_g) with shift-by-maximum
/// accumulation; log_g == -inf is an exact zero of the integrand.
inline QuadratureResult integrate_log(const SimplexDecomposition& decomposition,
                                      const std::function<double(const Eigen::VectorXd&)>& log_g,
                                      const QuadratureOptions& opts = {}) {
    struct Cell {
        Simplex s;
        double log_val = kNegInf;
        double log_err = kNegInf;
        bool alive = true;
    };
    std::vector<Cell> cells;
    std::size_t evals = 0;
    qdetail::LazyHeap heap;

    auto add_cell = [&](Simplex s) {
        Cell c;
        c.s = std::move(s);
        double hi = kNegInf, lo = kNegInf;
        evals += qdetail::eval_simplex_rule_log(c.s, log_g, opts.order, &hi);
        evals += qdetail::eval_simplex_rule_log(c.s, log_g, opts.low_order, &lo);
        c.log_val = hi;
        c.log_err = qdetail::log_abs_diff(hi, lo);
        cells.push_back(std::move(c));
        heap.push(cells.back().log_err, cells.size() - 1);
    };

    for (const auto& s : decomposition.simplices) add_cell(s);

    auto totals = [&]() {
        std::vector<double> vals, errs;
        for (const auto& c : cells) {
            if (!c.alive) continue;
            vals.push_back(c.log_val);
            errs.push_back(c.log_err);
        }
        return std::pair{log_sum_exp(std::move(vals)), log_sum_exp(std::move(errs))};
    };

    bool converged = true;
    // Totals drift slowly; refresh them only every few refinements.
    while (true) {
        auto [log_val, log_err] = totals();
        if (log_val == kNegInf || log_err - log_val <= std::log(opts.log_rel_tol)) break;
        if (evals >= opts.max_evals) {
            converged = false;
            break;
        }
        const size_t burst_len = std::max<std::size_t>(8, cells.size() / 8);
        for (std::size_t burst = 0; burst < burst_len && evals < opts.max_evals; ++burst) {
            long w = heap.pop_worst(
                [&](size_t idx, double p) { return cells[idx].alive && p == cells[idx].log_err; });
            if (w < 0) break;
            cells[size_t(w)].alive = false;
            auto [a, b] = qdetail::bisect(cells[size_t(w)].s);
            add_cell(std::move(a));
            add_cell(std::move(b));
        }
    }

    auto [log_val, log_err] = totals();
    QuadratureResult out;
    out.log_value = log_val;
    out.error_estimate = (log_val == kNegInf) ? 0.0 : std::exp(log_err - log_val);
    out.value = std::exp(out.log_value);
    out.cells_used = 0;
    for (const auto& c : cells)
        if (c.alive) ++out.cells_used;
    out.evaluations = evals;
    out.converged = converged;
    if (!converged && opts.throw_on_budget)
        throw QuadratureError("log-mode quadrature did not converge within the evaluation budget",
                              out);
    return out;
}

inline QuadratureResult integrate_log(const ConvexBody& body,
                                      const std::function<double(const Eigen::VectorXd&)>& log_g,
                                      const QuadratureOptions& opts = {}) {
    return integrate_log(decompose(body), log_g, opts);
}

/// Integral over one simplex (the additivity oracle for decompositions).
inline QuadratureResult integrate_simplex(const Simplex& s,
                                          const std::function<double(const Eigen::VectorXd&)>& g,
                                          const QuadratureOptions& opts = {}) {
    SimplexDecomposition d;
    d.simplices.push_back(s);
    return integrate_many(d, 1,
                          [&](const Eigen::VectorXd& y, double* out) { out[0] = g(y); }, opts)[0];
}

/// Integral over a proper face with respect to the lattice-normalized
/// Lebesgue measure (a primitive lattice segment has length 1). Vertex faces
/// evaluate g at the vertex.
inline QuadratureResult integrate_face(const DelzantPolytope& poly, const Face& face,
                                       const std::function<double(const Eigen::VectorXd&)>& g,
                                       const QuadratureOptions& opts = {}) {
    if (face.dimension >= poly.dim())
        throw PolytopeError(PolytopeErrorCode::NotAFace, "integrate_face requires a proper face");
    if (face.dimension == 0) {
        const auto& p = poly.body().vertices()[face.vertex_indices[0]].point;
        Eigen::VectorXd x(Eigen::Index(p.size()));
        for (size_t j = 0; j < p.size(); ++j) x(Eigen::Index(j)) = to_double(p[j]);
        QuadratureResult r;
        r.value = g(x);
        r.log_value = r.value > 0 ? std::log(r.value) : kNegInf;
        r.converged = true;
        return r;
    }
    FaceChart chart = make_face_chart(poly, face);
    return integrate(chart.domain,
                     [&](const Eigen::VectorXd& t) { return g(chart.embed(t)); }, opts);
}

/// Lebesgue volume of {y in body : g(y) >= t} by indicator quadrature with
/// refinement along the level set. The mesh is pre-refined uniformly so thin
/// superlevel slivers are not missed by sparse sampling, and cells whose
/// samples come close to the threshold are treated as straddling.
inline double superlevel_volume(const ConvexBody& body,
                                const std::function<double(const Eigen::VectorXd&)>& g, double t,
                                const QuadratureOptions& opts = {}) {
    if (t == kNegInf) return decompose(body).total_volume();
    struct Cell {
        Simplex s;
        double vol = 0.0;
        int state = 0;  // 0 = below, 1 = above, 2 = straddles (or near-threshold)
        double frac = 0.0;
        bool alive = true;
    };
    const size_t n = body.dim();
    const GaussRule& rule = gauss_rule(std::max(4, opts.order / 2));
    std::size_t evals = 0;
    std::vector<Cell> cells;
    double straddle_vol = 0.0;
    qdetail::LazyHeap heap;

    auto add_cell = [&](Simplex s) {
        Cell c;
        c.vol = s.volume();
        double wsum = 0.0, wabove = 0.0;
        double gmin = std::numeric_limits<double>::infinity(), gmax = -gmin;
        for (const auto& v : s.v) {
            double gv = g(v);
            ++evals;
            gmin = std::min(gmin, gv);
            gmax = std::max(gmax, gv);
        }
        Eigen::MatrixXd e(n, n);
        for (size_t i = 0; i < n; ++i) e.col(Eigen::Index(i)) = s.v[i + 1] - s.v[0];
        std::vector<int> idx(n, 0);
        while (true) {
            double w = 1.0, s_partial = 0.0;
            Eigen::VectorXd y = s.v[0];
            for (size_t i = 0; i < n; ++i) {
                double u = rule.nodes[size_t(idx[i])];
                double xi = u * (1.0 - s_partial);
                w *= rule.weights[size_t(idx[i])] * (1.0 - s_partial);
                s_partial += xi;
                y += xi * e.col(Eigen::Index(i));
            }
            double gv = g(y);
            ++evals;
            wsum += w;
            if (gv >= t) wabove += w;
            gmin = std::min(gmin, gv);
            gmax = std::max(gmax, gv);
            size_t j = n;
            bool done = true;
            while (j > 0) {
                --j;
                if (idx[j] + 1 < int(rule.nodes.size())) {
                    ++idx[j];
                    for (size_t l = j + 1; l < n; ++l) idx[l] = 0;
                    done = false;
                    break;
                }
            }
            if (done) break;
        }
        c.frac = wsum > 0 ? wabove / wsum : 0.0;
        if (gmin >= t)
            c.state = 1;
        else if (gmax >= t || gmax + 0.5 * (gmax - gmin) >= t)
            c.state = 2;  // crosses or may cross the threshold
        else
            c.state = 0;
        c.s = std::move(s);
        cells.push_back(std::move(c));
        if (cells.back().state == 2) {
            straddle_vol += cells.back().vol;
            heap.push(cells.back().vol, cells.size() - 1);
        }
    };

    // Uniform pre-refinement: every cell below ~2^-9 of the total volume.
    {
        auto base = decompose(body).simplices;
        double total = 0.0;
        for (const auto& s : base) total += s.volume();
        double floor_vol = total / 512.0;
        std::vector<Simplex> queue = std::move(base);
        while (!queue.empty()) {
            Simplex s = std::move(queue.back());
            queue.pop_back();
            if (s.volume() > floor_vol) {
                auto [a, b] = qdetail::bisect(s);
                queue.push_back(std::move(a));
                queue.push_back(std::move(b));
            } else {
                add_cell(std::move(s));
            }
        }
    }

    double tol = std::max(opts.abs_tol, 1e-12);
    while (straddle_vol > tol && evals < opts.max_evals) {
        long w = heap.pop_worst([&](size_t idx, double p) {
            return cells[idx].alive && cells[idx].state == 2 && p == cells[idx].vol;
        });
        if (w < 0) break;
        cells[size_t(w)].alive = false;
        straddle_vol -= cells[size_t(w)].vol;
        auto [a, b] = qdetail::bisect(cells[size_t(w)].s);
        add_cell(std::move(a));
        add_cell(std::move(b));
    }

    CompensatedSum vol;
    for (const auto& c : cells) {
        if (!c.alive) continue;
        if (c.state == 1)
            vol.add(c.vol);
        else if (c.state == 2)
            vol.add(c.vol * c.frac);
    }
    return vol.value();
}

}  // namespace toric
