#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "toric/exact.hpp"

namespace toric {

enum class PolytopeErrorCode {
    ParseError,
    DimensionMismatch,
    Unbounded,
    Empty,
    NotFullDimensional,
    NonPrimitiveNormal,
    RedundantFacet,
    NonSimpleVertex,
    NonUnimodularVertex,
    CombinatorialChange,
    NotAVertex,
    NotAFace,
};

class PolytopeError : public std::runtime_error {
  public:
    PolytopeError(PolytopeErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    PolytopeErrorCode code() const { return code_; }

  private:
    PolytopeErrorCode code_;
};

/// A face recorded by its tight-facet set; vertex_indices index the body's
/// vertex list, children index the body's face list one dimension down.
struct Face {
    std::vector<size_t> active;
    size_t dimension = 0;
    std::vector<size_t> vertex_indices;
    std::vector<size_t> children;
};

struct BodyVertex {
    RationalVec point;
    std::vector<size_t> active;
};

namespace detail {

inline Rational rational_floor(const Rational& r) {
    Int num = numerator(r), den = denominator(r);
    Int q = num / den;
    if (num < 0 && q * den != num) q -= 1;
    return Rational(q);
}

inline std::int64_t floor_int64(const Rational& r) {
    return numerator(rational_floor(r)).convert_to<std::int64_t>();
}

inline std::int64_t ceil_int64(const Rational& r) { return -floor_int64(-r); }

}  // namespace detail

/// Bounded full-dimensional rational polytope in H-form with its vertex set
/// and face lattice. The generic engine underneath DelzantPolytope, shifted
/// regions, and face parameterizations.
class ConvexBody {
  public:
    ConvexBody() = default;

    static ConvexBody build(size_t dim, std::vector<RationalVec> normals, RationalVec offsets) {
        ConvexBody body;
        body.dim_ = dim;
        body.normals_ = std::move(normals);
        body.offsets_ = std::move(offsets);
        if (body.normals_.size() != body.offsets_.size())
            throw PolytopeError(PolytopeErrorCode::ParseError, "normals/offsets size mismatch");
        for (const auto& u : body.normals_)
            if (u.size() != dim)
                throw PolytopeError(PolytopeErrorCode::DimensionMismatch,
                                    "normal length does not match dim");
        body.check_bounded();
        body.enumerate_vertices();
        body.build_faces();
        body.triangulation_exact();  // eager; keeps later const access thread-safe
        return body;
    }

    size_t dim() const { return dim_; }
    size_t facet_count() const { return normals_.size(); }
    const std::vector<RationalVec>& normals() const { return normals_; }
    const RationalVec& offsets() const { return offsets_; }
    const std::vector<BodyVertex>& vertices() const { return vertices_; }
    /// All faces, the whole body last; proper faces precede it.
    const std::vector<Face>& faces() const { return faces_; }
    const Face& top_face() const { return faces_.back(); }

    Rational slack(size_t facet, const RationalVec& x) const {
        Rational s = offsets_[facet];
        for (size_t j = 0; j < dim_; ++j) s -= normals_[facet][j] * x[j];
        return s;
    }

    bool contains(const RationalVec& x) const {
        for (size_t i = 0; i < normals_.size(); ++i)
            if (slack(i, x) < 0) return false;
        return true;
    }

    /// Exact volume from the fan triangulation.
    Rational volume() const {
        Rational vol = 0;
        for (const auto& s : triangulation_exact()) {
            std::vector<RationalVec> edges(dim_, RationalVec(dim_));
            for (size_t i = 0; i < dim_; ++i)
                for (size_t j = 0; j < dim_; ++j) edges[i][j] = s[i + 1][j] - s[0][j];
            Rational d = rational_det(edges);
            if (d < 0) d = -d;
            vol += d;
        }
        Rational fact = 1;
        for (size_t i = 2; i <= dim_; ++i) fact *= int(i);
        return vol / fact;
    }

    /// Deterministic fan triangulation: lexicographic vertex order, recursive
    /// barycenter fans over the face lattice.
    const std::vector<std::vector<RationalVec>>& triangulation_exact() const {
        if (tri_.empty()) tri_ = triangulate_face(faces_.size() - 1);
        return tri_;
    }

  private:
    void check_bounded() const {
        // A nontrivial recession direction, if any, lies on an extreme ray
        // cut out by dim-1 linearly independent facet normals.
        const size_t d = normals_.size();
        auto is_recession = [&](const std::vector<Int>& y) {
            bool pos = true, neg = true;
            for (const auto& u : normals_) {
                Rational s = 0;
                for (size_t j = 0; j < dim_; ++j) s += u[j] * Rational(y[j]);
                if (s > 0) pos = false;
                if (s < 0) neg = false;
            }
            return pos || neg;
        };
        if (dim_ == 1) {
            std::vector<Int> e{1};
            if (is_recession(e))
                throw PolytopeError(PolytopeErrorCode::Unbounded, "region is unbounded");
            return;
        }
        std::vector<size_t> subset(dim_ - 1);
        std::vector<bool> mask(d, false);
        std::fill(mask.begin(), mask.begin() + std::min(d, dim_ - 1), true);
        if (d < dim_ - 1)
            throw PolytopeError(PolytopeErrorCode::Unbounded, "too few facets to bound region");
        std::vector<IntVec> rows;
        do {
            // scale each selected normal to an integer row for the kernel computation
            rows.clear();
            for (size_t i = 0; i < d; ++i) {
                if (!mask[i]) continue;
                Int den = 1;
                for (size_t j = 0; j < dim_; ++j) den = lcm(den, denominator(normals_[i][j]));
                IntVec r(dim_);
                for (size_t j = 0; j < dim_; ++j)
                    r[j] = Int(numerator(normals_[i][j]) * (den / denominator(normals_[i][j])))
                               .convert_to<std::int64_t>();
                rows.push_back(r);
            }
            for (const auto& y : integer_kernel_basis(rows, dim_)) {
                bool zero = std::all_of(y.begin(), y.end(), [](const Int& v) { return v == 0; });
                if (!zero && is_recession(y))
                    throw PolytopeError(PolytopeErrorCode::Unbounded, "region is unbounded");
            }
        } while (std::prev_permutation(mask.begin(), mask.end()));
    }

    void enumerate_vertices() {
        const size_t d = normals_.size();
        if (d < dim_)
            throw PolytopeError(PolytopeErrorCode::Empty, "region has no vertices");
        std::vector<bool> mask(d, false);
        std::fill(mask.begin(), mask.begin() + dim_, true);
        std::vector<RationalVec> points;
        do {
            std::vector<RationalVec> a;
            RationalVec b;
            for (size_t i = 0; i < d; ++i)
                if (mask[i]) {
                    a.push_back(normals_[i]);
                    b.push_back(offsets_[i]);
                }
            if (rational_rank(a) != dim_) continue;
            RationalVec x = rational_solve(a, b);
            bool feasible = true;
            for (size_t i = 0; i < d && feasible; ++i)
                if (slack(i, x) < 0) feasible = false;
            if (!feasible) continue;
            if (std::find(points.begin(), points.end(), x) == points.end()) points.push_back(x);
        } while (std::prev_permutation(mask.begin(), mask.end()));
        if (points.empty()) throw PolytopeError(PolytopeErrorCode::Empty, "region is empty");
        std::sort(points.begin(), points.end());
        vertices_.clear();
        for (auto& p : points) {
            BodyVertex v;
            v.point = p;
            for (size_t i = 0; i < d; ++i)
                if (slack(i, p) == 0) v.active.push_back(i);
            vertices_.push_back(std::move(v));
        }
        // full dimensionality: affine rank of the vertex set must be dim
        std::vector<RationalVec> diffs;
        for (size_t i = 1; i < vertices_.size(); ++i) {
            RationalVec dvec(dim_);
            for (size_t j = 0; j < dim_; ++j)
                dvec[j] = vertices_[i].point[j] - vertices_[0].point[j];
            diffs.push_back(std::move(dvec));
        }
        if (vertices_.size() < dim_ + 1 || rational_rank(diffs) != dim_)
            throw PolytopeError(PolytopeErrorCode::NotFullDimensional,
                                "region is not full-dimensional");
    }

    void build_faces() {
        // Closure of facet intersections, keyed by the full tight set.
        std::map<std::vector<size_t>, Face> found;
        Face whole;
        whole.dimension = dim_;
        for (size_t i = 0; i < vertices_.size(); ++i) whole.vertex_indices.push_back(i);
        std::vector<std::vector<size_t>> queue{whole.active};
        found[whole.active] = whole;
        while (!queue.empty()) {
            auto key = queue.back();
            queue.pop_back();
            Face cur = found[key];
            for (size_t fct = 0; fct < normals_.size(); ++fct) {
                std::vector<size_t> vs;
                for (size_t vi : cur.vertex_indices) {
                    const auto& act = vertices_[vi].active;
                    if (std::binary_search(act.begin(), act.end(), fct)) vs.push_back(vi);
                }
                if (vs.empty() || vs.size() == cur.vertex_indices.size()) continue;
                std::vector<size_t> act = vertices_[vs[0]].active;
                for (size_t k = 1; k < vs.size(); ++k) {
                    std::vector<size_t> tmp;
                    const auto& other = vertices_[vs[k]].active;
                    std::set_intersection(act.begin(), act.end(), other.begin(), other.end(),
                                          std::back_inserter(tmp));
                    act = std::move(tmp);
                }
                if (found.count(act)) continue;
                Face f;
                f.active = act;
                f.vertex_indices = vs;
                std::vector<RationalVec> rows;
                for (size_t i : act) rows.push_back(normals_[i]);
                f.dimension = dim_ - rational_rank(rows);
                found[act] = f;
                queue.push_back(act);
            }
        }
        faces_.clear();
        std::vector<std::pair<std::pair<size_t, std::vector<size_t>>, Face>> ordered;
        for (auto& [key, f] : found)
            ordered.push_back({{f.dimension, key}, f});
        std::sort(ordered.begin(), ordered.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (auto& [_, f] : ordered) faces_.push_back(f);
        // children: one dimension down, vertex subset
        for (size_t i = 0; i < faces_.size(); ++i) {
            for (size_t j = 0; j < faces_.size(); ++j) {
                if (faces_[j].dimension + 1 != faces_[i].dimension) continue;
                if (std::includes(faces_[i].vertex_indices.begin(),
                                  faces_[i].vertex_indices.end(),
                                  faces_[j].vertex_indices.begin(),
                                  faces_[j].vertex_indices.end()))
                    faces_[i].children.push_back(j);
            }
        }
    }

    std::vector<std::vector<RationalVec>> triangulate_face(size_t face_idx) const {
        const Face& f = faces_[face_idx];
        if (f.dimension == 0) return {{vertices_[f.vertex_indices[0]].point}};
        std::vector<std::vector<RationalVec>> out;
        if (f.vertex_indices.size() == f.dimension + 1) {
            std::vector<RationalVec> simplex;
            for (size_t vi : f.vertex_indices) simplex.push_back(vertices_[vi].point);
            out.push_back(std::move(simplex));
            return out;
        }
        RationalVec bary(dim_, Rational(0));
        for (size_t vi : f.vertex_indices)
            for (size_t j = 0; j < dim_; ++j) bary[j] += vertices_[vi].point[j];
        for (size_t j = 0; j < dim_; ++j) bary[j] /= int(f.vertex_indices.size());
        for (size_t child : f.children) {
            for (auto s : triangulate_face(child)) {
                s.push_back(bary);
                out.push_back(std::move(s));
            }
        }
        return out;
    }

    size_t dim_ = 0;
    std::vector<RationalVec> normals_;
    RationalVec offsets_;
    std::vector<BodyVertex> vertices_;
    std::vector<Face> faces_;
    mutable std::vector<std::vector<RationalVec>> tri_;
};

/// The unimodular affine chart at a vertex: t = translation - matrix * x maps
/// the vertex to the origin and the tight lattice distances to coordinates.
struct VertexChart {
    RationalVec vertex;
    std::vector<IntVec> matrix_rows;   // normals tight at the vertex, by facet index
    std::vector<std::int64_t> translation;
    std::vector<size_t> facet_indices;

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
        Eigen::VectorXd t(Eigen::Index(matrix_rows.size()));
        for (size_t i = 0; i < matrix_rows.size(); ++i) {
            double s = double(translation[i]);
            for (size_t j = 0; j < matrix_rows[i].size(); ++j)
                s -= double(matrix_rows[i][j]) * x(Eigen::Index(j));
            t(Eigen::Index(i)) = s;
        }
        return t;
    }

    Rational linear_det() const {
        std::vector<RationalVec> m;
        for (const auto& row : matrix_rows) {
            RationalVec r(row.size());
            for (size_t j = 0; j < row.size(); ++j) r[j] = -row[j];
            m.push_back(std::move(r));
        }
        return rational_det(m);
    }
};

struct PolytopeFacet {
    IntVec normal;
    std::int64_t offset;
};

/// Delzant polytope {x : <u_i, x> <= c_i} with primitive outward integer
/// normals; validation enforces boundedness, irredundancy, and unimodular
/// simple vertices.
class DelzantPolytope {
  public:
    DelzantPolytope(size_t dim, std::vector<PolytopeFacet> facets) : dim_(dim), facets_(std::move(facets)) {
        if (dim_ == 0) throw PolytopeError(PolytopeErrorCode::ParseError, "dim must be positive");
        for (const auto& f : facets_) {
            if (f.normal.size() != dim_)
                throw PolytopeError(PolytopeErrorCode::DimensionMismatch,
                                    "facet normal length does not match dim");
            if (!is_primitive(f.normal))
                throw PolytopeError(PolytopeErrorCode::NonPrimitiveNormal,
                                    "facet normal is not a primitive integer vector");
        }
        std::vector<RationalVec> normals;
        RationalVec offsets;
        for (const auto& f : facets_) {
            RationalVec u(dim_);
            for (size_t j = 0; j < dim_; ++j) u[j] = f.normal[j];
            normals.push_back(std::move(u));
            offsets.push_back(Rational(f.offset));
        }
        body_ = ConvexBody::build(dim_, std::move(normals), std::move(offsets));
        // Every facet must support an (n-1)-face.
        for (size_t i = 0; i < facets_.size(); ++i) {
            bool ok = false;
            for (const auto& f : body_.faces())
                if (f.dimension == dim_ - 1 && f.active.size() == 1 && f.active[0] == i) ok = true;
            if (!ok)
                throw PolytopeError(PolytopeErrorCode::RedundantFacet,
                                    "facet " + std::to_string(i) +
                                        " is not tight on a codimension-1 face");
        }
        // Delzant condition at each vertex.
        for (const auto& v : body_.vertices()) {
            if (v.active.size() != dim_)
                throw PolytopeError(PolytopeErrorCode::NonSimpleVertex,
                                    "vertex has " + std::to_string(v.active.size()) +
                                        " tight facets; expected " + std::to_string(dim_));
            std::vector<RationalVec> m;
            for (size_t i : v.active) {
                RationalVec r(dim_);
                for (size_t j = 0; j < dim_; ++j) r[j] = facets_[i].normal[j];
                m.push_back(std::move(r));
            }
            Rational det = rational_det(m);
            if (det != 1 && det != -1)
                throw PolytopeError(PolytopeErrorCode::NonUnimodularVertex,
                                    "vertex normal matrix has determinant " +
                                        det.convert_to<std::string>() + "; expected +-1");
        }
    }

    size_t dim() const { return dim_; }
    size_t facet_count() const { return facets_.size(); }
    const std::vector<PolytopeFacet>& facets() const { return facets_; }
    const ConvexBody& body() const { return body_; }

    /// Lattice distances l_i(x) = c_i - <u_i, x>; negative entries signal
    /// points outside the polytope.
    Eigen::VectorXd lattice_distances(const Eigen::VectorXd& x) const {
        if (size_t(x.size()) != dim_)
            throw PolytopeError(PolytopeErrorCode::DimensionMismatch,
                                "point length does not match dim");
        Eigen::VectorXd out(Eigen::Index(facets_.size()));
        for (size_t i = 0; i < facets_.size(); ++i) {
            double s = double(facets_[i].offset);
            for (size_t j = 0; j < dim_; ++j) s -= double(facets_[i].normal[j]) * x(Eigen::Index(j));
            out(Eigen::Index(i)) = s;
        }
        return out;
    }

    RationalVec lattice_distances_exact(const RationalVec& x) const {
        if (x.size() != dim_)
            throw PolytopeError(PolytopeErrorCode::DimensionMismatch,
                                "point length does not match dim");
        RationalVec out(facets_.size());
        for (size_t i = 0; i < facets_.size(); ++i) {
            Rational s = facets_[i].offset;
            for (size_t j = 0; j < dim_; ++j) s -= facets_[i].normal[j] * x[j];
            out[i] = s;
        }
        return out;
    }

    bool contains(const RationalVec& x) const { return body_.contains(x); }

    bool contains(const Eigen::VectorXd& x, double tol = 0.0) const {
        Eigen::VectorXd l = lattice_distances(x);
        return (l.array() >= -tol).all();
    }

    /// Facet indices within tol of being tight at x.
    std::vector<size_t> active_set(const Eigen::VectorXd& x, double tol = 1e-12) const {
        Eigen::VectorXd l = lattice_distances(x);
        std::vector<size_t> act;
        for (Eigen::Index i = 0; i < l.size(); ++i)
            if (std::abs(l(i)) <= tol) act.push_back(size_t(i));
        return act;
    }

    std::vector<RationalVec> vertices() const {
        std::vector<RationalVec> out;
        for (const auto& v : body_.vertices()) out.push_back(v.point);
        return out;
    }

    /// Proper faces (everything below the polytope itself).
    std::vector<Face> faces() const {
        std::vector<Face> out;
        for (const auto& f : body_.faces())
            if (f.dimension < dim_) out.push_back(f);
        return out;
    }

    const Face& face_of_active_set(const std::vector<size_t>& active) const {
        for (const auto& f : body_.faces())
            if (f.active == active) return f;
        throw PolytopeError(PolytopeErrorCode::NotAFace, "no face with the given tight set");
    }

    /// Lattice points of the dilation N*Delta, in lexicographic order.
    std::vector<IntVec> lattice_points(std::int64_t n_level) const {
        if (n_level < 1) throw std::invalid_argument("lattice_points: N must be >= 1");
        std::vector<std::int64_t> lo(dim_), hi(dim_);
        for (size_t j = 0; j < dim_; ++j) {
            Rational mn = body_.vertices()[0].point[j], mx = mn;
            for (const auto& v : body_.vertices()) {
                mn = std::min(mn, v.point[j]);
                mx = std::max(mx, v.point[j]);
            }
            lo[j] = detail::ceil_int64(mn * n_level);
            hi[j] = detail::floor_int64(mx * n_level);
        }
        std::vector<IntVec> pts;
        IntVec k(lo);
        if (dim_ == 0) return pts;
        for (size_t j = 0; j < dim_; ++j)
            if (lo[j] > hi[j]) return pts;
        while (true) {
            bool inside = true;
            for (const auto& f : facets_) {
                std::int64_t s = 0;
                for (size_t j = 0; j < dim_; ++j) s += f.normal[j] * k[j];
                if (s > f.offset * n_level) {
                    inside = false;
                    break;
                }
            }
            if (inside) pts.push_back(k);
            size_t j = dim_;
            while (j > 0) {
                --j;
                if (k[j] < hi[j]) {
                    ++k[j];
                    for (size_t l = j + 1; l < dim_; ++l) k[l] = lo[l];
                    break;
                }
                if (j == 0) return pts;
            }
        }
    }

    VertexChart vertex_chart(const RationalVec& v) const {
        for (const auto& bv : body_.vertices()) {
            if (bv.point != v) continue;
            VertexChart chart;
            chart.vertex = v;
            chart.facet_indices = bv.active;
            for (size_t i : bv.active) {
                chart.matrix_rows.push_back(facets_[i].normal);
                chart.translation.push_back(facets_[i].offset);
            }
            return chart;
        }
        throw PolytopeError(PolytopeErrorCode::NotAVertex, "point is not a vertex");
    }

    DelzantPolytope dilate(std::int64_t n_level) const {
        if (n_level < 1) throw std::invalid_argument("dilate: N must be >= 1");
        std::vector<PolytopeFacet> fs = facets_;
        for (auto& f : fs) f.offset *= n_level;
        return DelzantPolytope(dim_, std::move(fs));
    }

    /// Shifted region {<u_i,x> <= c_i + h_i}; rejects shifts that change the
    /// combinatorial type (vertex count or tight-set structure).
    ConvexBody shift(const std::vector<double>& h) const {
        if (h.size() != facets_.size())
            throw PolytopeError(PolytopeErrorCode::DimensionMismatch,
                                "shift vector length must equal facet count");
        std::vector<RationalVec> normals;
        RationalVec offsets;
        for (size_t i = 0; i < facets_.size(); ++i) {
            RationalVec u(dim_);
            for (size_t j = 0; j < dim_; ++j) u[j] = facets_[i].normal[j];
            normals.push_back(std::move(u));
            offsets.push_back(Rational(facets_[i].offset) + Rational(h[i]));
        }
        ConvexBody shifted;
        try {
            shifted = ConvexBody::build(dim_, std::move(normals), std::move(offsets));
        } catch (const PolytopeError& e) {
            throw PolytopeError(PolytopeErrorCode::CombinatorialChange,
                                std::string("shift degenerates the region: ") + e.what());
        }
        if (shifted.vertices().size() != body_.vertices().size())
            throw PolytopeError(PolytopeErrorCode::CombinatorialChange,
                                "shift changes the vertex count from " +
                                    std::to_string(body_.vertices().size()) + " to " +
                                    std::to_string(shifted.vertices().size()));
        std::vector<std::vector<size_t>> a, b;
        for (const auto& v : body_.vertices()) a.push_back(v.active);
        for (const auto& v : shifted.vertices()) b.push_back(v.active);
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        if (a != b)
            throw PolytopeError(PolytopeErrorCode::CombinatorialChange,
                                "shift changes the combinatorial type");
        return shifted;
    }

    /// Image under the unimodular affine lattice map x -> M x + t.
    DelzantPolytope transformed(const std::vector<IntVec>& m_rows, const IntVec& t) const {
        std::vector<RationalVec> m(dim_, RationalVec(dim_));
        for (size_t i = 0; i < dim_; ++i)
            for (size_t j = 0; j < dim_; ++j) m[i][j] = m_rows[i][j];
        Rational det = rational_det(m);
        if (det != 1 && det != -1)
            throw std::invalid_argument("transformed: matrix is not unimodular");
        std::vector<PolytopeFacet> fs;
        for (const auto& f : facets_) {
            // u' = u M^{-1}  (solve M^T u' = u), integral by unimodularity
            std::vector<RationalVec> mt(dim_, RationalVec(dim_));
            for (size_t i = 0; i < dim_; ++i)
                for (size_t j = 0; j < dim_; ++j) mt[i][j] = m_rows[j][i];
            RationalVec rhs(dim_);
            for (size_t j = 0; j < dim_; ++j) rhs[j] = f.normal[j];
            RationalVec up = rational_solve(mt, rhs);
            PolytopeFacet nf;
            nf.normal.resize(dim_);
            std::int64_t dot = 0;
            for (size_t j = 0; j < dim_; ++j) {
                nf.normal[j] = numerator(up[j]).convert_to<std::int64_t>();
                dot += nf.normal[j] * t[j];
            }
            nf.offset = f.offset + dot;
            fs.push_back(std::move(nf));
        }
        return DelzantPolytope(dim_, std::move(fs));
    }

  private:
    size_t dim_;
    std::vector<PolytopeFacet> facets_;
    ConvexBody body_;
};

/// Affine parameterization x = base + basis * t of a face by lattice
/// coordinates: Lebesgue measure in t is the lattice-normalized measure on
/// the face, and the t-domain is the face as a ConvexBody of its own
/// dimension.
struct FaceChart {
    RationalVec base;
    std::vector<std::vector<Int>> basis_columns;  // saturated lattice basis of the direction space
    ConvexBody domain;                            // in t-space; dim = face dimension

    Eigen::VectorXd embed(const Eigen::VectorXd& t) const {
        Eigen::VectorXd x(Eigen::Index(base.size()));
        for (size_t j = 0; j < base.size(); ++j) {
            double s = to_double(base[j]);
            for (size_t c = 0; c < basis_columns.size(); ++c)
                s += basis_columns[c][j].convert_to<double>() * t(Eigen::Index(c));
            x(Eigen::Index(j)) = s;
        }
        return x;
    }
};

inline FaceChart make_face_chart(const DelzantPolytope& poly, const Face& face) {
    if (face.dimension == 0 || face.dimension >= poly.dim())
        throw PolytopeError(PolytopeErrorCode::NotAFace,
                            "face chart requires a proper face of positive dimension");
    const size_t n = poly.dim();
    FaceChart chart;
    chart.base = poly.body().vertices()[face.vertex_indices.front()].point;
    std::vector<IntVec> rows;
    for (size_t i : face.active) rows.push_back(poly.facets()[i].normal);
    chart.basis_columns = integer_kernel_basis(rows, n);
    if (chart.basis_columns.size() != face.dimension)
        throw PolytopeError(PolytopeErrorCode::NotAFace, "face direction space has wrong rank");
    // Remaining inequalities pulled back to t-space; facets whose normal
    // annihilates the whole direction space drop out.
    std::vector<RationalVec> tnormals;
    RationalVec toffsets;
    std::vector<size_t> act(face.active.begin(), face.active.end());
    for (size_t i = 0; i < poly.facet_count(); ++i) {
        if (std::binary_search(act.begin(), act.end(), i)) continue;
        RationalVec u(face.dimension);
        bool zero = true;
        for (size_t c = 0; c < face.dimension; ++c) {
            Rational s = 0;
            for (size_t j = 0; j < n; ++j) s += Rational(chart.basis_columns[c][j]) * poly.facets()[i].normal[j];
            u[c] = s;
            if (s != 0) zero = false;
        }
        if (zero) continue;
        Rational off = poly.facets()[i].offset;
        for (size_t j = 0; j < n; ++j) off -= Rational(poly.facets()[i].normal[j]) * chart.base[j];
        tnormals.push_back(std::move(u));
        toffsets.push_back(off);
    }
    chart.domain = ConvexBody::build(face.dimension, std::move(tnormals), std::move(toffsets));
    return chart;
}

}  // namespace toric
