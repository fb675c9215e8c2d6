#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "toric/polynomial.hpp"
#include "toric/polytope.hpp"

namespace toric {

/// On-disk polytope schema:
///   {"dim": n, "facets": [{"normal": [int,...], "offset": int}, ...]}
inline DelzantPolytope polytope_from_json(const nlohmann::json& j) {
    try {
        size_t dim = j.at("dim").get<size_t>();
        std::vector<PolytopeFacet> facets;
        for (const auto& f : j.at("facets")) {
            PolytopeFacet pf;
            pf.normal = f.at("normal").get<IntVec>();
            pf.offset = f.at("offset").get<std::int64_t>();
            facets.push_back(std::move(pf));
        }
        return DelzantPolytope(dim, std::move(facets));
    } catch (const nlohmann::json::exception& e) {
        throw PolytopeError(PolytopeErrorCode::ParseError,
                            std::string("polytope document does not match the schema: ") +
                                e.what());
    }
}

inline DelzantPolytope load_polytope(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw PolytopeError(PolytopeErrorCode::ParseError,
                            std::string("polytope document is not valid JSON: ") + e.what());
    }
    return polytope_from_json(j);
}

inline DelzantPolytope load_polytope_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw PolytopeError(PolytopeErrorCode::ParseError, "cannot open polytope file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_polytope(ss.str());
}

inline nlohmann::json polytope_to_json(const DelzantPolytope& poly) {
    nlohmann::json j;
    j["dim"] = poly.dim();
    j["facets"] = nlohmann::json::array();
    for (const auto& f : poly.facets()) {
        nlohmann::json jf;
        jf["normal"] = f.normal;
        jf["offset"] = f.offset;
        j["facets"].push_back(jf);
    }
    return j;
}

/// FNV-1a over the canonical facet serialization; identifies the polytope in
/// reproducibility headers.
inline std::string polytope_hash(const DelzantPolytope& poly) {
    std::string canon = std::to_string(poly.dim());
    for (const auto& f : poly.facets()) {
        canon += '|';
        for (auto u : f.normal) canon += std::to_string(u) + ',';
        canon += ':' + std::to_string(f.offset);
    }
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

/// 17-significant-digit decimal text; round-trips doubles exactly.
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
}

/// Polynomial in the multi-index format {"terms":[{"exps":[...],"coef":r}]};
/// coefficients are numbers or "a/b" strings.
inline Polynomial polynomial_from_json(const nlohmann::json& j, size_t nvars) {
    std::vector<Polynomial::Term> terms;
    for (const auto& t : j.at("terms")) {
        Polynomial::Term term;
        term.exps = t.at("exps").get<std::vector<int>>();
        const auto& c = t.at("coef");
        if (c.is_string())
            term.coef = Polynomial::parse_rational(c.get<std::string>());
        else if (c.is_number_integer())
            term.coef = Rational(c.get<std::int64_t>());
        else
            term.coef = Polynomial::parse_rational(nlohmann::json(c).dump());
        terms.push_back(std::move(term));
    }
    return Polynomial(nvars, std::move(terms));
}

/// Accepts either a "poly:" spec string or inline multi-index JSON.
inline Polynomial parse_polynomial_arg(const std::string& arg, size_t nvars) {
    if (!arg.empty() && arg.front() == '{')
        return polynomial_from_json(nlohmann::json::parse(arg), nvars);
    return Polynomial::parse(arg, nvars);
}

}  // namespace toric
