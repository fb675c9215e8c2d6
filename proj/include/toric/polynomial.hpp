#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "toric/exact.hpp"

namespace toric {

/// Multivariate polynomial with exact rational coefficients in the
/// multi-index format {terms: [{exps, coef}]}. Evaluable both exactly and in
/// double precision.
class Polynomial {
  public:
    struct Term {
        std::vector<int> exps;
        Rational coef;
    };

    Polynomial() = default;
    Polynomial(size_t nvars, std::vector<Term> terms) : nvars_(nvars), terms_(std::move(terms)) {
        normalize();
    }

    static Polynomial constant(size_t nvars, const Rational& c) {
        return Polynomial(nvars, {Term{std::vector<int>(nvars, 0), c}});
    }

    static Polynomial monomial(size_t nvars, const std::vector<int>& exps, const Rational& c) {
        return Polynomial(nvars, {Term{exps, c}});
    }

    size_t nvars() const { return nvars_; }
    const std::vector<Term>& terms() const { return terms_; }

    int degree() const {
        int d = 0;
        for (const auto& t : terms_) {
            int s = 0;
            for (int e : t.exps) s += e;
            d = std::max(d, s);
        }
        return d;
    }

    Rational evaluate_exact(const RationalVec& x) const {
        if (x.size() != nvars_) throw std::invalid_argument("polynomial: point has wrong arity");
        Rational sum = 0;
        for (const auto& t : terms_) {
            Rational p = t.coef;
            for (size_t j = 0; j < nvars_; ++j)
                for (int e = 0; e < t.exps[j]; ++e) p *= x[j];
            sum += p;
        }
        return sum;
    }

    double operator()(const Eigen::VectorXd& x) const {
        double sum = 0.0;
        for (const auto& t : terms_) {
            double p = to_double(t.coef);
            for (size_t j = 0; j < nvars_; ++j)
                for (int e = 0; e < t.exps[j]; ++e) p *= x(Eigen::Index(j));
            sum += p;
        }
        return sum;
    }

    Polynomial partial_derivative(size_t axis) const {
        std::vector<Term> out;
        for (const auto& t : terms_) {
            if (t.exps[axis] == 0) continue;
            Term d = t;
            d.coef *= t.exps[axis];
            d.exps[axis] -= 1;
            out.push_back(std::move(d));
        }
        return Polynomial(nvars_, std::move(out));
    }

    Polynomial operator+(const Polynomial& other) const {
        if (nvars_ != other.nvars_) throw std::invalid_argument("polynomial arity mismatch");
        std::vector<Term> ts = terms_;
        ts.insert(ts.end(), other.terms_.begin(), other.terms_.end());
        return Polynomial(nvars_, std::move(ts));
    }

    Polynomial scaled(const Rational& c) const {
        std::vector<Term> ts = terms_;
        for (auto& t : ts) t.coef *= c;
        return Polynomial(nvars_, std::move(ts));
    }

    /// Parses "poly:" spec strings: terms joined by +/-, each a '*'-separated
    /// product of a coefficient (decimal or a/b) and factors x<j>[^e].
    /// Examples: "poly:1", "poly:x0^2*x1 - 3/4*x1 + 0.5".
    static Polynomial parse(const std::string& spec, size_t nvars) {
        std::string s = spec;
        if (s.rfind("poly:", 0) == 0) s = s.substr(5);
        std::vector<Term> terms;
        size_t i = 0;
        auto skip_ws = [&] {
            while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        };
        skip_ws();
        if (i == s.size()) throw std::invalid_argument("empty polynomial spec");
        while (i < s.size()) {
            Rational sign = 1;
            skip_ws();
            if (s[i] == '+' || s[i] == '-') {
                if (s[i] == '-') sign = -1;
                ++i;
            }
            skip_ws();
            Rational coef = sign;
            std::vector<int> exps(nvars, 0);
            bool saw_factor = false;
            while (true) {
                skip_ws();
                if (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.')) {
                    size_t start = i;
                    while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) ||
                                            s[i] == '.' || s[i] == '/'))
                        ++i;
                    coef *= parse_rational(s.substr(start, i - start));
                    saw_factor = true;
                } else if (i < s.size() && (s[i] == 'x' || s[i] == 'y')) {
                    ++i;
                    size_t start = i;
                    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
                    size_t var = (start == i) ? 0 : std::stoul(s.substr(start, i - start));
                    if (var >= nvars)
                        throw std::invalid_argument("polynomial variable index out of range");
                    int exp = 1;
                    if (i < s.size() && s[i] == '^') {
                        ++i;
                        size_t estart = i;
                        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
                        if (estart == i) throw std::invalid_argument("missing exponent");
                        exp = std::stoi(s.substr(estart, i - estart));
                    }
                    exps[var] += exp;
                    saw_factor = true;
                } else {
                    throw std::invalid_argument("malformed polynomial term near '" +
                                                s.substr(i, 8) + "'");
                }
                skip_ws();
                if (i < s.size() && s[i] == '*') {
                    ++i;
                    continue;
                }
                break;
            }
            if (!saw_factor) throw std::invalid_argument("empty polynomial term");
            terms.push_back(Term{std::move(exps), coef});
            skip_ws();
            if (i < s.size() && s[i] != '+' && s[i] != '-')
                throw std::invalid_argument("expected '+' or '-' near '" + s.substr(i, 8) + "'");
        }
        return Polynomial(nvars, std::move(terms));
    }

    /// Exact rational from "a/b", integer, or finite decimal text.
    static Rational parse_rational(const std::string& text) {
        auto slash = text.find('/');
        if (slash != std::string::npos) {
            Int num(text.substr(0, slash));
            Int den(text.substr(slash + 1));
            if (den == 0) throw std::invalid_argument("zero denominator");
            return Rational(num, den);
        }
        auto dot = text.find('.');
        if (dot == std::string::npos) return Rational(Int(text));
        std::string digits = text.substr(0, dot) + text.substr(dot + 1);
        size_t frac_len = text.size() - dot - 1;
        Int den = 1;
        for (size_t i = 0; i < frac_len; ++i) den *= 10;
        bool neg = !digits.empty() && digits[0] == '-';
        if (neg) digits.erase(digits.begin());
        // strip leading zeros; cpp_int would read them as an octal prefix
        digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size() - 1));
        if (digits.empty()) throw std::invalid_argument("malformed number");
        Rational r(Int(digits), den);
        return neg ? -r : r;
    }

  private:
    void normalize() {
        for (auto& t : terms_) {
            if (t.exps.size() != nvars_)
                throw std::invalid_argument("polynomial term exponent arity mismatch");
            for (int e : t.exps)
                if (e < 0) throw std::invalid_argument("negative exponent");
        }
        std::sort(terms_.begin(), terms_.end(),
                  [](const Term& a, const Term& b) { return a.exps < b.exps; });
        std::vector<Term> merged;
        for (auto& t : terms_) {
            if (!merged.empty() && merged.back().exps == t.exps)
                merged.back().coef += t.coef;
            else
                merged.push_back(t);
        }
        std::erase_if(merged, [](const Term& t) { return t.coef == 0; });
        terms_ = std::move(merged);
    }

    size_t nvars_ = 0;
    std::vector<Term> terms_;
};

}  // namespace toric
