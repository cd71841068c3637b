// SPDX-License-Identifier: Apache-2.0
#pragma once

// Trif functional-equation machinery: exact parameters, l-subset enumeration
// and the defect operators.
//
// Maps are any callable RingElement -> RingElement.

#include <cmath>
#include <complex>
#include <concepts>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "ternary_stab/errors.hpp"
#include "ternary_stab/rng.hpp"
#include "ternary_stab/ternary_core.hpp"

namespace tstab {

using Rational = boost::rational<std::int64_t>;

template <class F>
concept RingMap = std::invocable<const F&, const RingElement&> &&
                  std::convertible_to<std::invoke_result_t<const F&, const RingElement&>, RingElement>;

inline constexpr int kDefaultMaxD = 12;

/// C(n, k) = n! / (k! (n-k)!), exact. Zero when k < 0 or k > n.
constexpr std::int64_t binomial(int n, int k) {
    if (k < 0 || n < 0 || k > n) {
        return 0;
    }
    k = (k > n - k) ? n - k : k;
    std::int64_t out = 1;
    for (int i = 1; i <= k; ++i) {
        out = out * (n - k + i) / i;  // exact at every step
    }
    return out;
}

struct TrifParams {
    int d = 3;
    int l = 2;
    Rational q;  ///< l(d-1)/(d-l)
    Rational r;  ///< -l/(d-l)
    std::int64_t c_dm2_lm2 = 0;  ///< C(d-2, l-2)
    std::int64_t c_dm2_lm1 = 0;  ///< C(d-2, l-1)
    std::int64_t c_dm1_lm1 = 0;  ///< C(d-1, l-1)
    std::int64_t c_d_l = 0;      ///< C(d, l)

    double q_value() const { return boost::rational_cast<double>(q); }
    double r_value() const { return boost::rational_cast<double>(r); }

    /// d * C(d-2, l-2): weight of the leading term.
    std::int64_t leading_weight() const { return d * c_dm2_lm2; }
    /// l * C(d-1, l-1): the stability-bound denominator.
    std::int64_t collapse_weight() const { return l * c_dm1_lm1; }
};

/// Checks every structural identity of the parameters in exact arithmetic.
inline bool params_identities_hold(const TrifParams& p) {
    const Rational d(p.d), l(p.l);
    // Compare rational to rational: mixed int/rational comparisons recurse in Boost 1.74.
    return p.q > Rational(1) && p.r < Rational(0) && p.q + (d - Rational(1)) * p.r == Rational(0) &&
           p.q + (l - Rational(1)) * p.r == l &&
           p.d * p.c_dm2_lm2 + p.d * p.c_dm2_lm1 == p.l * p.c_d_l &&
           (p.d - 1) * p.c_dm2_lm1 == p.l * binomial(p.d - 1, p.l) &&
           p.q * Rational(p.c_dm2_lm1) == Rational(p.l * p.c_dm1_lm1);
}

inline TrifParams make_params(int d, int l, int max_d = kDefaultMaxD) {
    if (l < 2 || l > d - 1) {
        throw RejectedInput("Trif parameters need 2 <= l <= d-1 (got d=" + std::to_string(d) +
                            ", l=" + std::to_string(l) + ")");
    }
    if (d > max_d) {
        throw RejectedInput("d=" + std::to_string(d) + " exceeds the enumeration cap " +
                            std::to_string(max_d));
    }
    TrifParams p;
    p.d = d;
    p.l = l;
    p.q = Rational(l * (d - 1), d - l);
    p.r = Rational(-l, d - l);
    p.c_dm2_lm2 = binomial(d - 2, l - 2);
    p.c_dm2_lm1 = binomial(d - 2, l - 1);
    p.c_dm1_lm1 = binomial(d - 1, l - 1);
    p.c_d_l = binomial(d, l);
    if (!params_identities_hold(p)) {
        throw std::logic_error("Trif parameter identities failed for d=" + std::to_string(d) +
                               ", l=" + std::to_string(l));
    }
    return p;
}

/// All strictly increasing l-subsets of {0, ..., d-1} in lexicographic order.
inline std::vector<std::vector<int>> l_subsets(int d, int l) {
    std::vector<std::vector<int>> out;
    if (l < 0 || l > d) {
        return out;
    }
    std::vector<int> idx(static_cast<std::size_t>(l));
    for (int i = 0; i < l; ++i) {
        idx[std::size_t(i)] = i;
    }
    while (true) {
        out.push_back(idx);
        int i = l - 1;
        while (i >= 0 && idx[std::size_t(i)] == d - l + i) {
            --i;
        }
        if (i < 0) {
            break;
        }
        ++idx[std::size_t(i)];
        for (int j = i + 1; j < l; ++j) {
            idx[std::size_t(j)] = idx[std::size_t(j - 1)] + 1;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scalar domains
// ---------------------------------------------------------------------------

enum class ScalarDomainKind { UnitCircle, OneAndI, AllComplex };

inline std::string to_string(ScalarDomainKind k) {
    switch (k) {
        case ScalarDomainKind::UnitCircle: return "unit_circle";
        case ScalarDomainKind::OneAndI: return "one_and_i";
        case ScalarDomainKind::AllComplex: return "all_complex";
    }
    return "unknown";
}

inline ScalarDomainKind scalar_domain_from_string(const std::string& s) {
    if (s == "unit_circle") return ScalarDomainKind::UnitCircle;
    if (s == "one_and_i") return ScalarDomainKind::OneAndI;
    if (s == "all_complex") return ScalarDomainKind::AllComplex;
    throw RejectedInput("unknown scalar domain '" + s + "'");
}

struct ScalarDomain {
    ScalarDomainKind kind = ScalarDomainKind::UnitCircle;
    std::size_t count = 8;
    std::uint64_t seed = 0;

    /// UnitCircle: e^{i theta}, theta uniform. OneAndI: exactly {1, i}.
    /// AllComplex: complex normals with E|mu|^2 = 2.
    std::vector<Complex> samples() const {
        if (kind == ScalarDomainKind::OneAndI) {
            return {Complex(1.0, 0.0), Complex(0.0, 1.0)};
        }
        Rng rng(seed);
        std::vector<Complex> out;
        out.reserve(count);
        for (std::size_t k = 0; k < count; ++k) {
            if (kind == ScalarDomainKind::UnitCircle) {
                out.push_back(std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform()));
            } else {
                out.push_back(std::numbers::sqrt2 * rng.complex_gaussian());
            }
        }
        return out;
    }
};

struct DefectSample {
    std::vector<RingElement> xs;
    RingElement u, v, w;
    Complex mu{1.0, 0.0};
    double defect = 0.0;
    double control_value = 0.0;
};

// ---------------------------------------------------------------------------
// Defect operators
// ---------------------------------------------------------------------------

namespace detail {

inline void require_tuple(const TrifParams& p, std::span<const RingElement> xs) {
    if (xs.size() != std::size_t(p.d)) {
        throw RejectedInput("expected d=" + std::to_string(p.d) + " arguments, got " +
                            std::to_string(xs.size()));
    }
    for (const auto& x : xs) {
        RingElement::require_same_shape(xs[0], x, "Trif defect");
    }
}

/// d C(d-2,l-2) f(mu sum x / d + shift) + C(d-2,l-1) sum mu f(x_j)
///   - l sum_{subsets} mu f(sum_{subset} x / l)
template <RingMap F>
RingElement trif_residual(const F& f, const TrifParams& p, std::span<const RingElement> xs,
                          Complex mu, const RingElement* shift) {
    require_tuple(p, xs);
    RingElement lead_sum = scale(mu, xs[0]);
    for (std::size_t j = 1; j < xs.size(); ++j) {
        lead_sum = lead_sum + scale(mu, xs[j]);
    }
    RingElement lead_arg = scale(Complex(1.0 / p.d), lead_sum);
    if (shift != nullptr) {
        lead_arg = lead_arg + *shift;
    }
    RingElement acc = scale(Complex(double(p.leading_weight())), f(lead_arg));

    const Complex pointwise_weight = double(p.c_dm2_lm1) * mu;
    for (const auto& x : xs) {
        acc = acc + scale(pointwise_weight, f(x));
    }

    const Complex subset_weight = double(p.l) * mu;
    for (const auto& subset : l_subsets(p.d, p.l)) {
        RingElement s = xs[std::size_t(subset[0])];
        for (std::size_t k = 1; k < subset.size(); ++k) {
            s = s + xs[std::size_t(subset[k])];
        }
        acc = acc - scale(subset_weight, f(scale(Complex(1.0 / p.l), s)));
    }
    return acc;
}

}  // namespace detail

/// Norm of the pure Trif residual (no ternary term).
template <RingMap F>
double trif_defect(const F& f, const TrifParams& p, std::span<const RingElement> xs,
                   Complex mu = 1.0) {
    return norm(detail::trif_residual(f, p, xs, mu, nullptr));
}

/// Full D_mu f(x_1..x_d, u, v, w).
template <RingMap F>
double d_mu_defect(const F& f, const TrifParams& p, Complex mu, std::span<const RingElement> xs,
                   const RingElement& u, const RingElement& v, const RingElement& w) {
    detail::require_tuple(p, xs);
    RingElement::require_same_shape(xs[0], u, "D_mu defect");
    const RingElement shift = scale(Complex(1.0 / double(p.leading_weight())), tprod(u, v, w));
    const RingElement residual = detail::trif_residual(f, p, xs, mu, &shift);
    return norm(residual - tprod(f(u), f(v), f(w)));
}

/// (q x, r x, ..., r x): the tuple that collapses the Trif equation to one step.
inline std::vector<RingElement> substituted_tuple(const TrifParams& p, const RingElement& x) {
    std::vector<RingElement> xs;
    xs.reserve(std::size_t(p.d));
    xs.push_back(scale(p.q_value(), x));
    const RingElement rx = scale(p.r_value(), x);
    for (int j = 1; j < p.d; ++j) {
        xs.push_back(rx);
    }
    return xs;
}

/// ||C(d-2,l-1) f(qx) - l C(d-1,l-1) f(x)||; requires f(0) = 0 within tol.
template <RingMap F>
double collapse_defect(const F& f, const TrifParams& p, const RingElement& x,
                       double zero_tol = 1e-9) {
    const RingElement f0 = f(RingElement::zero(x.shape()));
    if (norm(f0) > zero_tol) {
        throw PreconditionViolation("collapse defect needs f(0) = 0, but ||f(0)|| = " +
                                    std::to_string(norm(f0)));
    }
    const RingElement lhs = scale(double(p.c_dm2_lm1), f(scale(p.q_value(), x)));
    const RingElement rhs = scale(double(p.collapse_weight()), f(x));
    return norm(lhs - rhs);
}

}  // namespace tstab
