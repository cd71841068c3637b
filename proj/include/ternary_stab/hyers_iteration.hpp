// SPDX-License-Identifier: Apache-2.0
#pragma once

// Direct-method engine: T_n(x) = q^{-n} f(q^n x), its certified Cauchy gaps,
// extraction of the limit map on the matrix-unit basis, and numerical checks
// of every property the limit is supposed to have.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ternary_stab/control_functions.hpp"
#include "ternary_stab/errors.hpp"
#include "ternary_stab/rng.hpp"
#include "ternary_stab/ternary_core.hpp"
#include "ternary_stab/tolerance.hpp"
#include "ternary_stab/trif_operator.hpp"

namespace tstab {

struct IterationOptions {
    int n_max = 20;
    /// Converged once `streak` consecutive gaps are below tol * max(1, ||T_n(x)||).
    double tol = 1e-10;
    int streak = 3;
    /// When set, each gap is compared with its certified bound.
    std::optional<ControlFunction> control;
    /// ||q^n x|| above this is treated as out of range.
    double max_magnitude = 1e150;
    /// Gaps only count toward the streak once ||q^n x|| >= probe_radius. A map
    /// that is linear on a small ball (the truncated map is) otherwise
    /// "converges" before the iteration has seen its large-scale behaviour.
    double probe_radius = 1.0;
};

struct IterationTrace {
    RingElement x;
    std::vector<RingElement> values;           ///< T_n(x) for n = 0..n_final
    std::vector<double> gaps;                  ///< gaps[n-1] = ||T_n(x) - T_{n-1}(x)||
    std::vector<double> certified_gap_bounds;  ///< parallel to gaps when a control is attached
    bool converged = false;
    int converged_at = -1;  ///< first n of the qualifying streak
    int n_final = 0;
    bool gaps_dominated = true;

    const RingElement& final_value() const { return values.back(); }
    double last_gap() const { return gaps.empty() ? 0.0 : gaps.back(); }
};

/// Thrown when a basis trace (or a limit evaluation) fails to converge.
class ExtractionFailure : public Error {
public:
    ExtractionFailure(const std::string& what, IterationTrace worst)
        : Error(what), worst_(std::move(worst)) {}
    const IterationTrace& worst_trace() const noexcept { return worst_; }

private:
    IterationTrace worst_;
};

/// (1 / (l C(d-1,l-1))) sum_{j=m}^{n-1} q^{-j} phi(q^j (qx), q^j (rx), ..., 0, 0, 0).
inline double cauchy_gap_bound(const TrifParams& p, const ControlFunction& cf,
                               const RingElement& x, int m, int n) {
    if (m < 0 || m >= n) {
        throw RejectedInput("cauchy_gap_bound needs 0 <= m < n");
    }
    const ControlArgs args = collapse_args(p, x);
    double sum = 0.0;
    for (int j = m; j < n; ++j) {
        sum += series_term(cf, p, args, j);
    }
    return sum / double(p.collapse_weight());
}

/// The m -> infinity remainder: (1 / (l C)) sum_{j>=m} q^{-j} phi(...), i.e.
/// a certified bound on ||T_m(x) - T(x)||.
inline double cauchy_tail_bound(const TrifParams& p, const ControlFunction& cf,
                                const RingElement& x, int m, const SeriesOptions& opts = {}) {
    const double qm = std::pow(p.q_value(), m);
    const ControlArgs args = collapse_args(p, x).scaled(qm);
    return phi_tilde(cf, p, args, opts).upper() / qm / double(p.collapse_weight());
}

template <RingMap F>
IterationTrace iterate(const F& f, const RingElement& x, const TrifParams& p,
                       const IterationOptions& opts = {}) {
    if (opts.n_max < 1) {
        throw RejectedInput("n_max must be at least 1");
    }
    const double q = p.q_value();
    const double nx = norm(x);

    IterationTrace trace;
    trace.x = x;
    trace.values.push_back(f(x));
    int streak = 0;
    for (int n = 1; n <= opts.n_max; ++n) {
        const double qn = std::pow(q, n);
        if (!std::isfinite(qn) || qn * nx > opts.max_magnitude) {
            throw RangeExhausted("||q^n x|| exceeds " + std::to_string(opts.max_magnitude) +
                                     " at n=" + std::to_string(n) + "; max usable n is " +
                                     std::to_string(n - 1),
                                 n - 1);
        }
        RingElement value = scale(1.0 / qn, f(scale(qn, x)));
        const double gap = norm(value - trace.values.back());
        const double value_scale = std::max(1.0, norm(value));
        trace.gaps.push_back(gap);
        if (opts.control) {
            const double bound = cauchy_gap_bound(p, *opts.control, x, n - 1, n);
            trace.certified_gap_bounds.push_back(bound);
            if (gap > bound + 1e-9 * value_scale) {
                trace.gaps_dominated = false;
            }
        }
        trace.values.push_back(std::move(value));

        const bool probed = nx == 0.0 || qn * nx >= opts.probe_radius;
        streak = probed && gap < opts.tol * value_scale ? streak + 1 : 0;
        if (streak >= opts.streak) {
            trace.converged = true;
            trace.converged_at = n - streak + 1;
            break;
        }
    }
    trace.n_final = int(trace.values.size()) - 1;
    return trace;
}

/// x -> lim q^{-n} f(q^n x), evaluated by iteration. Throws ExtractionFailure
/// when the iteration does not converge.
template <RingMap F>
class LimitMap {
public:
    LimitMap(const F& f, TrifParams p, IterationOptions opts)
        : f_(&f), p_(std::move(p)), opts_(std::move(opts)) {
        opts_.control.reset();
    }

    RingElement operator()(const RingElement& x) const { return trace(x).final_value(); }

    IterationTrace trace(const RingElement& x) const {
        IterationTrace tr = iterate(*f_, x, p_, opts_);
        if (!tr.converged) {
            throw ExtractionFailure("limit iteration did not converge within n_max=" +
                                        std::to_string(opts_.n_max) + " (last gap " +
                                        std::to_string(tr.last_gap()) + ")",
                                    std::move(tr));
        }
        return tr;
    }

private:
    const F* f_;
    TrifParams p_;
    IterationOptions opts_;
};

// ---------------------------------------------------------------------------
// Extraction
// ---------------------------------------------------------------------------

struct Provenance {
    std::string scenario;
    int d = 0;
    int l = 0;
    std::uint64_t seed = 0;
    int n_used = 0;
};

/// T on the matrix-unit basis: column k is the row-major vec of T(e_k).
struct ExtractedMap {
    Shape domain;
    Shape codomain;
    Matrix representation;
    Provenance provenance;
    std::vector<IterationTrace> basis_traces;

    RingElement operator()(const RingElement& x) const {
        RingElement::require_same_shape(RingElement::zero(domain), x, "extracted map");
        Eigen::VectorXcd coords(Eigen::Index(domain.size()));
        const auto entries = x.entries();
        for (std::size_t k = 0; k < entries.size(); ++k) {
            coords(Eigen::Index(k)) = entries[k];
        }
        const Eigen::VectorXcd image = representation * coords;
        return RingElement::from_entries(codomain,
                                         std::span<const Complex>(image.data(), std::size_t(image.size())));
    }
};

/// Traces of every matrix unit of `domain`; never throws on non-convergence.
template <RingMap F>
std::vector<IterationTrace> basis_traces(const F& f, Shape domain, const TrifParams& p,
                                         const IterationOptions& opts) {
    std::vector<IterationTrace> traces;
    traces.reserve(domain.size());
    for (std::size_t i = 0; i < domain.rows; ++i) {
        for (std::size_t j = 0; j < domain.cols; ++j) {
            traces.push_back(iterate(f, RingElement::matrix_unit(domain, i, j), p, opts));
        }
    }
    return traces;
}

inline ExtractedMap assemble_map(Shape domain, std::vector<IterationTrace> traces,
                                 Provenance provenance) {
    ExtractedMap out;
    out.domain = domain;
    out.codomain = traces.front().final_value().shape();
    out.representation = Matrix::Zero(Eigen::Index(out.codomain.size()), Eigen::Index(domain.size()));
    int n_used = 0;
    for (std::size_t k = 0; k < traces.size(); ++k) {
        const auto image = traces[k].final_value().entries();
        for (std::size_t r = 0; r < image.size(); ++r) {
            out.representation(Eigen::Index(r), Eigen::Index(k)) = image[r];
        }
        n_used = std::max(n_used, traces[k].n_final);
    }
    out.provenance = std::move(provenance);
    out.provenance.n_used = n_used;
    out.basis_traces = std::move(traces);
    return out;
}

template <RingMap F>
ExtractedMap extract_map(const F& f, Shape domain, const TrifParams& p,
                         const IterationOptions& opts = {}, Provenance provenance = {}) {
    validate_shape(domain);
    auto traces = basis_traces(f, domain, p, opts);
    const IterationTrace* worst = nullptr;
    for (const auto& tr : traces) {
        if (!tr.converged && (worst == nullptr || tr.last_gap() > worst->last_gap())) {
            worst = &tr;
        }
    }
    if (worst != nullptr) {
        throw ExtractionFailure("basis trace did not converge within n_max=" +
                                    std::to_string(opts.n_max) + " (last gap " +
                                    std::to_string(worst->last_gap()) + ")",
                                *worst);
    }
    provenance.d = p.d;
    provenance.l = p.l;
    return assemble_map(domain, std::move(traces), std::move(provenance));
}

// ---------------------------------------------------------------------------
// Verdicts
// ---------------------------------------------------------------------------

struct CheckResult {
    std::string name;
    double max_residual = 0.0;
    double threshold = 0.0;
    bool passed = true;
    std::string note;
};

struct VerificationVerdict {
    std::vector<CheckResult> checks;
    std::uint64_t seed = 0;
    std::size_t samples = 0;
    /// False when a premise failed and the conclusion checks are reported only.
    bool conclusion_asserted = true;

    bool passed() const {
        return conclusion_asserted &&
               std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
    }

    const CheckResult* find(const std::string& name) const {
        for (const auto& c : checks) {
            if (c.name == name) {
                return &c;
            }
        }
        return nullptr;
    }

    void add(std::string name, double residual, double threshold, std::string note = {}) {
        checks.push_back({std::move(name), residual, threshold, residual <= threshold, std::move(note)});
    }
};

// ---------------------------------------------------------------------------
// Scalars
// ---------------------------------------------------------------------------

/// mu_1 + mu_2 = 2 lambda / M with |mu_1| = |mu_2| = 1.
inline std::pair<Complex, Complex> unimodular_decompose(Complex lambda, int M) {
    if (lambda == Complex(0.0)) {
        throw PreconditionViolation("unimodular decomposition needs lambda != 0");
    }
    if (!(double(M) > std::abs(lambda))) {
        throw PreconditionViolation("unimodular decomposition needs M > |lambda|");
    }
    const Complex z = 2.0 * lambda / double(M);
    const double modulus = std::abs(z);
    const Complex direction = z / modulus;
    const double c = modulus / 2.0;
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    return {direction * Complex(c, s), direction * Complex(c, -s)};
}

struct IHomogeneity {
    double i_residual = 0.0;
    double lambda_residual = 0.0;
    bool passed = true;
};

/// max ||T(ix) - iT(x)|| and, for lambda = a1 + i a2, the larger of
/// ||T(lambda x) - (a1 T(x) + a2 T(ix))|| and ||T(lambda x) - lambda T(x)||,
/// each relative to max(1, |lambda| ||x||).
template <RingMap F>
IHomogeneity verify_i_homogeneity(const F& T, Shape domain, std::size_t samples,
                                  std::uint64_t seed, double tol = 1e-8) {
    IHomogeneity out;
    ElementSampler sampler(domain, 2.0, seed);
    Rng scalars(derive_seed(seed, 0xC0FFEE));
    const Complex i(0.0, 1.0);
    for (std::size_t k = 0; k < samples; ++k) {
        const RingElement x = sampler.next();
        const double nx = norm(x);
        const RingElement tx = T(x);
        const RingElement tix = T(scale(i, x));
        out.i_residual = std::max(out.i_residual, norm(tix - scale(i, tx)) / std::max(1.0, nx));

        const Complex lambda = 2.0 * scalars.complex_gaussian();
        const RingElement tlx = T(scale(lambda, x));
        const RingElement via_parts = scale(lambda.real(), tx) + scale(lambda.imag(), tix);
        const double ref = std::max(1.0, std::abs(lambda) * nx);
        out.lambda_residual = std::max({out.lambda_residual, norm(tlx - via_parts) / ref,
                                        norm(tlx - scale(lambda, tx)) / ref});
    }
    out.passed = out.i_residual <= tol && out.lambda_residual <= tol;
    return out;
}

// ---------------------------------------------------------------------------
// Uniqueness
// ---------------------------------------------------------------------------

struct UniquenessResult {
    double max_deviation = 0.0;
    double max_combined_tail = 0.0;
    /// max deviation / (combined tails + float floor); <= 1 passes.
    double utilization = 0.0;
    bool passed = true;
};

/// Shift-invariance of the extraction: T^(o)(x) = q^{-o} lim q^{-n} f(q^n q^o x)
/// must agree across offsets within the sum of their certified tails.
template <RingMap F>
UniquenessResult uniqueness_probe(const F& f, const TrifParams& p, const ControlFunction& cf,
                                  const std::vector<int>& offsets,
                                  const std::vector<RingElement>& x_samples,
                                  const IterationOptions& opts = {}) {
    UniquenessResult out;
    const LimitMap<F> limit(f, p, opts);
    const double q = p.q_value();
    for (const auto& x : x_samples) {
        std::vector<RingElement> values;
        std::vector<double> tails;
        for (int o : offsets) {
            const double qo = std::pow(q, o);
            const RingElement shifted = scale(qo, x);
            const IterationTrace tr = limit.trace(shifted);
            values.push_back(scale(1.0 / qo, tr.final_value()));
            tails.push_back(cauchy_tail_bound(p, cf, shifted, tr.n_final) / qo);
        }
        const double scale_ref = std::max(1.0, norm(values.front()));
        for (std::size_t a = 0; a < values.size(); ++a) {
            for (std::size_t b = a + 1; b < values.size(); ++b) {
                const double dev = norm(values[a] - values[b]);
                const double tail = tails[a] + tails[b];
                const double allowed = allowed_bound(tail, 1e-9, scale_ref);
                out.max_deviation = std::max(out.max_deviation, dev);
                out.max_combined_tail = std::max(out.max_combined_tail, tail);
                out.utilization = std::max(out.utilization, dev / allowed);
            }
        }
    }
    out.passed = out.utilization <= 1.0;
    return out;
}

// ---------------------------------------------------------------------------
// Conclusions of the stability theorem
// ---------------------------------------------------------------------------

struct VerifyOptions {
    std::size_t samples = 500;
    std::uint64_t seed = 0;
    double tol = 1e-8;        ///< additivity / homogeneity / multiplicativity / representation
    double bound_tol = 1e-9;  ///< relative slack on the stability bound
    double radius = 2.0;
    std::vector<int> offsets{0, 1, 2, 3};
    IterationOptions iteration;
    SeriesOptions series;
    /// Judge the bound against phi~ without the 1/(l C) prefactor (the looser form).
    bool bound_without_prefactor = false;
};

/// Checks, on sampled points, everything the limit map is claimed to satisfy.
/// T-values come from the limit iteration itself, so the checks do not
/// presuppose the linearity the representation assumes; "representation"
/// ties the two together.
template <RingMap F>
VerificationVerdict verify_conclusions(const ExtractedMap& T, const F& f, const ControlFunction& cf,
                                       const TrifParams& p, const ScalarDomain& domain,
                                       const VerifyOptions& opts = {}) {
    VerificationVerdict verdict;
    verdict.seed = opts.seed;
    verdict.samples = opts.samples;

    const LimitMap<F> limit(f, p, opts.iteration);
    ElementSampler sampler(T.domain, opts.radius, derive_seed(opts.seed, 1));
    ScalarDomain mu_domain = domain;
    mu_domain.count = std::max<std::size_t>(opts.samples, 1);
    mu_domain.seed = derive_seed(opts.seed, 2);
    const std::vector<Complex> mus = mu_domain.samples();

    double additivity = 0.0, homogeneity = 0.0, multiplicativity = 0.0, representation = 0.0;
    double bound_util = 0.0, bound_util_other = 0.0;
    std::vector<RingElement> uniqueness_points;
    uniqueness_points.reserve(opts.samples);

    for (std::size_t k = 0; k < opts.samples; ++k) {
        const RingElement x = sampler.next();
        const RingElement y = sampler.next();
        const RingElement u = sampler.next();
        const RingElement v = sampler.next();
        const RingElement w = sampler.next();
        const Complex mu = mus[k % mus.size()];
        const double nx = norm(x), ny = norm(y);

        const RingElement tx = limit(x);
        const RingElement ty = limit(y);
        additivity = std::max(additivity,
                              norm(limit(x + y) - tx - ty) / std::max(1.0, nx + ny));
        homogeneity = std::max(homogeneity, norm(limit(scale(mu, x)) - scale(mu, tx)) /
                                                std::max(1.0, std::abs(mu) * nx));
        const double ref3 = std::max(1.0, norm(u) * norm(v) * norm(w));
        multiplicativity = std::max(
            multiplicativity, norm(limit(tprod(u, v, w)) - tprod(limit(u), limit(v), limit(w))) / ref3);
        representation = std::max(representation, norm(T(x) - tx) / std::max(1.0, nx));

        const double distance = norm(f(x) - tx);
        const double with = stability_bound(cf, p, x, opts.series);
        const double without = stability_bound_unprefixed(cf, p, x, opts.series);
        const double judged = opts.bound_without_prefactor ? without : with;
        const double other = opts.bound_without_prefactor ? with : without;
        bound_util = std::max(bound_util, distance / allowed_bound(judged, opts.bound_tol, nx));
        bound_util_other = std::max(bound_util_other, distance / allowed_bound(other, opts.bound_tol, nx));

        uniqueness_points.push_back(x);
    }

    verdict.add("additivity", additivity, opts.tol);
    verdict.add("homogeneity", homogeneity, opts.tol, "mu from " + to_string(domain.kind));
    verdict.add("multiplicativity", multiplicativity, opts.tol);
    verdict.add("representation", representation, opts.tol);
    verdict.add("bound", bound_util, 1.0,
                opts.bound_without_prefactor ? "utilisation of phi~ without 1/(l C) prefactor"
                                             : "utilisation of (1/(l C)) phi~");
    verdict.checks.push_back({"bound_other_variant", bound_util_other, 1.0, true,
                              "informational: utilisation of the other bound variant"});

    const auto uniq = uniqueness_probe(f, p, cf, opts.offsets, uniqueness_points, opts.iteration);
    verdict.add("uniqueness", uniq.utilization, 1.0,
                "max deviation " + std::to_string(uniq.max_deviation) + " vs combined tails up to " +
                    std::to_string(uniq.max_combined_tail));

    if (domain.kind == ScalarDomainKind::OneAndI) {
        const auto ih = verify_i_homogeneity(limit, T.domain, std::min<std::size_t>(opts.samples, 100),
                                             derive_seed(opts.seed, 3), opts.tol);
        verdict.add("i_homogeneity", ih.i_residual, opts.tol);
        verdict.add("lambda_homogeneity", ih.lambda_residual, opts.tol);
    }
    return verdict;
}

// ---------------------------------------------------------------------------
// Exactness (an approximate homomorphism with T(qx) = qT(x) is exact)
// ---------------------------------------------------------------------------

struct ExactnessOptions {
    std::size_t samples = 100;
    int horizon = 20;
    std::uint64_t seed = 0;
    double tol = 1e-9;
    double margin = 0.05;
    double radius = 2.0;
};

/// Premises: (a) T(qx) = qT(x) on samples; (b) q^{-n} phi(q^n args) decays
/// geometrically over the horizon. Conclusions (Trif defect, homogeneity over
/// all of C, multiplicativity) are always measured but only asserted when both
/// premises hold.
template <RingMap F>
VerificationVerdict exactness_check(const F& T, Shape domain, const ControlFunction& cf,
                                    const TrifParams& p, const ExactnessOptions& opts = {}) {
    VerificationVerdict verdict;
    verdict.seed = opts.seed;
    verdict.samples = opts.samples;
    const double q = p.q_value();
    ElementSampler sampler(domain, opts.radius, derive_seed(opts.seed, 11));
    ScalarDomain all{ScalarDomainKind::AllComplex, opts.samples, derive_seed(opts.seed, 12)};
    const auto lambdas = all.samples();

    double scaling = 0.0, scaling_util = 0.0;
    double defect = 0.0, homog = 0.0, mult = 0.0;
    std::vector<ControlArgs> probe_points;
    for (std::size_t k = 0; k < opts.samples; ++k) {
        const RingElement x = sampler.next();
        const double nx = norm(x);
        const double r = norm(T(scale(q, x)) - scale(q, T(x)));
        scaling = std::max(scaling, r);
        scaling_util = std::max(scaling_util, r / (opts.tol * std::max(1.0, q * nx)));

        std::vector<RingElement> xs;
        double max_x = 0.0;
        for (int j = 0; j < p.d; ++j) {
            xs.push_back(sampler.next());
            max_x = std::max(max_x, norm(xs.back()));
        }
        defect = std::max(defect, trif_defect(T, p, xs, 1.0) / std::max(1.0, max_x));

        const Complex lambda = lambdas[k];
        homog = std::max(homog, norm(T(scale(lambda, x)) - scale(lambda, T(x))) /
                                    std::max(1.0, std::abs(lambda) * nx));

        const RingElement u = sampler.next(), v = sampler.next(), w = sampler.next();
        mult = std::max(mult, norm(T(tprod(u, v, w)) - tprod(T(u), T(v), T(w))) /
                                  std::max(1.0, norm(u) * norm(v) * norm(w)));
        if (probe_points.size() < 8) {
            probe_points.push_back({xs, u, v, w});
        }
    }

    verdict.checks.push_back({"scaling_premise", scaling, opts.tol, scaling_util <= 1.0,
                              "max ||T(qx) - qT(x)|| (absolute); threshold is relative to max(1, ||qx||)"});
    const auto probe = summability_probe(cf, p, probe_points, std::max(opts.horizon, 8), opts.margin);
    verdict.checks.push_back({"control_vanishing", probe.ratio, 1.0 - opts.margin, probe.pass,
                              "estimated ratio of q^{-n} phi(q^n args)"});
    verdict.conclusion_asserted = verdict.checks[0].passed && verdict.checks[1].passed;
    const std::string note = verdict.conclusion_asserted ? "" : "withheld: premise failed";
    verdict.add("trif_defect", defect, opts.tol, note);
    verdict.add("homogeneity_all_complex", homog, opts.tol, note);
    verdict.add("multiplicativity", mult, opts.tol, note);
    return verdict;
}

// ---------------------------------------------------------------------------
// Spanning-set factorisation
// ---------------------------------------------------------------------------

struct FactorizationOptions {
    double tol = 1e-9;
    double idempotent_tol = 1e-12;
    IterationOptions iteration;
    std::size_t multiplicativity_samples = 50;
    std::uint64_t seed = 0;
    double mult_tol = 1e-8;
};

struct FactorizationVerdict {
    std::vector<std::pair<int, double>> residual_per_n;
    double max_residual = 0.0;
    double chain_residual = 0.0;             ///< ||T([s1 s2 z]) - [T(s1) T(s2) f(z)]||, relative
    double multiplicativity_residual = 0.0;  ///< ||T([xyz]) - [T(x) T(y) T(z)]||, relative
    bool passed = false;
    ExtractedMap extracted;
};

/// f(q^{2n}[s1 s2 z]) = [f(q^n s1) f(q^n s2) f(z)] on the span, then extraction
/// and multiplicativity of the limit.
template <RingMap F>
FactorizationVerdict factorization_check(const F& f, const TrifParams& p,
                                         const std::vector<RingElement>& span,
                                         const std::vector<RingElement>& z_samples,
                                         const std::vector<int>& n_list,
                                         const FactorizationOptions& opts = {}) {
    if (span.empty()) {
        throw RejectedInput("factorization check needs a non-empty spanning set");
    }
    for (const auto& s : span) {
        const double r = norm(tprod(s, s, s) - s);
        if (r > opts.idempotent_tol * std::max(1.0, norm(s))) {
            throw PreconditionViolation("spanning element is not a ternary idempotent: ||[sss] - s|| = " +
                                        std::to_string(r));
        }
    }
    FactorizationVerdict out;
    const double q = p.q_value();
    for (int n : n_list) {
        const double qn = std::pow(q, n);
        double worst = 0.0;
        for (const auto& s1 : span) {
            for (const auto& s2 : span) {
                const RingElement fs1 = f(scale(qn, s1));
                const RingElement fs2 = f(scale(qn, s2));
                for (const auto& z : z_samples) {
                    const RingElement lhs = f(scale(qn * qn, tprod(s1, s2, z)));
                    const RingElement rhs = tprod(fs1, fs2, f(z));
                    worst = std::max(worst, norm(lhs - rhs) / std::max(1.0, norm(lhs)));
                }
            }
        }
        out.residual_per_n.emplace_back(n, worst);
        out.max_residual = std::max(out.max_residual, worst);
    }

    out.extracted = extract_map(f, span.front().shape(), p, opts.iteration);
    const ExtractedMap& T = out.extracted;
    for (const auto& s1 : span) {
        for (const auto& s2 : span) {
            for (const auto& z : z_samples) {
                const RingElement lhs = T(tprod(s1, s2, z));
                const RingElement rhs = tprod(T(s1), T(s2), f(z));
                out.chain_residual = std::max(out.chain_residual,
                                              norm(lhs - rhs) / std::max(1.0, norm(z)));
            }
        }
    }
    ElementSampler sampler(T.domain, 2.0, derive_seed(opts.seed, 21));
    for (std::size_t k = 0; k < opts.multiplicativity_samples; ++k) {
        const RingElement x = sampler.next(), y = sampler.next(), z = sampler.next();
        out.multiplicativity_residual =
            std::max(out.multiplicativity_residual, norm(T(tprod(x, y, z)) - tprod(T(x), T(y), T(z))) /
                                                        std::max(1.0, norm(x) * norm(y) * norm(z)));
    }
    out.passed = out.max_residual <= opts.tol && out.chain_residual <= opts.mult_tol &&
                 out.multiplicativity_residual <= opts.mult_tol;
    return out;
}

}  // namespace tstab
