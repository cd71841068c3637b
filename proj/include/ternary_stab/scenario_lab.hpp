// SPDX-License-Identifier: Apache-2.0
#pragma once

// Approximate homomorphisms with known ground truth.
//
// Noise lives in the "orthogonal corner" of the codomain: with S(x) = U x V*
// and P = I - UU*, Q = I - VV*, every noise value has the form P N Q. All
// cross terms of [f(u) f(v) f(w)] then vanish and
//
//     [f(u) f(v) f(w)] = [S(u) S(v) S(w)] + [eta(u) eta(v) eta(w)],
//
// so a bounded (or compactly supported) eta keeps D_mu f bounded by a control
// we can write down. Without the corner, [eta S S] grows with the arguments
// and no summable control exists.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ternary_stab/control_functions.hpp"
#include "ternary_stab/errors.hpp"
#include "ternary_stab/parallel.hpp"
#include "ternary_stab/rng.hpp"
#include "ternary_stab/ternary_core.hpp"
#include "ternary_stab/tolerance.hpp"
#include "ternary_stab/trif_operator.hpp"

namespace tstab {

// ---------------------------------------------------------------------------
// Exact homomorphisms
// ---------------------------------------------------------------------------

inline double isometry_residual(const Matrix& m) {
    const Matrix gram = m.adjoint() * m;
    return spectral_norm(gram - Matrix::Identity(gram.rows(), gram.cols()));
}

/// S(x) = U x V* with U*U = I and V*V = I.
class ExactHom {
public:
    static ExactHom make(Matrix U, Matrix V, double tol = 1e-12) {
        if (U.rows() < U.cols() || V.rows() < V.cols()) {
            throw RejectedInput("isometries need at least as many rows as columns");
        }
        const double ru = isometry_residual(U);
        const double rv = isometry_residual(V);
        if (ru > tol || rv > tol) {
            throw RejectedInput("not an isometry pair: ||U*U - I|| = " + std::to_string(ru) +
                                ", ||V*V - I|| = " + std::to_string(rv));
        }
        return ExactHom(std::move(U), std::move(V));
    }

    Shape domain() const { return {std::size_t(U_.cols()), std::size_t(V_.cols())}; }
    Shape codomain() const { return {std::size_t(U_.rows()), std::size_t(V_.rows())}; }
    const Matrix& U() const { return U_; }
    const Matrix& V() const { return V_; }

    RingElement operator()(const RingElement& x) const {
        RingElement::require_same_shape(RingElement::zero(domain()), x, "exact homomorphism");
        return RingElement::from_matrix(U_ * x.matrix() * V_.adjoint());
    }

    double residual() const { return std::max(isometry_residual(U_), isometry_residual(V_)); }

    /// Matrix of S on the matrix-unit bases (row-major vec convention).
    Matrix representation() const {
        const Shape in = domain(), out = codomain();
        Matrix rep = Matrix::Zero(Eigen::Index(out.size()), Eigen::Index(in.size()));
        for (std::size_t i = 0; i < in.rows; ++i) {
            for (std::size_t j = 0; j < in.cols; ++j) {
                const auto image = (*this)(RingElement::matrix_unit(in, i, j)).entries();
                for (std::size_t r = 0; r < image.size(); ++r) {
                    rep(Eigen::Index(r), Eigen::Index(i * in.cols + j)) = image[r];
                }
            }
        }
        return rep;
    }

    /// (I - UU*) and (I - VV*): projections onto the part of the codomain S never reaches.
    Matrix row_complement() const {
        return Matrix::Identity(U_.rows(), U_.rows()) - U_ * U_.adjoint();
    }
    Matrix col_complement() const {
        return Matrix::Identity(V_.rows(), V_.rows()) - V_ * V_.adjoint();
    }
    bool has_orthogonal_corner() const { return U_.rows() > U_.cols() && V_.rows() > V_.cols(); }

private:
    ExactHom(Matrix U, Matrix V) : U_(std::move(U)), V_(std::move(V)) {}
    Matrix U_, V_;
};

/// First `cols` columns of the unitary factor of a seeded complex Gaussian matrix.
inline Matrix random_isometry(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    if (rows < cols) {
        throw RejectedInput("an isometry needs rows >= cols");
    }
    Rng rng(seed);
    const auto n = static_cast<Eigen::Index>(rows);
    Matrix g(n, n);
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
        for (Eigen::Index j = 0; j < g.cols(); ++j) {
            g(i, j) = rng.complex_gaussian();
        }
    }
    Eigen::HouseholderQR<Matrix> qr(g);
    const Matrix Q = qr.householderQ();
    return Q.leftCols(Eigen::Index(cols));
}

inline ExactHom random_exact_hom(Shape domain, Shape codomain, std::uint64_t seed) {
    validate_shape(domain);
    validate_shape(codomain);
    return ExactHom::make(random_isometry(codomain.rows, domain.rows, derive_seed(seed, 1)),
                          random_isometry(codomain.cols, domain.cols, derive_seed(seed, 2)));
}

// ---------------------------------------------------------------------------
// Maps under test
// ---------------------------------------------------------------------------

enum class ScenarioKind { Exact, Truncated, ConstantNoise, PNormNoise, TrifNoise, OneAndI };

inline std::string to_string(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::Exact: return "exact";
        case ScenarioKind::Truncated: return "truncated";
        case ScenarioKind::ConstantNoise: return "constant_noise";
        case ScenarioKind::PNormNoise: return "pnorm_noise";
        case ScenarioKind::TrifNoise: return "trif_noise";
        case ScenarioKind::OneAndI: return "one_and_i";
    }
    return "unknown";
}

inline ScenarioKind scenario_kind_from_string(const std::string& s) {
    for (auto k : {ScenarioKind::Exact, ScenarioKind::Truncated, ScenarioKind::ConstantNoise,
                   ScenarioKind::PNormNoise, ScenarioKind::TrifNoise, ScenarioKind::OneAndI}) {
        if (to_string(k) == s) {
            return k;
        }
    }
    throw RejectedInput("unsupported scenario kind '" + s + "'");
}

/// Which defect the attached control dominates.
enum class ControlScope {
    Full,     ///< D_mu f, ternary term included
    TrifOnly  ///< the Trif part alone (spanning-set scenarios)
};

struct ScenarioMetadata {
    std::string id;
    ScenarioKind kind = ScenarioKind::Exact;
    ControlScope scope = ControlScope::Full;
    ScalarDomainKind scalar_domain = ScalarDomainKind::UnitCircle;
    std::uint64_t seed = 0;
    nlohmann::json params = nlohmann::json::object();
};

struct MapUnderTest {
    Shape domain;
    Shape codomain;
    std::function<RingElement(const RingElement&)> evaluator;
    ScenarioMetadata meta;
    std::optional<ExactHom> ground_truth;
    ControlFunction control = ControlFunction::constant(0.0);

    RingElement operator()(const RingElement& x) const { return evaluator(x); }

    nlohmann::json descriptor() const {
        return {{"id", meta.id},
                {"kind", to_string(meta.kind)},
                {"seed", meta.seed},
                {"domain", {domain.rows, domain.cols}},
                {"codomain", {codomain.rows, codomain.cols}},
                {"scalar_domain", to_string(meta.scalar_domain)},
                {"control_scope", meta.scope == ControlScope::Full ? "full" : "trif_only"},
                {"control", control.to_json()},
                {"params", meta.params}};
    }
};

// ---------------------------------------------------------------------------
// Domination
// ---------------------------------------------------------------------------

struct DominationReport {
    std::vector<DefectSample> samples;
    double max_defect = 0.0;
    double max_control = 0.0;
    std::size_t violations = 0;

    bool all_dominated() const { return violations == 0; }
};

/// Float slack for one defect evaluation.
inline double defect_slack(const DefectSample& s) {
    double scale = norm(s.u) * norm(s.v) * norm(s.w);
    for (const auto& x : s.xs) {
        scale = std::max(scale, norm(x));
    }
    return 1e-9 * std::max(1.0, scale) * std::max(1.0, std::abs(s.mu));
}

inline bool dominated(const DefectSample& s) {
    return s.defect <= s.control_value + defect_slack(s);
}

/// Samples (x_1..x_d, u, v, w) with norms <= radius and mu from the map's
/// scalar domain, evaluates the scoped defect and the control. Sample k only
/// depends on (seed, k), so the result is independent of thread scheduling.
inline DominationReport domination_check(const MapUnderTest& f, const TrifParams& p,
                                         std::size_t samples, std::uint64_t seed,
                                         double radius = 2.0,
                                         std::optional<ControlFunction> control = std::nullopt) {
    const ControlFunction& cf = control ? *control : f.control;
    ScalarDomain mus{f.meta.scalar_domain, std::max<std::size_t>(samples, 1), derive_seed(seed, 7)};
    const auto mu_values = mus.samples();

    DominationReport report;
    report.samples = parallel_map<DefectSample>(samples, [&](std::size_t k) {
        ElementSampler sampler(f.domain, radius, derive_seed(seed, 1000 + k));
        DefectSample s;
        for (int j = 0; j < p.d; ++j) {
            s.xs.push_back(sampler.next());
        }
        s.mu = mu_values[k % mu_values.size()];
        if (f.meta.scope == ControlScope::Full) {
            s.u = sampler.next();
            s.v = sampler.next();
            s.w = sampler.next();
            s.defect = d_mu_defect(f, p, s.mu, s.xs, s.u, s.v, s.w);
        } else {
            s.u = s.v = s.w = RingElement::zero(f.domain);
            s.defect = trif_defect(f, p, s.xs, s.mu);
        }
        s.control_value = eval_control(cf, ControlArgs{s.xs, s.u, s.v, s.w});
        return s;
    });
    for (const auto& s : report.samples) {
        report.max_defect = std::max(report.max_defect, s.defect);
        report.max_control = std::max(report.max_control, s.control_value);
        if (!dominated(s)) {
            ++report.violations;
        }
    }
    return report;
}

namespace detail {

inline constexpr std::size_t kSpotCheckSamples = 50;

inline MapUnderTest spot_checked(MapUnderTest m, const TrifParams& p) {
    const auto report = domination_check(m, p, kSpotCheckSamples, derive_seed(m.meta.seed, 0x5107));
    if (!report.all_dominated()) {
        throw std::logic_error("scenario '" + m.meta.id + "' failed its construction-time domination check (" +
                               std::to_string(report.violations) + " of " +
                               std::to_string(kSpotCheckSamples) + " samples)");
    }
    return m;
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h = (h ^ c) * 0x100000001b3ULL;
    }
    return h;
}

/// Hash of x's entries quantized to a 2^-20 grid; 0 iff every entry rounds to 0.
inline std::uint64_t quantized_hash(const RingElement& x, std::uint64_t seed) {
    constexpr double kGrid = 1048576.0;  // 2^20
    constexpr double kSafe = 4.0e18;
    std::uint64_t h = 0;
    bool any = false;
    auto feed = [&](double v) {
        const double scaled = v * kGrid;
        std::uint64_t word;
        if (std::abs(scaled) < kSafe) {
            const long long k = std::llround(scaled);
            word = static_cast<std::uint64_t>(k);
            any = any || k != 0;
        } else {
            word = std::bit_cast<std::uint64_t>(v);
            any = true;
        }
        h = mix64(h ^ word);
    };
    for (const Complex& c : x.entries()) {
        feed(c.real());
        feed(c.imag());
    }
    return any ? mix64(h ^ seed) | 1ULL : 0;  // never 0 when some entry is nonzero
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Noise fields
// ---------------------------------------------------------------------------

enum class NoiseKind { ConstantBall, PNorm };
enum class NoiseField {
    Hash,   ///< pseudo-random per quantized input
    Smooth  ///< delta' (1 - cos(Re tr(A* x))) / 2 E: continuous along real rays
};

struct NoiseSpec {
    NoiseKind kind = NoiseKind::ConstantBall;
    double delta = 0.0;          ///< ||eta|| <= delta (ConstantBall)
    double eps = 0.0;            ///< ||eta(x)|| <= eps ||x||^p (PNorm)
    double p = 0.5;
    double support_radius = 4.0; ///< PNorm noise is zero for ||x|| > support_radius
    NoiseField field = NoiseField::Hash;

    static NoiseSpec constant_ball(double delta, NoiseField field = NoiseField::Hash) {
        NoiseSpec s;
        s.kind = NoiseKind::ConstantBall;
        s.delta = delta;
        s.field = field;
        return s;
    }
    static NoiseSpec pnorm(double eps, double p, double support_radius = 4.0) {
        NoiseSpec s;
        s.kind = NoiseKind::PNorm;
        s.eps = eps;
        s.p = p;
        s.support_radius = support_radius;
        return s;
    }
};

/// A Gaussian matrix in the corner P N Q, Frobenius-normalised (so spectral norm <= 1).
/// Returns zero if the projected matrix vanishes.
inline Matrix corner_direction(const Matrix& P, const Matrix& Q, std::uint64_t seed) {
    FastRng rng(seed);
    Matrix n(P.rows(), Q.rows());
    for (Eigen::Index i = 0; i < n.rows(); ++i) {
        for (Eigen::Index j = 0; j < n.cols(); ++j) {
            n(i, j) = rng.complex_gaussian();
        }
    }
    Matrix c = P * n * Q;
    const double fro = c.norm();
    if (fro > 0.0) {
        c /= fro;
    }
    return c;
}

/// Attached control for S + eta with eta in the orthogonal corner.
///
/// Constant: each f-term of D_mu contributes at most its weight times delta',
/// the cube term delta'^3.
///
/// PNorm (support radius R): with K_x = d C(d-2,l-2) + C(d-2,l-1) + l C(d-1,l-1)
/// and K_uvw = d C(d-2,l-2) max(1, R^p) + eps'^2 R^{2p}, the defect is at most
/// eps' (K_x sum ||x_j||^p + K_uvw (||u||^p + ||v||^p + ||w||^p)).
inline ControlFunction noise_control(const NoiseSpec& spec, const TrifParams& p) {
    if (spec.kind == NoiseKind::ConstantBall) {
        const double weight = double(p.leading_weight() + p.d * p.c_dm2_lm1 + p.l * p.c_d_l);
        return ControlFunction::constant(spec.delta * weight + std::pow(spec.delta, 3));
    }
    const double rp = std::pow(spec.support_radius, spec.p);
    const double k_x = double(p.leading_weight() + p.c_dm2_lm1 + p.collapse_weight());
    const double k_uvw = double(p.leading_weight()) * std::max(1.0, rp) + spec.eps * spec.eps * rp * rp;
    return ControlFunction::pnorm(spec.eps * std::max(k_x, k_uvw), spec.p);
}

/// Exact map; the control is Constant(0) and the defect must vanish up to rounding.
inline MapUnderTest make_isometry_hom(const ExactHom& S, const TrifParams& p, std::uint64_t seed = 0,
                                      ScalarDomainKind domain = ScalarDomainKind::AllComplex) {
    MapUnderTest m;
    m.domain = S.domain();
    m.codomain = S.codomain();
    m.evaluator = [S](const RingElement& x) { return S(x); };
    m.meta.id = "exact/" + m.domain.str();
    m.meta.kind = ScenarioKind::Exact;
    m.meta.scalar_domain = domain;
    m.meta.seed = seed;
    m.ground_truth = S;
    m.control = ControlFunction::constant(0.0);
    return detail::spot_checked(std::move(m), p);
}

/// d C(d-2,l-2) + d C(d-2,l-1) + l C(d,l) + 1.
inline double truncated_delta(const TrifParams& p) {
    return double(p.leading_weight() + p.d * p.c_dm2_lm1 + p.l * p.c_d_l + 1);
}

/// f(x) = S(x) for ||x|| < 1 and 0 otherwise; S must preserve norms for the
/// constant control to dominate.
inline MapUnderTest make_truncated_hom(const ExactHom& S, const TrifParams& p, std::uint64_t seed = 0) {
    MapUnderTest m;
    m.domain = S.domain();
    m.codomain = S.codomain();
    const Shape codomain = m.codomain;
    m.evaluator = [S, codomain](const RingElement& x) {
        return norm(x) < 1.0 ? S(x) : RingElement::zero(codomain);
    };
    m.meta.id = "truncated/" + m.domain.str();
    m.meta.kind = ScenarioKind::Truncated;
    m.meta.seed = seed;
    m.meta.params = {{"delta", truncated_delta(p)}, {"expected_limit", "zero map"}};
    m.ground_truth = S;
    m.control = ControlFunction::constant(truncated_delta(p));
    return detail::spot_checked(std::move(m), p);
}

/// S + eta with eta in the orthogonal corner of the codomain.
inline MapUnderTest make_perturbed_hom(const ExactHom& S, const NoiseSpec& spec, const TrifParams& p,
                                       std::uint64_t seed) {
    const double amplitude = spec.kind == NoiseKind::ConstantBall ? spec.delta : spec.eps;
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
        throw RejectedInput("noise amplitude must be finite and >= 0");
    }
    if (spec.kind == NoiseKind::PNorm && !(spec.p >= 0.0 && spec.p < 1.0)) {
        throw RejectedInput("p-norm noise needs p in [0,1)");
    }
    if (amplitude > 0.0 && !S.has_orthogonal_corner()) {
        throw RejectedInput("noisy scenarios need a codomain strictly larger than the domain in "
                            "both dimensions (noise lives in the orthogonal corner)");
    }
    const Matrix P = S.row_complement();
    const Matrix Q = S.col_complement();
    const std::uint64_t noise_seed = derive_seed(seed, 0x401);

    MapUnderTest m;
    m.domain = S.domain();
    m.codomain = S.codomain();
    if (spec.field == NoiseField::Smooth) {
        if (spec.kind != NoiseKind::ConstantBall) {
            throw RejectedInput("the smooth noise field supports constant-ball noise only");
        }
        const Matrix E = corner_direction(P, Q, noise_seed);
        const RingElement A = random_element(m.domain, 1.0, derive_seed(noise_seed, 1));
        const double delta = spec.delta;
        m.evaluator = [S, E, A, delta](const RingElement& x) {
            const double phase = (A.matrix().adjoint() * x.matrix()).trace().real();
            // No linear part at 0, so the iteration cannot mistake the
            // small-scale behaviour for the limit.
            return RingElement::from_matrix(S(x).matrix() + (delta * 0.5 * (1.0 - std::cos(phase))) * E);
        };
    } else {
        m.evaluator = [S, P, Q, spec, noise_seed](const RingElement& x) {
            RingElement sx = S(x);
            double amp = spec.delta;
            if (spec.kind == NoiseKind::PNorm) {
                const double nx = norm(x);
                amp = nx > spec.support_radius ? 0.0 : spec.eps * norm_power(nx, spec.p);
            }
            if (amp == 0.0) {
                return sx;
            }
            const std::uint64_t h = detail::quantized_hash(x, noise_seed);
            if (h == 0) {
                return sx;
            }
            FastRng rng(h);
            const double u = rng.uniform();
            return RingElement::from_matrix(sx.matrix() + (amp * u) * corner_direction(P, Q, mix64(h)));
        };
    }
    const bool is_pnorm = spec.kind == NoiseKind::PNorm;
    m.meta.id = std::string(is_pnorm ? "pnorm_noise/" : "constant_noise/") + m.domain.str();
    m.meta.kind = is_pnorm ? ScenarioKind::PNormNoise : ScenarioKind::ConstantNoise;
    m.meta.seed = seed;
    if (is_pnorm) {
        m.meta.params = {{"eps", spec.eps}, {"p", spec.p}, {"support_radius", spec.support_radius}};
    } else {
        m.meta.params = {{"delta", spec.delta},
                         {"field", spec.field == NoiseField::Hash ? "hash" : "smooth"}};
    }
    m.ground_truth = S;
    m.control = noise_control(spec, p);
    return detail::spot_checked(std::move(m), p);
}

/// The rows*cols matrix units; each is a ternary idempotent and together they span.
inline std::vector<RingElement> matrix_units_span(Shape shape) {
    validate_shape(shape);
    std::vector<RingElement> out;
    out.reserve(shape.size());
    for (std::size_t i = 0; i < shape.rows; ++i) {
        for (std::size_t j = 0; j < shape.cols; ++j) {
            out.push_back(RingElement::matrix_unit(shape, i, j));
        }
    }
    return out;
}

/// Noise is confined to the annulus inner <= ||x|| <= outer.
struct Annulus {
    double inner = 0.1;
    double outer = 0.6;
    bool contains(double r) const { return r >= inner && r <= outer; }
};

/// Trif-noisy map: S + eta with ||eta|| <= amplitude and eta = 0 outside the
/// annulus. Matrix units have norm 1 and q^n >= 3, so the whole q-orbit of the
/// span avoids the annulus; protected_z_samples keeps the z side clear too.
inline MapUnderTest make_trif_noise_hom(const ExactHom& S, const std::vector<RingElement>& span,
                                        double amplitude, const TrifParams& p, std::uint64_t seed,
                                        Annulus annulus = {}) {
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
        throw RejectedInput("noise amplitude must be finite and >= 0");
    }
    for (const auto& s : span) {
        if (norm(tprod(s, s, s) - s) > 1e-12 * std::max(1.0, norm(s))) {
            throw PreconditionViolation("spanning element is not a ternary idempotent");
        }
        const double ns = norm(s);
        for (int n = 1; n <= 8; ++n) {
            if (annulus.contains(std::pow(p.q_value(), n) * ns)) {
                throw PreconditionViolation("q-orbit of a spanning element meets the noise annulus");
            }
        }
    }
    const std::uint64_t noise_seed = derive_seed(seed, 0x7219);
    const Shape codomain = S.codomain();
    MapUnderTest m;
    m.domain = S.domain();
    m.codomain = codomain;
    m.evaluator = [S, amplitude, annulus, noise_seed, codomain](const RingElement& x) {
        RingElement sx = S(x);
        if (amplitude == 0.0 || !annulus.contains(norm(x))) {
            return sx;
        }
        const std::uint64_t h = detail::quantized_hash(x, noise_seed);
        const Matrix identity_r = Matrix::Identity(Eigen::Index(codomain.rows), Eigen::Index(codomain.rows));
        const Matrix identity_c = Matrix::Identity(Eigen::Index(codomain.cols), Eigen::Index(codomain.cols));
        FastRng rng(h);
        const double u = rng.uniform();
        return RingElement::from_matrix(sx.matrix() +
                                        (amplitude * u) * corner_direction(identity_r, identity_c, mix64(h)));
    };
    m.meta.id = "trif_noise/" + m.domain.str();
    m.meta.kind = ScenarioKind::TrifNoise;
    m.meta.scope = ControlScope::TrifOnly;
    m.meta.seed = seed;
    m.meta.params = {{"amplitude", amplitude},
                     {"annulus", {annulus.inner, annulus.outer}},
                     {"span", "matrix_units"}};
    m.ground_truth = S;
    const double weight = double(p.leading_weight() + p.d * p.c_dm2_lm1 + p.l * p.c_d_l);
    m.control = ControlFunction::constant(amplitude * weight);
    return detail::spot_checked(std::move(m), p);
}

/// z with ||z|| >= 0.7 and every row norm >= 0.7 / q^2: then z and every
/// q^{2n}[e_ij e_kl z] (n >= 1), which copies a row of z scaled by q^{2n},
/// stay outside the default annulus.
inline std::vector<RingElement> protected_z_samples(Shape shape, const TrifParams& p, std::size_t count,
                                                    std::uint64_t seed) {
    const double row_floor = 0.7 / (p.q_value() * p.q_value());
    std::vector<RingElement> out;
    ElementSampler sampler(shape, 2.0, seed);
    while (out.size() < count) {
        RingElement z = sampler.next();
        if (norm(z) < 0.7) {
            z = scale(0.7 / norm(z), z);
        }
        if (z.matrix().rowwise().norm().minCoeff() >= row_floor) {
            out.push_back(std::move(z));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Catalogue
// ---------------------------------------------------------------------------

struct ExpectedOutcome {
    std::string exercises;
    ScalarDomainKind domain = ScalarDomainKind::UnitCircle;
    bool expect_zero_limit = false;
    /// The {1, i} result states its bound without the 1/(l C) prefactor.
    bool bound_without_prefactor = false;
};

struct CatalogueEntry {
    MapUnderTest map;
    ExpectedOutcome expected;
};

struct ScenarioOptions {
    double noise_delta = 0.01;
    double pnorm_eps = 0.1;
    double pnorm_p = 0.5;
    double pnorm_support = 4.0;
    double trif_amplitude = 0.5;
};

inline Shape enlarged(Shape s) { return {s.rows + 1, s.cols + 1}; }

inline std::uint64_t scenario_seed(std::uint64_t seed, ScenarioKind kind, Shape shape) {
    return derive_seed(seed, detail::fnv1a(to_string(kind) + "/" + shape.str()));
}

/// Rebuilds one scenario from (kind, params, shape, seed); the evaluator is
/// never serialized.
inline CatalogueEntry make_scenario(ScenarioKind kind, const TrifParams& p, Shape shape, std::uint64_t seed,
                                    const ScenarioOptions& opts = {}) {
    validate_shape(shape);
    const std::uint64_t s = scenario_seed(seed, kind, shape);
    switch (kind) {
        case ScenarioKind::Exact: {
            auto m = make_isometry_hom(random_exact_hom(shape, enlarged(shape), s), p, s);
            return {std::move(m), {"exactness", ScalarDomainKind::AllComplex, false, false}};
        }
        case ScenarioKind::Truncated: {
            auto m = make_truncated_hom(random_exact_hom(shape, shape, s), p, s);
            return {std::move(m), {"truncated_counterexample", ScalarDomainKind::UnitCircle, true, false}};
        }
        case ScenarioKind::ConstantNoise: {
            auto m = make_perturbed_hom(random_exact_hom(shape, enlarged(shape), s),
                                        NoiseSpec::constant_ball(opts.noise_delta), p, s);
            return {std::move(m), {"direct_method", ScalarDomainKind::UnitCircle, false, false}};
        }
        case ScenarioKind::PNormNoise: {
            auto m = make_perturbed_hom(random_exact_hom(shape, enlarged(shape), s),
                                        NoiseSpec::pnorm(opts.pnorm_eps, opts.pnorm_p, opts.pnorm_support), p, s);
            return {std::move(m), {"pnorm_corollary", ScalarDomainKind::UnitCircle, false, false}};
        }
        case ScenarioKind::TrifNoise: {
            auto m = make_trif_noise_hom(random_exact_hom(shape, shape, s), matrix_units_span(shape),
                                         opts.trif_amplitude, p, s);
            return {std::move(m), {"spanning_factorization", ScalarDomainKind::UnitCircle, false, false}};
        }
        case ScenarioKind::OneAndI: {
            auto m = make_perturbed_hom(random_exact_hom(shape, enlarged(shape), s),
                                        NoiseSpec::constant_ball(opts.noise_delta, NoiseField::Smooth), p, s);
            m.meta.id = "one_and_i/" + shape.str();
            m.meta.kind = ScenarioKind::OneAndI;
            m.meta.scalar_domain = ScalarDomainKind::OneAndI;
            return {std::move(m), {"one_and_i_domain", ScalarDomainKind::OneAndI, false, true}};
        }
    }
    throw RejectedInput("unsupported scenario kind");
}

inline const std::vector<ScenarioKind>& all_scenario_kinds() {
    static const std::vector<ScenarioKind> kinds{ScenarioKind::Exact,      ScenarioKind::Truncated,
                                                 ScenarioKind::ConstantNoise, ScenarioKind::PNormNoise,
                                                 ScenarioKind::TrifNoise,  ScenarioKind::OneAndI};
    return kinds;
}

/// Six scenarios per shape, ordered by shape then kind.
inline std::vector<CatalogueEntry> catalogue(const TrifParams& p, const std::vector<Shape>& shapes,
                                             std::uint64_t seed, const ScenarioOptions& opts = {}) {
    std::vector<CatalogueEntry> out;
    for (const Shape& shape : shapes) {
        for (ScenarioKind kind : all_scenario_kinds()) {
            out.push_back(make_scenario(kind, p, shape, seed, opts));
        }
    }
    return out;
}

}  // namespace tstab
