// Acceptance run: one PASS/FAIL line per criterion, exit 0 iff all pass.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "oracles.hpp"
#include "ternary_stab.hpp"
#include "ternary_stab/cli.hpp"

using namespace tstab;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

RingElement with_norm(double r, std::uint64_t seed, Shape s = {2, 2}) {
    const auto x = random_element(s, 1.0, seed);
    return scale(r / norm(x), x);
}

Outcome ac1() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (Shape s : {Shape{1, 1}, Shape{2, 2}, Shape{3, 2}, Shape{4, 4}}) {
        const auto r = axiom_suite(s, 500, 2024, 1e-9);
        worst = std::max({worst, r.max_assoc_residual, r.max_norm_ineq_violation, r.max_cube_identity_residual});
    }
    const double t = seconds_since(t0);
    return {worst <= 1e-9 && t <= 10.0, fmt("max relative residual %.3g (<= 1e-9), %.2f s (<= 10 s)", worst, t)};
}

Outcome ac2() {
    int checked = 0, failed = 0;
    for (int d = 3; d <= 10; ++d) {
        for (int l = 2; l <= d - 1; ++l) {
            const auto p = make_params(d, l);
            const Rational R_d(d), R_l(l);
            const bool ok = p.q + (R_d - Rational(1)) * p.r == Rational(0) &&
                            p.q + (R_l - Rational(1)) * p.r == R_l &&
                            d * binomial(d - 2, l - 2) + d * binomial(d - 2, l - 1) == l * binomial(d, l) &&
                            (d - 1) * binomial(d - 2, l - 1) == l * binomial(d - 1, l) &&
                            p.q == Rational(l * (d - 1), d - l) && p.r == Rational(-l, d - l);
            ++checked;
            failed += ok ? 0 : 1;
        }
    }
    return {failed == 0, fmt("%d (d,l) pairs, %d failures, exact rational arithmetic", checked, failed)};
}

Outcome ac3() {
    double worst = 0.0;
    for (auto [d, l] : {std::pair{3, 2}, {4, 2}, {4, 3}}) {
        const auto p = make_params(d, l);
        // additive (indeed linear, not norm-preserving) plus a constant
        const Matrix A = Matrix::Random(3, 2), B = Matrix::Random(2, 3);
        const auto c = random_element({3, 3}, 1.0, 99);
        auto f = [&](const RingElement& x) { return RingElement::from_matrix(A * x.matrix() * B) + c; };
        ElementSampler s({2, 2}, 2.0, std::uint64_t(10 * d + l));
        for (int k = 0; k < 200; ++k) {
            std::vector<RingElement> xs;
            double scale_ref = 1.0;
            for (int j = 0; j < d; ++j) {
                xs.push_back(s.next());
                scale_ref = std::max(scale_ref, norm(xs.back()));
            }
            scale_ref *= std::max(1.0, spectral_norm(A) * spectral_norm(B));
            scale_ref = std::max(scale_ref, norm(c));
            worst = std::max(worst, trif_defect(f, p, xs) / scale_ref);
        }
    }
    return {worst <= 1e-9, fmt("max defect / scale %.3g (<= 1e-9) over 600 tuples", worst)};
}

Outcome ac4() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto p = make_params(3, 2);
    const auto f = make_truncated_hom(random_exact_hom({2, 2}, {2, 2}, 4), p, 4);
    const double delta = truncated_delta(p);
    const auto cf = ControlFunction::constant(delta);
    const auto x1 = with_norm(1.0, 1);
    const double phi = phi_tilde(cf, p, collapse_args(p, x1)).upper();
    const double bound = stability_bound(cf, p, x1);
    const auto T = extract_map(f, {2, 2}, p);
    const double t_max = T.representation.cwiseAbs().maxCoeff();
    ElementSampler s({2, 2}, 3.0, 5);
    double dist = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const auto x = s.next();
        dist = std::max(dist, norm(f(x) - T(x)));
    }
    const double t = seconds_since(t0);
    const bool ok = delta == 13.0 && std::abs(phi - 52.0 / 3.0) <= 1e-12 && std::abs(bound - 13.0 / 3.0) <= 1e-12 &&
                    t_max <= 1e-12 && dist <= 13.0 / 3.0 && t <= 5.0;
    return {ok, fmt("delta %g, phi~ %.15g, bound %.15g, max|T| %.3g, max||f-T|| %.4g (<= 13/3), %.2f s", delta,
                    phi, bound, t_max, dist, t)};
}

Outcome ac5() {
    double worst = 0.0;
    for (auto [eps, pe] : {std::pair{1.0, 0.0}, {1.0, 0.5}, {2.0, 0.9}}) {
        for (auto [d, l] : {std::pair{3, 2}, {4, 2}, {4, 3}}) {
            const auto p = make_params(d, l);
            const auto cf = ControlFunction::pnorm(eps, pe);
            SeriesOptions so;
            so.max_terms = 200;
            for (int k = 0; k < 20; ++k) {
                const double r = 0.05 + 0.5 * k;
                const auto x = with_norm(r, std::uint64_t(k));
                const double closed = corollary_bound(eps, pe, p, x);
                const double series = phi_tilde(cf, p, collapse_args(p, x), so).upper() / double(p.collapse_weight());
                worst = std::max(worst, std::abs(closed - series) / closed);
            }
        }
    }
    return {worst <= 1e-10, fmt("max relative gap closed form vs series+tail %.3g (<= 1e-10), 180 points", worst)};
}

Outcome ac6() {
    const auto p = make_params(3, 2);
    const double delta = 0.01, q = 4.0;
    double worst_step = 0.0, worst_match = 0.0;
    int runs = 0;
    for (Shape shape : {Shape{2, 2}, Shape{3, 2}}) {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const auto S = random_exact_hom(shape, enlarged(shape), seed);
            const auto f = make_perturbed_hom(S, NoiseSpec::constant_ball(delta), p, seed);
            IterationOptions io;
            io.n_max = 15;
            io.tol = 1e-8;
            const auto T = extract_map(f, shape, p, io);
            for (const auto& tr : T.basis_traces) {
                const auto sx = S(tr.x);
                for (int n = 0; n <= tr.n_final; ++n) {
                    const double allowed = delta * std::pow(q, -n) * (1 + 1e-9);
                    worst_step = std::max(worst_step, norm(tr.values[std::size_t(n)] - sx) / allowed);
                }
            }
            // spectral distance of the induced maps on random inputs, plus the representation
            ElementSampler s(shape, 2.0, seed);
            for (int k = 0; k < 50; ++k) {
                const auto x = s.next();
                worst_match = std::max(worst_match, norm(T(x) - S(x)));
            }
            worst_match = std::max(worst_match, (T.representation - S.representation()).cwiseAbs().maxCoeff());
            ++runs;
        }
    }
    return {worst_step <= 1.0 && worst_match <= 1e-8,
            fmt("%d runs: max ||T_n - S|| / (delta' q^-n (1+1e-9)) %.4g (<= 1), max |T - S| %.3g (<= 1e-8)", runs,
                worst_step, worst_match)};
}

Outcome ac7() {
    int scenarios = 0, failed = 0;
    std::string first_failure;
    for (Shape shape : {Shape{2, 2}, Shape{3, 2}}) {
        cli::json c{{"seed", 7}, {"rows", shape.rows}, {"cols", shape.cols}, {"samples", 500}};
        const auto r = cli::run_command("report", c);
        if (!r.report.contains("scenarios")) {
            return {false, "report errored: " + r.diagnostics};
        }
        for (const auto& s : r.report.at("scenarios")) {
            ++scenarios;
            if (!s.at("passed").get<bool>()) {
                ++failed;
                if (first_failure.empty()) {
                    first_failure = s.at("id").get<std::string>();
                }
            }
            for (const auto& ch : s.value("checks", cli::json::array())) {
                const auto name = ch.at("name").get<std::string>();
                for (const char* want : {"additivity", "homogeneity", "multiplicativity"}) {
                    if (name == want && ch.at("max_residual").get<double>() > 1e-8) {
                        ++failed;
                    }
                }
            }
        }
    }
    return {failed == 0 && scenarios == 12,
            fmt("%d catalogue scenarios x 500 samples, %d failing%s%s", scenarios, failed,
                first_failure.empty() ? "" : ", first: ", first_failure.c_str())};
}

Outcome ac8() {
    const auto p = make_params(3, 2);
    const auto S = random_exact_hom({2, 2}, {2, 2}, 8);
    const auto c = random_element({2, 2}, 1.0, 18);
    auto shifted = [&](const RingElement& x) { return S(x) + c; };
    const auto cf = ControlFunction::pnorm(1.0, 0.5);
    const auto exact = exactness_check(S, {2, 2}, cf, p);
    // residual of the premise at any x is ||c - q c|| = |1 - q| ||c||, independent of x
    double residual_gap = 0.0;
    ElementSampler s({2, 2}, 2.0, 3);
    for (int k = 0; k < 100; ++k) {
        const auto x = s.next();
        const double r = oracle::power_norm((shifted(scale(4.0, x)) - scale(4.0, shifted(x))).matrix());
        residual_gap = std::max(residual_gap, std::abs(r - 3.0 * norm(c)));
    }
    const auto bad = exactness_check(shifted, {2, 2}, cf, p);
    const bool ok = exact.passed() && !bad.find("scaling_premise")->passed && !bad.conclusion_asserted &&
                    residual_gap <= 1e-12 &&
                    std::abs(bad.find("scaling_premise")->max_residual - 3.0 * norm(c)) <= 1e-12;
    return {ok, fmt("exact passes: %s; S+c premise residual %.15g vs |1-q|||c|| = %.15g (max sample gap %.2g)",
                    exact.passed() ? "yes" : "no", bad.find("scaling_premise")->max_residual, 3.0 * norm(c),
                    residual_gap)};
}

Outcome ac9() {
    const auto p = make_params(3, 2);
    double worst_fact = 0.0, worst_mult = 0.0, min_noise = 1e300;
    for (Shape shape : {Shape{2, 2}, Shape{3, 2}}) {
        const auto e = make_scenario(ScenarioKind::TrifNoise, p, shape, 9);
        const auto zs = protected_z_samples(shape, p, 8, 10);
        const auto v = factorization_check(e.map, p, matrix_units_span(shape), zs, {1, 2, 3});
        worst_fact = std::max(worst_fact, v.max_residual);
        worst_mult = std::max({worst_mult, v.multiplicativity_residual, v.chain_residual});
        double noise = 0.0;
        ElementSampler s(shape, 0.7, 11);
        for (int k = 0; k < 200; ++k) {
            std::vector<RingElement> xs{s.next(), s.next(), s.next()};
            noise = std::max(noise, trif_defect(e.map, p, xs));
        }
        min_noise = std::min(min_noise, noise);
    }
    return {worst_fact <= 1e-9 && worst_mult <= 1e-8 && min_noise > 0.1,
            fmt("factorization %.3g (<= 1e-9), multiplicativity %.3g (<= 1e-8), sampled Trif defect %.3g (> 0.1)",
                worst_fact, worst_mult, min_noise)};
}

Outcome ac10() {
    Rng rng(10);
    double worst_mod = 0.0, worst_sum = 0.0;
    for (int k = 0; k < 10000; ++k) {
        Complex lambda = 3.0 * rng.complex_gaussian();
        if (std::abs(lambda) < 1e-6) {
            lambda += 1.0;
        }
        const int M = int(std::floor(std::abs(lambda))) + 1 + int(rng.uniform() * 5);
        const auto [m1, m2] = unimodular_decompose(lambda, M);
        worst_mod = std::max({worst_mod, std::abs(std::abs(m1) - 1.0), std::abs(std::abs(m2) - 1.0)});
        worst_sum = std::max(worst_sum, std::abs(m1 + m2 - 2.0 * lambda / double(M)));
    }
    return {worst_mod <= 1e-12 && worst_sum <= 1e-12,
            fmt("10^4 draws: max ||mu|-1| %.3g, max |sum - 2 lambda/M| %.3g (<= 1e-12)", worst_mod, worst_sum)};
}

Outcome ac11() {
    const cli::json c{{"seed", 42}};
    const auto t0 = std::chrono::steady_clock::now();
    const auto a = cli::run_command("report", c);
    const double t = seconds_since(t0);
    const auto b = cli::run_command("report", c);
    const bool same = cli::without_timing(a.report).dump() == cli::without_timing(b.report).dump();
    return {same && a.exit_code == 0 && t <= 60.0,
            fmt("payloads identical: %s, exit %d, default report %.2f s (<= 60 s)", same ? "yes" : "no", a.exit_code,
                t)};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"AC1 ring axioms", ac1},
        {"AC2 parameter identities", ac2},
        {"AC3 affine kernel", ac3},
        {"AC4 truncated homomorphism", ac4},
        {"AC5 closed-form p-norm bound", ac5},
        {"AC6 recovery", ac6},
        {"AC7 limit-map conclusions", ac7},
        {"AC8 exactness discriminates", ac8},
        {"AC9 spanning-set factorization", ac9},
        {"AC10 unimodular decomposition", ac10},
        {"AC11 determinism and runtime", ac11},
    };
    int failures = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
