// SPDX-License-Identifier: Apache-2.0
#pragma once

// Command implementations behind the ternary-stab executable. Each command
// takes a RunConfig and returns a CommandResult; nothing here touches argv,
// files or std::exit, so the commands are testable in-process.
//
// Exit codes: 0 pass, 1 a mathematical check failed, 2 invalid input,
// 3 numeric or resource failure.

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ternary_stab/control_functions.hpp"
#include "ternary_stab/errors.hpp"
#include "ternary_stab/hyers_iteration.hpp"
#include "ternary_stab/parallel.hpp"
#include "ternary_stab/scenario_lab.hpp"
#include "ternary_stab/ternary_core.hpp"
#include "ternary_stab/trif_operator.hpp"
#include "ternary_stab/version.hpp"

namespace tstab::cli {

using nlohmann::json;

enum ExitCode : int { kPass = 0, kCheckFailed = 1, kInvalidInput = 2, kNumericFailure = 3 };

// ---------------------------------------------------------------------------
// JSON helpers
// ---------------------------------------------------------------------------

inline json complex_to_json(Complex c) { return json::array({c.real(), c.imag()}); }

inline Complex complex_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw RejectedInput("complex numbers are [re, im] pairs");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

/// {"rows": r, "cols": c, "entries": [[re, im], ...]} with entries row-major.
inline json element_to_json(const RingElement& x) {
    json entries = json::array();
    for (const Complex& c : x.entries()) {
        entries.push_back(complex_to_json(c));
    }
    return {{"rows", x.shape().rows}, {"cols", x.shape().cols}, {"entries", std::move(entries)}};
}

/// Accepts the object form above or nested rows [[[re, im], ...], ...].
inline RingElement element_from_json(const json& j) {
    std::vector<Complex> entries;
    Shape shape;
    if (j.is_object()) {
        shape = {j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>()};
        validate_shape(shape);
        for (const auto& e : j.at("entries")) {
            entries.push_back(complex_from_json(e));
        }
    } else if (j.is_array() && !j.empty() && j[0].is_array() && !j[0].empty() && j[0][0].is_array()) {
        shape = {j.size(), j[0].size()};
        for (const auto& row : j) {
            if (row.size() != shape.cols) {
                throw RejectedInput("ragged matrix literal");
            }
            for (const auto& e : row) {
                entries.push_back(complex_from_json(e));
            }
        }
    } else {
        throw RejectedInput("matrix literal must be {rows, cols, entries} or nested rows of [re, im]");
    }
    return RingElement::from_entries(shape, entries);
}

/// Row-major [re, im] pairs of a complex matrix.
inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back(complex_to_json(m(i, j)));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Shortest representation that round-trips, capped at 17 significant digits, '.' decimal.
inline std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
    return std::string(buf.data(), res.ptr);
}

inline std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct RunConfig {
    std::string command;
    std::uint64_t seed = 0;
    int d = 3;
    int l = 2;
    int max_d = kDefaultMaxD;
    Shape shape{2, 2};
    std::size_t samples = 500;
    int n_max = 20;
    double tol = 1e-10;        ///< iteration stopping tolerance
    double check_tol = 1e-8;   ///< additivity / homogeneity / multiplicativity / representation
    double bound_tol = 1e-9;   ///< relative slack on bounds
    double ring_tol = 1e-9;    ///< axiom residuals
    std::optional<std::string> scenario;
    std::vector<std::string> scenarios;  ///< report selection; empty = whole catalogue
    std::optional<ControlFunction> control;
    bool bound_only = false;
    std::optional<double> eps;
    std::optional<double> p;
    std::optional<double> delta;
    std::vector<double> norms{0.0, 0.25, 0.5, 1.0, 2.0, 4.0};
    std::vector<RingElement> points;
    std::vector<int> n_list{1, 2, 3, 4};
    std::vector<int> offsets{0, 1, 2, 3};
    ScenarioOptions noise;

    static RunConfig from_json(const json& j);
    json to_json() const;

    /// FNV-1a of the canonical config echo.
    std::string hash() const { return hex64(tstab::detail::fnv1a(to_json().dump())); }

    TrifParams params() const { return make_params(d, l, max_d); }
};

namespace detail {

template <class T>
T read(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) {
        return fallback;
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw RejectedInput(std::string("config key '") + key + "' has the wrong type");
    }
}

inline double read_positive(const json& j, const char* key, double fallback) {
    const double v = read<double>(j, key, fallback);
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw RejectedInput(std::string("config key '") + key + "' must be positive");
    }
    return v;
}

inline ControlFunction parse_control(const json& j) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s.rfind("constant:", 0) == 0) {
            return ControlFunction::constant(std::stod(s.substr(9)));
        }
        if (s.rfind("pnorm:", 0) == 0) {
            const std::string rest = s.substr(6);
            const auto comma = rest.find(',');
            if (comma == std::string::npos) {
                throw RejectedInput("pnorm control shorthand is pnorm:eps,p");
            }
            return ControlFunction::pnorm(std::stod(rest.substr(0, comma)), std::stod(rest.substr(comma + 1)));
        }
        try {
            return ControlFunction::from_json(json::parse(s));
        } catch (const json::parse_error&) {
            throw RejectedInput("cannot parse control '" + s + "'");
        }
    }
    return ControlFunction::from_json(j);
}

}  // namespace detail

inline RunConfig RunConfig::from_json(const json& j) {
    static const std::vector<std::string> known{
        "command", "seed",   "d",        "l",         "max_d",     "rows",   "cols",    "samples",
        "n_max",   "tol",    "check_tol", "bound_tol", "ring_tol", "scenario", "scenarios", "control",
        "bound_only", "eps", "p",        "delta",     "norms",     "points", "n_list",  "offsets",
        "noise"};
    if (!j.is_object()) {
        throw RejectedInput("config must be a JSON object");
    }
    for (const auto& [key, _] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw RejectedInput("unknown config key '" + key + "'");
        }
    }
    RunConfig c;
    c.command = detail::read<std::string>(j, "command", "");
    if (!j.contains("seed") || !j.at("seed").is_number_integer() ||
        (!j.at("seed").is_number_unsigned() && j.at("seed").get<std::int64_t>() < 0)) {
        throw RejectedInput("config needs an unsigned integer 'seed' (seeds are mandatory)");
    }
    c.seed = j.at("seed").get<std::uint64_t>();
    c.d = detail::read<int>(j, "d", c.d);
    c.l = detail::read<int>(j, "l", c.l);
    c.max_d = detail::read<int>(j, "max_d", c.max_d);
    const long rows = detail::read<long>(j, "rows", 2);
    const long cols = detail::read<long>(j, "cols", 2);
    if (rows < 1 || cols < 1) {
        throw RejectedInput("shape must be positive");
    }
    c.shape = {std::size_t(rows), std::size_t(cols)};
    const long samples = detail::read<long>(j, "samples", long(c.samples));
    if (samples < 1) {
        throw RejectedInput("samples must be at least 1");
    }
    c.samples = std::size_t(samples);
    c.n_max = detail::read<int>(j, "n_max", c.n_max);
    if (c.n_max < 1) {
        throw RejectedInput("n_max must be at least 1");
    }
    c.tol = detail::read_positive(j, "tol", c.tol);
    c.check_tol = detail::read_positive(j, "check_tol", c.check_tol);
    c.bound_tol = detail::read_positive(j, "bound_tol", c.bound_tol);
    c.ring_tol = detail::read_positive(j, "ring_tol", c.ring_tol);
    if (j.contains("scenario") && !j.at("scenario").is_null()) {
        c.scenario = detail::read<std::string>(j, "scenario", "");
        scenario_kind_from_string(*c.scenario);
    }
    c.scenarios = detail::read<std::vector<std::string>>(j, "scenarios", {});
    for (const auto& s : c.scenarios) {
        scenario_kind_from_string(s);
    }
    if (j.contains("control") && !j.at("control").is_null()) {
        c.control = detail::parse_control(j.at("control"));
    }
    c.bound_only = detail::read<bool>(j, "bound_only", false);
    if (j.contains("eps") && !j.at("eps").is_null()) c.eps = detail::read<double>(j, "eps", 0.0);
    if (j.contains("p") && !j.at("p").is_null()) c.p = detail::read<double>(j, "p", 0.0);
    if (j.contains("delta") && !j.at("delta").is_null()) c.delta = detail::read<double>(j, "delta", 0.0);
    c.norms = detail::read<std::vector<double>>(j, "norms", c.norms);
    for (double n : c.norms) {
        if (!(n >= 0.0) || !std::isfinite(n)) {
            throw RejectedInput("norms must be finite and >= 0");
        }
    }
    if (j.contains("points")) {
        for (const auto& e : j.at("points")) {
            c.points.push_back(element_from_json(e));
        }
    }
    c.n_list = detail::read<std::vector<int>>(j, "n_list", c.n_list);
    c.offsets = detail::read<std::vector<int>>(j, "offsets", c.offsets);
    if (c.offsets.empty() || c.n_list.empty()) {
        throw RejectedInput("n_list and offsets must be non-empty");
    }
    if (j.contains("noise")) {
        const json& n = j.at("noise");
        c.noise.noise_delta = detail::read<double>(n, "delta", c.noise.noise_delta);
        c.noise.pnorm_eps = detail::read<double>(n, "eps", c.noise.pnorm_eps);
        c.noise.pnorm_p = detail::read<double>(n, "p", c.noise.pnorm_p);
        c.noise.pnorm_support = detail::read<double>(n, "support_radius", c.noise.pnorm_support);
        c.noise.trif_amplitude = detail::read<double>(n, "trif_amplitude", c.noise.trif_amplitude);
    }
    return c;
}

inline json RunConfig::to_json() const {
    json j{{"command", command},
           {"seed", seed},
           {"d", d},
           {"l", l},
           {"max_d", max_d},
           {"rows", shape.rows},
           {"cols", shape.cols},
           {"samples", samples},
           {"n_max", n_max},
           {"tol", tol},
           {"check_tol", check_tol},
           {"bound_tol", bound_tol},
           {"ring_tol", ring_tol},
           {"scenario", scenario ? json(*scenario) : json(nullptr)},
           {"scenarios", scenarios},
           {"control", control ? control->to_json() : json(nullptr)},
           {"bound_only", bound_only},
           {"eps", eps ? json(*eps) : json(nullptr)},
           {"p", p ? json(*p) : json(nullptr)},
           {"delta", delta ? json(*delta) : json(nullptr)},
           {"norms", norms},
           {"n_list", n_list},
           {"offsets", offsets},
           {"noise",
            {{"delta", noise.noise_delta},
             {"eps", noise.pnorm_eps},
             {"p", noise.pnorm_p},
             {"support_radius", noise.pnorm_support},
             {"trif_amplitude", noise.trif_amplitude}}}};
    json pts = json::array();
    for (const auto& x : points) {
        pts.push_back(element_to_json(x));
    }
    j["points"] = std::move(pts);
    return j;
}

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

struct CommandResult {
    int exit_code = kPass;
    json report = json::object();
    std::string text;         ///< CSV (defect), table (bound) or a human summary
    std::string diagnostics;  ///< goes to stderr
};

inline json check_to_json(const CheckResult& c) {
    return {{"name", c.name},
            {"max_residual", c.max_residual},
            {"threshold", c.threshold},
            {"passed", c.passed},
            {"note", c.note}};
}

inline json envelope(const RunConfig& cfg) {
    return {{"command", cfg.command},
            {"version", kVersion},
            {"config", cfg.to_json()},
            {"config_hash", cfg.hash()}};
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline json params_to_json(const TrifParams& p) {
    return {{"d", p.d},
            {"l", p.l},
            {"q", {p.q.numerator(), p.q.denominator()}},
            {"r", {p.r.numerator(), p.r.denominator()}},
            {"c_dm2_lm2", p.c_dm2_lm2},
            {"c_dm2_lm1", p.c_dm2_lm1},
            {"c_dm1_lm1", p.c_dm1_lm1},
            {"c_d_l", p.c_d_l}};
}

inline json trace_to_json(const IterationTrace& t) {
    return {{"x", element_to_json(t.x)},
            {"converged", t.converged},
            {"converged_at", t.converged_at},
            {"n_final", t.n_final},
            {"gaps", t.gaps},
            {"certified_gap_bounds", t.certified_gap_bounds},
            {"gaps_dominated", t.gaps_dominated},
            {"final", element_to_json(t.final_value())}};
}

// ---------------------------------------------------------------------------
// verify-ring
// ---------------------------------------------------------------------------

inline CommandResult cmd_verify_ring(const RunConfig& cfg) {
    Stopwatch sw;
    const RingAxiomReport r = axiom_suite(cfg.shape, cfg.samples, cfg.seed, cfg.ring_tol);
    CommandResult out;
    out.report = envelope(cfg);
    out.report["result"] = {{"shape", {cfg.shape.rows, cfg.shape.cols}},
                            {"samples", r.samples},
                            {"seed", r.seed},
                            {"tol", r.tol},
                            {"max_assoc_residual", r.max_assoc_residual},
                            {"max_norm_ineq_violation", r.max_norm_ineq_violation},
                            {"max_cube_identity_residual", r.max_cube_identity_residual}};
    out.report["passed"] = r.passed();
    out.report["timing"] = {{"wall_seconds", sw.seconds()}};
    out.exit_code = r.passed() ? kPass : kCheckFailed;
    std::ostringstream os;
    os << "ring axioms on " << cfg.shape.str() << " (" << r.samples << " samples): assoc "
       << r.max_assoc_residual << ", norm " << r.max_norm_ineq_violation << ", cube "
       << r.max_cube_identity_residual << (r.passed() ? "  PASS\n" : "  FAIL\n");
    out.text = os.str();
    return out;
}

// ---------------------------------------------------------------------------
// defect
// ---------------------------------------------------------------------------

inline ScenarioKind required_scenario(const RunConfig& cfg) {
    if (!cfg.scenario) {
        throw RejectedInput("this command needs a 'scenario' (one of exact, truncated, constant_noise, "
                            "pnorm_noise, trif_noise, one_and_i)");
    }
    return scenario_kind_from_string(*cfg.scenario);
}

inline CommandResult cmd_defect(const RunConfig& cfg) {
    Stopwatch sw;
    const TrifParams p = cfg.params();
    const CatalogueEntry entry = make_scenario(required_scenario(cfg), p, cfg.shape, cfg.seed, cfg.noise);
    const DominationReport dom = domination_check(entry.map, p, cfg.samples, derive_seed(cfg.seed, 0xDEF), 2.0,
                                                  cfg.control);

    std::string csv = "sample_index,mu_re,mu_im,defect,control_value,dominated\n";
    for (std::size_t k = 0; k < dom.samples.size(); ++k) {
        const auto& s = dom.samples[k];
        csv += std::to_string(k) + "," + format_double(s.mu.real()) + "," + format_double(s.mu.imag()) + "," +
               format_double(s.defect) + "," + format_double(s.control_value) + "," +
               (dominated(s) ? "true" : "false") + "\n";
    }
    CommandResult out;
    out.text = std::move(csv);
    out.report = envelope(cfg);
    out.report["scenario"] = entry.map.descriptor();
    out.report["control_used"] = (cfg.control ? *cfg.control : entry.map.control).to_json();
    out.report["summary"] = {{"samples", dom.samples.size()},
                             {"max_defect", dom.max_defect},
                             {"max_control", dom.max_control},
                             {"violations", dom.violations}};
    out.report["passed"] = dom.all_dominated();
    out.report["timing"] = {{"wall_seconds", sw.seconds()}};
    out.exit_code = dom.all_dominated() ? kPass : kCheckFailed;
    return out;
}

// ---------------------------------------------------------------------------
// extract
// ---------------------------------------------------------------------------

inline IterationOptions iteration_options(const RunConfig& cfg) {
    IterationOptions io;
    io.n_max = cfg.n_max;
    io.tol = cfg.tol;
    return io;
}

/// Max |entry| of (representation - expected), where expected is S or zero.
inline double ground_truth_residual(const ExtractedMap& T, const CatalogueEntry& e) {
    if (e.expected.expect_zero_limit || !e.map.ground_truth) {
        return T.representation.cwiseAbs().maxCoeff();
    }
    return (T.representation - e.map.ground_truth->representation()).cwiseAbs().maxCoeff();
}

inline CommandResult cmd_extract(const RunConfig& cfg) {
    Stopwatch sw;
    const TrifParams p = cfg.params();
    const CatalogueEntry entry = make_scenario(required_scenario(cfg), p, cfg.shape, cfg.seed, cfg.noise);
    IterationOptions io = iteration_options(cfg);
    io.control = cfg.control ? *cfg.control : entry.map.control;

    CommandResult out;
    out.report = envelope(cfg);
    out.report["scenario"] = entry.map.descriptor();

    std::vector<IterationTrace> traces;
    try {
        traces = basis_traces(entry.map, entry.map.domain, p, io);
    } catch (const RangeExhausted& e) {
        out.report["error"] = {{"kind", "range_exhausted"}, {"message", e.what()}, {"max_usable_n", e.max_usable_n()}};
        out.report["passed"] = false;
        out.report["timing"] = {{"wall_seconds", sw.seconds()}};
        out.exit_code = kNumericFailure;
        out.diagnostics = e.what();
        return out;
    }
    json jt = json::array();
    bool converged = true, dominated_all = true;
    for (const auto& t : traces) {
        jt.push_back(trace_to_json(t));
        converged = converged && t.converged;
        dominated_all = dominated_all && t.gaps_dominated;
    }
    out.report["traces"] = std::move(jt);
    out.report["converged"] = converged;
    out.report["gaps_dominated"] = dominated_all;

    if (!converged) {
        out.report["passed"] = false;
        out.report["timing"] = {{"wall_seconds", sw.seconds()}};
        out.exit_code = kNumericFailure;
        out.diagnostics = "extraction did not converge within n_max=" + std::to_string(cfg.n_max);
        return out;
    }
    Provenance prov{entry.map.meta.id, p.d, p.l, cfg.seed, 0};
    const ExtractedMap T = assemble_map(entry.map.domain, std::move(traces), prov);
    const double gt = ground_truth_residual(T, entry);
    out.report["map"] = {{"domain", {T.domain.rows, T.domain.cols}},
                         {"codomain", {T.codomain.rows, T.codomain.cols}},
                         {"representation", matrix_to_json(T.representation)},
                         {"n_used", T.provenance.n_used}};
    out.report["ground_truth"] = {{"expected", entry.expected.expect_zero_limit ? "zero map" : "S"},
                                  {"max_entry_residual", gt},
                                  {"threshold", cfg.check_tol}};
    const bool passed = dominated_all && gt <= cfg.check_tol;
    out.report["passed"] = passed;
    out.report["timing"] = {{"wall_seconds", sw.seconds()}};
    out.exit_code = passed ? kPass : kCheckFailed;
    std::ostringstream os;
    os << entry.map.meta.id << ": converged, n_used " << T.provenance.n_used << ", ground-truth residual " << gt
       << (passed ? "  PASS\n" : "  FAIL\n");
    out.text = os.str();
    return out;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

inline constexpr const char* kUnprefixedNote =
    "for the {1, i} scalar domain the bound is stated without the 1/(l C(d-1,l-1)) prefactor; "
    "both variants are reported and the looser (unprefixed) one is judged";

inline std::vector<ScenarioKind> selected_kinds(const RunConfig& cfg) {
    if (cfg.scenarios.empty()) {
        return all_scenario_kinds();
    }
    std::vector<ScenarioKind> out;
    for (const auto& s : cfg.scenarios) {
        out.push_back(scenario_kind_from_string(s));
    }
    return out;
}

/// Unit-norm probe point for bound-only output.
inline RingElement unit_probe(Shape s) { return RingElement::matrix_unit(s, 0, 0); }

inline json bound_only_entry(const CatalogueEntry& e, const ControlFunction& cf, const TrifParams& p) {
    const RingElement x = unit_probe(e.map.domain);
    const BoundCertificate cert = phi_tilde(cf, p, collapse_args(p, x));
    json j{{"id", e.map.meta.id},
           {"control", cf.to_json()},
           {"x_norm", 1.0},
           {"phi_tilde", cert.truncated_value},
           {"phi_tilde_closed_form", cert.closed_form_value ? json(*cert.closed_form_value) : json(nullptr)},
           {"tail_bound", cert.tail_bound},
           {"terms_used", cert.terms_used},
           {"stability_bound", stability_bound(cf, p, x)},
           {"stability_bound_unprefixed", stability_bound_unprefixed(cf, p, x)}};
    if (e.expected.bound_without_prefactor) {
        j["note"] = kUnprefixedNote;
    }
    return j;
}

struct ScenarioOutcome {
    json report;
    bool passed = false;
    bool errored = false;
    double seconds = 0.0;
};

inline void add_checks(json& checks, bool& passed, const VerificationVerdict& v, const std::string& prefix) {
    for (const auto& c : v.checks) {
        json jc = check_to_json(c);
        jc["name"] = prefix + c.name;
        checks.push_back(std::move(jc));
    }
    passed = passed && v.passed();
}

inline void add_check(json& checks, bool& passed, CheckResult c) {
    passed = passed && c.passed;
    checks.push_back(check_to_json(c));
}

inline ScenarioOutcome run_scenario(const RunConfig& cfg, ScenarioKind kind, const TrifParams& p) {
    Stopwatch sw;
    ScenarioOutcome out;
    const CatalogueEntry e = make_scenario(kind, p, cfg.shape, cfg.seed, cfg.noise);
    const ControlFunction cf = cfg.control ? *cfg.control : e.map.control;
    const std::uint64_t seed = derive_seed(cfg.seed, tstab::detail::fnv1a(e.map.meta.id));
    json& r = out.report;
    r = {{"id", e.map.meta.id},
         {"scenario", e.map.descriptor()},
         {"exercises", e.expected.exercises},
         {"expected_limit", e.expected.expect_zero_limit ? "zero map" : "S"}};

    if (cfg.bound_only) {
        r["bounds"] = bound_only_entry(e, cf, p);
        out.passed = true;
        out.seconds = sw.seconds();
        return out;
    }

    json checks = json::array();
    bool passed = true;

    // 1. defect domination
    const DominationReport dom = domination_check(e.map, p, cfg.samples, derive_seed(seed, 1), 2.0, cf);
    add_check(checks, passed,
              {"domination", double(dom.violations), 0.0, dom.all_dominated(),
               "violations out of " + std::to_string(cfg.samples) + "; max defect " +
                   format_double(dom.max_defect) + ", max control " + format_double(dom.max_control)});

    // 2. extraction on the matrix-unit basis
    IterationOptions io = iteration_options(cfg);
    io.control = cf;
    const ExtractedMap T = extract_map(e.map, e.map.domain, p, io, {e.map.meta.id, p.d, p.l, cfg.seed, 0});
    bool gaps_ok = true;
    for (const auto& t : T.basis_traces) {
        gaps_ok = gaps_ok && t.gaps_dominated;
    }
    add_check(checks, passed, {"gap_domination", gaps_ok ? 0.0 : 1.0, 0.0, gaps_ok,
                               "each Cauchy gap within its certified bound"});
    const double gt = ground_truth_residual(T, e);
    add_check(checks, passed, {"ground_truth", gt, cfg.check_tol, gt <= cfg.check_tol,
                               e.expected.expect_zero_limit ? "extracted map vs zero map" : "extracted map vs S"});
    r["extraction"] = {{"n_used", T.provenance.n_used}, {"representation", matrix_to_json(T.representation)}};

    // 3. conclusions, uniqueness and bound certification
    VerifyOptions vo;
    vo.samples = cfg.samples;
    vo.seed = derive_seed(seed, 2);
    vo.tol = cfg.check_tol;
    vo.bound_tol = cfg.bound_tol;
    vo.offsets = cfg.offsets;
    vo.iteration = iteration_options(cfg);
    vo.bound_without_prefactor = e.expected.bound_without_prefactor;
    const ScalarDomain sd{e.expected.domain, cfg.samples, derive_seed(seed, 3)};
    const VerificationVerdict verdict = verify_conclusions(T, e.map, cf, p, sd, vo);
    add_checks(checks, passed, verdict, "");
    if (e.expected.bound_without_prefactor) {
        const auto* judged = verdict.find("bound");
        const auto* other = verdict.find("bound_other_variant");
        r["bound_variants"] = {{"without_prefactor_utilisation", judged->max_residual},
                               {"with_prefactor_utilisation", other->max_residual},
                               {"judged", "without_prefactor"},
                               {"note", kUnprefixedNote}};
    }

    // 4. kind-specific checks
    if (kind == ScenarioKind::Exact) {
        ExactnessOptions eo;
        eo.samples = std::min<std::size_t>(cfg.samples, 100);
        eo.seed = derive_seed(seed, 4);
        const VerificationVerdict ex = exactness_check(e.map, e.map.domain, cf, p, eo);
        add_checks(checks, passed, ex, "exactness.");
    }
    if (kind == ScenarioKind::TrifNoise) {
        FactorizationOptions fo;
        fo.iteration = iteration_options(cfg);
        fo.seed = derive_seed(seed, 5);
        fo.mult_tol = cfg.check_tol;
        const auto span = matrix_units_span(cfg.shape);
        const auto zs = protected_z_samples(cfg.shape, p, 8, derive_seed(seed, 6));
        const FactorizationVerdict fv = factorization_check(e.map, p, span, zs, cfg.n_list, fo);
        json per_n = json::array();
        for (const auto& [n, res] : fv.residual_per_n) {
            per_n.push_back({{"n", n}, {"residual", res}});
        }
        r["factorization"] = {{"per_n", per_n},
                              {"chain_residual", fv.chain_residual},
                              {"multiplicativity_residual", fv.multiplicativity_residual}};
        add_check(checks, passed, {"factorization", fv.max_residual, fo.tol, fv.max_residual <= fo.tol,
                                   "protected orbit, n in n_list"});
        add_check(checks, passed, {"factorization_chain", fv.chain_residual, fo.mult_tol,
                                   fv.chain_residual <= fo.mult_tol, "T([s1 s2 z]) = [T(s1) T(s2) f(z)]"});
        // The noise has to be real for this scenario to mean anything.
        double max_trif = 0.0;
        ElementSampler sampler(cfg.shape, 0.7, derive_seed(seed, 7));
        for (std::size_t k = 0; k < 200; ++k) {
            std::vector<RingElement> xs;
            for (int j = 0; j < p.d; ++j) {
                xs.push_back(sampler.next());
            }
            max_trif = std::max(max_trif, trif_defect(e.map, p, xs, 1.0));
        }
        r["max_sampled_trif_defect"] = max_trif;
    }

    r["checks"] = std::move(checks);
    r["passed"] = passed;
    out.passed = passed;
    out.seconds = sw.seconds();
    return out;
}

inline CommandResult cmd_report(const RunConfig& cfg) {
    Stopwatch sw;
    const TrifParams p = cfg.params();
    const auto kinds = selected_kinds(cfg);
    const auto outcomes = parallel_map<ScenarioOutcome>(kinds.size(), [&](std::size_t i) {
        try {
            return run_scenario(cfg, kinds[i], p);
        } catch (const RejectedInput&) {
            throw;  // invalid configuration, not a scenario failure
        } catch (const std::exception& e) {
            ScenarioOutcome o;
            o.errored = true;
            o.report = {{"id", to_string(kinds[i]) + "/" + cfg.shape.str()}, {"error", e.what()}, {"passed", false}};
            return o;
        }
    });

    std::vector<const ScenarioOutcome*> ordered;
    for (const auto& o : outcomes) {
        ordered.push_back(&o);
    }
    std::sort(ordered.begin(), ordered.end(), [](const auto* a, const auto* b) {
        return a->report.at("id").template get<std::string>() < b->report.at("id").template get<std::string>();
    });

    CommandResult out;
    out.report = envelope(cfg);
    out.report["params"] = params_to_json(p);
    json scenarios = json::array();
    json per_scenario_time = json::object();
    bool passed = true, errored = false;
    std::ostringstream os;
    for (const auto* o : ordered) {
        const std::string id = o->report.at("id").get<std::string>();
        scenarios.push_back(o->report);
        per_scenario_time[id] = o->seconds;
        passed = passed && o->passed;
        errored = errored || o->errored;
        os << std::left << std::setw(24) << id << (o->errored ? "ERROR" : o->passed ? "PASS" : "FAIL");
        if (o->errored) {
            os << "  " << o->report.at("error").get<std::string>();
            out.diagnostics += id + ": " + o->report.at("error").get<std::string>() + "\n";
        }
        os << "\n";
        if (o->report.contains("checks")) {
            for (const auto& c : o->report.at("checks")) {
                os << "    " << std::setw(34) << c.at("name").get<std::string>() << std::setw(14)
                   << c.at("max_residual").get<double>() << " <= " << std::setw(10) << c.at("threshold").get<double>()
                   << (c.at("passed").get<bool>() ? "  ok" : "  FAILED") << "\n";
            }
        }
    }
    out.report["scenarios"] = std::move(scenarios);
    out.report["passed"] = passed && !errored;
    out.report["timing"] = {{"wall_seconds", sw.seconds()}, {"per_scenario_seconds", per_scenario_time}};
    out.exit_code = errored ? kNumericFailure : passed ? kPass : kCheckFailed;
    out.text = os.str();
    return out;
}

// ---------------------------------------------------------------------------
// bound
// ---------------------------------------------------------------------------

inline ControlFunction bound_control(const RunConfig& cfg) {
    if (cfg.control) {
        return *cfg.control;
    }
    if (cfg.delta && (cfg.eps || cfg.p)) {
        throw RejectedInput("give either delta or (eps, p), not both");
    }
    if (cfg.delta) {
        return ControlFunction::constant(*cfg.delta);
    }
    if (cfg.eps && cfg.p) {
        if (!(*cfg.p >= 0.0 && *cfg.p < 1.0)) {
            throw OutOfTheoremRange("p = " + format_double(*cfg.p) +
                                    " is outside the summable range p in [0,1) of the closed-form bound");
        }
        return ControlFunction::pnorm(*cfg.eps, *cfg.p);
    }
    throw RejectedInput("bound needs delta, or eps and p, or a control descriptor");
}

inline CommandResult cmd_bound(const RunConfig& cfg) {
    Stopwatch sw;
    const TrifParams p = cfg.params();
    const ControlFunction cf = bound_control(cfg);
    const auto* pn = std::get_if<PNormControl>(&cf.kind());

    std::vector<RingElement> xs;
    for (double n : cfg.norms) {
        xs.push_back(scale(n, unit_probe(cfg.shape)));
    }
    for (const auto& x : cfg.points) {
        xs.push_back(x);
    }

    json rows = json::array();
    std::ostringstream os;
    os << std::left << std::setw(12) << "norm_x" << std::setw(24) << "phi_tilde_truncated" << std::setw(24)
       << "phi_tilde_closed" << std::setw(24) << "tail_bound" << std::setw(24) << "stability_bound"
       << (pn ? "closed_form_bound" : "") << "\n";
    for (const auto& x : xs) {
        const BoundCertificate cert = phi_tilde(cf, p, collapse_args(p, x));
        const double sb = stability_bound(cf, p, x);
        json row{{"norm_x", norm(x)},
                 {"phi_tilde_truncated", cert.truncated_value},
                 {"phi_tilde_closed_form", cert.closed_form_value ? json(*cert.closed_form_value) : json(nullptr)},
                 {"tail_bound", cert.tail_bound},
                 {"terms_used", cert.terms_used},
                 {"stability_bound", sb}};
        os << std::setw(12) << format_double(norm(x)) << std::setw(24) << format_double(cert.truncated_value)
           << std::setw(24) << (cert.closed_form_value ? format_double(*cert.closed_form_value) : "-")
           << std::setw(24) << format_double(cert.tail_bound) << std::setw(24) << format_double(sb);
        if (pn) {
            const double cb = corollary_bound(pn->eps, pn->p, p, x);
            row["closed_form_bound"] = cb;
            os << format_double(cb);
        }
        os << "\n";
        rows.push_back(std::move(row));
    }
    CommandResult out;
    out.report = envelope(cfg);
    out.report["params"] = params_to_json(p);
    out.report["control"] = cf.to_json();
    out.report["rows"] = std::move(rows);
    out.report["passed"] = true;
    out.report["timing"] = {{"wall_seconds", sw.seconds()}};
    out.text = os.str();
    return out;
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const RejectedInput*>(&e) || dynamic_cast<const PreconditionViolation*>(&e) ||
        dynamic_cast<const OutOfTheoremRange*>(&e) || dynamic_cast<const ControlContractError*>(&e) ||
        dynamic_cast<const json::exception*>(&e) || dynamic_cast<const std::invalid_argument*>(&e) ||
        dynamic_cast<const std::out_of_range*>(&e)) {
        return kInvalidInput;
    }
    return kNumericFailure;
}

/// Parses `config_json`, runs `command`, and maps every exception to an exit code.
inline CommandResult run_command(const std::string& command, json config_json) {
    static const std::map<std::string, std::function<CommandResult(const RunConfig&)>> commands{
        {"verify-ring", cmd_verify_ring},
        {"defect", cmd_defect},
        {"extract", cmd_extract},
        {"report", cmd_report},
        {"bound", cmd_bound}};
    try {
        const auto it = commands.find(command);
        if (it == commands.end()) {
            throw RejectedInput("unknown command '" + command + "'");
        }
        if (!config_json.is_object()) {
            throw RejectedInput("config must be a JSON object");
        }
        config_json["command"] = command;
        const RunConfig cfg = RunConfig::from_json(config_json);
        return it->second(cfg);
    } catch (const std::exception& e) {
        CommandResult out;
        out.exit_code = exit_code_for(e);
        out.diagnostics = e.what();
        out.report = {{"command", command}, {"version", kVersion}, {"error", e.what()}, {"passed", false}};
        if (const auto* re = dynamic_cast<const RangeExhausted*>(&e)) {
            out.report["max_usable_n"] = re->max_usable_n();
        }
        return out;
    }
}

/// Report payload with the wall-clock fields removed, for determinism comparisons.
inline json without_timing(json report) {
    report.erase("timing");
    return report;
}

}  // namespace tstab::cli
