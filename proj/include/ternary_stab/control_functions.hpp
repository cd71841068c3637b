// SPDX-License-Identifier: Apache-2.0
#pragma once

// Control functions phi(x_1..x_d, u, v, w), the summed series
//
//     phi~(args) = sum_{j>=0} q^{-j} phi(q^j args)
//
// with certified truncation, and the stability bounds built from it.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "ternary_stab/errors.hpp"
#include "ternary_stab/ternary_core.hpp"
#include "ternary_stab/trif_operator.hpp"

namespace tstab {

/// Arguments (x_1..x_d, u, v, w) of a control function.
struct ControlArgs {
    std::vector<RingElement> xs;
    RingElement u, v, w;

    ControlArgs scaled(double factor) const {
        ControlArgs out;
        out.xs.reserve(xs.size());
        for (const auto& x : xs) {
            out.xs.push_back(scale(factor, x));
        }
        out.u = scale(factor, u);
        out.v = scale(factor, v);
        out.w = scale(factor, w);
        return out;
    }
};

/// (q x, r x, ..., r x, 0, 0, 0).
inline ControlArgs collapse_args(const TrifParams& p, const RingElement& x) {
    ControlArgs a;
    a.xs = substituted_tuple(p, x);
    a.u = a.v = a.w = RingElement::zero(x.shape());
    return a;
}

/// ||a||^p with the convention ||0||^0 = 0.
inline double norm_power(double n, double p) {
    if (n == 0.0) {
        return 0.0;
    }
    return p == 0.0 ? 1.0 : std::pow(n, p);
}

/// eps * (sum ||x_j||^p + ||u||^p + ||v||^p + ||w||^p).
inline double power_sum(const ControlArgs& a, double eps, double p) {
    double s = 0.0;
    for (const auto& x : a.xs) {
        s += norm_power(norm(x), p);
    }
    s += norm_power(norm(a.u), p) + norm_power(norm(a.v), p) + norm_power(norm(a.w), p);
    return eps * s;
}

// ---------------------------------------------------------------------------
// Custom-control registry
// ---------------------------------------------------------------------------

using CustomEvaluator = std::function<double(const ControlArgs&)>;
using CustomFactory = std::function<CustomEvaluator(const nlohmann::json& params)>;

/// Named factories for custom controls, so configs stay data-only.
///
/// Built-ins:
///   power_sum {eps, p}: eps * sum ||.||^p for any p >= 0 (p >= 1 is not summable)
///   affine {delta, eps, p}: delta + eps * sum ||.||^p
class ControlRegistry {
public:
    static ControlRegistry& instance() {
        static ControlRegistry registry;
        return registry;
    }

    void add(const std::string& name, CustomFactory factory) {
        std::lock_guard lock(mutex_);
        factories_[name] = std::move(factory);
    }

    bool contains(const std::string& name) const {
        std::lock_guard lock(mutex_);
        return factories_.count(name) != 0;
    }

    CustomEvaluator make(const std::string& name, const nlohmann::json& params) const {
        CustomFactory factory;
        {
            std::lock_guard lock(mutex_);
            auto it = factories_.find(name);
            if (it == factories_.end()) {
                throw RejectedInput("unknown custom control '" + name + "'");
            }
            factory = it->second;
        }
        return factory(params);
    }

private:
    ControlRegistry() {
        factories_["power_sum"] = [](const nlohmann::json& params) -> CustomEvaluator {
            const double eps = read_nonnegative(params, "eps");
            const double p = read_nonnegative(params, "p");
            return [eps, p](const ControlArgs& a) { return power_sum(a, eps, p); };
        };
        factories_["affine"] = [](const nlohmann::json& params) -> CustomEvaluator {
            const double delta = read_nonnegative(params, "delta");
            const double eps = read_nonnegative(params, "eps");
            const double p = read_nonnegative(params, "p");
            return [delta, eps, p](const ControlArgs& a) { return delta + power_sum(a, eps, p); };
        };
    }

    static double read_nonnegative(const nlohmann::json& params, const char* key) {
        if (!params.is_object() || !params.contains(key) || !params.at(key).is_number()) {
            throw RejectedInput(std::string("custom control parameter '") + key + "' is required");
        }
        const double value = params.at(key).get<double>();
        if (!(value >= 0.0) || !std::isfinite(value)) {
            throw RejectedInput(std::string("custom control parameter '") + key +
                                "' must be finite and >= 0");
        }
        return value;
    }

    mutable std::mutex mutex_;
    std::map<std::string, CustomFactory> factories_;
};

// ---------------------------------------------------------------------------
// ControlFunction
// ---------------------------------------------------------------------------

struct ConstantControl {
    double delta = 0.0;
};

struct PNormControl {
    double eps = 0.0;
    double p = 0.0;
};

struct CustomControl {
    std::string name;
    nlohmann::json params;
    std::shared_ptr<const CustomEvaluator> evaluator;
};

class ControlFunction {
public:
    using Kind = std::variant<ConstantControl, PNormControl, CustomControl>;

    static ControlFunction constant(double delta) {
        if (!(delta >= 0.0) || !std::isfinite(delta)) {
            throw RejectedInput("constant control needs finite delta >= 0");
        }
        return ControlFunction(ConstantControl{delta});
    }

    static ControlFunction pnorm(double eps, double p) {
        if (!(eps >= 0.0) || !std::isfinite(eps)) {
            throw RejectedInput("p-norm control needs finite eps >= 0");
        }
        if (!(p >= 0.0 && p < 1.0)) {
            throw RejectedInput("p-norm control needs p in [0,1) (got " + std::to_string(p) + ")");
        }
        return ControlFunction(PNormControl{eps, p});
    }

    static ControlFunction custom(const std::string& name, nlohmann::json params) {
        auto eval = ControlRegistry::instance().make(name, params);
        return ControlFunction(CustomControl{
            name, std::move(params), std::make_shared<const CustomEvaluator>(std::move(eval))});
    }

    const Kind& kind() const noexcept { return kind_; }
    bool is_constant() const { return std::holds_alternative<ConstantControl>(kind_); }
    bool is_pnorm() const { return std::holds_alternative<PNormControl>(kind_); }
    bool is_custom() const { return std::holds_alternative<CustomControl>(kind_); }

    /// Ratio of consecutive series terms, when it is known in closed form.
    std::optional<double> geometric_ratio(const TrifParams& p) const {
        if (is_constant()) {
            return 1.0 / p.q_value();
        }
        if (const auto* pn = std::get_if<PNormControl>(&kind_)) {
            return std::pow(p.q_value(), pn->p - 1.0);
        }
        return std::nullopt;
    }

    nlohmann::json to_json() const {
        return std::visit(
            [](const auto& k) -> nlohmann::json {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, ConstantControl>) {
                    return {{"kind", "constant"}, {"delta", k.delta}};
                } else if constexpr (std::is_same_v<T, PNormControl>) {
                    return {{"kind", "pnorm"}, {"eps", k.eps}, {"p", k.p}};
                } else {
                    return {{"kind", "custom"}, {"name", k.name}, {"params", k.params}};
                }
            },
            kind_);
    }

    static ControlFunction from_json(const nlohmann::json& j) {
        if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
            throw RejectedInput("control descriptor needs a string 'kind'");
        }
        const auto kind = j.at("kind").get<std::string>();
        auto number = [&](const char* key) {
            if (!j.contains(key) || !j.at(key).is_number()) {
                throw RejectedInput(std::string("control descriptor needs numeric '") + key + "'");
            }
            return j.at(key).get<double>();
        };
        if (kind == "constant") {
            return constant(number("delta"));
        }
        if (kind == "pnorm") {
            return pnorm(number("eps"), number("p"));
        }
        if (kind == "custom") {
            if (!j.contains("name") || !j.at("name").is_string()) {
                throw RejectedInput("custom control needs a 'name'");
            }
            return custom(j.at("name").get<std::string>(),
                          j.contains("params") ? j.at("params") : nlohmann::json::object());
        }
        throw RejectedInput("unknown control kind '" + kind + "'");
    }

    bool operator==(const ControlFunction& other) const { return to_json() == other.to_json(); }

private:
    explicit ControlFunction(Kind k) : kind_(std::move(k)) {}
    Kind kind_;
};

/// phi(args). Custom controls must return finite values >= 0.
inline double eval_control(const ControlFunction& cf, const ControlArgs& args) {
    return std::visit(
        [&](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, ConstantControl>) {
                return k.delta;
            } else if constexpr (std::is_same_v<T, PNormControl>) {
                return power_sum(args, k.eps, k.p);
            } else {
                const double value = (*k.evaluator)(args);
                if (!std::isfinite(value) || value < 0.0) {
                    throw ControlContractError("custom control '" + k.name +
                                               "' returned " + std::to_string(value));
                }
                return value;
            }
        },
        cf.kind());
}

// ---------------------------------------------------------------------------
// Series and bounds
// ---------------------------------------------------------------------------

struct SeriesOptions {
    int max_terms = 60;
    double tail_tol = 0.0;  ///< stop early once tail_bound <= tail_tol * partial sum
    int ratio_window = 8;
    double ratio_margin = 0.05;
};

struct BoundCertificate {
    double truncated_value = 0.0;
    std::optional<double> closed_form_value;
    int terms_used = 0;
    double tail_bound = 0.0;
    double ratio = 0.0;  ///< term ratio used for the tail

    /// Certified upper estimate of the full series.
    double upper() const { return truncated_value + tail_bound; }
};

/// q^{-j} phi(q^j args).
inline double series_term(const ControlFunction& cf, const TrifParams& p, const ControlArgs& args,
                          int j) {
    const double qj = std::pow(p.q_value(), j);
    if (cf.is_constant()) {
        return eval_control(cf, args) / qj;
    }
    return eval_control(cf, args.scaled(qj)) / qj;
}

namespace detail {
/// Largest ratio among the last `window` consecutive pairs; 0 when all trailing terms vanish.
inline double trailing_ratio(const std::vector<double>& terms, int window) {
    double worst = 0.0;
    const int n = int(terms.size());
    for (int j = std::max(1, n - window); j < n; ++j) {
        const double prev = terms[std::size_t(j - 1)];
        const double cur = terms[std::size_t(j)];
        if (prev == 0.0) {
            if (cur > 0.0) {
                return std::numeric_limits<double>::infinity();
            }
            continue;
        }
        worst = std::max(worst, cur / prev);
    }
    return worst;
}
}  // namespace detail

/// Truncated phi~ plus a geometric tail bound.
///
/// Constant and p-norm controls have an exact ratio (1/q and q^{p-1}) and a
/// closed form. Custom controls use the worst ratio over the last
/// `ratio_window` terms and must stay below 1 - ratio_margin.
inline BoundCertificate phi_tilde(const ControlFunction& cf, const TrifParams& p,
                                  const ControlArgs& args, const SeriesOptions& opts = {}) {
    if (opts.max_terms < 1) {
        throw RejectedInput("phi_tilde needs max_terms >= 1");
    }
    BoundCertificate cert;
    const auto known_ratio = cf.geometric_ratio(p);
    std::vector<double> terms;
    terms.reserve(std::size_t(opts.max_terms));
    double sum = 0.0;

    auto tail_from = [&](double ratio) {
        const double last = terms.back();
        return last == 0.0 ? 0.0 : last * ratio / (1.0 - ratio);
    };

    for (int j = 0; j < opts.max_terms; ++j) {
        terms.push_back(series_term(cf, p, args, j));
        sum += terms.back();
        if (opts.tail_tol > 0.0 && j + 1 >= opts.ratio_window) {
            double ratio = known_ratio ? *known_ratio
                                       : detail::trailing_ratio(terms, opts.ratio_window);
            if (ratio <= 1.0 - opts.ratio_margin && tail_from(ratio) <= opts.tail_tol * sum) {
                break;
            }
        }
    }

    cert.truncated_value = sum;
    cert.terms_used = int(terms.size());
    if (known_ratio) {
        cert.ratio = *known_ratio;
        cert.tail_bound = tail_from(*known_ratio);
        if (cf.is_constant()) {
            const double delta = std::get<ConstantControl>(cf.kind()).delta;
            cert.closed_form_value = delta * p.q_value() / (p.q_value() - 1.0);
        } else {
            cert.closed_form_value = terms.front() / (1.0 - *known_ratio);
        }
        return cert;
    }

    const bool all_zero = std::all_of(terms.begin(), terms.end(), [](double t) { return t == 0.0; });
    if (all_zero) {
        cert.ratio = 0.0;
        cert.tail_bound = 0.0;
        return cert;
    }
    if (terms.size() < 2) {
        throw NonSummable("cannot certify a tail from a single term; raise max_terms");
    }
    const double ratio = detail::trailing_ratio(terms, opts.ratio_window);
    if (!(ratio <= 1.0 - opts.ratio_margin)) {
        throw NonSummable("control series not certifiably convergent: trailing term ratio " +
                          std::to_string(ratio) + " after " + std::to_string(terms.size()) +
                          " terms");
    }
    cert.ratio = ratio;
    cert.tail_bound = tail_from(ratio);
    return cert;
}

/// (1 / (l C(d-1,l-1))) phi~(qx, rx, ..., rx, 0, 0, 0).
inline double stability_bound(const ControlFunction& cf, const TrifParams& p, const RingElement& x,
                              const SeriesOptions& opts = {}) {
    return phi_tilde(cf, p, collapse_args(p, x), opts).upper() / double(p.collapse_weight());
}

/// phi~(qx, rx, ..., rx, 0, 0, 0) without the 1/(l C(d-1,l-1)) prefactor; the
/// form stated for the {1, i} scalar domain.
inline double stability_bound_unprefixed(const ControlFunction& cf, const TrifParams& p,
                                         const RingElement& x, const SeriesOptions& opts = {}) {
    return phi_tilde(cf, p, collapse_args(p, x), opts).upper();
}

/// Closed form q^{1-p} (q^p + (d-1)|r|^p) eps / (l C(d-1,l-1) (q^{1-p} - 1)) ||x||^p.
inline double corollary_bound(double eps, double p_exp, const TrifParams& p, const RingElement& x) {
    if (!(p_exp >= 0.0 && p_exp < 1.0)) {
        throw OutOfTheoremRange("p outside the summable range [0,1) (got " +
                                std::to_string(p_exp) + ")");
    }
    if (!(eps >= 0.0)) {
        throw RejectedInput("eps must be >= 0");
    }
    const double q = p.q_value();
    const double abs_r = std::abs(p.r_value());
    const double growth = std::pow(q, 1.0 - p_exp);
    const double numerator = growth * (std::pow(q, p_exp) + (p.d - 1) * std::pow(abs_r, p_exp)) * eps;
    const double denominator = double(p.collapse_weight()) * (growth - 1.0);
    return numerator / denominator * norm_power(norm(x), p_exp);
}

struct ProbeResult {
    bool pass = false;
    double ratio = 0.0;
};

/// Estimates the limsup of successive series-term ratios over `horizon` terms
/// at each sample point; passes iff the worst estimate is <= 1 - margin.
inline ProbeResult summability_probe(const ControlFunction& cf, const TrifParams& p,
                                     const std::vector<ControlArgs>& sample_points, int horizon,
                                     double margin = 0.05, int window = 8) {
    if (horizon < 8) {
        throw RejectedInput("summability probe needs horizon >= 8");
    }
    ProbeResult result;
    for (const auto& args : sample_points) {
        std::vector<double> terms;
        terms.reserve(std::size_t(horizon));
        for (int j = 0; j < horizon; ++j) {
            terms.push_back(series_term(cf, p, args, j));
        }
        result.ratio = std::max(result.ratio, detail::trailing_ratio(terms, window));
    }
    result.pass = result.ratio <= 1.0 - margin;
    return result;
}

}  // namespace tstab
