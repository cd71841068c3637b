// SPDX-License-Identifier: Apache-2.0
//
// ternary-stab <verify-ring|defect|extract|report|bound> --config file.json [flags]
//
// Flags override keys of the config file. JSON reports go to --out (or stdout);
// the defect command writes its CSV table there instead, and bound prints
// its table to stdout.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "ternary_stab/cli.hpp"

namespace {

using nlohmann::json;

struct Flags {
    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> d, l, rows, cols, n_max;
    std::optional<long> samples;
    std::optional<double> tol, eps, p, delta;
    std::optional<std::string> scenario, control;
    std::vector<double> norms;
    bool bound_only = false;
};

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config_path, "JSON config file");
    sub->add_option("--out", f.out_path, "write the report (CSV for defect) here");
    sub->add_option("--seed", f.seed, "RNG seed (mandatory, here or in the config)");
    sub->add_option("--d", f.d, "number of Trif arguments");
    sub->add_option("--l", f.l, "subset size, 2 <= l <= d-1");
    sub->add_option("--rows", f.rows);
    sub->add_option("--cols", f.cols);
    sub->add_option("--samples", f.samples);
    sub->add_option("--n-max", f.n_max);
    sub->add_option("--tol", f.tol, "iteration stopping tolerance");
    sub->add_option("--scenario", f.scenario, "exact, truncated, constant_noise, pnorm_noise, trif_noise, one_and_i");
    sub->add_option("--control", f.control, "constant:DELTA, pnorm:EPS,P or a JSON descriptor");
    sub->add_option("--eps", f.eps);
    sub->add_option("--p", f.p);
    sub->add_option("--delta", f.delta);
    sub->add_option("--norms", f.norms, "grid of ||x|| values for bound");
    sub->add_flag("--bound-only", f.bound_only, "report: closed-form bounds only");
}

json load_config(const std::string& path) {
    if (path.empty()) {
        return json::object();
    }
    std::ifstream in(path);
    if (!in) {
        throw tstab::RejectedInput("cannot open config '" + path + "'");
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw tstab::RejectedInput("config '" + path + "' is not valid JSON: " + e.what());
    }
}

template <class T>
void overlay(json& j, const char* key, const std::optional<T>& v) {
    if (v) {
        j[key] = *v;
    }
}

bool write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
    return static_cast<bool>(out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical stability toolkit for Trif-type approximate homomorphisms on matrix ternary rings"};
    app.set_version_flag("--version", tstab::kVersion);
    app.require_subcommand(1);
    Flags flags;
    const std::pair<const char*, const char*> subcommands[] = {
        {"verify-ring", "check the ternary ring axioms on random samples"},
        {"defect", "tabulate D_mu defects of a scenario against its control (CSV)"},
        {"extract", "extract the limit map of a scenario by iteration"},
        {"report", "full pipeline over the scenario catalogue"},
        {"bound", "tabulate phi~ and the stability bound for a control"}};
    for (const auto& [name, help] : subcommands) {
        add_common(app.add_subcommand(name, help), flags);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : tstab::cli::kInvalidInput;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    json config;
    try {
        config = load_config(flags.config_path);
        if (!config.is_object()) {
            throw tstab::RejectedInput("config must be a JSON object");
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return tstab::cli::kInvalidInput;
    }
    overlay(config, "seed", flags.seed);
    overlay(config, "d", flags.d);
    overlay(config, "l", flags.l);
    overlay(config, "rows", flags.rows);
    overlay(config, "cols", flags.cols);
    overlay(config, "samples", flags.samples);
    overlay(config, "n_max", flags.n_max);
    overlay(config, "tol", flags.tol);
    overlay(config, "eps", flags.eps);
    overlay(config, "p", flags.p);
    overlay(config, "delta", flags.delta);
    overlay(config, "scenario", flags.scenario);
    overlay(config, "control", flags.control);
    if (!flags.norms.empty()) {
        config["norms"] = flags.norms;
    }
    if (flags.bound_only) {
        config["bound_only"] = true;
    }

    const tstab::cli::CommandResult result = tstab::cli::run_command(command, config);
    if (!result.diagnostics.empty()) {
        std::cerr << (result.exit_code >= tstab::cli::kInvalidInput ? "error: " : "") << result.diagnostics << "\n";
    }

    const std::string json_text = result.report.dump(2) + "\n";
    if (command == "defect" && result.exit_code <= tstab::cli::kCheckFailed) {
        if (!flags.out_path.empty()) {
            if (!write_file(flags.out_path, result.text)) {
                std::cerr << "error: cannot write '" << flags.out_path << "'\n";
                return tstab::cli::kNumericFailure;
            }
            std::cout << json_text;
        } else {
            std::cout << result.text;
        }
        return result.exit_code;
    }
    if (!flags.out_path.empty()) {
        if (!write_file(flags.out_path, json_text)) {
            std::cerr << "error: cannot write '" << flags.out_path << "'\n";
            return tstab::cli::kNumericFailure;
        }
        std::cout << result.text;
    } else {
        std::cout << (command == "bound" && result.exit_code == tstab::cli::kPass ? result.text : json_text);
    }
    return result.exit_code;
}
