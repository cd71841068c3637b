#include <gtest/gtest.h>

#include <sstream>

#include "ternary_stab/cli.hpp"

using namespace tstab;
using namespace tstab::cli;

namespace {

json base(std::uint64_t seed = 7) { return {{"seed", seed}}; }

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream is(text);
    for (std::string line; std::getline(is, line);) {
        out.push_back(line);
    }
    return out;
}

}  // namespace

TEST(VerifyRing, ThreeByTwo) {
    json c = base();
    c["rows"] = 3;
    c["cols"] = 2;
    c["samples"] = 200;
    const auto r = run_command("verify-ring", c);
    EXPECT_EQ(r.exit_code, kPass);
    const auto& res = r.report.at("result");
    EXPECT_LT(res.at("max_assoc_residual").get<double>(), 1e-10);
    EXPECT_LT(res.at("max_norm_ineq_violation").get<double>(), 1e-10);
    EXPECT_LT(res.at("max_cube_identity_residual").get<double>(), 1e-10);
}

TEST(VerifyRing, ZeroRowsIsInvalid) {
    json c = base();
    c["rows"] = 0;
    const auto r = run_command("verify-ring", c);
    EXPECT_EQ(r.exit_code, kInvalidInput);
    EXPECT_NE(r.diagnostics.find("shape must be positive"), std::string::npos);
}

TEST(VerifyRing, Deterministic) {
    const auto a = run_command("verify-ring", base(3));
    const auto b = run_command("verify-ring", base(3));
    EXPECT_EQ(without_timing(a.report).dump(), without_timing(b.report).dump());
}

TEST(Config, SeedIsMandatory) {
    EXPECT_EQ(run_command("verify-ring", json::object()).exit_code, kInvalidInput);
}

TEST(Config, NegativeSeedRejected) {
    EXPECT_EQ(run_command("verify-ring", json{{"seed", -1}}).exit_code, kInvalidInput);
    EXPECT_EQ(run_command("verify-ring", json{{"seed", 1.5}}).exit_code, kInvalidInput);
}

TEST(Config, UnknownKeyRejected) {
    json c = base();
    c["sampels"] = 10;
    EXPECT_EQ(run_command("verify-ring", c).exit_code, kInvalidInput);
}

TEST(Config, HashFollowsContent) {
    const auto a = run_command("verify-ring", base(1));
    const auto b = run_command("verify-ring", base(2));
    EXPECT_NE(a.report.at("config_hash"), b.report.at("config_hash"));
    EXPECT_EQ(a.report.at("config_hash"), run_command("verify-ring", base(1)).report.at("config_hash"));
}

TEST(Defect, ExactScenarioTiny) {
    json c = base();
    c["scenario"] = "exact";
    c["samples"] = 100;
    const auto r = run_command("defect", c);
    EXPECT_EQ(r.exit_code, kPass);
    EXPECT_LE(r.report.at("summary").at("max_defect").get<double>(), 1e-9);
}

TEST(Defect, CsvFormat) {
    json c = base();
    c["scenario"] = "truncated";
    c["samples"] = 40;
    const auto r = run_command("defect", c);
    EXPECT_EQ(r.exit_code, kPass);
    const auto ls = lines(r.text);
    ASSERT_EQ(ls.size(), 41u);
    EXPECT_EQ(ls[0], "sample_index,mu_re,mu_im,defect,control_value,dominated");
    for (std::size_t k = 1; k < ls.size(); ++k) {
        std::vector<std::string> cells;
        std::stringstream ss(ls[k]);
        for (std::string cell; std::getline(ss, cell, ',');) {
            cells.push_back(cell);
        }
        ASSERT_EQ(cells.size(), 6u);
        EXPECT_EQ(cells[0], std::to_string(k - 1));
        EXPECT_EQ(std::stod(cells[4]), 13.0);
        EXPECT_EQ(cells[5], "true");
    }
}

TEST(Defect, AdversarialControlFails) {
    json c = base();
    c["scenario"] = "constant_noise";
    c["samples"] = 100;
    c["control"] = "constant:0.001";
    EXPECT_EQ(run_command("defect", c).exit_code, kCheckFailed);
}

TEST(Defect, UnsupportedScenario) {
    json c = base();
    c["scenario"] = "brownian";
    EXPECT_EQ(run_command("defect", c).exit_code, kInvalidInput);
}

TEST(Extract, TruncatedIsZero) {
    json c = base();
    c["scenario"] = "truncated";
    const auto r = run_command("extract", c);
    ASSERT_EQ(r.exit_code, kPass) << r.diagnostics;
    for (const auto& row : r.report.at("map").at("representation")) {
        for (const auto& entry : row) {
            EXPECT_EQ(entry[0].get<double>(), 0.0);
            EXPECT_EQ(entry[1].get<double>(), 0.0);
        }
    }
}

TEST(Extract, ExactMatchesS) {
    json c = base();
    c["scenario"] = "exact";
    const auto r = run_command("extract", c);
    ASSERT_EQ(r.exit_code, kPass);
    EXPECT_LE(r.report.at("ground_truth").at("max_entry_residual").get<double>(), 1e-12);
}

TEST(Extract, TooFewStepsIsNumericFailure) {
    json c = base();
    c["scenario"] = "constant_noise";
    c["n_max"] = 2;
    const auto r = run_command("extract", c);
    EXPECT_EQ(r.exit_code, kNumericFailure);
    EXPECT_FALSE(r.report.at("converged").get<bool>());
}

TEST(Bound, PZeroUnitNorm) {
    json c = base();
    c["eps"] = 1.0;
    c["p"] = 0.0;
    c["norms"] = {1.0};
    const auto r = run_command("bound", c);
    ASSERT_EQ(r.exit_code, kPass);
    const auto& row = r.report.at("rows").at(0);
    EXPECT_NEAR(row.at("stability_bound").get<double>(), 1.0, 1e-12);
    EXPECT_NEAR(row.at("closed_form_bound").get<double>(), 1.0, 1e-12);
}

TEST(Bound, ConstantThirteen) {
    json c = base();
    c["delta"] = 13.0;
    const auto r = run_command("bound", c);
    ASSERT_EQ(r.exit_code, kPass);
    for (const auto& row : r.report.at("rows")) {
        EXPECT_NEAR(row.at("stability_bound").get<double>(), 13.0 / 3.0, 1e-12);
    }
    EXPECT_NE(r.text.find("stability_bound"), std::string::npos);
}

TEST(Bound, ZeroEps) {
    json c = base();
    c["eps"] = 0.0;
    c["p"] = 0.5;
    const auto r = run_command("bound", c);
    ASSERT_EQ(r.exit_code, kPass);
    for (const auto& row : r.report.at("rows")) {
        EXPECT_EQ(row.at("stability_bound").get<double>(), 0.0);
    }
}

TEST(Bound, ExponentOutOfRange) {
    json c = base();
    c["eps"] = 1.0;
    c["p"] = 1.2;
    const auto r = run_command("bound", c);
    EXPECT_EQ(r.exit_code, kInvalidInput);
    EXPECT_NE(r.diagnostics.find("[0,1)"), std::string::npos);
}

TEST(Report, BoundOnlyTruncated) {
    json c = base(42);
    c["bound_only"] = true;
    c["scenarios"] = {"truncated", "one_and_i"};
    const auto r = run_command("report", c);
    ASSERT_EQ(r.exit_code, kPass);
    bool saw_note = false;
    for (const auto& s : r.report.at("scenarios")) {
        if (s.at("id") == "truncated/2x2") {
            EXPECT_NEAR(s.at("bounds").at("stability_bound").get<double>(), 13.0 / 3.0, 1e-12);
        }
        if (s.at("id") == "one_and_i/2x2") {
            saw_note = s.at("bounds").contains("note");
        }
    }
    EXPECT_TRUE(saw_note);
}

TEST(Report, OneAndIReportsBothVariants) {
    json c = base(42);
    c["scenarios"] = {"one_and_i"};
    c["samples"] = 40;
    const auto r = run_command("report", c);
    ASSERT_EQ(r.exit_code, kPass) << r.text;
    const auto& s = r.report.at("scenarios").at(0);
    EXPECT_TRUE(s.at("bound_variants").contains("with_prefactor_utilisation"));
    EXPECT_TRUE(s.at("bound_variants").contains("without_prefactor_utilisation"));
}

TEST(Report, UnknownCommand) {
    EXPECT_EQ(run_command("frobnicate", base()).exit_code, kInvalidInput);
}
