#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bohm/config.hpp"
#include "bohm/run.hpp"
#include "json.hpp"

using namespace bohm;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("bohm_test_run_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

run::RunResult run_json(json j, const fs::path& out) {
    j["out"] = out.string();
    return run::run(config::from_json(j));
}

}  // namespace

TEST(Run, SinglePlaneWaveOracle) {
    const auto out = scratch("b0");
    const auto r = run_json({{"model", "planewave"}, {"a", 1}, {"b", 0}, {"analysis", "oracle_crosscheck"}}, out);
    EXPECT_EQ(r.exit_code, 0);
    const auto* lim = r.find("oracle.plane_wave_limit_v1_eq_p_over_m");
    ASSERT_NE(lim, nullptr);
    EXPECT_EQ(lim->status, run::Status::pass);
    EXPECT_LT(lim->value.get<double>(), 1e-12);
    EXPECT_TRUE(fs::exists(out / "claims_report.json"));
    EXPECT_TRUE(fs::exists(out / "meta.json"));
}

TEST(Run, SymmetricPairTrajectoriesAreStatic) {
    const auto out = scratch("ab");
    const auto r = run_json({{"model", "planewave"}, {"a", 1}, {"b", 1}, {"analysis", "trajectories"}}, out);
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_EQ(r.find("trajectories.static_when_a_equals_b")->status, run::Status::pass);
    std::ifstream is(out / "trajectories.csv");
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "member_id,t,x1,y1,z1,x2,y2,z2,v1x,v1y,v1z,v2x,v2y,v2z,truncated");
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        ASSERT_GE(cells.size(), 12u);
        EXPECT_EQ(std::abs(std::stod(cells[8])), 0.0);
        EXPECT_EQ(std::abs(std::stod(cells[11])), 0.0);
        ++rows;
    }
    EXPECT_EQ(rows, 5u * 31u);
}

TEST(Run, UniquenessConstraintsEquivariance) {
    const auto out = scratch("combo");
    const auto r = run_json({{"model", "planewave"},
                             {"a", 1},
                             {"b", 0.2},
                             {"analysis", "uniqueness,constraints,equivariance"},
                             {"n", 5000},
                             {"seed", 42}},
                            out);
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_EQ(r.find("uniqueness.root_count_as_printed")->value.at("root_count").get<int>(), 1);
    EXPECT_EQ(r.find("uniqueness.single_root_when_condition_holds")->status, run::Status::pass);
    EXPECT_EQ(r.find("constraints.implicit_residual_drift")->status, run::Status::pass);
    EXPECT_TRUE(r.find("equivariance.ks_at_t")->value.contains("ks_statistic"));
    EXPECT_TRUE(fs::exists(out / "ensemble.csv"));
}

TEST(Run, ConditionsDisagreementIsFlagged) {
    const auto r = run_json({{"model", "planewave"}, {"a", 1}, {"b", 0.3}, {"analysis", "uniqueness"}},
                            scratch("b03"));
    const auto& v = r.find("uniqueness.conditions_agree")->value;
    EXPECT_FALSE(v.at("agree").get<bool>());
    EXPECT_TRUE(v.at("b_lt_a_over_3").get<bool>());
    EXPECT_FALSE(v.at("four_ab_lt_a2_plus_b2").get<bool>());
    EXPECT_EQ(r.find("uniqueness.single_root_when_condition_holds"), nullptr);
}

TEST(Run, ClaimsReportSchema) {
    const auto out = scratch("schema");
    run_json({{"model", "planewave"},
              {"a", 1},
              {"b", 0.4},
              {"analysis", {"trajectories", "uniqueness", "density_discrepancy", "global_constraint"}},
              {"n", 300}},
             out);
    const auto report = json::parse(slurp(out / "claims_report.json"));
    ASSERT_TRUE(report.is_array());
    ASSERT_FALSE(report.empty());
    for (const auto& c : report) {
        EXPECT_EQ(c.size(), 5u);
        for (const char* k : {"claim_id", "paper_anchor", "status", "value", "tolerance"}) EXPECT_TRUE(c.contains(k));
        EXPECT_FALSE(c.at("paper_anchor").get<std::string>().empty());
        const auto st = c.at("status").get<std::string>();
        EXPECT_TRUE(st == "pass" || st == "fail" || st == "measured") << st;
    }
    const auto meta = json::parse(slurp(out / "meta.json"));
    EXPECT_EQ(meta.at("prng"), "mt19937_64;u01=(x>>11)*2^-53");
    EXPECT_EQ(meta.at("seed"), 42);
    EXPECT_TRUE(meta.contains("timestamp"));
    EXPECT_EQ(config::from_json(meta.at("config")).planewave.b, 0.4);
}

TEST(Run, EnsembleCsvIsByteIdentical) {
    const json cfg{{"model", "planewave"}, {"a", 1}, {"b", 0.2}, {"analysis", "equivariance"}, {"n", 500},
                   {"seed", 7}};
    const auto a = scratch("rep_a"), b = scratch("rep_b");
    run_json(cfg, a);
    auto cfg2 = cfg;
    cfg2["threads"] = 2;
    run_json(cfg2, b);
    const auto x = slurp(a / "ensemble.csv");
    EXPECT_FALSE(x.empty());
    EXPECT_EQ(x, slurp(b / "ensemble.csv"));
    EXPECT_EQ(slurp(a / "claims_report.json"), slurp(b / "claims_report.json"));
}

TEST(Run, SphericalAnalyses) {
    const auto out = scratch("sph");
    const auto r = run_json(
        {{"model", "spherical"}, {"analysis", "trajectories,constraints,oracle_crosscheck"}, {"n_oracle", 200}},
        out);
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_EQ(r.find("constraints.mirror_manifold_invariance")->status, run::Status::pass);
    EXPECT_EQ(r.find("oracle.chain_rule_gradient_vs_phase_fd")->status, run::Status::pass);
    EXPECT_GT(r.find("constraints.literal_reading_deviation")->value.get<double>(), 0.1);
    EXPECT_TRUE(fs::exists(out / "trajectories.csv"));
    EXPECT_FALSE(fs::exists(out / "ensemble.csv"));
}

TEST(Run, FailingCheckGivesExitTwo) {
    // A one-step RK4 integration cannot hold the implicit relation to 1e-6.
    const auto r = run_json({{"model", "planewave"},
                             {"a", 1},
                             {"b", 0.4},
                             {"method", "rk4"},
                             {"step", 1.5},
                             {"analysis", "trajectories"}},
                            scratch("fail"));
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_EQ(r.find("trajectories.implicit_residual_drift")->status, run::Status::fail);
}
