#include <doctest.h>

#include <cmath>

#include "optsale/report.hpp"

using namespace optsale;

namespace {

const char* kFig1aConfig = R"(
# GBM, exponential utility
model.kind = gbm
model.mu = 0.05
model.sigma = 0.2
utility.kind = exponential
utility.gamma = 0.5
r = 0.02
nu = 1
initial_price = 1.0
grid.min = 0.2
grid.max = 5.0
grid.points = 25
)";

RunConfig fig1a_config() { return build_run_config(parse_key_values(kFig1aConfig)); }

}  // namespace

TEST_CASE("key-value parsing") {
    const KeyValues kv = parse_key_values("a.b = 1.5 # comment\n\n# full comment\nc= x\n");
    CHECK(kv.at("a.b") == "1.5");
    CHECK(kv.at("c") == "x");
    CHECK_THROWS_AS(parse_key_values("just a line\n"), validation_error);
}

TEST_CASE("config errors name the offending key") {
    KeyValues kv = parse_key_values(kFig1aConfig);
    kv["model.kind"] = "heston";
    CHECK_THROWS_WITH_AS(build_run_config(kv), doctest::Contains("model.kind"),
                         validation_error);
    kv = parse_key_values(kFig1aConfig);
    kv.erase("model.mu");
    CHECK_THROWS_WITH_AS(build_run_config(kv), doctest::Contains("model.mu"),
                         validation_error);
    kv = parse_key_values(kFig1aConfig);
    kv["model.sigma"] = "-0.2";
    CHECK_THROWS_WITH_AS(build_run_config(kv), doctest::Contains("sigma"), validation_error);
    kv = parse_key_values(kFig1aConfig);
    kv["utility.gamma"] = "abc";
    CHECK_THROWS_WITH_AS(build_run_config(kv), doctest::Contains("utility.gamma"),
                         validation_error);
    kv = parse_key_values(kFig1aConfig);
    kv["grid.points"] = "1";
    CHECK_THROWS_WITH_AS(build_run_config(kv), doctest::Contains("grid.points"),
                         validation_error);
}

TEST_CASE("solve summary carries the threshold") {
    const nlohmann::json s = run_solve(fig1a_config());
    CHECK(s.at("strategy") == "threshold");
    CHECK(s.at("threshold").get<double>() == doctest::Approx(2.5129).epsilon(1e-3));
    CHECK(s.at("alpha").get<double>() == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("sell-now summary for the GBM power case") {
    KeyValues kv = parse_key_values(kFig1aConfig);
    kv["utility.kind"] = "power";
    kv["utility.p"] = "0.3";
    kv.erase("utility.gamma");
    const nlohmann::json s = run_solve(build_run_config(kv));
    CHECK(s.at("strategy") == "sell_now");
    CHECK_FALSE(s.contains("threshold"));
}

TEST_CASE("wait-forever summary serializes the infinity sentinel as a string") {
    KeyValues kv = parse_key_values(kFig1aConfig);
    kv["utility.kind"] = "power";
    kv["utility.p"] = "1";
    kv.erase("utility.gamma");
    const nlohmann::json s = run_solve(build_run_config(kv));
    CHECK(s.at("strategy") == "wait_forever");
    CHECK(s.at("certainty_equivalent") == "inf");
}

TEST_CASE("price curve rows satisfy the emitted-data invariants") {
    const CurveTable t = run_curve(fig1a_config());
    CHECK(t.columns == std::vector<std::string>{"price", "utility", "value",
                                                "certainty_equivalent", "premium"});
    REQUIRE(t.rows.size() == 25);
    const double thr = t.metadata.at("threshold").get<double>();
    double prev_price = -1.0;
    for (const auto& row : t.rows) {
        REQUIRE(row.size() == 5);
        const double price = row[0], utility = row[1], value = row[2], premium = row[4];
        CHECK(price > prev_price);
        prev_price = price;
        CHECK(value >= utility - 1e-12);
        CHECK(premium >= 0.0);
        if (price >= thr) {
            CHECK(value == utility);
            CHECK(premium == 0.0);
        }
    }
}

TEST_CASE("quantity sweep: GBM thresholds vs nu") {
    KeyValues kv = parse_key_values(kFig1aConfig);
    kv["curve.mode"] = "quantity";
    kv["quantity_grid.min"] = "0.5";
    kv["quantity_grid.max"] = "5";
    kv["quantity_grid.points"] = "4";
    kv["sweep.gammas"] = "0.2,0.5,1";
    const CurveTable t = run_curve(build_run_config(kv));
    REQUIRE(t.columns.size() == 5);  // nu, three a_e columns, a_l
    REQUIRE(t.rows.size() == 4);
    // each a_e column strictly decreasing in nu; a_l proportional to 1/nu
    for (std::size_t col = 1; col <= 3; ++col)
        for (std::size_t i = 1; i < t.rows.size(); ++i)
            CHECK(t.rows[i][col] < t.rows[i - 1][col]);
    for (const auto& row : t.rows)
        CHECK(row[0] * row[4] == doctest::Approx(std::exp(2.0)).epsilon(1e-10));
}

TEST_CASE("quantity sweep: XOU power threshold constant, log threshold decreasing") {
    KeyValues kv = parse_key_values(kFig1aConfig);
    kv["model.kind"] = "xou";
    kv["model.kappa"] = "0.6";
    kv["model.theta"] = "1";
    kv["model.eta"] = "0.2";
    kv.erase("model.mu");
    kv.erase("model.sigma");
    kv["curve.mode"] = "quantity";
    kv["quantity_grid.min"] = "0.5";
    kv["quantity_grid.max"] = "5";
    kv["quantity_grid.points"] = "4";
    const CurveTable t = run_curve(build_run_config(kv));
    // columns: nu, x_e_gamma0.5, x_l, x_p
    REQUIRE(t.columns.size() == 4);
    for (std::size_t i = 1; i < t.rows.size(); ++i) {
        CHECK(t.rows[i][2] < t.rows[i - 1][2]);                              // x_l decreasing
        CHECK(t.rows[i][3] == doctest::Approx(t.rows[0][3]).epsilon(1e-10)); // x_p constant
    }
}

TEST_CASE("CSV writer is stable at 12 significant digits") {
    CHECK(format_number(2.5128624172523394) == "2.51286241725");
    CHECK(format_number(0.5) == "0.5");
    KeyValues kv = parse_key_values(kFig1aConfig);
    kv["grid.points"] = "3";
    const CurveTable t = run_curve(build_run_config(kv));
    const std::string csv = t.to_csv();
    CHECK(csv.substr(0, csv.find('\n')) ==
          "price,utility,value,certainty_equivalent,premium");
    CHECK(t.to_csv() == csv);  // deterministic
    CHECK(t.to_json().dump() == t.to_json().dump());
}

TEST_CASE("wait-forever curve emits a warning and no rows") {
    KeyValues kv = parse_key_values(kFig1aConfig);
    kv["utility.kind"] = "power";
    kv["utility.p"] = "1";
    const CurveTable t = run_curve(build_run_config(kv));
    CHECK(t.rows.empty());
    CHECK(t.metadata.contains("warning"));
}

TEST_CASE("verify driver flags a perturbed threshold") {
    KeyValues kv = parse_key_values(kFig1aConfig);
    kv["mc.paths"] = "50000";
    kv["mc.seed"] = "42";
    kv["verify.prices"] = "1.9,2.2";
    RunConfig good = build_run_config(kv);
    const VerifyOutcome ok = run_verify(good);
    CHECK(ok.passed);

    kv["verify.override_threshold"] = "2.0";
    const VerifyOutcome bad = run_verify(build_run_config(kv));
    CHECK_FALSE(bad.passed);
}

TEST_CASE("verify runs the configured sweep check") {
    KeyValues kv = parse_key_values(kFig1aConfig);
    kv["mc.paths"] = "20000";
    kv["initial_price"] = "2.3";
    kv["verify.prices"] = "2.3";
    kv["verify.sweep.min"] = "2.3";
    kv["verify.sweep.max"] = "2.7";
    kv["verify.sweep.points"] = "5";
    const VerifyOutcome out = run_verify(build_run_config(kv));
    bool found = false;
    for (const auto& check : out.report.at("checks"))
        if (check.at("name") == "sweep_argmax") {
            found = true;
            CHECK(check.at("pass").get<bool>());
        }
    CHECK(found);
}
