#include <doctest.h>

#include <omp.h>
#include <sstream>

#include "hcover/error.hpp"
#include "hcover/experiment.hpp"
#include "hcover/rng.hpp"

using namespace hcover;

namespace {

ExperimentConfig small_config(ExperimentKind kind) {
    ExperimentConfig c;
    c.kind = kind;
    c.dimensions = {6, 7};
    c.p_values = {"0.75", "0.9"};
    c.trials = 12;
    c.master_seed = 31;
    return c;
}

std::string csv_of(const ExperimentReport& r) {
    std::ostringstream out;
    write_report_csv(out, r);
    return out.str();
}

} // namespace

TEST_CASE("config JSON round trip and validation") {
    const auto doc = nlohmann::json::parse(R"({
        "schema_version": 1, "kind": "survivor", "d": [10, 12], "p": ["0.75", 0.6],
        "trials": 7, "master_seed": 5, "laziness": 0.5,
        "tolerances": {"factor": 3}, "output": {"csv": "a.csv", "json": "a.json"}})");
    const auto c = config_from_json(doc);
    CHECK(c.kind == ExperimentKind::survivor);
    CHECK(c.p_values == std::vector<std::string>{"0.75", "0.6"});
    CHECK(c.tolerance("factor") == 3.0);
    CHECK(c.csv_path == "a.csv");
    const auto back = config_from_json(to_json(c));
    CHECK(to_json(back) == to_json(c));

    auto bad = doc;
    bad["trials"] = 0;
    CHECK_THROWS_AS(config_from_json(bad), ParameterError);
    bad = doc;
    bad["d"] = nlohmann::json::array();
    CHECK_THROWS_AS(config_from_json(bad), ParameterError);
    bad = doc;
    bad["kind"] = "nope";
    CHECK_THROWS_AS(config_from_json(bad), ParameterError);
    bad = doc;
    bad["tolerances"]["made_up"] = 1;
    CHECK_THROWS_AS(config_from_json(bad), ParameterError);
    bad = doc;
    bad["schema_version"] = 2;
    CHECK_THROWS_AS(config_from_json(bad), ParameterError);
    auto by_eps = doc;
    by_eps.erase("p");
    by_eps["eps"] = {0.5, "0.2"};
    CHECK(config_from_json(by_eps).p_values == std::vector<std::string>{"0.75", "0.6"});
    by_eps["p"] = {"0.7"};
    CHECK_THROWS_AS(config_from_json(by_eps), ParameterError);
    bad = doc;
    bad["p"] = {"1.2"};
    CHECK_THROWS_AS(config_from_json(bad), ParameterError);
    for (auto kind : {ExperimentKind::cover_trend, ExperimentKind::survivor, ExperimentKind::lemma1,
                      ExperimentKind::returns, ExperimentKind::conductance, ExperimentKind::degrees,
                      ExperimentKind::last_degree, ExperimentKind::joint_unvisited}) {
        CHECK(parse_kind(to_string(kind)) == kind);
        CHECK_FALSE(default_tolerances(kind).empty());
    }
}

TEST_CASE("cell seeds depend on (d, p text), not on grid position") {
    CHECK(cell_seed(1, 12, "0.75") == cell_seed(1, 12, "0.75"));
    CHECK(cell_seed(1, 12, "0.75") != cell_seed(1, 12, "0.750"));
    CHECK(cell_seed(1, 12, "0.75") != cell_seed(2, 12, "0.75"));
    CHECK(cell_seed(1, 12, "0.75", 0) != cell_seed(1, 12, "0.75", 1));

    auto a = small_config(ExperimentKind::cover_trend);
    auto b = a;
    std::reverse(b.dimensions.begin(), b.dimensions.end());
    std::reverse(b.p_values.begin(), b.p_values.end());
    const auto ra = run_experiment(a);
    const auto rb = run_experiment(b);
    for (const auto& row : ra.rows) {
        if (row.statistic != "cover_time_mean") {
            continue;
        }
        const auto match = std::find_if(rb.rows.begin(), rb.rows.end(), [&](const ReportRow& o) {
            return o.statistic == row.statistic && o.d == row.d && o.p == row.p;
        });
        REQUIRE(match != rb.rows.end());
        CHECK(match->seed == row.seed);
        CHECK(match->measured == row.measured);
    }
}

TEST_CASE("reports are byte-identical across thread counts") {
    for (auto kind : {ExperimentKind::cover_trend, ExperimentKind::survivor, ExperimentKind::degrees,
                      ExperimentKind::last_degree, ExperimentKind::returns}) {
        const auto c = small_config(kind);
        omp_set_num_threads(1);
        const auto one = csv_of(run_experiment(c));
        omp_set_num_threads(4);
        const auto four = csv_of(run_experiment(c));
        CHECK(one == four);
        CHECK(one == csv_of(run_experiment(c)));
    }
}

TEST_CASE("every row carries its seed and reruns standalone") {
    const auto c = small_config(ExperimentKind::cover_trend);
    const auto report = run_experiment(c);
    for (const auto& row : report.rows) {
        if (row.statistic != "cover_time_mean") {
            continue;
        }
        CHECK(row.seed == cell_seed(c.master_seed, row.d, row.p));
        auto single = c;
        single.dimensions = {row.d};
        single.p_values = {row.p};
        const auto again = run_experiment(single);
        CHECK(again.rows.front().seed == row.seed);
        CHECK(again.rows.front().measured == row.measured);
    }
}

TEST_CASE("smoke run: one trial at d = 6 makes no assertion") {
    ExperimentConfig c;
    c.kind = ExperimentKind::cover_trend;
    c.dimensions = {6};
    c.p_values = {"0.75"};
    c.trials = 1;
    const auto r = run_experiment(c);
    REQUIRE_FALSE(r.rows.empty());
    for (const auto& row : r.rows) {
        CHECK(row.check == "none");
        CHECK(row.pass);
    }
}

TEST_CASE("disconnected cells fail with their rejection count") {
    ExperimentConfig c;
    c.kind = ExperimentKind::cover_trend;
    c.dimensions = {8};
    c.p_values = {"0.2"};
    c.trials = 3;
    c.max_resamples = 5;
    const auto r = run_experiment(c);
    REQUIRE(r.rows.size() == 1);
    CHECK_FALSE(r.rows[0].pass);
    CHECK(r.rows[0].rejected == 15);
    CHECK_FALSE(r.passed());
}

TEST_CASE("JSON summary round trip and verify") {
    auto c = small_config(ExperimentKind::returns);
    const auto report = run_experiment(c);
    const auto doc = report_to_json(report);
    CHECK(doc["environment"]["rng"] == "mt19937_64");
    CHECK(doc["environment"]["version"] == kVersion);
    const auto back = report_from_json(doc);
    CHECK(csv_of(back) == csv_of(report));
    const auto v = verify_report(back);
    CHECK(v.consistent);

    auto tampered = back;
    tampered.rows[0].pass = !tampered.rows[0].pass;
    CHECK_FALSE(verify_report(tampered).consistent);
    auto moved = back;
    moved.rows[0].check = "measured";
    moved.rows[0].upper = moved.rows[0].measured - 1.0;
    moved.rows[0].pass = false;
    const auto mv = verify_report(moved);
    CHECK(mv.consistent);
    CHECK(mv.failing == std::vector<std::uint64_t>{0});
}

TEST_CASE("row evaluation") {
    ReportRow r;
    r.check = "ratio";
    r.measured = 2.0;
    r.predicted = 1.0;
    r.ratio = 2.0;
    r.lower = 0.5;
    r.upper = 1.5;
    CHECK_FALSE(r.evaluate());
    r.upper = 2.0;
    CHECK(r.evaluate());
    r.check = "measured";
    r.measured = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(r.evaluate());
    r.check = "none";
    CHECK(r.evaluate());
}

TEST_CASE("connected sampling resamples deterministically") {
    const auto a = sample_connected(8, Probability::parse("0.6"), 4, 1000);
    const auto b = sample_connected(8, Probability::parse("0.6"), 4, 1000);
    REQUIRE(a.graph.has_value());
    CHECK(is_connected(*a.graph));
    CHECK(*a.graph == *b.graph);
    CHECK(a.rejected == b.rejected);
    CHECK(a.graph->seed() == derive_seed(4, a.rejected));
}

TEST_CASE("remaining kinds produce well-formed rows") {
    auto lemma = small_config(ExperimentKind::lemma1);
    lemma.dimensions = {5};
    lemma.p_values = {"0.8"};
    lemma.laziness = 0.5;
    lemma.tolerances["vertex_samples"] = 3;
    const auto lr = run_experiment(lemma);
    CHECK(std::count_if(lr.rows.begin(), lr.rows.end(), [](const ReportRow& r) { return r.statistic == "decay_rate"; }) == 3);

    auto cond = small_config(ExperimentKind::conductance);
    cond.dimensions = {3, 4};
    cond.trials = 3;
    const auto cr = run_experiment(cond);
    CHECK(cr.passed());

    auto joint = small_config(ExperimentKind::joint_unvisited);
    joint.dimensions = {10};
    joint.p_values = {"0.6"};
    joint.trials = 200;
    joint.tolerances["pairs"] = 2;
    const auto jr = run_experiment(joint);
    CHECK_FALSE(jr.rows.empty());
    for (const auto& row : jr.rows) {
        CHECK(row.seed == cell_seed(joint.master_seed, 10, "0.6"));
    }
}
