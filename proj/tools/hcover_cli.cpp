#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hcover/conductance.hpp"
#include "hcover/error.hpp"
#include "hcover/exact_chain.hpp"
#include "hcover/experiment.hpp"
#include "hcover/hypercube.hpp"
#include "hcover/rng.hpp"
#include "hcover/theory.hpp"
#include "hcover/walk.hpp"

namespace {

using namespace hcover;

// Instance source shared by the subcommands: a saved file or (d, p, seed).
struct InstanceArgs {
    std::string path;
    int d = 8;
    std::string p = "1";
    std::uint64_t seed = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--instance", path, "Instance JSON written by `generate`");
        cmd->add_option("-d,--dimension", d, "Cube dimension")->check(CLI::Range(1, kMaxDimension));
        cmd->add_option("-p,--probability", p, "Edge retention probability (decimal text)");
        cmd->add_option("--seed", seed, "Instance seed");
    }

    HypercubeSubgraph load() const {
        if (!path.empty()) {
            return load_instance(path);
        }
        return sample_subgraph(d, Probability::parse(p), seed);
    }
};

void print_json(const nlohmann::json& doc) { std::cout << doc.dump(2) << '\n'; }

int run_generate(const InstanceArgs& args, const std::string& out) {
    const auto g = args.load();
    if (!out.empty()) {
        save_instance(g, out);
    }
    const auto hist = degree_histogram(g);
    print_json({{"d", g.dimension()},
                {"p", g.p().text()},
                {"seed", g.seed()},
                {"rng", std::string(kRngName)},
                {"vertices", g.vertex_count()},
                {"edges", g.edge_count()},
                {"connected", is_connected(g)},
                {"min_degree", min_degree(g)},
                {"degree_histogram", hist.counts}});
    return 0;
}

int run_cover(const InstanceArgs& args, std::uint64_t trials, double laziness, std::uint64_t walk_seed,
              const std::string& start, const std::string& log_path) {
    const auto g = args.load();
    WalkConfig cfg;
    cfg.laziness = laziness;
    cfg.seed = walk_seed;
    cfg.start = start == "stationary" ? std::nullopt : std::optional<Vertex>(static_cast<Vertex>(std::stoul(start)));
    const auto rows = cover_trials(g, cfg, trials);
    if (!log_path.empty()) {
        std::ofstream out(log_path);
        write_trial_log(out, rows);
    }
    double sum = 0.0;
    double sum_sq = 0.0;
    std::uint64_t covered = 0;
    for (const auto& r : rows) {
        if (r.cover_time) {
            const auto x = static_cast<double>(*r.cover_time);
            sum += x;
            sum_sq += x * x;
            ++covered;
        }
    }
    const double n = static_cast<double>(g.vertex_count());
    nlohmann::json doc{{"d", g.dimension()},     {"p", g.p().text()},     {"instance_seed", g.seed()},
                       {"walk_seed", walk_seed}, {"laziness", laziness}, {"trials", trials},
                       {"covered", covered},     {"exhausted", trials - covered}};
    if (covered > 0) {
        const double mean = sum / static_cast<double>(covered);
        const double var = covered > 1 ? (sum_sq - covered * mean * mean) / static_cast<double>(covered - 1) : 0.0;
        doc["mean_cover_time"] = mean;
        doc["std_error"] = std::sqrt(std::max(var, 0.0) / static_cast<double>(covered));
        doc["mean_over_nlogn"] = mean / (n * std::log(n));
        if (g.p().value() > 0.5) {
            doc["predicted"] = theory::predicted_cover_time(theory::Params::from_p(g.dimension(), g.p().value()));
        }
    }
    print_json(doc);
    return 0;
}

int run_mixing(const InstanceArgs& args, double laziness, double eps) {
    const auto g = args.load();
    const auto chain = build_chain(g, laziness);
    const double epsilon = eps > 0.0 ? eps : std::pow(static_cast<double>(g.vertex_count()), -3.0);
    const auto t = tv_mixing_time(chain, epsilon);
    const auto gap = spectral_gap(chain);
    nlohmann::json doc{{"d", g.dimension()},  {"p", g.p().text()},   {"seed", g.seed()},
                       {"laziness", laziness}, {"epsilon", epsilon}, {"spectral_gap", gap.gap},
                       {"lambda2", gap.lambda2}};
    doc["tv_mixing_time"] = t ? nlohmann::json(*t) : nlohmann::json(nullptr);
    if (!t) {
        doc["note"] = "chain is periodic or did not mix within the step cap";
    }
    print_json(doc);
    return 0;
}

int run_conductance_cmd(const InstanceArgs& args, bool csv) {
    const auto g = args.load();
    ConductanceRow row{g.dimension(), g.p().text(), g.seed(), "", 0.0, 0, false};
    if (g.dimension() <= kMaxExactConductanceDimension) {
        const auto r = exact_conductance(g);
        row.method = "exact";
        row.value = r.phi;
        row.witness_size = r.witness ? r.witness->subset.size() : 0;
        row.certified = true;
    } else {
        const auto est = conductance_lower_estimate(g);
        row.method = est.method;
        row.value = est.value;
        row.witness_size = est.witness_size;
        row.certified = est.certified;
    }
    if (csv) {
        write_conductance_csv(std::cout, std::span<const ConductanceRow>(&row, 1));
    } else {
        print_json({{"d", row.d},
                    {"p", row.p},
                    {"seed", row.seed},
                    {"method", row.method},
                    {"value", row.value},
                    {"witness_size", row.witness_size},
                    {"certified", row.certified}});
    }
    return 0;
}

int run_theory(const std::vector<int>& dims, const std::vector<std::string>& ps, double b, double nu, double theta,
               const std::string& format) {
    nlohmann::json doc = nlohmann::json::array();
    if (format == "csv") {
        std::cout << "d,p,name,value,formula,validity\n";
    }
    for (int d : dims) {
        for (const auto& p_text : ps) {
            const auto p = Probability::parse(p_text);
            for (const auto& pr : theory::prediction_table(theory::Params::from_p(d, p.value()), b, nu, theta)) {
                if (format == "csv") {
                    std::ostringstream v;
                    v.precision(17);
                    v << pr.value;
                    std::cout << d << ',' << p.text() << ',' << pr.name << ',' << v.str() << ',' << pr.formula_id
                              << ',' << pr.validity << '\n';
                } else {
                    doc.push_back({{"d", d},
                                   {"p", p.text()},
                                   {"name", pr.name},
                                   {"value", std::isfinite(pr.value) ? nlohmann::json(pr.value) : nlohmann::json()},
                                   {"formula", pr.formula_id},
                                   {"validity", pr.validity}});
                }
            }
        }
    }
    if (format != "csv") {
        print_json(doc);
    }
    return 0;
}

int run_experiment_cmd(const std::string& config_path, std::string csv_path, std::string json_path) {
    auto config = load_config(config_path);
    if (csv_path.empty()) {
        csv_path = config.csv_path;
    }
    if (json_path.empty()) {
        json_path = config.json_path;
    }
    const auto report = run_experiment(config);
    if (!csv_path.empty()) {
        std::ofstream out(csv_path);
        write_report_csv(out, report);
    } else {
        write_report_csv(std::cout, report);
    }
    if (!json_path.empty()) {
        std::ofstream out(json_path);
        out << report_to_json(report).dump(2) << '\n';
    }
    std::uint64_t failures = 0;
    for (const auto& r : report.rows) {
        if (!r.pass) {
            ++failures;
            std::cerr << "FAIL cell " << r.cell << " d=" << r.d << " p=" << r.p << " " << r.statistic
                      << " measured=" << r.measured << " predicted=" << r.predicted << " " << r.note << '\n';
        }
    }
    std::cerr << to_string(config.kind) << ": " << report.rows.size() << " rows, " << failures << " failing\n";
    return failures == 0 ? 0 : 1;
}

int run_verify(const std::string& report_path) {
    std::ifstream in(report_path);
    if (!in) {
        throw std::runtime_error("cannot open report " + report_path);
    }
    const auto report = report_from_json(nlohmann::json::parse(in));
    const auto v = verify_report(report);
    for (auto i : v.mismatched) {
        std::cerr << "MISMATCH row " << i << " stored pass flag disagrees with its band\n";
    }
    for (auto i : v.failing) {
        const auto& r = report.rows[i];
        std::cerr << "FAIL row " << i << " " << r.statistic << " d=" << r.d << " p=" << r.p << '\n';
    }
    std::cout << "rows=" << report.rows.size() << " failing=" << v.failing.size()
              << " consistent=" << (v.consistent ? "yes" : "no") << '\n';
    return v.consistent && v.failing.empty() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Random walks on random subgraphs of the hypercube"};
    app.set_version_flag("--version", std::string(hcover::kVersion));
    app.require_subcommand(1);

    InstanceArgs gen_args;
    std::string gen_out;
    auto* gen = app.add_subcommand("generate", "Sample a Q_{n,p} instance and print its summary");
    gen_args.attach(gen);
    gen->add_option("-o,--out", gen_out, "Write the instance JSON here");

    InstanceArgs cover_args;
    std::uint64_t cover_trials_n = 10;
    double cover_lazy = 0.0;
    std::uint64_t walk_seed = 1;
    std::string start = "0";
    std::string log_path;
    auto* cover = app.add_subcommand("cover", "Simulate cover times on one instance");
    cover_args.attach(cover);
    cover->add_option("--trials", cover_trials_n, "Number of walks")->check(CLI::PositiveNumber);
    cover->add_option("--laziness", cover_lazy, "Stay-put probability")->check(CLI::Range(0.0, 0.999999));
    cover->add_option("--walk-seed", walk_seed, "Seed of the walk streams");
    cover->add_option("--start", start, "Start vertex, or 'stationary'");
    cover->add_option("--log", log_path, "Per-trial CSV log");

    InstanceArgs mix_args;
    double mix_lazy = 0.5;
    double mix_eps = 0.0;
    auto* mixing = app.add_subcommand("mixing", "Exact tv mixing time and spectral gap (d <= 12)");
    mix_args.attach(mixing);
    mixing->add_option("--laziness", mix_lazy, "Stay-put probability")->check(CLI::Range(0.0, 0.999999));
    mixing->add_option("--epsilon", mix_eps, "Threshold; default n^-3");

    InstanceArgs cond_args;
    bool cond_csv = false;
    auto* cond = app.add_subcommand("conductance", "Exact conductance (d <= 5) or a certified lower estimate");
    cond_args.attach(cond);
    cond->add_flag("--csv", cond_csv, "CSV instead of JSON");

    std::vector<int> th_dims{16};
    std::vector<std::string> th_ps{"0.75"};
    double th_b = 0.0;
    double th_nu = 0.0;
    double th_theta = 1.0;
    std::string th_format = "json";
    auto* th = app.add_subcommand("theory", "Named predictions for a (d, p) grid");
    th->add_option("-d,--dimension", th_dims, "Dimensions")->check(CLI::Range(1, 64));
    th->add_option("-p,--probability", th_ps, "Probabilities (decimal text)");
    th->add_option("--b", th_b, "Upper-mark knob b >= 1 (default d)");
    th->add_option("--nu", th_nu, "Correction nu in [0, 1/2]");
    th->add_option("--theta", th_theta, "Threshold constant in p_c = (1/2)(1 + theta log d / d)");
    th->add_option("--format", th_format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

    auto* exp = app.add_subcommand("experiment", "Config-driven experiments");
    exp->require_subcommand(1);
    std::string config_path;
    std::string csv_override;
    std::string json_override;
    auto* run = exp->add_subcommand("run", "Run an experiment config");
    run->add_option("config", config_path, "Config JSON")->required()->check(CLI::ExistingFile);
    run->add_option("--csv", csv_override, "Report CSV path");
    run->add_option("--json", json_override, "Report JSON summary path");
    std::string report_path;
    auto* verify = exp->add_subcommand("verify", "Re-check a JSON report against its declared bands");
    verify->add_option("report", report_path, "Report JSON")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            return run_generate(gen_args, gen_out);
        }
        if (*cover) {
            return run_cover(cover_args, cover_trials_n, cover_lazy, walk_seed, start, log_path);
        }
        if (*mixing) {
            return run_mixing(mix_args, mix_lazy, mix_eps);
        }
        if (*cond) {
            return run_conductance_cmd(cond_args, cond_csv);
        }
        if (*th) {
            return run_theory(th_dims, th_ps, th_b, th_nu, th_theta, th_format);
        }
        if (*run) {
            return run_experiment_cmd(config_path, csv_override, json_override);
        }
        if (*verify) {
            return run_verify(report_path);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
