// Acceptance gate: one PASS/FAIL line per criterion. Tolerances are pinned here.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "hcover/conductance.hpp"
#include "hcover/exact_chain.hpp"
#include "hcover/experiment.hpp"
#include "hcover/hypercube.hpp"
#include "hcover/theory.hpp"
#include "hcover/walk.hpp"

using namespace hcover;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double x, int digits = 4) {
    std::ostringstream out;
    out.precision(digits);
    out << x;
    return out.str();
}

double mean_cover(const HypercubeSubgraph& g, double laziness, std::uint64_t trials, std::uint64_t seed,
                  double* std_error = nullptr) {
    const auto rows = cover_trials(g, WalkConfig{laziness, Vertex{0}, std::nullopt, seed}, trials);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (const auto& r : rows) {
        const auto x = static_cast<double>(r.cover_time.value());
        sum += x;
        sum_sq += x * x;
    }
    const double n = static_cast<double>(trials);
    const double mean = sum / n;
    if (std_error) {
        *std_error = std::sqrt((sum_sq - n * mean * mean) / (n - 1) / n);
    }
    return mean;
}

std::vector<const ReportRow*> rows_named(const ExperimentReport& r, const std::string& prefix) {
    std::vector<const ReportRow*> out;
    for (const auto& row : r.rows) {
        if (row.statistic.rfind(prefix, 0) == 0) {
            out.push_back(&row);
        }
    }
    return out;
}

ExperimentConfig config(ExperimentKind kind, std::vector<int> d, std::vector<std::string> p, std::uint64_t trials,
                        std::uint64_t seed) {
    ExperimentConfig c;
    c.kind = kind;
    c.dimensions = std::move(d);
    c.p_values = std::move(p);
    c.trials = trials;
    c.master_seed = seed;
    return c;
}

// ---------------------------------------------------------------------------

Outcome ac1_matthews() {
    const auto g = HypercubeSubgraph::full(16);
    const double n = 65536.0;
    const double ratio = mean_cover(g, 0.0, 30, 1) / (n * std::log(n));
    return {ratio >= 0.9 && ratio <= 1.2, "full Q_16, 30 trials: mean / (n ln n) = " + fmt(ratio) + " (band [0.9, 1.2])"};
}

Outcome ac2_trend() {
    const auto report =
        run_experiment(config(ExperimentKind::cover_trend, {12, 14, 16}, {"0.6", "0.75", "0.9"}, 30, 2));
    std::ostringstream detail;
    bool ok = true;
    for (const auto* r : rows_named(report, "cover_time_mean")) {
        if (r->d == 16) {
            ok = ok && r->pass && r->ratio >= 0.7 && r->ratio <= 1.4;
        }
    }
    for (const auto* r : rows_named(report, "trend_deviation")) {
        ok = ok && r->pass;
        detail << "p=" << r->p << ": |ratio16-1|=" << fmt(r->measured, 3) << " <= |ratio12-1|+0.05=" << fmt(*r->upper, 3)
               << "; ";
    }
    for (const auto* r : rows_named(report, "cover_time_mean")) {
        if (r->d == 16) {
            detail << "ratio(16," << r->p << ")=" << fmt(r->ratio, 3) << " ";
        }
    }
    return {ok, detail.str()};
}

Outcome ac3_lemma1() {
    auto c = config(ExperimentKind::lemma1, {8}, {"0.7"}, 1, 11);
    c.laziness = 0.5;
    const auto report = run_experiment(c);
    const auto rates = rows_named(report, "decay_rate");
    const auto circles = rows_named(report, "R_on_circle_min");
    const auto within = std::count_if(rates.begin(), rates.end(), [](const ReportRow* r) { return r->pass; });
    const bool circles_ok = std::all_of(circles.begin(), circles.end(), [](const ReportRow* r) { return r->pass; });
    double worst = 0.0;
    double min_circle = 1e300;
    for (const auto* r : rates) {
        worst = std::max(worst, std::abs(r->ratio - 1.0));
    }
    for (const auto* r : circles) {
        min_circle = std::min(min_circle, r->measured);
    }
    double max_tpi = 0.0;
    for (const auto* r : rows_named(report, "T_pi_v")) {
        max_tpi = std::max(max_tpi, r->measured);
    }
    std::ostringstream detail;
    detail << within << "/" << rates.size() << " vertices with rate within 10% of pi_v/R_v (worst "
           << fmt(100 * worst, 3) << "%); min |R(T,z)| = " << fmt(min_circle) << " (>= 0.25: "
           << (circles_ok ? "yes" : "no") << "); max T*pi_v = " << fmt(max_tpi, 3);
    return {rates.size() >= 10 && static_cast<std::size_t>(within) == rates.size() && circles_ok, detail.str()};
}

// Compares a Monte Carlo frequency with an exact probability at 3 binomial sigma.
struct AgreementTally {
    std::uint64_t checked = 0;
    std::uint64_t within = 0;

    void add(double freq, double prob, std::uint64_t trials) {
        const double sigma = std::sqrt(std::max(prob * (1.0 - prob), 0.0) / static_cast<double>(trials));
        ++checked;
        within += std::abs(freq - prob) <= 3.0 * sigma + 1e-12;
    }
};

Outcome ac4_oracle_equivalence() {
    constexpr std::uint64_t kTrials = 20000;
    AgreementTally returns;
    AgreementTally visits;
    AgreementTally unvisited;
    for (int d : {6, 8}) {
        for (double lazy : {0.0, 0.5}) {
            const auto draw = sample_connected(d, Probability::parse("0.75"), 40 + d, 1000);
            const auto& g = *draw.graph;
            const auto chain = build_chain(g, lazy);
            const auto n = g.vertex_count();
            std::vector<std::uint64_t> times;
            for (std::uint64_t t = 1; t <= 12; ++t) {
                times.push_back(t);
            }
            times.push_back(25);
            times.push_back(60);

            // Return frequencies r_t at a few vertices.
            for (Vertex v : {Vertex{0}, static_cast<Vertex>(n / 3), static_cast<Vertex>(n - 1)}) {
                const auto series = return_series(chain, v, 61);
                const auto counts =
                    position_counts(g, WalkConfig{lazy, v, std::nullopt, derive_seed(7, v)}, times, kTrials);
                for (std::size_t k = 0; k < times.size(); ++k) {
                    returns.add(static_cast<double>(counts[k][v]) / kTrials, series.values[times[k]], kTrials);
                }
            }
            // Visit frequencies: the full distribution at each time from start 0.
            const auto counts = position_counts(g, WalkConfig{lazy, Vertex{0}, std::nullopt, 99}, times, kTrials);
            std::vector<double> dist(n, 0.0);
            std::vector<double> next(n);
            dist[0] = 1.0;
            std::uint64_t t = 0;
            for (std::size_t k = 0; k < times.size(); ++k) {
                for (; t < times[k]; ++t) {
                    chain.push_forward(dist, next);
                    dist.swap(next);
                }
                for (Vertex x = 0; x < n; ++x) {
                    visits.add(static_cast<double>(counts[k][x]) / kTrials, dist[x], kTrials);
                }
            }
            // Unvisited probabilities for a few targets.
            for (Vertex target : {Vertex{1}, static_cast<Vertex>(n / 2), static_cast<Vertex>(n - 1)}) {
                const auto curve = unvisited_curve(chain, target, 0, times.back());
                const auto freq = unvisited_frequencies(g, WalkConfig{lazy, Vertex{0}, std::nullopt, 5 + target},
                                                        target, times, kTrials);
                for (std::size_t k = 0; k < times.size(); ++k) {
                    unvisited.add(freq[k], curve[times[k]], kTrials);
                }
            }
        }
    }
    const auto frac = [](const AgreementTally& a) { return static_cast<double>(a.within) / a.checked; };
    const std::uint64_t checked = returns.checked + visits.checked + unvisited.checked;
    const std::uint64_t within = returns.within + visits.within + unvisited.within;
    const double all = static_cast<double>(within) / checked;
    const bool ok = frac(returns) >= 0.95 && frac(visits) >= 0.95 && frac(unvisited) >= 0.95;
    return {ok, "within 3 sigma: returns " + fmt(100 * frac(returns)) + "%, visits " + fmt(100 * frac(visits)) +
                    "%, unvisited " + fmt(100 * frac(unvisited)) + "% (overall " + fmt(100 * all) + "% of " +
                    std::to_string(checked) + " pairs; d in {6, 8})"};
}

// Subset-state dynamic program by value iteration, independent of exact_cover_time.
double cover_time_dp(const ExactChain& c, Vertex start) {
    const auto n = c.state_count();
    const std::uint32_t full = (1U << n) - 1U;
    std::vector<double> E(static_cast<std::size_t>(full + 1) * n, 0.0);
    for (int sweep = 0; sweep < 100000; ++sweep) {
        double change = 0.0;
        for (std::uint32_t S = full; S-- > 0;) {
            for (Vertex x = 0; x < n; ++x) {
                if (!((S >> x) & 1U)) {
                    continue;
                }
                double v = 1.0;
                for (Vertex y = 0; y < n; ++y) {
                    const double pr = c.transition(x, y);
                    const std::uint32_t T = S | (1U << y);
                    if (pr > 0.0 && T != full) {
                        v += pr * E[static_cast<std::size_t>(T) * n + y];
                    }
                }
                change = std::max(change, std::abs(v - E[static_cast<std::size_t>(S) * n + x]));
                E[static_cast<std::size_t>(S) * n + x] = v;
            }
        }
        if (change < 1e-13) {
            break;
        }
    }
    return E[static_cast<std::size_t>(1U << start) * n + start];
}

Outcome ac5_tiny_cover() {
    const auto g = HypercubeSubgraph::full(2);
    const auto chain = build_chain(g, 0.0);
    const double exact = exact_cover_time(chain, 0);
    const double dp = cover_time_dp(chain, 0);
    double se = 0.0;
    const double mean = mean_cover(g, 0.0, 100000, 5, &se);
    const bool ok = std::abs(mean - exact) <= 3.0 * se && std::abs(exact - dp) <= 1e-9;
    return {ok, "full Q_2: simulated " + fmt(mean, 6) + " +- " + fmt(se, 3) + " vs exact " + fmt(exact, 10) +
                    " (subset DP " + fmt(dp, 10) + ")"};
}

Outcome ac6_laziness() {
    const auto g = HypercubeSubgraph::full(10);
    const double simple = mean_cover(g, 0.0, 200, 6);
    const double lazy = mean_cover(g, 0.5, 200, 7);
    const double ratio = lazy / simple;
    return {ratio >= 1.8 && ratio <= 2.2, "full Q_10, 200 trials each: lazy / simple = " + fmt(ratio) + " (band [1.8, 2.2])"};
}

Outcome ac7_degrees() {
    const auto report = run_experiment(config(ExperimentKind::degrees, {12}, {"0.6"}, 10000, 5));
    const auto bins = rows_named(report, "degree_bins_within_band").front();
    const auto formula = rows_named(report, "degree_variance_formula");
    const auto exact = rows_named(report, "degree_variance_exact");
    auto worst = [](const std::vector<const ReportRow*>& rows) {
        double w = 0.0;
        for (const auto* r : rows) {
            w = std::max(w, std::abs(r->ratio - 1.0));
        }
        return w;
    };
    const bool var_ok = std::all_of(formula.begin(), formula.end(), [](const ReportRow* r) { return r->pass; });
    const bool exact_ok = std::all_of(exact.begin(), exact.end(), [](const ReportRow* r) { return r->pass; });
    std::ostringstream detail;
    detail << fmt(100 * bins->measured) << "% of bins within 4 sigma; closed-form variance worst rel. error "
           << fmt(100 * worst(formula), 3) << "% over " << formula.size() << " bins (tol 15%)"
           << "; finite-n exact variance worst " << fmt(100 * worst(exact), 3) << "% ("
           << (exact_ok ? "within" : "outside") << " tol)";
    return {bins->pass && var_ok, detail.str()};
}

Outcome ac8_harper() {
    bool ok = true;
    std::ostringstream detail;
    for (int d : {3, 4}) {
        const auto r = harper_check(d);
        bool equality = true;
        for (int k = 0; k < d; ++k) {
            equality = equality && std::abs(r.min_slack_by_size[1U << k]) <= 1e-9;
        }
        ok = ok && r.ok && equality;
        detail << "Q_" << d << ": " << r.checked << " subsets, ok=" << r.ok << ", subcube equality=" << equality << "; ";
    }
    const auto s = harper_check_sampled(10, 100000, 8);
    ok = ok && s.ok;
    detail << "d=10: " << s.checked << " random subsets ok=" << s.ok << " min slack " << fmt(s.worst_slack);
    return {ok, detail.str()};
}

Outcome ac9_conductance() {
    std::uint64_t checked = 0;
    std::uint64_t sandwich_ok = 0;
    std::uint64_t bound_ok = 0;
    for (int d : {2, 3, 4}) {
        for (const char* p : {"0.6", "0.75", "0.9"}) {
            for (std::uint64_t seed = 0; seed < 20; ++seed) {
                const auto g = sample_subgraph(d, Probability::parse(p), seed);
                if (!is_connected(g)) {
                    continue;
                }
                ++checked;
                const double phi = exact_conductance(g).phi;
                const auto chain = build_chain(g, 0.5);
                const double gap = spectral_gap(chain).gap;
                sandwich_ok += cheeger_sandwich(gap).contains(phi);
                const double eps = std::pow(static_cast<double>(g.vertex_count()), -3.0);
                const auto tv = tv_mixing_time(chain, eps);
                const auto pi = chain.stationary();
                const auto [lo, hi] = std::minmax_element(pi.begin(), pi.end());
                // Lazy chain conductance is half the graph value.
                const auto bound = mixing_bound_from_conductance(phi / 2.0, *lo, *hi, eps);
                bound_ok += tv && bound && *bound >= *tv;
            }
        }
    }
    return {checked > 0 && sandwich_ok == checked && bound_ok == checked,
            std::to_string(checked) + " connected fixtures (d in {2,3,4}, p in {0.6,0.75,0.9}, seeds 0-19): " +
                std::to_string(sandwich_ok) + " inside [gap/2, sqrt(2 gap)], " + std::to_string(bound_ok) +
                " with conductance mixing bound >= tv_mixing_time(n^-3)"};
}

Outcome ac10_structure() {
    const int d = 16;
    const double L = 100.0 * d / std::log(static_cast<double>(d));
    const int h = static_cast<int>(std::floor(d / (2.0 * std::log(static_cast<double>(d)))));
    const int cap = std::min(d, static_cast<int>(std::floor(L)));
    std::uint64_t samples = 0;
    std::uint64_t connected = 0;
    std::uint64_t min_deg_ok = 0;
    std::uint64_t spacing_ok = 0;
    std::uint64_t qualifying = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto g = sample_subgraph(d, Probability::parse("0.65"), seed);
        ++samples;
        min_deg_ok += min_degree(g) >= 1;
        if (!is_connected(g)) {
            continue;
        }
        ++connected;
        const auto s = low_degree_spacing_ok(g, cap, h);
        spacing_ok += s.ok;
        qualifying += s.qualifying;
    }
    const double f_min = static_cast<double>(min_deg_ok) / samples;
    const double f_space = connected ? static_cast<double>(spacing_ok) / connected : 0.0;
    std::ostringstream detail;
    detail << "d=16 p=0.65, 50 seeds: min degree >= 1 in " << fmt(100 * f_min) << "% of all samples (" << connected
           << " connected); spacing with L=" << fmt(L) << " (cap " << cap << "), h=" << h << " holds in "
           << fmt(100 * f_space) << "% (" << qualifying / std::max<std::uint64_t>(connected, 1)
           << " qualifying vertices per sample)";
    return {f_min >= 0.95 && f_space >= 0.90, detail.str()};
}

Outcome ac11_last_degree() {
    const auto report = run_experiment(config(ExperimentKind::last_degree, {14}, {"0.55"}, 100, 6));
    const auto* med = rows_named(report, "last_degree_median").front();
    const auto* mode = rows_named(report, "last_degree_mode").front();
    return {med->pass && mode->pass && med->accepted >= 100,
            "d=14 p=0.55, " + std::to_string(med->accepted) + " trials: median " + fmt(med->measured) + " < dp=" +
                fmt(med->predicted) + ", mode " + fmt(mode->measured) + " in [" + fmt(*mode->lower) + ", " +
                fmt(*mode->upper) + "]"};
}

Outcome ac12_joint() {
    const auto report = run_experiment(config(ExperimentKind::joint_unvisited, {12}, {"0.55"}, 10000, 7));
    const auto rows = rows_named(report, "joint_ratio");
    const bool all = std::all_of(rows.begin(), rows.end(), [](const ReportRow* r) { return r->pass; });
    std::ostringstream detail;
    detail << rows.size() << " pairs, 10^4 trials each: P_vw/(P_v P_w) =";
    for (const auto* r : rows) {
        detail << ' ' << fmt(r->measured);
    }
    detail << " (band [0.8, 1.25])";
    return {rows.size() >= 5 && all && report.passed(), detail.str()};
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"AC1 Matthews anchor", ac1_matthews},
        {"AC2 cover-time trend", ac2_trend},
        {"AC3 first-visit lemma", ac3_lemma1},
        {"AC4 oracle equivalence", ac4_oracle_equivalence},
        {"AC5 exact tiny cover time", ac5_tiny_cover},
        {"AC6 laziness doubling", ac6_laziness},
        {"AC7 degree statistics", ac7_degrees},
        {"AC8 Harper inequality", ac8_harper},
        {"AC9 conductance sandwich", ac9_conductance},
        {"AC10 structural properties", ac10_structure},
        {"AC11 last-visited degree", ac11_last_degree},
        {"AC12 joint independence", ac12_joint},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        const auto started = std::chrono::steady_clock::now();
        const auto r = check();
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        std::printf("%s %s: %s [%.1fs]\n", r.pass ? "PASS" : "FAIL", name, r.detail.c_str(), secs);
        std::fflush(stdout);
        failures += !r.pass;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
