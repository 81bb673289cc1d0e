#include "hcover/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "hcover/conductance.hpp"
#include "hcover/error.hpp"
#include "hcover/exact_chain.hpp"
#include "hcover/parallel.hpp"
#include "hcover/rng.hpp"
#include "hcover/theory.hpp"
#include "hcover/walk.hpp"

namespace hcover {

namespace {

constexpr std::pair<ExperimentKind, const char*> kKindNames[] = {
    {ExperimentKind::cover_trend, "cover_trend"},   {ExperimentKind::survivor, "survivor"},
    {ExperimentKind::lemma1, "lemma1"},             {ExperimentKind::returns, "returns"},
    {ExperimentKind::conductance, "conductance"},   {ExperimentKind::degrees, "degrees"},
    {ExperimentKind::last_degree, "last_degree"},   {ExperimentKind::joint_unvisited, "joint_unvisited"},
};

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

struct Moments {
    double mean = 0.0;
    double variance = 0.0; // unbiased
    double std_error = 0.0;
    std::uint64_t count = 0;
};

Moments moments(const std::vector<double>& xs) {
    Moments m;
    m.count = xs.size();
    if (xs.empty()) {
        m.mean = nan();
        return m;
    }
    m.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) {
            ss += (x - m.mean) * (x - m.mean);
        }
        m.variance = ss / static_cast<double>(xs.size() - 1);
        m.std_error = std::sqrt(m.variance / static_cast<double>(xs.size()));
    }
    return m;
}

// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

ReportRow base_row(std::uint64_t cell, int d, const std::string& p, std::uint64_t seed, std::string statistic) {
    ReportRow row;
    row.cell = cell;
    row.d = d;
    row.p = p;
    row.seed = seed;
    row.statistic = std::move(statistic);
    row.check = "none";
    return row;
}

ReportRow finish(ReportRow row) {
    row.ratio = row.predicted != 0.0 ? row.measured / row.predicted : nan();
    row.pass = row.evaluate();
    return row;
}

std::string format_double(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    std::ostringstream out;
    out.precision(17);
    out << x;
    return out.str();
}

nlohmann::json number_or_null(double x) {
    if (std::isfinite(x)) {
        return x;
    }
    return nullptr;
}

double number_from(const nlohmann::json& v) { return v.is_null() ? nan() : v.get<double>(); }

// Fresh connected instance per trial, the way the trend experiments average over Q_{n,p}.
struct TrialInstance {
    std::optional<HypercubeSubgraph> graph;
    std::uint64_t rejected = 0;
    std::uint64_t walk_seed = 0;
};

TrialInstance trial_instance(const ExperimentConfig& config, int d, const Probability& p, std::uint64_t seed,
                             std::uint64_t trial) {
    auto draw = sample_connected(d, p, derive_seed(seed, 2 * trial), config.max_resamples);
    return TrialInstance{std::move(draw.graph), draw.rejected, derive_seed(seed, 2 * trial + 1)};
}

using CellRunner = std::vector<ReportRow> (*)(const ExperimentConfig&, std::uint64_t, int, const std::string&,
                                             std::uint64_t);

std::vector<ReportRow> for_each_cell(const ExperimentConfig& config, CellRunner runner) {
    std::vector<ReportRow> rows;
    std::uint64_t cell = 0;
    for (int d : config.dimensions) {
        for (const auto& p : config.p_values) {
            const std::uint64_t seed = cell_seed(config.master_seed, d, p);
            auto cell_rows = runner(config, cell, d, p, seed);
            rows.insert(rows.end(), cell_rows.begin(), cell_rows.end());
            ++cell;
        }
    }
    return rows;
}

ReportRow failed_cell(std::uint64_t cell, int d, const std::string& p, std::uint64_t seed, std::string statistic,
                      std::uint64_t rejected, std::string note) {
    ReportRow row = base_row(cell, d, p, seed, std::move(statistic));
    row.check = "measured";
    row.measured = nan();
    row.rejected = rejected;
    row.note = std::move(note);
    return finish(row);
}

// ---------------------------------------------------------------- cover_trend

std::vector<ReportRow> cover_trend_cell(const ExperimentConfig& config, std::uint64_t cell, int d,
                                        const std::string& p_text, std::uint64_t seed) {
    const auto p = Probability::parse(p_text);
    struct Outcome {
        std::optional<std::uint64_t> cover;
        std::uint64_t rejected = 0;
        bool drawn = false;
    };
    std::vector<Outcome> outcomes(config.trials);
    for_each_index(config.trials, Execution::parallel, [&](std::uint64_t i) {
        auto inst = trial_instance(config, d, p, seed, i);
        outcomes[i].rejected = inst.rejected;
        if (!inst.graph) {
            return;
        }
        outcomes[i].drawn = true;
        WalkConfig wc{config.laziness, Vertex{0}, std::nullopt, inst.walk_seed};
        outcomes[i].cover = simulate_cover(*inst.graph, wc).cover_time;
    });
    std::vector<double> covers;
    std::uint64_t rejected = 0;
    std::uint64_t accepted = 0;
    std::uint64_t exhausted = 0;
    for (const auto& o : outcomes) {
        rejected += o.rejected;
        accepted += o.drawn;
        if (o.drawn && o.cover) {
            covers.push_back(static_cast<double>(*o.cover));
        } else if (o.drawn) {
            ++exhausted;
        }
    }
    if (covers.empty()) {
        return {failed_cell(cell, d, p_text, seed, "cover_time_mean", rejected, "no connected sample covered")};
    }
    const auto m = moments(covers);
    const double n = std::ldexp(1.0, d);
    // The band applies at the largest d of the grid; smaller d feed the trend row.
    const int d_final = *std::max_element(config.dimensions.begin(), config.dimensions.end());
    const bool asserted =
        static_cast<double>(config.trials) >= config.tolerance("assert_min_trials") && d == d_final;

    ReportRow row = base_row(cell, d, p_text, seed, "cover_time_mean");
    row.measured = m.mean;
    row.sigma = m.std_error;
    row.accepted = accepted;
    row.rejected = rejected;
    if (p.value() > 0.5) {
        row.predicted = theory::predicted_cover_time(theory::Params::from_p(d, p.value())) / (1.0 - config.laziness);
        if (asserted) {
            row.check = "ratio";
            row.lower = config.tolerance("ratio_lo");
            row.upper = config.tolerance("ratio_hi");
        }
    } else {
        row.note = "p <= 1/2: no prediction";
    }
    if (p.value() > 0.5 && !asserted) {
        row.note = d == d_final ? "too few trials to assert" : "trend input; band asserted at d=" + std::to_string(d_final);
    }
    if (exhausted > 0) {
        row.note += (row.note.empty() ? "" : "; ") + std::to_string(exhausted) + " trials exhausted budget";
    }
    ReportRow norm = base_row(cell, d, p_text, seed, "cover_time_over_nlogn");
    norm.measured = m.mean / (n * std::log(n));
    norm.sigma = m.std_error / (n * std::log(n));
    norm.predicted = row.predicted / (n * std::log(n));
    norm.accepted = accepted;
    norm.rejected = rejected;
    return {finish(row), finish(norm)};
}

// ----------------------------------------------------------------- survivor

std::vector<ReportRow> survivor_cell(const ExperimentConfig& config, std::uint64_t cell, int d,
                                     const std::string& p_text, std::uint64_t seed) {
    const auto p = Probability::parse(p_text);
    if (p.value() <= 0.5) {
        return {failed_cell(cell, d, p_text, seed, "survivors", 0, "p <= 1/2: alpha undefined")};
    }
    const auto params = theory::Params::from_p(d, p.value());
    const double t_star = theory::solve_alpha(p.value()) * params.n() * d * p.value();
    const std::vector<std::uint64_t> times{static_cast<std::uint64_t>(std::llround(t_star / 2.0)),
                                           static_cast<std::uint64_t>(std::llround(t_star))};
    struct Outcome {
        std::vector<std::uint64_t> counts;
        std::uint64_t rejected = 0;
    };
    std::vector<Outcome> outcomes(config.trials);
    for_each_index(config.trials, Execution::parallel, [&](std::uint64_t i) {
        auto inst = trial_instance(config, d, p, seed, i);
        outcomes[i].rejected = inst.rejected;
        if (!inst.graph) {
            return;
        }
        WalkConfig wc{config.laziness, Vertex{0}, std::nullopt, inst.walk_seed};
        outcomes[i].counts = unvisited_trajectory(*inst.graph, wc, times).unvisited;
    });
    std::uint64_t rejected = 0;
    std::uint64_t accepted = 0;
    std::vector<std::vector<double>> samples(times.size());
    for (const auto& o : outcomes) {
        rejected += o.rejected;
        if (o.counts.empty()) {
            continue;
        }
        ++accepted;
        for (std::size_t k = 0; k < times.size(); ++k) {
            samples[k].push_back(static_cast<double>(o.counts[k]));
        }
    }
    if (accepted == 0) {
        return {failed_cell(cell, d, p_text, seed, "survivors", rejected, "no connected sample")};
    }
    const double factor = config.tolerance("factor");
    const char* names[] = {"survivors_at_half_alpha_ndp", "survivors_at_alpha_ndp"};
    std::vector<ReportRow> rows;
    for (std::size_t k = 0; k < times.size(); ++k) {
        const auto m = moments(samples[k]);
        ReportRow row = base_row(cell, d, p_text, seed, names[k]);
        row.measured = m.mean;
        row.sigma = m.std_error;
        // Lazy steps stretch time by 1 / (1 - laziness).
        row.predicted = theory::survivor_prediction(params, static_cast<double>(times[k]) * (1.0 - config.laziness));
        row.check = "ratio";
        row.lower = 1.0 / factor;
        row.upper = factor;
        row.accepted = accepted;
        row.rejected = rejected;
        row.note = "t=" + std::to_string(times[k]);
        rows.push_back(finish(row));
    }
    return rows;
}

// ------------------------------------------------------------------- lemma1

std::vector<ReportRow> lemma1_cell(const ExperimentConfig& config, std::uint64_t cell, int d,
                                   const std::string& p_text, std::uint64_t seed) {
    if (d > 10) {
        return {failed_cell(cell, d, p_text, seed, "decay_rate", 0, "oracle capacity: d <= 10")};
    }
    const auto p = Probability::parse(p_text);
    auto draw = sample_connected(d, p, seed, config.max_resamples);
    if (!draw.graph) {
        return {failed_cell(cell, d, p_text, seed, "decay_rate", draw.rejected, "no connected sample")};
    }
    const auto& g = *draw.graph;
    const double laziness = config.laziness > 0.0 ? config.laziness : 0.5;
    const auto chain = build_chain(g, laziness);
    const auto n = chain.state_count();
    const double eps_mix = std::pow(static_cast<double>(n), -3.0);
    const auto mixing = tv_mixing_time(chain, eps_mix);
    if (!mixing) {
        return {failed_cell(cell, d, p_text, seed, "decay_rate", draw.rejected, "chain did not mix")};
    }
    const std::uint64_t T = *mixing;
    const auto pi = chain.stationary();

    std::vector<ReportRow> rows;
    ReportRow tmix = base_row(cell, d, p_text, seed, "mixing_time");
    tmix.measured = static_cast<double>(T);
    tmix.predicted = std::pow(std::log(static_cast<double>(n)), 7.0);
    tmix.accepted = 1;
    tmix.rejected = draw.rejected;
    tmix.note = "measured T vs log^7 n; laziness=" + format_double(laziness);
    rows.push_back(finish(tmix));

    std::vector<Vertex> order(n);
    std::iota(order.begin(), order.end(), Vertex{0});
    std::stable_sort(order.begin(), order.end(), [&](Vertex a, Vertex b) { return pi[a] < pi[b]; });
    const auto samples = std::min<std::uint64_t>(n, static_cast<std::uint64_t>(config.tolerance("vertex_samples")));
    const auto t_max = static_cast<std::uint64_t>(config.tolerance("horizon_factor") * static_cast<double>(n) * d);
    const double rel = config.tolerance("rate_rel_tol");
    const double dnp = d * static_cast<double>(n) * p.value();

    for (std::uint64_t k = 0; k < samples; ++k) {
        const Vertex v = order[k];
        const Vertex start = v ^ static_cast<Vertex>(n - 1);
        const auto series = return_series(chain, v, T);
        const double R_v = R_value(series);
        const auto curve = unvisited_curve(chain, v, start, t_max, T);
        std::vector<double> xs;
        std::vector<double> ys;
        for (std::uint64_t t = T; t <= t_max; ++t) {
            if (curve[t] > 0.0) {
                xs.push_back(static_cast<double>(t));
                ys.push_back(std::log(curve[t]));
            }
        }
        const double rate = -fit_slope(xs, ys);
        const std::string where = "v=" + std::to_string(v) + " d_v=" + std::to_string(chain.degree(v));

        ReportRow r = base_row(cell, d, p_text, seed, "decay_rate");
        r.measured = rate;
        r.predicted = pi[v] / R_v;
        r.check = "ratio";
        r.lower = 1.0 - rel;
        r.upper = 1.0 + rel;
        r.accepted = 1;
        r.rejected = draw.rejected;
        r.note = where;
        rows.push_back(finish(r));

        const double K = config.tolerance("K_factor") * R_v;
        const auto circle = R_on_circle(series, K);
        ReportRow c = base_row(cell, d, p_text, seed, "R_on_circle_min");
        c.measured = circle.min_modulus;
        c.predicted = config.tolerance("circle_min");
        c.check = "measured";
        c.lower = config.tolerance("circle_min");
        c.accepted = 1;
        c.note = where + " K=" + format_double(K) + " zeros_inside=" + std::to_string(circle.zeros_inside);
        rows.push_back(finish(c));

        ReportRow tp = base_row(cell, d, p_text, seed, "T_pi_v");
        tp.measured = static_cast<double>(T) * pi[v];
        tp.predicted = config.tolerance("t_pi_max");
        if (config.tolerance("assert_condition_iii") != 0.0) {
            tp.check = "measured";
            tp.upper = config.tolerance("t_pi_max");
        }
        tp.accepted = 1;
        tp.note = where;
        rows.push_back(finish(tp));

        // Decay form e^{-(1 - nu) d_v t / dnp}; lazy steps scale time by (1 - laziness).
        ReportRow nu = base_row(cell, d, p_text, seed, "nu_fitted");
        nu.measured = 1.0 - rate * dnp / ((1.0 - laziness) * chain.degree(v));
        nu.predicted = 1.0 - dnp / (2.0 * static_cast<double>(chain.edge_count()) * R_v * (1.0 - laziness));
        nu.accepted = 1;
        nu.note = where + " predicted column: 1 - dnp / (2m R_v) after laziness";
        rows.push_back(finish(nu));
    }
    return rows;
}

// ------------------------------------------------------------------ returns

std::vector<ReportRow> returns_cell(const ExperimentConfig& config, std::uint64_t cell, int d,
                                    const std::string& p_text, std::uint64_t seed) {
    const auto p = Probability::parse(p_text);
    auto draw = sample_connected(d, p, seed, config.max_resamples);
    if (!draw.graph) {
        return {failed_cell(cell, d, p_text, seed, "returns", draw.rejected, "no connected sample")};
    }
    const auto& g = *draw.graph;
    Vertex v = 0;
    for (Vertex x = 0; x < g.vertex_count(); ++x) {
        if (g.degree(x) < g.degree(v)) {
            v = x;
        }
    }
    const double h = config.tolerance("horizon");
    const auto horizon = h > 0.0 ? static_cast<std::uint64_t>(h) : static_cast<std::uint64_t>(d) * d;
    const auto est = estimate_returns(g, v, horizon, config.trials, derive_seed(seed, 1), config.laziness);

    ReportRow row = base_row(cell, d, p_text, seed, "returns_R_v");
    row.measured = est.mean;
    row.sigma = est.std_error;
    row.accepted = 1;
    row.rejected = draw.rejected;
    row.note = "v=" + std::to_string(v) + " d_v=" + std::to_string(g.degree(v)) + " T=" + std::to_string(horizon);
    if (d <= 10) {
        const auto chain = build_chain(g, config.laziness);
        row.predicted = R_value(return_series(chain, v, horizon + 1));
        const double band = config.tolerance("sigma_band") * std::max(est.std_error, 1e-12);
        row.check = "measured";
        row.lower = row.predicted - band;
        row.upper = row.predicted + band;
        row.note += " predicted: exact oracle";
    } else {
        row.predicted = 1.0;
        row.check = "measured";
        row.upper = config.tolerance("returns_max");
        row.note += " band: R_v <= returns_max";
    }
    ReportRow constant = base_row(cell, d, p_text, seed, "returns_constant_c");
    constant.measured = (est.mean - 1.0) * std::log(static_cast<double>(d));
    constant.note = "(R_v - 1) log d";
    constant.accepted = 1;
    return {finish(row), finish(constant)};
}

// -------------------------------------------------------------- conductance

std::vector<ReportRow> conductance_cell(const ExperimentConfig& config, std::uint64_t cell, int d,
                                        const std::string& p_text, std::uint64_t seed) {
    const auto p = Probability::parse(p_text);
    std::vector<ReportRow> rows;
    const auto exact_max = static_cast<int>(config.tolerance("exact_max_d"));
    for (std::uint64_t i = 0; i < config.trials; ++i) {
        const std::uint64_t inst_seed = derive_seed(seed, i);
        auto draw = sample_connected(d, p, inst_seed, config.max_resamples);
        if (!draw.graph) {
            rows.push_back(failed_cell(cell, d, p_text, inst_seed, "phi", draw.rejected, "no connected sample"));
            continue;
        }
        const auto& g = *draw.graph;
        const std::string where = "instance " + std::to_string(i) + " seed=" + std::to_string(g.seed());
        if (d > kMaxChainDimension) {
            const auto est = sweep_cut_estimate(g);
            ReportRow r = base_row(cell, d, p_text, inst_seed, "phi_sweep_estimate");
            r.measured = est.value;
            r.predicted = 1.0 / (std::pow(d, 3.0) * std::log(static_cast<double>(d)));
            r.note = where + " heuristic, not certified";
            r.accepted = 1;
            r.rejected = draw.rejected;
            rows.push_back(finish(r));
            continue;
        }
        const double laziness = 0.5;
        const auto chain = build_chain(g, laziness);
        const auto gap = spectral_gap(chain);
        const auto sandwich = cheeger_sandwich(std::clamp(gap.gap, 0.0, 1.0));

        ReportRow lower = base_row(cell, d, p_text, inst_seed, "phi_lower_cheeger");
        lower.measured = sandwich.lo;
        lower.predicted = 1.0 / (std::pow(d, 3.0) * std::log(static_cast<double>(d)));
        lower.note = where + " ratio column: recorded constant vs 1/(d^3 log d)";
        lower.accepted = 1;
        lower.rejected = draw.rejected;
        rows.push_back(finish(lower));

        std::optional<double> phi;
        if (d <= exact_max && d <= kMaxExactConductanceDimension) {
            phi = exact_conductance(g).phi;
            ReportRow s = base_row(cell, d, p_text, inst_seed, "phi_in_cheeger_sandwich");
            s.measured = *phi;
            s.predicted = gap.gap;
            s.check = "measured";
            s.lower = sandwich.lo;
            s.upper = sandwich.hi;
            s.note = where + " predicted column: lazy spectral gap";
            s.accepted = 1;
            rows.push_back(finish(s));
        }
        if (d <= static_cast<int>(config.tolerance("mixing_max_d"))) {
            const double eps = std::pow(static_cast<double>(g.vertex_count()), -config.tolerance("mixing_epsilon_exponent"));
            const auto tv = tv_mixing_time(chain, eps);
            const auto pi = chain.stationary();
            const auto [pmin, pmax] = std::minmax_element(pi.begin(), pi.end());
            // Conductance of the lazy chain: the graph value scaled by the move probability.
            const double phi_chain = (phi ? *phi : sandwich.lo) * (1.0 - laziness);
            const auto bound = mixing_bound_from_conductance(phi_chain, *pmin, *pmax, eps);
            ReportRow m = base_row(cell, d, p_text, inst_seed, "mixing_bound_vs_tv");
            m.measured = bound ? static_cast<double>(*bound) : std::numeric_limits<double>::infinity();
            m.predicted = tv ? static_cast<double>(*tv) : nan();
            m.check = "measured";
            m.lower = m.predicted;
            m.note = where + (phi ? " phi: exact" : " phi: cheeger lower bound");
            m.accepted = 1;
            rows.push_back(finish(m));
        }
    }
    return rows;
}

// ------------------------------------------------------------------ degrees

std::vector<ReportRow> degrees_cell(const ExperimentConfig& config, std::uint64_t cell, int d,
                                    const std::string& p_text, std::uint64_t seed) {
    const auto p = Probability::parse(p_text);
    const auto params = theory::Params::from_p(d, std::max(p.value(), 1e-300));
    const std::size_t bins = static_cast<std::size_t>(d) + 1;
    std::vector<std::uint64_t> counts(config.trials * bins);
    for_each_index(config.trials, Execution::parallel, [&](std::uint64_t r) {
        const auto h = degree_histogram(sample_subgraph(d, p, derive_seed(seed, r)));
        std::copy(h.counts.begin(), h.counts.end(), counts.begin() + static_cast<std::ptrdiff_t>(r * bins));
    });
    const bool interior = p.value() > 0.0 && p.value() < 1.0;
    const double k_sigma = config.tolerance("mean_sigma");
    const double var_tol = config.tolerance("variance_rel_tol");
    const double var_min = config.tolerance("variance_min_mean");
    const double R = static_cast<double>(config.trials);

    std::vector<ReportRow> rows;
    std::uint64_t within = 0;
    for (std::size_t i = 0; i < bins; ++i) {
        std::vector<double> xs(config.trials);
        for (std::uint64_t r = 0; r < config.trials; ++r) {
            xs[r] = static_cast<double>(counts[r * bins + i]);
        }
        const auto m = moments(xs);
        const double expected = theory::expected_degree_count(params, static_cast<int>(i));
        const double var_pub = interior ? theory::variance_degree_count(params, static_cast<int>(i)) : 0.0;
        const double sigma = std::sqrt(var_pub / R);
        const bool ok = std::abs(m.mean - expected) <= k_sigma * sigma + 1e-9;
        within += ok;

        ReportRow mean = base_row(cell, d, p_text, seed, "degree_mean[" + std::to_string(i) + "]");
        mean.measured = m.mean;
        mean.predicted = expected;
        mean.sigma = sigma;
        mean.accepted = config.trials;
        mean.note = ok ? "within band" : "outside band";
        rows.push_back(finish(mean));

        if (interior && expected >= var_min) {
            ReportRow vp = base_row(cell, d, p_text, seed, "degree_variance_formula[" + std::to_string(i) + "]");
            vp.measured = m.variance;
            vp.predicted = var_pub;
            vp.check = "ratio";
            vp.lower = 1.0 - var_tol;
            vp.upper = 1.0 + var_tol;
            vp.accepted = config.trials;
            rows.push_back(finish(vp));

            ReportRow ve = base_row(cell, d, p_text, seed, "degree_variance_exact[" + std::to_string(i) + "]");
            ve.measured = m.variance;
            ve.predicted = theory::variance_degree_count_exact(params, static_cast<int>(i));
            ve.check = "ratio";
            ve.lower = 1.0 - var_tol;
            ve.upper = 1.0 + var_tol;
            ve.accepted = config.trials;
            ve.note = "finite-n variance n eta (1 - eta) + n eta^2 (dp - i)^2 / (dpq)";
            rows.push_back(finish(ve));
        }
    }
    ReportRow frac = base_row(cell, d, p_text, seed, "degree_bins_within_band");
    frac.measured = static_cast<double>(within) / static_cast<double>(bins);
    frac.predicted = 1.0;
    frac.check = "measured";
    frac.lower = config.tolerance("bin_fraction");
    frac.accepted = config.trials;
    rows.push_back(finish(frac));
    return rows;
}

// -------------------------------------------------------------- last_degree

std::vector<ReportRow> last_degree_cell(const ExperimentConfig& config, std::uint64_t cell, int d,
                                        const std::string& p_text, std::uint64_t seed) {
    const auto p = Probability::parse(p_text);
    struct Outcome {
        int last_degree = -1;
        std::uint64_t rejected = 0;
    };
    std::vector<Outcome> outcomes(config.trials);
    for_each_index(config.trials, Execution::parallel, [&](std::uint64_t i) {
        auto inst = trial_instance(config, d, p, seed, i);
        outcomes[i].rejected = inst.rejected;
        if (!inst.graph) {
            return;
        }
        WalkConfig wc{config.laziness, Vertex{0}, std::nullopt, inst.walk_seed};
        const auto r = simulate_cover(*inst.graph, wc);
        if (r.covered()) {
            outcomes[i].last_degree = r.last_degree;
        }
    });
    LastDegreeDistribution dist;
    dist.counts.assign(static_cast<std::size_t>(d) + 1, 0);
    std::uint64_t rejected = 0;
    for (const auto& o : outcomes) {
        rejected += o.rejected;
        if (o.last_degree >= 0) {
            ++dist.counts[static_cast<std::size_t>(o.last_degree)];
        }
    }
    if (dist.total() == 0) {
        return {failed_cell(cell, d, p_text, seed, "last_degree_median", rejected, "no covered trial")};
    }
    const double dp = d * p.value();
    const double de = d * (2.0 * p.value() - 1.0);
    const bool asserted = p.value() > 0.5 && p.value() < 1.0;
    std::ostringstream hist;
    for (std::size_t i = 0; i < dist.counts.size(); ++i) {
        hist << (i ? " " : "") << dist.counts[i];
    }

    ReportRow med = base_row(cell, d, p_text, seed, "last_degree_median");
    med.measured = dist.median();
    med.predicted = dp;
    if (asserted) {
        med.check = "measured";
        med.upper = std::nextafter(dp, -std::numeric_limits<double>::infinity());
    }
    med.accepted = dist.total();
    med.rejected = rejected;
    med.note = "histogram by degree: " + hist.str();

    ReportRow mode = base_row(cell, d, p_text, seed, "last_degree_mode");
    mode.measured = dist.mode();
    mode.predicted = de;
    if (asserted) {
        mode.check = "measured";
        mode.lower = config.tolerance("mode_lo_factor") * de;
        mode.upper = config.tolerance("mode_hi_factor") * de;
    }
    mode.accepted = dist.total();
    mode.rejected = rejected;
    return {finish(med), finish(mode)};
}

// ---------------------------------------------------------- joint_unvisited

std::vector<ReportRow> joint_cell(const ExperimentConfig& config, std::uint64_t cell, int d,
                                  const std::string& p_text, std::uint64_t seed) {
    const auto p = Probability::parse(p_text);
    const double eps = 2.0 * p.value() - 1.0;
    if (!(eps > 0.0 && eps < 1.0)) {
        return {failed_cell(cell, d, p_text, seed, "joint_ratio", 0, "needs 1/2 < p < 1")};
    }
    auto draw = sample_connected(d, p, seed, config.max_resamples);
    if (!draw.graph) {
        return {failed_cell(cell, d, p_text, seed, "joint_ratio", draw.rejected, "no connected sample")};
    }
    const auto& g = *draw.graph;
    const auto params = theory::Params::from_p(d, p.value());
    const auto low = theory::lower_time_mark(params);
    const double t_real = config.tolerance("time_fraction") * low.t_lower / (1.0 - config.laziness);
    if (!(t_real >= 1.0)) {
        return {failed_cell(cell, d, p_text, seed, "joint_ratio", draw.rejected, "t_L not positive")};
    }
    const auto t = static_cast<std::uint64_t>(std::llround(t_real));
    const int h = static_cast<int>(std::ceil(d / (2.0 * std::log(static_cast<double>(d)))));
    const double de = d * eps;

    // Candidates ordered by closeness of their degree to d eps, far (>= h) from the start vertex 0.
    std::vector<Vertex> candidates;
    for (Vertex v = 1; v < g.vertex_count(); ++v) {
        if (cube_distance(v, 0) >= h && !bfs_distance(g, 0, v, h - 1)) {
            candidates.push_back(v);
        }
    }
    std::stable_sort(candidates.begin(), candidates.end(), [&](Vertex a, Vertex b) {
        return std::abs(g.degree(a) - de) < std::abs(g.degree(b) - de);
    });
    const auto wanted = static_cast<std::size_t>(config.tolerance("pairs"));
    std::vector<std::pair<Vertex, Vertex>> pairs;
    std::vector<std::uint8_t> used(g.vertex_count(), 0);
    const std::size_t pool = std::min<std::size_t>(candidates.size(), 64);
    for (std::size_t a = 0; a < pool && pairs.size() < wanted; ++a) {
        if (used[candidates[a]]) {
            continue;
        }
        for (std::size_t b = a + 1; b < pool; ++b) {
            if (used[candidates[b]]) {
                continue;
            }
            if (!bfs_distance(g, candidates[a], candidates[b], h - 1)) {
                pairs.emplace_back(candidates[a], candidates[b]);
                used[candidates[a]] = used[candidates[b]] = 1;
                break;
            }
        }
    }
    std::vector<ReportRow> rows;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto [v, w] = pairs[k];
        WalkConfig wc{config.laziness, Vertex{0}, std::nullopt, derive_seed(seed, 100 + k)};
        const auto est = joint_unvisited_estimate(g, v, w, t, config.trials, wc);
        ReportRow r = base_row(cell, d, p_text, seed, "joint_ratio");
        r.measured = est.correlation_ratio();
        r.predicted = 1.0;
        const double N = static_cast<double>(est.trials);
        auto rel_var = [N](double q) { return q > 0.0 ? (1.0 - q) / (N * q) : 0.0; };
        r.sigma = r.measured * std::sqrt(rel_var(est.p_vw) + rel_var(est.p_v) + rel_var(est.p_w));
        r.check = "measured";
        r.lower = config.tolerance("ratio_lo");
        r.upper = config.tolerance("ratio_hi");
        r.accepted = 1;
        r.rejected = draw.rejected;
        std::ostringstream note;
        note << "v=" << v << " (deg " << g.degree(v) << ") w=" << w << " (deg " << g.degree(w) << ") t=" << t
             << " P_v=" << est.p_v << " P_w=" << est.p_w << " P_vw=" << est.p_vw;
        r.note = note.str();
        rows.push_back(finish(r));
    }
    if (pairs.size() < wanted) {
        rows.push_back(failed_cell(cell, d, p_text, seed, "joint_pairs_found", draw.rejected,
                                   "only " + std::to_string(pairs.size()) + " far-apart pairs"));
    }
    return rows;
}

} // namespace

std::string to_string(ExperimentKind kind) {
    for (const auto& [k, name] : kKindNames) {
        if (k == kind) {
            return name;
        }
    }
    return "unknown";
}

ExperimentKind parse_kind(const std::string& name) {
    for (const auto& [k, text] : kKindNames) {
        if (name == text) {
            return k;
        }
    }
    throw ParameterError("unknown experiment kind '" + name + "'");
}

std::map<std::string, double> default_tolerances(ExperimentKind kind) {
    switch (kind) {
    case ExperimentKind::cover_trend:
        return {{"ratio_lo", 0.7}, {"ratio_hi", 1.4}, {"trend_slack", 0.05}, {"assert_min_trials", 10}};
    case ExperimentKind::survivor:
        return {{"factor", 2.0}};
    case ExperimentKind::lemma1:
        return {{"rate_rel_tol", 0.10}, {"circle_min", 0.25},  {"t_pi_max", 0.01},      {"assert_condition_iii", 1},
                {"vertex_samples", 10}, {"horizon_factor", 20}, {"K_factor", 3.0}};
    case ExperimentKind::returns:
        return {{"sigma_band", 3.0}, {"returns_max", 1.5}, {"horizon", 0}};
    case ExperimentKind::conductance:
        return {{"exact_max_d", 4}, {"mixing_max_d", 8}, {"mixing_epsilon_exponent", 3}};
    case ExperimentKind::degrees:
        return {{"mean_sigma", 4.0}, {"bin_fraction", 0.99}, {"variance_rel_tol", 0.15}, {"variance_min_mean", 50}};
    case ExperimentKind::last_degree:
        return {{"mode_lo_factor", 0.5}, {"mode_hi_factor", 2.0}};
    case ExperimentKind::joint_unvisited:
        return {{"ratio_lo", 0.8}, {"ratio_hi", 1.25}, {"pairs", 5}, {"time_fraction", 1.0}};
    }
    return {};
}

double ExperimentConfig::tolerance(const std::string& name) const {
    if (auto it = tolerances.find(name); it != tolerances.end()) {
        return it->second;
    }
    const auto defaults = default_tolerances(kind);
    if (auto it = defaults.find(name); it != defaults.end()) {
        return it->second;
    }
    throw ParameterError("no tolerance named '" + name + "' for " + to_string(kind));
}

ExperimentConfig config_from_json(const nlohmann::json& doc) {
    if (doc.value("schema_version", 0) != kConfigSchemaVersion) {
        throw ParameterError("config schema_version must be " + std::to_string(kConfigSchemaVersion));
    }
    ExperimentConfig c;
    c.kind = parse_kind(doc.at("kind").get<std::string>());
    c.dimensions = doc.at("d").get<std::vector<int>>();
    if (doc.contains("p") == doc.contains("eps")) {
        throw ParameterError("config needs exactly one of 'p' and 'eps'");
    }
    if (doc.contains("p")) {
        for (const auto& p : doc["p"]) {
            // Decimal strings are kept verbatim; bare numbers get their shortest round-trip text.
            c.p_values.push_back(p.is_string() ? Probability::parse(p.get<std::string>()).text()
                                               : Probability::from_double(p.get<double>()).text());
        }
    } else {
        for (const auto& e : doc["eps"]) {
            const double eps = e.is_string() ? std::stod(e.get<std::string>()) : e.get<double>();
            if (!(eps >= -1.0 && eps <= 1.0)) {
                throw ParameterError("eps must lie in [-1, 1]");
            }
            c.p_values.push_back(Probability::from_double((1.0 + eps) / 2.0).text());
        }
    }
    c.trials = doc.value("trials", std::uint64_t{1});
    c.master_seed = doc.value("master_seed", std::uint64_t{0});
    c.laziness = doc.value("laziness", 0.0);
    c.max_resamples = doc.value("max_resamples", std::uint64_t{1000});
    if (doc.contains("output")) {
        c.csv_path = doc["output"].value("csv", std::string{});
        c.json_path = doc["output"].value("json", std::string{});
    }
    if (doc.contains("tolerances")) {
        const auto defaults = default_tolerances(c.kind);
        for (const auto& [name, value] : doc["tolerances"].items()) {
            if (!defaults.contains(name)) {
                throw ParameterError("unknown tolerance '" + name + "' for " + to_string(c.kind));
            }
            c.tolerances[name] = value.get<double>();
        }
    }
    if (c.dimensions.empty() || c.p_values.empty()) {
        throw ParameterError("parameter grids must be non-empty");
    }
    if (c.trials < 1) {
        throw ParameterError("trials must be at least 1");
    }
    if (!(c.laziness >= 0.0 && c.laziness < 1.0)) {
        throw ParameterError("laziness must lie in [0, 1)");
    }
    for (int d : c.dimensions) {
        if (d < 1 || d > kMaxDimension) {
            throw CapacityError("dimension " + std::to_string(d) + " outside [1, 30]");
        }
    }
    return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
    nlohmann::json doc;
    doc["schema_version"] = kConfigSchemaVersion;
    doc["kind"] = to_string(c.kind);
    doc["d"] = c.dimensions;
    doc["p"] = c.p_values;
    doc["trials"] = c.trials;
    doc["master_seed"] = c.master_seed;
    doc["laziness"] = c.laziness;
    doc["max_resamples"] = c.max_resamples;
    doc["output"] = {{"csv", c.csv_path}, {"json", c.json_path}};
    doc["tolerances"] = nlohmann::json::object();
    for (const auto& [name, value] : c.tolerances) {
        doc["tolerances"][name] = value;
    }
    return doc;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config " + path);
    }
    return config_from_json(nlohmann::json::parse(in));
}

std::uint64_t cell_seed(std::uint64_t master_seed, int d, const std::string& p_text, std::uint64_t replicate) {
    std::uint64_t s = derive_seed(master_seed, static_cast<std::uint64_t>(d));
    s = derive_seed(s, hash_text(p_text));
    return derive_seed(s, replicate);
}

bool ReportRow::evaluate() const {
    if (check == "none") {
        return true;
    }
    const double value = check == "ratio" ? ratio : measured;
    if (std::isnan(value)) {
        return false;
    }
    if (lower && !(value >= *lower)) {
        return false;
    }
    if (upper && !(value <= *upper)) {
        return false;
    }
    return true;
}

bool ExperimentReport::passed() const {
    return std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.pass; });
}

InstanceDraw sample_connected(int d, const Probability& p, std::uint64_t seed, std::uint64_t max_attempts) {
    InstanceDraw draw;
    for (std::uint64_t k = 0; k < max_attempts; ++k) {
        auto g = sample_subgraph(d, p, derive_seed(seed, k));
        if (is_connected(g)) {
            draw.graph = std::move(g);
            return draw;
        }
        ++draw.rejected;
    }
    return draw;
}

std::vector<ReportRow> run_cover_trend(const ExperimentConfig& config) {
    auto rows = for_each_cell(config, cover_trend_cell);
    if (config.dimensions.size() < 2 || static_cast<double>(config.trials) < config.tolerance("assert_min_trials")) {
        return rows;
    }
    const int d_first = *std::min_element(config.dimensions.begin(), config.dimensions.end());
    const int d_last = *std::max_element(config.dimensions.begin(), config.dimensions.end());
    std::uint64_t cell = config.dimensions.size() * config.p_values.size();
    for (const auto& p : config.p_values) {
        std::optional<double> first;
        std::optional<double> last;
        for (const auto& r : rows) {
            if (r.p == p && r.statistic == "cover_time_mean" && std::isfinite(r.ratio)) {
                if (r.d == d_first) {
                    first = r.ratio;
                }
                if (r.d == d_last) {
                    last = r.ratio;
                }
            }
        }
        ReportRow trend = base_row(cell++, d_last, p, cell_seed(config.master_seed, d_last, p), "trend_deviation");
        trend.check = "measured";
        if (first && last) {
            trend.measured = std::abs(*last - 1.0);
            trend.predicted = std::abs(*first - 1.0);
            trend.upper = trend.predicted + config.tolerance("trend_slack");
            trend.note = "|ratio(d=" + std::to_string(d_last) + ") - 1| vs |ratio(d=" + std::to_string(d_first) +
                         ") - 1| + slack";
        } else {
            trend.measured = nan();
            trend.note = "missing ratio for trend";
        }
        rows.push_back(finish(trend));
    }
    return rows;
}

std::vector<ReportRow> run_survivor(const ExperimentConfig& config) { return for_each_cell(config, survivor_cell); }
std::vector<ReportRow> run_lemma1_verification(const ExperimentConfig& config) {
    return for_each_cell(config, lemma1_cell);
}
std::vector<ReportRow> run_returns(const ExperimentConfig& config) { return for_each_cell(config, returns_cell); }
std::vector<ReportRow> run_conductance(const ExperimentConfig& config) {
    return for_each_cell(config, conductance_cell);
}
std::vector<ReportRow> run_degrees(const ExperimentConfig& config) { return for_each_cell(config, degrees_cell); }
std::vector<ReportRow> run_last_degree(const ExperimentConfig& config) {
    return for_each_cell(config, last_degree_cell);
}
std::vector<ReportRow> run_joint(const ExperimentConfig& config) { return for_each_cell(config, joint_cell); }

ExperimentReport run_experiment(const ExperimentConfig& config) {
    const auto started = std::chrono::steady_clock::now();
    ExperimentReport report;
    report.config = config;
    switch (config.kind) {
    case ExperimentKind::cover_trend: report.rows = run_cover_trend(config); break;
    case ExperimentKind::survivor: report.rows = run_survivor(config); break;
    case ExperimentKind::lemma1: report.rows = run_lemma1_verification(config); break;
    case ExperimentKind::returns: report.rows = run_returns(config); break;
    case ExperimentKind::conductance: report.rows = run_conductance(config); break;
    case ExperimentKind::degrees: report.rows = run_degrees(config); break;
    case ExperimentKind::last_degree: report.rows = run_last_degree(config); break;
    case ExperimentKind::joint_unvisited: report.rows = run_joint(config); break;
    }
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

void write_report_csv(std::ostream& out, const ExperimentReport& report) {
    out << "cell,kind,d,p,seed,statistic,measured,predicted,ratio,sigma,check,lower,upper,pass,accepted,rejected,note\n";
    const std::string kind = to_string(report.config.kind);
    for (const auto& r : report.rows) {
        std::string note = r.note;
        std::replace(note.begin(), note.end(), ',', ';');
        out << r.cell << ',' << kind << ',' << r.d << ',' << r.p << ',' << r.seed << ',' << r.statistic << ','
            << format_double(r.measured) << ',' << format_double(r.predicted) << ',' << format_double(r.ratio) << ','
            << format_double(r.sigma) << ',' << r.check << ',' << (r.lower ? format_double(*r.lower) : "") << ','
            << (r.upper ? format_double(*r.upper) : "") << ',' << (r.pass ? "pass" : "fail") << ',' << r.accepted
            << ',' << r.rejected << ',' << note << '\n';
    }
}

nlohmann::json report_to_json(const ExperimentReport& report) {
    nlohmann::json doc;
    doc["config"] = to_json(report.config);
    doc["environment"] = {{"version", kVersion}, {"rng", std::string(kRngName)}, {"wall_time_s", report.wall_time_seconds}};
    std::uint64_t failures = 0;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows) {
        failures += !r.pass;
        rows.push_back({{"cell", r.cell},
                        {"d", r.d},
                        {"p", r.p},
                        {"seed", r.seed},
                        {"statistic", r.statistic},
                        {"measured", number_or_null(r.measured)},
                        {"predicted", number_or_null(r.predicted)},
                        {"ratio", number_or_null(r.ratio)},
                        {"sigma", number_or_null(r.sigma)},
                        {"check", r.check},
                        {"lower", r.lower ? number_or_null(*r.lower) : nlohmann::json(nullptr)},
                        {"upper", r.upper ? number_or_null(*r.upper) : nlohmann::json(nullptr)},
                        {"pass", r.pass},
                        {"accepted", r.accepted},
                        {"rejected", r.rejected},
                        {"note", r.note}});
    }
    doc["rows"] = std::move(rows);
    doc["summary"] = {{"rows", report.rows.size()}, {"failures", failures}, {"passed", failures == 0}};
    return doc;
}

ExperimentReport report_from_json(const nlohmann::json& doc) {
    ExperimentReport report;
    report.config = config_from_json(doc.at("config"));
    report.wall_time_seconds = doc.at("environment").value("wall_time_s", 0.0);
    for (const auto& j : doc.at("rows")) {
        ReportRow r;
        r.cell = j.at("cell").get<std::uint64_t>();
        r.d = j.at("d").get<int>();
        r.p = j.at("p").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.statistic = j.at("statistic").get<std::string>();
        r.measured = number_from(j.at("measured"));
        r.predicted = number_from(j.at("predicted"));
        r.ratio = number_from(j.at("ratio"));
        r.sigma = number_from(j.at("sigma"));
        r.check = j.at("check").get<std::string>();
        if (!j.at("lower").is_null()) {
            r.lower = j.at("lower").get<double>();
        }
        if (!j.at("upper").is_null()) {
            r.upper = j.at("upper").get<double>();
        }
        r.pass = j.at("pass").get<bool>();
        r.accepted = j.at("accepted").get<std::uint64_t>();
        r.rejected = j.at("rejected").get<std::uint64_t>();
        r.note = j.at("note").get<std::string>();
        report.rows.push_back(std::move(r));
    }
    return report;
}

VerifyResult verify_report(const ExperimentReport& report) {
    VerifyResult v;
    for (std::uint64_t i = 0; i < report.rows.size(); ++i) {
        const auto& r = report.rows[i];
        const bool ok = r.evaluate();
        if (!ok) {
            v.failing.push_back(i);
        }
        if (ok != r.pass) {
            v.mismatched.push_back(i);
            v.consistent = false;
        }
    }
    return v;
}

} // namespace hcover
