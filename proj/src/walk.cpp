#include "hcover/walk.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <ostream>

#include "hcover/error.hpp"

namespace hcover {

namespace {

void validate(const HypercubeSubgraph& g, const WalkConfig& cfg) {
    if (!(cfg.laziness >= 0.0 && cfg.laziness < 1.0)) {
        throw ParameterError("laziness must lie in [0, 1)");
    }
    if (cfg.max_steps && *cfg.max_steps < 1) {
        throw ParameterError("step budget must be at least 1");
    }
    if (cfg.start && *cfg.start >= g.vertex_count()) {
        throw ParameterError("start vertex out of range");
    }
}

// Index of the j-th set bit of mask (j < popcount(mask)).
inline int nth_set_bit(std::uint32_t mask, std::uint64_t j) {
    for (; j > 0; --j) {
        mask &= mask - 1;
    }
    return std::countr_zero(mask);
}

WalkConfig trial_config(const WalkConfig& cfg, std::uint64_t trial) {
    WalkConfig out = cfg;
    out.seed = derive_seed(cfg.seed, trial);
    return out;
}

} // namespace

std::uint64_t default_step_budget(const HypercubeSubgraph& g) {
    const double p = g.p().value();
    const auto n = static_cast<double>(g.vertex_count());
    const double d = g.dimension();
    double factor = d;
    if (p > 0.5) {
        factor = std::max(1.0, std::ceil(std::log(2.0 * p / (2.0 * p - 1.0))));
    }
    return static_cast<std::uint64_t>(100.0 * n * d * factor);
}

Walker::Walker(const HypercubeSubgraph& g, Vertex start, double laziness, Rng rng)
    : masks_(g.masks()), rng_(std::move(rng)), position_(start), laziness_(laziness) {
    if (start >= masks_.size()) {
        throw ParameterError("start vertex out of range");
    }
    if (masks_[start] == 0) {
        throw WalkError("walk started at vertex " + std::to_string(start) + " of degree 0");
    }
}

bool Walker::step() {
    if (laziness_ > 0.0 && rng_.uniform01() < laziness_) {
        return true;
    }
    const std::uint32_t mask = masks_[position_];
    const auto choice = rng_.below(static_cast<std::uint64_t>(std::popcount(mask)));
    position_ ^= Vertex{1} << nth_set_bit(mask, choice);
    return false;
}

Vertex resolve_start(const HypercubeSubgraph& g, const WalkConfig& cfg, Rng& rng) {
    if (cfg.start) {
        return *cfg.start;
    }
    if (g.edge_count() == 0) {
        throw WalkError("stationary start undefined on a graph without edges");
    }
    // Uniform vertex accepted with probability d_v / d gives pi_v = d_v / 2m.
    const auto n = g.vertex_count();
    const auto d = static_cast<std::uint64_t>(g.dimension());
    for (;;) {
        const auto v = static_cast<Vertex>(rng.below(n));
        if (rng.below(d) < static_cast<std::uint64_t>(g.degree(v))) {
            return v;
        }
    }
}

CoverResult simulate_cover(const HypercubeSubgraph& g, const WalkConfig& cfg) {
    validate(g, cfg);
    Rng rng(cfg.seed);
    const Vertex start = resolve_start(g, cfg, rng);
    Walker walker(g, start, cfg.laziness, std::move(rng));
    const std::uint64_t budget = cfg.max_steps.value_or(default_step_budget(g));

    CoverResult r;
    r.start = start;
    r.first_visit.assign(g.vertex_count(), kNeverVisited);
    r.first_visit[start] = 0;
    r.last_vertex = start;
    std::uint64_t remaining = g.vertex_count() - 1;
    std::uint64_t t = 0;
    while (remaining > 0 && t < budget) {
        if (walker.step()) {
            ++r.steps_wasted_lazy;
        }
        ++t;
        const Vertex x = walker.position();
        if (r.first_visit[x] == kNeverVisited) {
            r.first_visit[x] = t;
            r.last_vertex = x;
            --remaining;
        }
    }
    r.steps_taken = t;
    if (remaining == 0) {
        r.cover_time = t;
    }
    r.last_degree = g.degree(r.last_vertex);
    return r;
}

std::vector<CoverSummary> cover_trials(const HypercubeSubgraph& g, const WalkConfig& cfg, std::uint64_t trials,
                                       Execution exec) {
    validate(g, cfg);
    std::vector<CoverSummary> rows(trials);
    for_each_index(trials, exec, [&](std::uint64_t i) {
        const WalkConfig tc = trial_config(cfg, i);
        const CoverResult r = simulate_cover(g, tc);
        rows[i] = CoverSummary{i, tc.seed, r.cover_time, r.last_vertex, r.last_degree, r.steps_wasted_lazy};
    });
    return rows;
}

void write_trial_log(std::ostream& out, std::span<const CoverSummary> rows) {
    out << "trial_index,seed,cover_time,last_vertex,last_degree\n";
    for (const auto& row : rows) {
        out << row.trial << ',' << row.seed << ',';
        if (row.cover_time) {
            out << *row.cover_time;
        } else {
            out << "budget";
        }
        out << ',' << row.last_vertex << ',' << row.last_degree << '\n';
    }
}

SurvivorTrajectory unvisited_trajectory(const HypercubeSubgraph& g, const WalkConfig& cfg,
                                        std::span<const std::uint64_t> sample_times, bool with_degrees) {
    validate(g, cfg);
    if (!std::is_sorted(sample_times.begin(), sample_times.end())) {
        throw ParameterError("sample times must be sorted");
    }
    Rng rng(cfg.seed);
    const Vertex start = resolve_start(g, cfg, rng);
    Walker walker(g, start, cfg.laziness, std::move(rng));

    const auto n = g.vertex_count();
    const auto d = static_cast<std::size_t>(g.dimension());
    std::vector<std::uint8_t> seen(n, 0);
    std::vector<std::uint64_t> by_degree(d + 1, 0);
    if (with_degrees) {
        for (Vertex v = 0; v < n; ++v) {
            ++by_degree[static_cast<std::size_t>(g.degree(v))];
        }
        --by_degree[static_cast<std::size_t>(g.degree(start))];
    }
    seen[start] = 1;
    std::uint64_t remaining = n - 1;

    SurvivorTrajectory out;
    out.times.assign(sample_times.begin(), sample_times.end());
    std::uint64_t t = 0;
    for (std::uint64_t target : sample_times) {
        while (t < target && remaining > 0) {
            walker.step();
            ++t;
            const Vertex x = walker.position();
            if (!seen[x]) {
                seen[x] = 1;
                --remaining;
                if (with_degrees) {
                    --by_degree[static_cast<std::size_t>(g.degree(x))];
                }
            }
        }
        out.unvisited.push_back(remaining);
        if (with_degrees) {
            out.by_degree.push_back(by_degree);
        }
    }
    return out;
}

MeanEstimate estimate_returns(const HypercubeSubgraph& g, Vertex v, std::uint64_t horizon, std::uint64_t trials,
                              std::uint64_t seed, double laziness, Execution exec) {
    if (horizon < 1) {
        throw ParameterError("return horizon must be at least 1");
    }
    if (trials < 1) {
        throw ParameterError("at least one trial required");
    }
    WalkConfig cfg{laziness, v, std::nullopt, seed};
    validate(g, cfg);
    std::vector<std::uint64_t> visits(trials);
    for_each_index(trials, exec, [&](std::uint64_t i) {
        Walker walker(g, v, laziness, Rng(derive_seed(seed, i)));
        std::uint64_t count = 1; // X_0 = v
        for (std::uint64_t t = 1; t <= horizon; ++t) {
            walker.step();
            count += walker.position() == v;
        }
        visits[i] = count;
    });
    double sum = 0.0;
    double sum_sq = 0.0;
    for (auto c : visits) {
        sum += static_cast<double>(c);
        sum_sq += static_cast<double>(c) * static_cast<double>(c);
    }
    const double k = static_cast<double>(trials);
    MeanEstimate out;
    out.mean = sum / k;
    out.samples = trials;
    if (trials > 1) {
        const double var = std::max(0.0, (sum_sq - k * out.mean * out.mean) / (k - 1.0));
        out.std_error = std::sqrt(var / k);
    }
    return out;
}

std::uint64_t LastDegreeDistribution::total() const {
    std::uint64_t s = 0;
    for (auto c : counts) {
        s += c;
    }
    return s;
}

int LastDegreeDistribution::median() const {
    const auto tot = total();
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        acc += counts[i];
        if (2 * acc >= tot && tot > 0) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

int LastDegreeDistribution::mode() const {
    if (total() == 0) {
        return -1;
    }
    return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

LastDegreeDistribution last_visited_degree_distribution(const HypercubeSubgraph& g, const WalkConfig& cfg,
                                                        std::uint64_t trials, Execution exec) {
    const auto rows = cover_trials(g, cfg, trials, exec);
    LastDegreeDistribution out;
    out.counts.assign(static_cast<std::size_t>(g.dimension()) + 1, 0);
    for (const auto& row : rows) {
        if (row.cover_time) {
            ++out.counts[static_cast<std::size_t>(row.last_degree)];
        } else {
            ++out.exhausted;
        }
    }
    return out;
}

double JointUnvisited::correlation_ratio() const {
    if (p_v <= 0.0 || p_w <= 0.0) {
        return std::nan("");
    }
    return p_vw / (p_v * p_w);
}

JointUnvisited joint_unvisited_estimate(const HypercubeSubgraph& g, Vertex v, Vertex w, std::uint64_t t,
                                        std::uint64_t trials, const WalkConfig& cfg, std::uint64_t window_start,
                                        Execution exec) {
    validate(g, cfg);
    if (v == w) {
        throw ParameterError("joint estimate needs two distinct vertices");
    }
    if (v >= g.vertex_count() || w >= g.vertex_count()) {
        throw ParameterError("vertex out of range");
    }
    if (trials < 1) {
        throw ParameterError("at least one trial required");
    }
    // bit 0: v unvisited, bit 1: w unvisited
    std::vector<std::uint8_t> outcome(trials);
    for_each_index(trials, exec, [&](std::uint64_t i) {
        Rng rng(derive_seed(cfg.seed, i));
        const Vertex start = resolve_start(g, cfg, rng);
        Walker walker(g, start, cfg.laziness, std::move(rng));
        bool v_free = true;
        bool w_free = true;
        if (window_start == 0) {
            v_free = start != v;
            w_free = start != w;
        }
        for (std::uint64_t s = 1; s <= t && (v_free || w_free); ++s) {
            walker.step();
            if (s < window_start) {
                continue;
            }
            const Vertex x = walker.position();
            v_free = v_free && x != v;
            w_free = w_free && x != w;
        }
        outcome[i] = static_cast<std::uint8_t>((v_free ? 1 : 0) | (w_free ? 2 : 0));
    });
    std::uint64_t nv = 0;
    std::uint64_t nw = 0;
    std::uint64_t nvw = 0;
    for (auto o : outcome) {
        nv += o & 1U;
        nw += (o >> 1) & 1U;
        nvw += o == 3;
    }
    const double k = static_cast<double>(trials);
    return JointUnvisited{static_cast<double>(nv) / k, static_cast<double>(nw) / k, static_cast<double>(nvw) / k,
                          trials};
}

std::vector<std::vector<std::uint64_t>> position_counts(const HypercubeSubgraph& g, const WalkConfig& cfg,
                                                        std::span<const std::uint64_t> times, std::uint64_t trials,
                                                        Execution exec) {
    validate(g, cfg);
    if (!std::is_sorted(times.begin(), times.end())) {
        throw ParameterError("sample times must be sorted");
    }
    const std::size_t k = times.size();
    std::vector<Vertex> positions(trials * k);
    for_each_index(trials, exec, [&](std::uint64_t i) {
        Rng rng(derive_seed(cfg.seed, i));
        const Vertex start = resolve_start(g, cfg, rng);
        Walker walker(g, start, cfg.laziness, std::move(rng));
        std::uint64_t t = 0;
        for (std::size_t j = 0; j < k; ++j) {
            while (t < times[j]) {
                walker.step();
                ++t;
            }
            positions[i * k + j] = walker.position();
        }
    });
    std::vector<std::vector<std::uint64_t>> counts(k, std::vector<std::uint64_t>(g.vertex_count(), 0));
    for (std::uint64_t i = 0; i < trials; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            ++counts[j][positions[i * k + j]];
        }
    }
    return counts;
}

std::vector<double> unvisited_frequencies(const HypercubeSubgraph& g, const WalkConfig& cfg, Vertex target,
                                          std::span<const std::uint64_t> times, std::uint64_t trials,
                                          Execution exec) {
    validate(g, cfg);
    if (!std::is_sorted(times.begin(), times.end())) {
        throw ParameterError("sample times must be sorted");
    }
    if (target >= g.vertex_count()) {
        throw ParameterError("target vertex out of range");
    }
    // First hitting time per trial; unvisited at t iff hit > t.
    const std::uint64_t horizon = times.empty() ? 0 : times.back();
    std::vector<std::uint64_t> hit(trials);
    for_each_index(trials, exec, [&](std::uint64_t i) {
        Rng rng(derive_seed(cfg.seed, i));
        const Vertex start = resolve_start(g, cfg, rng);
        if (start == target) {
            hit[i] = 0;
            return;
        }
        Walker walker(g, start, cfg.laziness, std::move(rng));
        std::uint64_t s = 0;
        while (s < horizon) {
            walker.step();
            ++s;
            if (walker.position() == target) {
                hit[i] = s;
                return;
            }
        }
        hit[i] = kNeverVisited;
    });
    std::vector<double> out;
    out.reserve(times.size());
    for (auto t : times) {
        const auto alive = std::count_if(hit.begin(), hit.end(), [t](std::uint64_t h) { return h > t; });
        out.push_back(static_cast<double>(alive) / static_cast<double>(trials));
    }
    return out;
}

} // namespace hcover
