#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "hcover/hypercube.hpp"
#include "hcover/parallel.hpp"
#include "hcover/rng.hpp"

namespace hcover {

inline constexpr std::uint64_t kNeverVisited = std::numeric_limits<std::uint64_t>::max();

struct WalkConfig {
    double laziness = 0.0;               // stay-put probability, in [0, 1)
    std::optional<Vertex> start = 0;     // nullopt: draw the start from the stationary distribution
    std::optional<std::uint64_t> max_steps; // nullopt: default_step_budget(g)
    std::uint64_t seed = 0;
};

/// 100 * n * d * max(1, ceil(log(2p / (2p - 1)))); the log factor is replaced by d when p <= 1/2.
std::uint64_t default_step_budget(const HypercubeSubgraph& g);

/// Single walker over a subgraph. Neighbours are drawn uniformly from the
/// retained directions of the current vertex.
class Walker {
public:
    Walker(const HypercubeSubgraph& g, Vertex start, double laziness, Rng rng);

    Vertex position() const noexcept { return position_; }
    /// Advances one step; returns true if the step was lazy (walker stayed).
    bool step();

private:
    std::span<const std::uint32_t> masks_;
    Rng rng_;
    Vertex position_;
    double laziness_;
};

struct CoverResult {
    std::optional<std::uint64_t> cover_time; // nullopt: budget exhausted before covering
    std::vector<std::uint64_t> first_visit;   // kNeverVisited for vertices never reached
    Vertex start = 0;
    Vertex last_vertex = 0;   // last vertex to be covered (or last newly visited one if exhausted)
    int last_degree = 0;
    std::uint64_t steps_taken = 0;
    std::uint64_t steps_wasted_lazy = 0;

    bool covered() const noexcept { return cover_time.has_value(); }
};

/// Start vertex for `cfg`, drawing from pi_v = d_v / 2m when cfg.start is unset.
Vertex resolve_start(const HypercubeSubgraph& g, const WalkConfig& cfg, Rng& rng);

/// Runs one walk until every vertex has been visited or the budget is spent.
/// Throws WalkError if the start vertex has degree 0.
CoverResult simulate_cover(const HypercubeSubgraph& g, const WalkConfig& cfg);

/// Per-trial record, the row type of the trial log.
struct CoverSummary {
    std::uint64_t trial = 0;
    std::uint64_t seed = 0;
    std::optional<std::uint64_t> cover_time;
    Vertex last_vertex = 0;
    int last_degree = 0;
    std::uint64_t steps_wasted_lazy = 0;
};

/// `trials` independent cover runs; trial i uses seed derive_seed(cfg.seed, i).
std::vector<CoverSummary> cover_trials(const HypercubeSubgraph& g, const WalkConfig& cfg, std::uint64_t trials,
                                       Execution exec = Execution::parallel);

/// trial_index,seed,cover_time,last_vertex,last_degree ("budget" when exhausted).
void write_trial_log(std::ostream& out, std::span<const CoverSummary> rows);

struct SurvivorTrajectory {
    std::vector<std::uint64_t> times;
    std::vector<std::uint64_t> unvisited;              // per sample time
    std::vector<std::vector<std::uint64_t>> by_degree; // optional: per time, unvisited counts by degree
};

/// Unvisited-vertex counts at the given (sorted) times along one walk.
SurvivorTrajectory unvisited_trajectory(const HypercubeSubgraph& g, const WalkConfig& cfg,
                                        std::span<const std::uint64_t> sample_times, bool with_degrees = false);

struct MeanEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t samples = 0;
};

/// Monte Carlo R_v(T) = 1 + sum_{t=1..T} Pr(X_t = v) for a walk started at v.
MeanEstimate estimate_returns(const HypercubeSubgraph& g, Vertex v, std::uint64_t horizon, std::uint64_t trials,
                              std::uint64_t seed, double laziness = 0.0, Execution exec = Execution::parallel);

struct LastDegreeDistribution {
    std::vector<std::uint64_t> counts; // by degree, size d + 1, covered trials only
    std::uint64_t exhausted = 0;       // trials that ran out of budget

    std::uint64_t total() const;
    /// Smallest degree whose cumulative count reaches half the total.
    int median() const;
    /// Most frequent degree (smallest on ties).
    int mode() const;
};

LastDegreeDistribution last_visited_degree_distribution(const HypercubeSubgraph& g, const WalkConfig& cfg,
                                                        std::uint64_t trials, Execution exec = Execution::parallel);

struct JointUnvisited {
    double p_v = 0.0;
    double p_w = 0.0;
    double p_vw = 0.0;
    std::uint64_t trials = 0;

    /// P_vw / (P_v P_w); NaN when either marginal is zero.
    double correlation_ratio() const;
};

/// Monte Carlo estimates of Pr(v unvisited), Pr(w unvisited) and the joint
/// probability over steps [window_start, t]. window_start = 0 counts the whole walk.
JointUnvisited joint_unvisited_estimate(const HypercubeSubgraph& g, Vertex v, Vertex w, std::uint64_t t,
                                        std::uint64_t trials, const WalkConfig& cfg, std::uint64_t window_start = 0,
                                        Execution exec = Execution::parallel);

/// Positions at the sorted `times` for `trials` walks; result[k][x] counts walks at x at times[k].
std::vector<std::vector<std::uint64_t>> position_counts(const HypercubeSubgraph& g, const WalkConfig& cfg,
                                                        std::span<const std::uint64_t> times, std::uint64_t trials,
                                                        Execution exec = Execution::parallel);

/// Fraction of walks that have not visited `target` by each of the sorted `times`.
std::vector<double> unvisited_frequencies(const HypercubeSubgraph& g, const WalkConfig& cfg, Vertex target,
                                          std::span<const std::uint64_t> times, std::uint64_t trials,
                                          Execution exec = Execution::parallel);

} // namespace hcover
