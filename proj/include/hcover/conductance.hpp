#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hcover/hypercube.hpp"
#include "hcover/parallel.hpp"

namespace hcover {

/// Exhaustive conductance is limited to n = 2^d <= 32 vertices.
inline constexpr int kMaxExactConductanceDimension = 5;
/// Exhaustive Harper verification: all subsets of Q_d.
inline constexpr int kMaxHarperExhaustiveDimension = 4;

/// One side of a cut: e(S, S-bar), deg(S) and their ratio.
struct CutReport {
    std::vector<Vertex> subset;
    std::uint64_t e_cross = 0;
    std::uint64_t deg_s = 0;
    double ratio = 0.0;
    bool is_minimizer = false;
};

struct ConductanceResult {
    double phi = 0.0;
    std::optional<CutReport> witness; // empty when no set has 0 < deg(S) <= m
};

/// Phi = min e(S, S-bar) / deg(S) over S with 0 < deg(S) <= m.
///
/// Sets containing vertex 0 are walked in Gray-code order (one vertex flips
/// per step) and both S and its complement are scored, which covers every
/// cut once. Ties go to the smaller vertex bitmask so serial and parallel
/// runs return the same witness.
ConductanceResult exact_conductance(const HypercubeSubgraph& g, Execution exec = Execution::parallel);

/// Cut statistics of an explicit subset.
CutReport evaluate_cut(const HypercubeSubgraph& g, std::span<const Vertex> subset);

/// s (d - log2 s), the least number of edges leaving an s-set of Q_d.
double harper_bound(std::uint64_t s, int d);

struct HarperReport {
    bool ok = true;
    std::uint64_t checked = 0;
    std::vector<Vertex> worst_subset;    // smallest slack seen
    double worst_slack = 0.0;
    std::vector<double> min_slack_by_size; // exhaustive mode only; index = |S|
};

/// Every S of the full Q_d with 1 <= |S| <= 2^{d-1}; d <= 4.
HarperReport harper_check(int d, Execution exec = Execution::parallel);

/// `samples` random subsets (size uniform in [1, 2^{d-1}]) of the full Q_d; d <= 10.
HarperReport harper_check_sampled(int d, std::uint64_t samples, std::uint64_t seed,
                                  Execution exec = Execution::parallel);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double x) const noexcept { return x >= lo && x <= hi; }
};

/// [gap / 2, sqrt(2 gap)].
Interval cheeger_sandwich(double gap);

/// Smallest t with sqrt(pi_max / pi_min) (1 - phi^2 / 2)^t <= epsilon; nullopt when phi = 0.
std::optional<std::uint64_t> mixing_bound_from_conductance(double phi, double pi_min, double pi_max, double epsilon);

struct ConductanceEstimate {
    double value = 0.0;
    bool certified = false;
    std::string method; // "cheeger", "disconnected", "sweep"
    std::uint64_t witness_size = 0;
};

/// Certified gap/2 of the lazy walk when d <= 12; beyond that a sweep cut
/// along an approximate second eigenvector (non-certified).
ConductanceEstimate conductance_lower_estimate(const HypercubeSubgraph& g);

/// Sweep-cut value along an approximate second eigenvector (an upper bound on Phi, not a lower one).
ConductanceEstimate sweep_cut_estimate(const HypercubeSubgraph& g, int iterations = 300);

struct ConductanceRow {
    int d = 0;
    std::string p;
    std::uint64_t seed = 0;
    std::string method;
    double value = 0.0;
    std::uint64_t witness_size = 0;
    bool certified = false;
};

void write_conductance_csv(std::ostream& out, std::span<const ConductanceRow> rows);

} // namespace hcover
