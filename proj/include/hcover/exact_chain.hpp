#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hcover/hypercube.hpp"
#include "hcover/parallel.hpp"

namespace hcover {

/// Oracle operations refuse instances above this dimension.
inline constexpr int kMaxChainDimension = 12;
/// exact_cover_time works on (visited set, position) states; at most this many vertices.
inline constexpr std::uint64_t kMaxCoverStates = 12;

/// Transition structure of the (lazy) walk on one instance.
///
/// P[u][x] = (1 - laziness) [x ~ u] / d_u + laziness [x = u]. Stored through
/// the neighbour masks and inverse degrees; every product is a sparse
/// O(n d) pass. pi_v = d_v / 2m.
class ExactChain {
public:
    ExactChain(const HypercubeSubgraph& g, double laziness);

    int dimension() const noexcept { return dimension_; }
    std::uint64_t state_count() const noexcept { return masks_.size(); }
    double laziness() const noexcept { return laziness_; }
    std::uint64_t edge_count() const noexcept { return edge_count_; }
    int degree(Vertex v) const { return degrees_.at(v); }
    std::span<const double> stationary() const noexcept { return stationary_; }
    std::span<const std::uint32_t> masks() const noexcept { return masks_; }

    /// Single entry P[u][x].
    double transition(Vertex u, Vertex x) const;

    /// out = dist * P (left action, distributions).
    void push_forward(std::span<const double> dist, std::span<double> out) const;
    /// out = P * f (right action, functions).
    void apply(std::span<const double> f, std::span<double> out) const;

    /// Diagnostics recorded at construction.
    double row_sum_error() const noexcept { return row_sum_error_; }
    double stationarity_residual() const noexcept { return stationarity_residual_; }
    double reversibility_residual() const noexcept { return reversibility_residual_; }

private:
    int dimension_;
    double laziness_;
    std::vector<std::uint32_t> masks_;
    std::vector<int> degrees_;
    std::vector<double> inv_degree_;
    std::vector<double> stationary_;
    std::uint64_t edge_count_ = 0;
    double row_sum_error_ = 0.0;
    double stationarity_residual_ = 0.0;
    double reversibility_residual_ = 0.0;
};

/// Throws CapacityError for d > 12 and ParameterError if some vertex has degree 0.
ExactChain build_chain(const HypercubeSubgraph& g, double laziness);

struct ReturnSeries {
    Vertex vertex = 0;
    std::vector<double> values; // r_0 .. r_{T-1}, r_t = Pr(X_t = v | X_0 = v)

    std::uint64_t horizon() const noexcept { return values.size(); }
};

ReturnSeries return_series(const ExactChain& chain, Vertex v, std::uint64_t horizon);

/// R(T, 1) = sum_{t < T} r_t, the expected number of visits to v in steps 0..T-1.
double R_value(const ReturnSeries& series);

/// R(T, z) at complex z by Horner's rule.
struct CircleMinimum {
    double min_modulus = 0.0;
    double angle = 0.0;      // argument of the minimising z
    double radius = 0.0;     // 1 + 1 / (K T)
    int zeros_inside = 0;    // winding number of R(T, .) around the circle
};

/// Number of equally spaced angles in the first pass of R_on_circle.
inline constexpr int kCircleGrid = 4096;

/// min over |z| = 1 + 1/(K T) of |R(T, z)|.
///
/// A 4096-point angular grid locates candidate minima; the four smallest
/// grid cells are then refined by golden-section search. The winding number
/// is accumulated along the same grid, so zeros_inside == 0 certifies that
/// the boundary minimum is also the minimum over the closed disk.
CircleMinimum R_on_circle(const ReturnSeries& series, double K);

/// Smallest t with max_{u,x} |P^t(u, x) - pi_x| <= epsilon; nullopt if the
/// chain is periodic (laziness 0 on a bipartite instance) or t exceeds max_steps.
/// The deviation is non-increasing in t, so the first hit holds for all later t.
std::optional<std::uint64_t> tv_mixing_time(const ExactChain& chain, double epsilon,
                                            std::uint64_t max_steps = 1'000'000,
                                            Execution exec = Execution::parallel);

/// Pr(walk from `start` avoids v at steps window_start..t), via v made absorbing.
double unvisited_probability_exact(const ExactChain& chain, Vertex v, Vertex start, std::uint64_t t,
                                   std::uint64_t window_start = 0);

/// The same probability for every t in [0, t_max], one propagation pass.
std::vector<double> unvisited_curve(const ExactChain& chain, Vertex v, Vertex start, std::uint64_t t_max,
                                    std::uint64_t window_start = 0);

/// Expected steps to visit every vertex from `start`, solving one linear system
/// per visited set over (visited set, position) states. At most 12 vertices.
double exact_cover_time(const ExactChain& chain, Vertex start = 0);

struct SpectralGap {
    double gap = 0.0;     // 1 - lambda_2
    double lambda2 = 0.0;
    std::uint64_t iterations = 0;
    double residual = 0.0;
};

/// 1 - lambda_2 of the reversible chain, by deflated power iteration on
/// D^{1/2} P D^{-1/2}. Chains with laziness < 1/2 are shifted to (I + S) / 2
/// first so the spectrum is non-negative. Throws NumericalError if the
/// residual is still above `tolerance` after `max_iterations`.
SpectralGap spectral_gap(const ExactChain& chain, double tolerance = 1e-9, std::uint64_t max_iterations = 2'000'000);

} // namespace hcover
