#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace hcover {

using Vertex = std::uint32_t;

/// Largest dimension accepted by sample_subgraph.
inline constexpr int kMaxDimension = 30;

/// Retention probability carried as its exact decimal text plus the parsed value.
///
/// The text is what gets written to reports and hashed into seeds, so a
/// fixture never depends on how a double happens to be printed.
class Probability {
public:
    /// Parses a decimal string; throws ParameterError unless the value is in [0, 1].
    static Probability parse(std::string text);
    /// Shortest round-trip decimal for `value`.
    static Probability from_double(double value);

    const std::string& text() const noexcept { return text_; }
    double value() const noexcept { return value_; }

private:
    Probability(std::string text, double value) : text_(std::move(text)), value_(value) {}
    std::string text_;
    double value_;
};

/// A sampled Q_{n,p}: for every vertex a d-bit mask, bit k set iff edge {v, v ^ (1 << k)} is kept.
///
/// Immutable once built; safe to share between threads.
class HypercubeSubgraph {
public:
    /// Adopts `masks`; throws ParameterError if sizes or edge symmetry are inconsistent.
    HypercubeSubgraph(int dimension, Probability p, std::uint64_t seed, std::vector<std::uint32_t> masks);

    /// Complete hypercube Q_d (p = 1).
    static HypercubeSubgraph full(int dimension);
    /// Edgeless graph on 2^d vertices (p = 0).
    static HypercubeSubgraph empty(int dimension);

    int dimension() const noexcept { return dimension_; }
    const Probability& p() const noexcept { return p_; }
    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t vertex_count() const noexcept { return masks_.size(); }
    std::uint64_t edge_count() const noexcept { return edge_count_; }
    std::span<const std::uint32_t> masks() const noexcept { return masks_; }

    std::uint32_t mask(Vertex v) const { return masks_.at(v); }
    /// Throws ParameterError for v >= 2^d.
    int degree(Vertex v) const;
    bool has_edge(Vertex v, int direction) const noexcept { return (masks_[v] >> direction) & 1U; }

    bool operator==(const HypercubeSubgraph& other) const noexcept;

private:
    int dimension_;
    Probability p_;
    std::uint64_t seed_;
    std::vector<std::uint32_t> masks_;
    std::uint64_t edge_count_ = 0;
};

struct DegreeHistogram {
    std::vector<std::uint64_t> counts; // counts[i] = number of vertices of degree i, i in [0, d]
};

/// Keeps each hypercube edge independently with probability p.
///
/// Edges are visited in (vertex ascending, direction ascending) order from
/// their lower endpoint, one Bernoulli draw each, so the result is a pure
/// function of (d, p, seed).
HypercubeSubgraph sample_subgraph(int dimension, const Probability& p, std::uint64_t seed);

DegreeHistogram degree_histogram(const HypercubeSubgraph& g);
bool is_connected(const HypercubeSubgraph& g);
int min_degree(const HypercubeSubgraph& g);

/// Component id per vertex (ids are the smallest vertex label in each component).
std::vector<Vertex> component_labels(const HypercubeSubgraph& g);

/// Hamming distance, i.e. the distance in the complete cube.
inline int cube_distance(Vertex u, Vertex v) noexcept { return __builtin_popcount(u ^ v); }

/// Graph distance from u to v if it is at most `cap`, otherwise nullopt.
/// Vertices in different components are at infinite distance.
std::optional<int> bfs_distance(const HypercubeSubgraph& g, Vertex u, Vertex v, int cap);

/// Degrees counted as "degree x" for non-integer x: {floor(x), ceil(x)}, values outside [0, d] dropped.
std::vector<int> degrees_near(double x, int dimension);

struct SpacingResult {
    bool ok = true;
    std::optional<std::pair<Vertex, Vertex>> witness; // set iff !ok
    int distance = 0;                                 // distance of the witness pair
    std::uint64_t qualifying = 0;                     // vertices that passed the degree filter
};

/// True iff no two distinct vertices of degree <= degree_cap are within graph distance h.
SpacingResult low_degree_spacing_ok(const HypercubeSubgraph& g, int degree_cap, int h);

/// Same check restricted to vertices whose degree is in `degrees`.
SpacingResult degree_set_spacing_ok(const HypercubeSubgraph& g, const std::vector<int>& degrees, int h);

/// Vertices whose degree is in `degrees`, ascending.
std::vector<Vertex> vertices_with_degree(const HypercubeSubgraph& g, const std::vector<int>& degrees);

// Instance container: {"format", "version", "d", "p", "seed", "rng", "edges", "masks"}.
inline constexpr int kInstanceFormatVersion = 1;
nlohmann::json to_json(const HypercubeSubgraph& g);
HypercubeSubgraph subgraph_from_json(const nlohmann::json& doc);
void save_instance(const HypercubeSubgraph& g, const std::string& path);
HypercubeSubgraph load_instance(const std::string& path);

} // namespace hcover
