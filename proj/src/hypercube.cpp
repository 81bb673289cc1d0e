#include "hcover/hypercube.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <deque>
#include <fstream>
#include <numeric>
#include <sstream>

#include "hcover/error.hpp"
#include "hcover/rng.hpp"

namespace hcover {

Probability Probability::parse(std::string text) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || text.empty()) {
        throw ParameterError("probability '" + text + "' is not a decimal number");
    }
    if (!(value >= 0.0 && value <= 1.0)) {
        throw ParameterError("probability " + text + " outside [0, 1]");
    }
    return Probability(std::move(text), value);
}

Probability Probability::from_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) {
        throw ParameterError("cannot format probability");
    }
    return parse(std::string(buf, ptr));
}

HypercubeSubgraph::HypercubeSubgraph(int dimension, Probability p, std::uint64_t seed,
                                     std::vector<std::uint32_t> masks)
    : dimension_(dimension), p_(std::move(p)), seed_(seed), masks_(std::move(masks)) {
    if (dimension_ < 1 || dimension_ > kMaxDimension) {
        throw CapacityError("dimension " + std::to_string(dimension_) + " outside [1, 30]");
    }
    if (masks_.size() != (std::uint64_t{1} << dimension_)) {
        throw ParameterError("mask array length does not match 2^d");
    }
    const std::uint32_t allowed = (1U << dimension_) - 1U; // dimension_ <= 30
    std::uint64_t degree_sum = 0;
    for (std::uint64_t v = 0; v < masks_.size(); ++v) {
        const std::uint32_t m = masks_[v];
        if (m & ~allowed) {
            throw ParameterError("mask of vertex " + std::to_string(v) + " has bits beyond d");
        }
        for (std::uint32_t rest = m; rest; rest &= rest - 1) {
            const int k = std::countr_zero(rest);
            if (!((masks_[v ^ (std::uint64_t{1} << k)] >> k) & 1U)) {
                throw ParameterError("edge symmetry violated at vertex " + std::to_string(v));
            }
        }
        degree_sum += static_cast<std::uint64_t>(std::popcount(m));
    }
    edge_count_ = degree_sum / 2;
}

HypercubeSubgraph HypercubeSubgraph::full(int dimension) {
    if (dimension < 1 || dimension > kMaxDimension) {
        throw CapacityError("dimension outside [1, 30]");
    }
    return HypercubeSubgraph(dimension, Probability::parse("1"), 0,
                             std::vector<std::uint32_t>(std::size_t{1} << dimension, (1U << dimension) - 1U));
}

HypercubeSubgraph HypercubeSubgraph::empty(int dimension) {
    if (dimension < 1 || dimension > kMaxDimension) {
        throw CapacityError("dimension outside [1, 30]");
    }
    return HypercubeSubgraph(dimension, Probability::parse("0"), 0,
                             std::vector<std::uint32_t>(std::size_t{1} << dimension, 0U));
}

int HypercubeSubgraph::degree(Vertex v) const {
    if (v >= masks_.size()) {
        throw ParameterError("vertex " + std::to_string(v) + " out of range");
    }
    return std::popcount(masks_[v]);
}

bool HypercubeSubgraph::operator==(const HypercubeSubgraph& other) const noexcept {
    return dimension_ == other.dimension_ && p_.text() == other.p_.text() && seed_ == other.seed_ &&
           masks_ == other.masks_;
}

HypercubeSubgraph sample_subgraph(int dimension, const Probability& p, std::uint64_t seed) {
    if (dimension < 1 || dimension > kMaxDimension) {
        throw CapacityError("dimension " + std::to_string(dimension) + " outside [1, 30]");
    }
    const std::uint64_t n = std::uint64_t{1} << dimension;
    std::vector<std::uint32_t> masks(n, 0U);
    Rng rng(seed);
    const double keep = p.value();
    for (std::uint64_t v = 0; v < n; ++v) {
        for (int k = 0; k < dimension; ++k) {
            const std::uint64_t bit = std::uint64_t{1} << k;
            if (v & bit) {
                continue; // decided from the lower endpoint
            }
            if (rng.bernoulli(keep)) {
                masks[v] |= 1U << k;
                masks[v | bit] |= 1U << k;
            }
        }
    }
    return HypercubeSubgraph(dimension, p, seed, std::move(masks));
}

DegreeHistogram degree_histogram(const HypercubeSubgraph& g) {
    DegreeHistogram h;
    h.counts.assign(static_cast<std::size_t>(g.dimension()) + 1, 0);
    for (std::uint32_t m : g.masks()) {
        ++h.counts[static_cast<std::size_t>(std::popcount(m))];
    }
    return h;
}

int min_degree(const HypercubeSubgraph& g) {
    int best = g.dimension();
    for (std::uint32_t m : g.masks()) {
        best = std::min(best, std::popcount(m));
    }
    return best;
}

namespace {

// Union-find with path halving; labels end up as component minima.
class DisjointSets {
public:
    explicit DisjointSets(std::uint64_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), Vertex{0}); }

    Vertex find(Vertex x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    bool unite(Vertex a, Vertex b) {
        a = find(a);
        b = find(b);
        if (a == b) {
            return false;
        }
        if (b < a) {
            std::swap(a, b);
        }
        parent_[b] = a;
        return true;
    }

private:
    std::vector<Vertex> parent_;
};

} // namespace

std::vector<Vertex> component_labels(const HypercubeSubgraph& g) {
    const auto n = g.vertex_count();
    DisjointSets sets(n);
    const auto masks = g.masks();
    for (Vertex v = 0; v < n; ++v) {
        for (std::uint32_t rest = masks[v]; rest; rest &= rest - 1) {
            const Vertex w = v ^ (Vertex{1} << std::countr_zero(rest));
            if (v < w) {
                sets.unite(v, w);
            }
        }
    }
    std::vector<Vertex> labels(n);
    for (Vertex v = 0; v < n; ++v) {
        labels[v] = sets.find(v);
    }
    return labels;
}

bool is_connected(const HypercubeSubgraph& g) {
    const auto n = g.vertex_count();
    DisjointSets sets(n);
    std::uint64_t merges = 0;
    const auto masks = g.masks();
    for (Vertex v = 0; v < n; ++v) {
        for (std::uint32_t rest = masks[v]; rest; rest &= rest - 1) {
            const Vertex w = v ^ (Vertex{1} << std::countr_zero(rest));
            if (v < w && sets.unite(v, w)) {
                ++merges;
            }
        }
    }
    return merges + 1 == n;
}

std::optional<int> bfs_distance(const HypercubeSubgraph& g, Vertex u, Vertex v, int cap) {
    const auto n = g.vertex_count();
    if (u >= n || v >= n) {
        throw ParameterError("vertex label out of range");
    }
    if (cap < 0) {
        throw ParameterError("distance cap must be non-negative");
    }
    if (u == v) {
        return 0;
    }
    // Depth-limited BFS.
    std::vector<std::uint8_t> seen(n, 0);
    std::vector<Vertex> frontier{u};
    seen[u] = 1;
    const auto masks = g.masks();
    for (int depth = 1; depth <= cap && !frontier.empty(); ++depth) {
        std::vector<Vertex> next;
        for (Vertex x : frontier) {
            for (std::uint32_t rest = masks[x]; rest; rest &= rest - 1) {
                const Vertex y = x ^ (Vertex{1} << std::countr_zero(rest));
                if (y == v) {
                    return depth;
                }
                if (!seen[y]) {
                    seen[y] = 1;
                    next.push_back(y);
                }
            }
        }
        frontier = std::move(next);
    }
    return std::nullopt;
}

std::vector<int> degrees_near(double x, int dimension) {
    std::vector<int> out;
    const int lo = static_cast<int>(std::floor(x));
    const int hi = static_cast<int>(std::ceil(x));
    for (int k : {lo, hi}) {
        if (k >= 0 && k <= dimension && std::find(out.begin(), out.end(), k) == out.end()) {
            out.push_back(k);
        }
    }
    return out;
}

std::vector<Vertex> vertices_with_degree(const HypercubeSubgraph& g, const std::vector<int>& degrees) {
    std::vector<Vertex> out;
    const auto masks = g.masks();
    for (Vertex v = 0; v < masks.size(); ++v) {
        const int dv = std::popcount(masks[v]);
        if (std::find(degrees.begin(), degrees.end(), dv) != degrees.end()) {
            out.push_back(v);
        }
    }
    return out;
}

namespace {

template <typename Qualifies>
SpacingResult spacing_check(const HypercubeSubgraph& g, int h, Qualifies qualifies) {
    SpacingResult result;
    const auto n = g.vertex_count();
    const auto masks = g.masks();
    std::vector<std::uint8_t> marked(n, 0);
    std::vector<Vertex> members;
    for (Vertex v = 0; v < n; ++v) {
        if (qualifies(std::popcount(masks[v]))) {
            marked[v] = 1;
            members.push_back(v);
        }
    }
    result.qualifying = members.size();
    if (h < 1 || members.size() < 2) {
        return result;
    }
    // Stamped visited array so each BFS is O(ball size), not O(n).
    std::vector<std::uint32_t> stamp(n, 0);
    std::uint32_t round = 0;
    for (Vertex src : members) {
        ++round;
        std::vector<Vertex> frontier{src};
        stamp[src] = round;
        for (int depth = 1; depth <= h && !frontier.empty(); ++depth) {
            std::vector<Vertex> next;
            for (Vertex x : frontier) {
                for (std::uint32_t rest = masks[x]; rest; rest &= rest - 1) {
                    const Vertex y = x ^ (Vertex{1} << std::countr_zero(rest));
                    if (stamp[y] == round) {
                        continue;
                    }
                    stamp[y] = round;
                    if (marked[y]) {
                        result.ok = false;
                        result.witness = std::make_pair(std::min(src, y), std::max(src, y));
                        result.distance = depth;
                        return result;
                    }
                    next.push_back(y);
                }
            }
            frontier = std::move(next);
        }
    }
    return result;
}

} // namespace

SpacingResult low_degree_spacing_ok(const HypercubeSubgraph& g, int degree_cap, int h) {
    return spacing_check(g, h, [degree_cap](int dv) { return dv <= degree_cap; });
}

SpacingResult degree_set_spacing_ok(const HypercubeSubgraph& g, const std::vector<int>& degrees, int h) {
    return spacing_check(g, h, [&degrees](int dv) {
        return std::find(degrees.begin(), degrees.end(), dv) != degrees.end();
    });
}

nlohmann::json to_json(const HypercubeSubgraph& g) {
    nlohmann::json doc;
    doc["format"] = "hypercube-subgraph";
    doc["version"] = kInstanceFormatVersion;
    doc["d"] = g.dimension();
    doc["p"] = g.p().text();
    doc["seed"] = g.seed();
    doc["rng"] = std::string(kRngName);
    doc["edges"] = g.edge_count();
    doc["masks"] = std::vector<std::uint32_t>(g.masks().begin(), g.masks().end());
    return doc;
}

HypercubeSubgraph subgraph_from_json(const nlohmann::json& doc) {
    if (doc.value("format", std::string{}) != "hypercube-subgraph") {
        throw ParameterError("not a hypercube-subgraph document");
    }
    if (doc.at("version").get<int>() != kInstanceFormatVersion) {
        throw ParameterError("unsupported instance format version");
    }
    const auto rng = doc.at("rng").get<std::string>();
    if (rng != kRngName) {
        throw ParameterError("instance generated with unknown rng '" + rng + "'");
    }
    HypercubeSubgraph g(doc.at("d").get<int>(), Probability::parse(doc.at("p").get<std::string>()),
                        doc.at("seed").get<std::uint64_t>(), doc.at("masks").get<std::vector<std::uint32_t>>());
    if (doc.contains("edges") && doc.at("edges").get<std::uint64_t>() != g.edge_count()) {
        throw ParameterError("edge count in header does not match masks");
    }
    return g;
}

void save_instance(const HypercubeSubgraph& g, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    out << to_json(g).dump() << '\n';
}

HypercubeSubgraph load_instance(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    return subgraph_from_json(nlohmann::json::parse(in));
}

} // namespace hcover
