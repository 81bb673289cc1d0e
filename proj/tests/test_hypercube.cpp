#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <algorithm>
#include <numeric>
#include <queue>

#include "hcover/error.hpp"
#include "hcover/hypercube.hpp"

using namespace hcover;

namespace {

// Plain adjacency-list BFS used as the distance oracle.
std::vector<int> bfs_all(const HypercubeSubgraph& g, Vertex s) {
    std::vector<int> dist(g.vertex_count(), -1);
    std::queue<Vertex> q;
    dist[s] = 0;
    q.push(s);
    while (!q.empty()) {
        const Vertex u = q.front();
        q.pop();
        for (int k = 0; k < g.dimension(); ++k) {
            const Vertex w = u ^ (Vertex{1} << k);
            if (g.has_edge(u, k) && dist[w] < 0) {
                dist[w] = dist[u] + 1;
                q.push(w);
            }
        }
    }
    return dist;
}

} // namespace

TEST_CASE("Probability keeps its decimal text") {
    CHECK(Probability::parse("0.75").text() == "0.75");
    CHECK(Probability::parse("0.75").value() == 0.75);
    CHECK(Probability::parse("1").value() == 1.0);
    CHECK(Probability::from_double(0.1).text() == "0.1");
    CHECK_THROWS_AS(Probability::parse("1.5"), ParameterError);
    CHECK_THROWS_AS(Probability::parse("-0.1"), ParameterError);
    CHECK_THROWS_AS(Probability::parse("abc"), ParameterError);
    CHECK_THROWS_AS(Probability::parse("0.5x"), ParameterError);
}

TEST_CASE("sampling is a pure function of (d, p, seed)") {
    const auto p = Probability::parse("0.6");
    const auto a = sample_subgraph(10, p, 99);
    const auto b = sample_subgraph(10, p, 99);
    const auto c = sample_subgraph(10, p, 100);
    CHECK(a == b);
    CHECK_FALSE(a == c);
    CHECK(a.seed() == 99);
    CHECK(a.p().text() == "0.6");
}

TEST_CASE("p = 1 and p = 0 give the full and empty cube") {
    for (int d = 1; d <= 8; ++d) {
        CHECK(sample_subgraph(d, Probability::parse("1"), 5).masks().size() == (1U << d));
        const auto full_graph = HypercubeSubgraph::full(d);
        const auto empty_graph = HypercubeSubgraph::empty(d);
        const auto full = full_graph.masks();
        const auto none = empty_graph.masks();
        const auto a = sample_subgraph(d, Probability::parse("1"), 5);
        const auto b = sample_subgraph(d, Probability::parse("0"), 5);
        CHECK(std::equal(a.masks().begin(), a.masks().end(), full.begin(), full.end()));
        CHECK(std::equal(b.masks().begin(), b.masks().end(), none.begin(), none.end()));
    }
    const auto q = HypercubeSubgraph::full(5);
    CHECK(q.edge_count() == 5 * 16);
    CHECK(min_degree(q) == 5);
    CHECK(is_connected(q));
    CHECK_FALSE(is_connected(HypercubeSubgraph::empty(3)));
}

TEST_CASE("edges are symmetric and the histogram sums to n") {
    const auto g = sample_subgraph(12, Probability::parse("0.55"), 4);
    std::uint64_t degree_sum = 0;
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
        degree_sum += g.degree(v);
        for (int k = 0; k < 12; ++k) {
            CHECK(g.has_edge(v, k) == g.has_edge(v ^ (Vertex{1} << k), k));
        }
    }
    CHECK(degree_sum == 2 * g.edge_count());
    const auto h = degree_histogram(g);
    CHECK(h.counts.size() == 13);
    CHECK(std::accumulate(h.counts.begin(), h.counts.end(), std::uint64_t{0}) == g.vertex_count());
    // Edge count is Binomial(d n / 2, p): within 5 sigma of its mean.
    const double mean = 12.0 * 4096 / 2 * 0.55;
    const double sd = std::sqrt(mean * 0.45);
    CHECK(std::abs(static_cast<double>(g.edge_count()) - mean) < 5 * sd);
    CHECK_THROWS_AS(g.degree(static_cast<Vertex>(g.vertex_count())), ParameterError);
}

TEST_CASE("constructor rejects inconsistent masks") {
    CHECK_THROWS_AS(HypercubeSubgraph(2, Probability::parse("1"), 0, {1, 0, 0, 0}), ParameterError);
    CHECK_THROWS_AS(HypercubeSubgraph(2, Probability::parse("1"), 0, {0, 0, 0}), ParameterError);
    CHECK_THROWS_AS(HypercubeSubgraph(2, Probability::parse("1"), 0, {4, 0, 0, 0}), ParameterError);
    CHECK_NOTHROW(HypercubeSubgraph(2, Probability::parse("1"), 0, {1, 1, 0, 0}));
}

TEST_CASE("connectivity and components agree with BFS") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto g = sample_subgraph(6, Probability::parse("0.5"), seed);
        const auto dist = bfs_all(g, 0);
        const bool all = std::all_of(dist.begin(), dist.end(), [](int x) { return x >= 0; });
        CHECK(is_connected(g) == all);
        const auto labels = component_labels(g);
        for (Vertex v = 0; v < g.vertex_count(); ++v) {
            CHECK((labels[v] == labels[0]) == (dist[v] >= 0));
            CHECK(labels[v] <= v);
        }
    }
}

TEST_CASE("bfs_distance matches the oracle and honours the cap") {
    const auto g = sample_subgraph(7, Probability::parse("0.7"), 12);
    const auto dist = bfs_all(g, 3);
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
        const auto got = bfs_distance(g, 3, v, 100);
        if (dist[v] < 0) {
            CHECK_FALSE(got.has_value());
        } else {
            REQUIRE(got.has_value());
            CHECK(*got == dist[v]);
            CHECK(*got >= cube_distance(3, v));
            if (dist[v] > 0) {
                CHECK(bfs_distance(g, 3, v, dist[v] - 1) == std::nullopt);
            }
        }
    }
    const auto full = HypercubeSubgraph::full(6);
    CHECK(*bfs_distance(full, 0, 63, 6) == 6);
}

TEST_CASE("degrees_near") {
    CHECK(degrees_near(2.5, 10) == std::vector<int>{2, 3});
    CHECK(degrees_near(3.0, 10) == std::vector<int>{3});
    CHECK(degrees_near(12.0, 10).empty());
    CHECK(degrees_near(-0.5, 10) == std::vector<int>{0});
}

TEST_CASE("spacing checks against brute force") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto g = sample_subgraph(6, Probability::parse("0.6"), seed);
        for (int cap : {1, 2, 3}) {
            for (int h : {1, 2, 3}) {
                bool brute_ok = true;
                for (Vertex u = 0; u < g.vertex_count() && brute_ok; ++u) {
                    if (g.degree(u) > cap) {
                        continue;
                    }
                    const auto dist = bfs_all(g, u);
                    for (Vertex v = 0; v < g.vertex_count(); ++v) {
                        if (v != u && g.degree(v) <= cap && dist[v] >= 0 && dist[v] <= h) {
                            brute_ok = false;
                        }
                    }
                }
                const auto r = low_degree_spacing_ok(g, cap, h);
                CHECK(r.ok == brute_ok);
                if (!r.ok) {
                    REQUIRE(r.witness.has_value());
                    CHECK(r.distance <= h);
                    CHECK(*bfs_distance(g, r.witness->first, r.witness->second, h) == r.distance);
                }
            }
        }
    }
    const auto full = HypercubeSubgraph::full(4);
    CHECK_FALSE(low_degree_spacing_ok(full, 4, 1).ok);
    CHECK(low_degree_spacing_ok(full, 3, 5).ok);
    CHECK(degree_set_spacing_ok(full, {3}, 5).qualifying == 0);
    CHECK(vertices_with_degree(full, {4}).size() == 16);
}

TEST_CASE("instance JSON round-trips") {
    const auto g = sample_subgraph(6, Probability::parse("0.65"), 21);
    CHECK(subgraph_from_json(to_json(g)) == g);
    const auto path = (std::filesystem::temp_directory_path() / "hcover_instance_test.json").string();
    save_instance(g, path);
    const auto back = load_instance(path);
    CHECK(back == g);
    CHECK(back.p().text() == "0.65");
    CHECK(back.seed() == 21);
    std::remove(path.c_str());
    auto doc = to_json(g);
    doc["version"] = 99;
    CHECK_THROWS(subgraph_from_json(doc));
}
