#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hcover/conductance.hpp"
#include "hcover/error.hpp"
#include "hcover/exact_chain.hpp"

using namespace hcover;

namespace {

HypercubeSubgraph connected_instance(int d, const char* p, std::uint64_t seed) {
    for (std::uint64_t s = seed;; ++s) {
        auto g = sample_subgraph(d, Probability::parse(p), s);
        if (is_connected(g)) {
            return g;
        }
    }
}

// Direct enumeration of every nonempty proper subset.
double brute_conductance(const HypercubeSubgraph& g) {
    const auto n = g.vertex_count();
    const auto m = g.edge_count();
    double best = 1e300;
    for (std::uint64_t S = 1; S + 1 < (1ULL << n); ++S) {
        std::uint64_t deg = 0;
        std::uint64_t cross = 0;
        for (Vertex v = 0; v < n; ++v) {
            if (!((S >> v) & 1ULL)) {
                continue;
            }
            deg += g.degree(v);
            for (int k = 0; k < g.dimension(); ++k) {
                if (g.has_edge(v, k) && !((S >> (v ^ (1U << k))) & 1ULL)) {
                    ++cross;
                }
            }
        }
        if (deg > 0 && deg <= m) {
            best = std::min(best, static_cast<double>(cross) / static_cast<double>(deg));
        }
    }
    return best;
}

} // namespace

TEST_CASE("exact conductance against brute force") {
    for (int d : {2, 3, 4}) {
        for (std::uint64_t seed = 0; seed < 6; ++seed) {
            const auto g = connected_instance(d, "0.7", seed * 10);
            const auto serial = exact_conductance(g, Execution::serial);
            const auto par = exact_conductance(g, Execution::parallel);
            CHECK(serial.phi == doctest::Approx(brute_conductance(g)).epsilon(1e-15));
            CHECK(serial.phi == par.phi);
            REQUIRE(serial.witness.has_value());
            REQUIRE(par.witness.has_value());
            CHECK(serial.witness->subset == par.witness->subset);
            const auto cut = evaluate_cut(g, serial.witness->subset);
            CHECK(cut.ratio == doctest::Approx(serial.phi));
            CHECK(cut.deg_s <= g.edge_count());
        }
    }
    // Full Q_d: Phi = 1 / d (half-cube cut).
    CHECK(exact_conductance(HypercubeSubgraph::full(4)).phi == doctest::Approx(0.25));
    CHECK(exact_conductance(HypercubeSubgraph::full(5)).phi == doctest::Approx(0.2));
    CHECK_THROWS_AS(exact_conductance(HypercubeSubgraph::full(6)), CapacityError);
}

TEST_CASE("Harper bound and exhaustive check") {
    CHECK(harper_bound(1, 4) == 4.0);
    CHECK(harper_bound(8, 4) == 8.0);
    for (int d : {1, 2, 3, 4}) {
        const auto a = harper_check(d, Execution::serial);
        const auto b = harper_check(d, Execution::parallel);
        CHECK(a.ok);
        CHECK(a.checked == b.checked);
        CHECK(a.worst_slack == b.worst_slack);
        CHECK(a.worst_slack == doctest::Approx(0.0));
        // Equality at every subcube size 2^k.
        for (int k = 0; k < d; ++k) {
            CHECK(a.min_slack_by_size[1U << k] == doctest::Approx(0.0).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(harper_check(5), CapacityError);
    const auto s = harper_check_sampled(8, 2000, 3, Execution::serial);
    const auto p = harper_check_sampled(8, 2000, 3, Execution::parallel);
    CHECK(s.ok);
    CHECK(s.worst_slack == p.worst_slack);
    CHECK(s.worst_subset == p.worst_subset);
}

TEST_CASE("Cheeger sandwich and mixing bound") {
    const auto I = cheeger_sandwich(0.08);
    CHECK(I.lo == doctest::Approx(0.04));
    CHECK(I.hi == doctest::Approx(0.4));
    CHECK(I.contains(0.1));
    CHECK_FALSE(I.contains(0.5));
    CHECK_FALSE(mixing_bound_from_conductance(0.0, 0.1, 0.2, 1e-3).has_value());
    // sqrt(2) (1 - 0.02)^t <= 1e-3 first at t = ceil(log(1e-3 / sqrt 2) / log 0.98).
    const auto t = mixing_bound_from_conductance(0.2, 0.1, 0.2, 1e-3);
    const double expect = std::ceil(std::log(1e-3 / std::sqrt(2.0)) / std::log(0.98));
    CHECK(static_cast<double>(*t) == expect);

    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto g = connected_instance(4, "0.75", seed);
        const double phi = exact_conductance(g).phi;
        const auto gap = spectral_gap(build_chain(g, 0.5));
        CHECK(cheeger_sandwich(gap.gap).contains(phi));
    }
}

TEST_CASE("lower estimate modes") {
    const auto g = connected_instance(6, "0.8", 1);
    const auto est = conductance_lower_estimate(g);
    CHECK(est.method == "cheeger");
    CHECK(est.certified);
    const auto sweep = sweep_cut_estimate(g);
    CHECK_FALSE(sweep.certified);
    CHECK(sweep.value >= est.value);
    const auto disc = conductance_lower_estimate(HypercubeSubgraph::empty(4));
    CHECK(disc.method == "disconnected");
    CHECK(disc.value == 0.0);

    std::ostringstream out;
    const ConductanceRow row{6, "0.8", 1, est.method, est.value, 0, true};
    write_conductance_csv(out, std::span<const ConductanceRow>(&row, 1));
    CHECK(out.str().rfind("d,p,seed,method,value,witness_size,certified\n", 0) == 0);
}
