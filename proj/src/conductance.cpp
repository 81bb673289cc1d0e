#include "hcover/conductance.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "hcover/error.hpp"
#include "hcover/exact_chain.hpp"
#include "hcover/rng.hpp"

namespace hcover {

namespace {

struct Candidate {
    std::uint64_t cross = 0;
    std::uint64_t deg = 0;
    std::uint64_t mask = 0;
    bool valid = false;
};

// Exact comparison of cross/deg ratios, ties broken by the vertex bitmask.
bool better(const Candidate& a, const Candidate& b) {
    if (!a.valid) {
        return false;
    }
    if (!b.valid) {
        return true;
    }
    const auto lhs = static_cast<unsigned __int128>(a.cross) * b.deg;
    const auto rhs = static_cast<unsigned __int128>(b.cross) * a.deg;
    if (lhs != rhs) {
        return lhs < rhs;
    }
    return a.mask < b.mask;
}

std::vector<std::uint64_t> adjacency_bits(const HypercubeSubgraph& g) {
    const auto n = g.vertex_count();
    std::vector<std::uint64_t> adj(n, 0);
    for (Vertex v = 0; v < n; ++v) {
        for (std::uint32_t rest = g.mask(v); rest; rest &= rest - 1) {
            adj[v] |= std::uint64_t{1} << (v ^ (Vertex{1} << std::countr_zero(rest)));
        }
    }
    return adj;
}

std::vector<Vertex> members_of(std::uint64_t mask) {
    std::vector<Vertex> out;
    for (; mask; mask &= mask - 1) {
        out.push_back(static_cast<Vertex>(std::countr_zero(mask)));
    }
    return out;
}

} // namespace

CutReport evaluate_cut(const HypercubeSubgraph& g, std::span<const Vertex> subset) {
    std::vector<std::uint8_t> inside(g.vertex_count(), 0);
    for (Vertex v : subset) {
        if (v >= g.vertex_count()) {
            throw ParameterError("subset vertex out of range");
        }
        inside[v] = 1;
    }
    CutReport r;
    r.subset.assign(subset.begin(), subset.end());
    std::sort(r.subset.begin(), r.subset.end());
    r.subset.erase(std::unique(r.subset.begin(), r.subset.end()), r.subset.end());
    for (Vertex v : r.subset) {
        for (std::uint32_t rest = g.mask(v); rest; rest &= rest - 1) {
            ++r.deg_s;
            r.e_cross += !inside[v ^ (Vertex{1} << std::countr_zero(rest))];
        }
    }
    r.ratio = r.deg_s ? static_cast<double>(r.e_cross) / static_cast<double>(r.deg_s) : 0.0;
    return r;
}

ConductanceResult exact_conductance(const HypercubeSubgraph& g, Execution exec) {
    if (g.dimension() > kMaxExactConductanceDimension) {
        throw CapacityError("exact conductance limited to d <= 5");
    }
    const auto n = g.vertex_count();
    const auto adj = adjacency_bits(g);
    std::vector<std::uint64_t> deg(n);
    for (Vertex v = 0; v < n; ++v) {
        deg[v] = static_cast<std::uint64_t>(g.degree(v));
    }
    const std::uint64_t m = g.edge_count();
    const std::uint64_t all = n == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);
    const std::uint64_t total = std::uint64_t{1} << (n - 1); // subsets containing vertex 0

    auto consider = [&](Candidate& best, std::uint64_t s, std::uint64_t cross, std::uint64_t deg_s) {
        if (deg_s > 0 && deg_s <= m) {
            const Candidate c{cross, deg_s, s, true};
            if (better(c, best)) {
                best = c;
            }
        }
        const std::uint64_t comp = all ^ s;
        const std::uint64_t deg_c = 2 * m - deg_s;
        if (comp != 0 && deg_c > 0 && deg_c <= m) {
            const Candidate c{cross, deg_c, comp, true};
            if (better(c, best)) {
                best = c;
            }
        }
    };

    const std::uint64_t chunks = std::min<std::uint64_t>(total, 256);
    std::vector<Candidate> partial(chunks);
    for_each_index(chunks, exec, [&](std::uint64_t c) {
        const std::uint64_t begin = total * c / chunks;
        const std::uint64_t end = total * (c + 1) / chunks;
        std::uint64_t s = 1 | ((begin ^ (begin >> 1)) << 1);
        std::uint64_t cross = 0;
        std::uint64_t deg_s = 0;
        for (std::uint64_t rest = s; rest; rest &= rest - 1) {
            const auto v = static_cast<std::size_t>(std::countr_zero(rest));
            deg_s += deg[v];
            cross += static_cast<std::uint64_t>(std::popcount(adj[v] & ~s));
        }
        Candidate best;
        consider(best, s, cross, deg_s);
        for (std::uint64_t k = begin + 1; k < end; ++k) {
            const auto v = static_cast<std::size_t>(std::countr_zero(k) + 1);
            const std::uint64_t bit = std::uint64_t{1} << v;
            if (s & bit) {
                s ^= bit;
                cross = cross + 2 * static_cast<std::uint64_t>(std::popcount(adj[v] & s)) - deg[v];
                deg_s -= deg[v];
            } else {
                cross = cross + deg[v] - 2 * static_cast<std::uint64_t>(std::popcount(adj[v] & s));
                s |= bit;
                deg_s += deg[v];
            }
            consider(best, s, cross, deg_s);
        }
        partial[c] = best;
    });

    Candidate best;
    for (const auto& c : partial) {
        if (better(c, best)) {
            best = c;
        }
    }
    ConductanceResult out;
    if (!best.valid) {
        return out;
    }
    out.phi = static_cast<double>(best.cross) / static_cast<double>(best.deg);
    CutReport w;
    w.subset = members_of(best.mask);
    w.e_cross = best.cross;
    w.deg_s = best.deg;
    w.ratio = out.phi;
    w.is_minimizer = true;
    out.witness = std::move(w);
    return out;
}

double harper_bound(std::uint64_t s, int d) {
    if (s < 1) {
        throw ParameterError("subset size must be positive");
    }
    const double sd = static_cast<double>(s);
    return sd * (static_cast<double>(d) - std::log2(sd));
}

namespace {

constexpr double kHarperTolerance = 1e-9;

} // namespace

HarperReport harper_check(int d, Execution exec) {
    if (d < 1 || d > kMaxHarperExhaustiveDimension) {
        throw CapacityError("exhaustive Harper check limited to 1 <= d <= 4");
    }
    const auto cube = HypercubeSubgraph::full(d);
    const auto n = cube.vertex_count();
    const auto adj = adjacency_bits(cube);
    const std::uint64_t subsets = std::uint64_t{1} << n;
    const std::uint64_t half = n / 2;

    // Per-chunk minima, merged in chunk order.
    struct Partial {
        std::vector<double> min_slack;
        double worst = 0.0;
        std::uint64_t worst_mask = 0;
        bool any = false;
        bool ok = true;
        std::uint64_t checked = 0;
    };
    const std::uint64_t chunks = std::min<std::uint64_t>(subsets, 64);
    std::vector<Partial> parts(chunks);
    for_each_index(chunks, exec, [&](std::uint64_t c) {
        Partial& part = parts[c];
        part.min_slack.assign(half + 1, std::numeric_limits<double>::infinity());
        const std::uint64_t begin = std::max<std::uint64_t>(1, subsets * c / chunks);
        const std::uint64_t end = subsets * (c + 1) / chunks;
        for (std::uint64_t s = begin; s < end; ++s) {
            const auto size = static_cast<std::uint64_t>(std::popcount(s));
            if (size > half) {
                continue;
            }
            std::uint64_t cross = 0;
            for (std::uint64_t rest = s; rest; rest &= rest - 1) {
                cross += static_cast<std::uint64_t>(std::popcount(adj[static_cast<std::size_t>(std::countr_zero(rest))] & ~s));
            }
            const double slack = static_cast<double>(cross) - harper_bound(size, d);
            ++part.checked;
            part.ok = part.ok && slack >= -kHarperTolerance;
            part.min_slack[size] = std::min(part.min_slack[size], slack);
            if (!part.any || slack < part.worst) {
                part.any = true;
                part.worst = slack;
                part.worst_mask = s;
            }
        }
    });

    HarperReport report;
    report.min_slack_by_size.assign(half + 1, std::numeric_limits<double>::infinity());
    bool any = false;
    std::uint64_t worst_mask = 0;
    for (const auto& part : parts) {
        report.ok = report.ok && part.ok;
        report.checked += part.checked;
        for (std::size_t k = 0; k <= half; ++k) {
            report.min_slack_by_size[k] = std::min(report.min_slack_by_size[k], part.min_slack[k]);
        }
        if (part.any && (!any || part.worst < report.worst_slack)) {
            any = true;
            report.worst_slack = part.worst;
            worst_mask = part.worst_mask;
        }
    }
    report.worst_subset = members_of(worst_mask);
    return report;
}

HarperReport harper_check_sampled(int d, std::uint64_t samples, std::uint64_t seed, Execution exec) {
    if (d < 1 || d > 10) {
        throw CapacityError("sampled Harper check limited to 1 <= d <= 10");
    }
    const auto n = std::uint64_t{1} << d;
    const std::uint64_t half = n / 2;
    std::vector<double> slack(samples);
    for_each_index(samples, exec, [&](std::uint64_t i) {
        Rng rng(derive_seed(seed, i));
        const std::uint64_t size = 1 + rng.below(half);
        std::vector<Vertex> perm(n);
        std::iota(perm.begin(), perm.end(), Vertex{0});
        for (std::uint64_t j = 0; j < size; ++j) {
            std::swap(perm[j], perm[j + rng.below(n - j)]);
        }
        std::vector<std::uint8_t> inside(n, 0);
        for (std::uint64_t j = 0; j < size; ++j) {
            inside[perm[j]] = 1;
        }
        std::uint64_t cross = 0;
        for (std::uint64_t j = 0; j < size; ++j) {
            for (int k = 0; k < d; ++k) {
                cross += !inside[perm[j] ^ (Vertex{1} << k)];
            }
        }
        slack[i] = static_cast<double>(cross) - harper_bound(size, d);
    });

    HarperReport report;
    report.checked = samples;
    if (samples == 0) {
        return report;
    }
    const auto worst = static_cast<std::uint64_t>(std::min_element(slack.begin(), slack.end()) - slack.begin());
    report.worst_slack = slack[worst];
    report.ok = report.worst_slack >= -kHarperTolerance;
    // Regenerate the worst subset from its seed.
    Rng rng(derive_seed(seed, worst));
    const std::uint64_t size = 1 + rng.below(half);
    std::vector<Vertex> perm(n);
    std::iota(perm.begin(), perm.end(), Vertex{0});
    for (std::uint64_t j = 0; j < size; ++j) {
        std::swap(perm[j], perm[j + rng.below(n - j)]);
    }
    report.worst_subset.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(size));
    std::sort(report.worst_subset.begin(), report.worst_subset.end());
    return report;
}

Interval cheeger_sandwich(double gap) {
    if (!(gap >= 0.0 && gap <= 1.0 + 1e-12)) {
        throw ParameterError("spectral gap must lie in [0, 1]");
    }
    return Interval{gap / 2.0, std::sqrt(2.0 * gap)};
}

std::optional<std::uint64_t> mixing_bound_from_conductance(double phi, double pi_min, double pi_max, double epsilon) {
    if (!(phi >= 0.0 && phi <= 1.0)) {
        throw ParameterError("conductance must lie in [0, 1]");
    }
    if (!(pi_min > 0.0 && pi_max >= pi_min)) {
        throw ParameterError("need 0 < pi_min <= pi_max");
    }
    if (!(epsilon > 0.0)) {
        throw ParameterError("epsilon must be positive");
    }
    const double scale = std::sqrt(pi_max / pi_min);
    if (epsilon >= scale) {
        return 0;
    }
    if (phi == 0.0) {
        return std::nullopt;
    }
    const double base = 1.0 - phi * phi / 2.0;
    auto holds = [&](std::uint64_t t) { return scale * std::pow(base, static_cast<double>(t)) <= epsilon; };
    auto t = static_cast<std::uint64_t>(std::max(0.0, std::ceil(std::log(epsilon / scale) / std::log(base))));
    while (!holds(t)) {
        ++t;
    }
    while (t > 0 && holds(t - 1)) {
        --t;
    }
    return t;
}

ConductanceEstimate sweep_cut_estimate(const HypercubeSubgraph& g, int iterations) {
    ConductanceEstimate est;
    est.method = "sweep";
    est.certified = false;
    const auto n = g.vertex_count();
    const std::uint64_t m = g.edge_count();
    if (m == 0) {
        return est;
    }
    std::vector<double> deg(n);
    double total = 0.0;
    for (Vertex v = 0; v < n; ++v) {
        deg[v] = g.degree(v);
        total += deg[v];
    }
    // Lazy walk right action on functions; deflate the constant function in the pi inner product.
    std::vector<double> f(n);
    std::vector<double> next(n);
    for (Vertex v = 0; v < n; ++v) {
        f[v] = std::sin(1.0 + 12.9898 * v);
    }
    for (int it = 0; it < iterations; ++it) {
        double mean = 0.0;
        for (Vertex v = 0; v < n; ++v) {
            mean += deg[v] * f[v];
        }
        mean /= total;
        double norm = 0.0;
        for (Vertex v = 0; v < n; ++v) {
            f[v] -= mean;
            norm = std::max(norm, std::abs(f[v]));
        }
        if (norm == 0.0) {
            break;
        }
        for (Vertex v = 0; v < n; ++v) {
            double acc = 0.0;
            for (std::uint32_t rest = g.mask(v); rest; rest &= rest - 1) {
                acc += f[v ^ (Vertex{1} << std::countr_zero(rest))];
            }
            next[v] = deg[v] > 0 ? 0.5 * f[v] + 0.5 * acc / deg[v] : f[v];
            next[v] /= norm;
        }
        f.swap(next);
    }
    std::vector<Vertex> order(n);
    std::iota(order.begin(), order.end(), Vertex{0});
    std::stable_sort(order.begin(), order.end(), [&](Vertex a, Vertex b) { return f[a] < f[b]; });

    std::vector<std::uint8_t> inside(n, 0);
    std::int64_t cross = 0;
    std::uint64_t deg_s = 0;
    double best = std::numeric_limits<double>::infinity();
    std::uint64_t best_size = 0;
    for (std::uint64_t k = 0; k + 1 < n; ++k) {
        const Vertex v = order[k];
        std::int64_t into = 0;
        for (std::uint32_t rest = g.mask(v); rest; rest &= rest - 1) {
            into += inside[v ^ (Vertex{1} << std::countr_zero(rest))];
        }
        inside[v] = 1;
        cross += static_cast<std::int64_t>(deg[v]) - 2 * into;
        deg_s += static_cast<std::uint64_t>(deg[v]);
        const std::uint64_t side = std::min(deg_s, 2 * m - deg_s);
        if (side > 0) {
            const double ratio = static_cast<double>(cross) / static_cast<double>(side);
            if (ratio < best) {
                best = ratio;
                best_size = deg_s <= m ? k + 1 : n - k - 1;
            }
        }
    }
    est.value = std::isfinite(best) ? best : 0.0;
    est.witness_size = best_size;
    return est;
}

ConductanceEstimate conductance_lower_estimate(const HypercubeSubgraph& g) {
    if (g.edge_count() == 0 || min_degree(g) == 0 || !is_connected(g)) {
        return ConductanceEstimate{0.0, true, "disconnected", 0};
    }
    if (g.dimension() <= kMaxChainDimension) {
        const auto chain = build_chain(g, 0.5);
        const auto gap = spectral_gap(chain);
        return ConductanceEstimate{cheeger_sandwich(std::clamp(gap.gap, 0.0, 1.0)).lo, true, "cheeger", 0};
    }
    return sweep_cut_estimate(g);
}

void write_conductance_csv(std::ostream& out, std::span<const ConductanceRow> rows) {
    out << "d,p,seed,method,value,witness_size,certified\n";
    const auto old_precision = out.precision(17);
    for (const auto& r : rows) {
        out << r.d << ',' << r.p << ',' << r.seed << ',' << r.method << ',' << r.value << ',' << r.witness_size
            << ',' << (r.certified ? "true" : "false") << '\n';
    }
    out.precision(old_precision);
}

} // namespace hcover
