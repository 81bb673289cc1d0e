#include "hcover/exact_chain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Dense>

#include "hcover/error.hpp"

namespace hcover {

ExactChain::ExactChain(const HypercubeSubgraph& g, double laziness)
    : dimension_(g.dimension()), laziness_(laziness), masks_(g.masks().begin(), g.masks().end()) {
    if (g.dimension() > kMaxChainDimension) {
        throw CapacityError("exact chain limited to d <= 12, got d = " + std::to_string(g.dimension()));
    }
    if (!(laziness >= 0.0 && laziness < 1.0)) {
        throw ParameterError("laziness must lie in [0, 1)");
    }
    const auto n = masks_.size();
    degrees_.resize(n);
    inv_degree_.resize(n);
    std::uint64_t degree_sum = 0;
    for (Vertex v = 0; v < n; ++v) {
        degrees_[v] = std::popcount(masks_[v]);
        if (degrees_[v] == 0) {
            throw ParameterError("vertex " + std::to_string(v) + " has degree 0; no transition row");
        }
        inv_degree_[v] = 1.0 / degrees_[v];
        degree_sum += static_cast<std::uint64_t>(degrees_[v]);
    }
    edge_count_ = degree_sum / 2;
    stationary_.resize(n);
    for (Vertex v = 0; v < n; ++v) {
        stationary_[v] = static_cast<double>(degrees_[v]) / static_cast<double>(degree_sum);
    }

    std::vector<double> image(n);
    push_forward(stationary_, image);
    for (Vertex v = 0; v < n; ++v) {
        stationarity_residual_ = std::max(stationarity_residual_, std::abs(image[v] - stationary_[v]));
        double row = laziness_;
        for (std::uint32_t rest = masks_[v]; rest; rest &= rest - 1) {
            const Vertex x = v ^ (Vertex{1} << std::countr_zero(rest));
            const double forward = stationary_[v] * transition(v, x);
            const double backward = stationary_[x] * transition(x, v);
            reversibility_residual_ = std::max(reversibility_residual_, std::abs(forward - backward));
            row += (1.0 - laziness_) * inv_degree_[v];
        }
        row_sum_error_ = std::max(row_sum_error_, std::abs(row - 1.0));
    }
}

double ExactChain::transition(Vertex u, Vertex x) const {
    if (u >= state_count() || x >= state_count()) {
        throw ParameterError("state out of range");
    }
    if (u == x) {
        return laziness_;
    }
    const Vertex diff = u ^ x;
    if (std::popcount(diff) != 1 || !(masks_[u] & diff)) {
        return 0.0;
    }
    return (1.0 - laziness_) * inv_degree_[u];
}

void ExactChain::push_forward(std::span<const double> dist, std::span<double> out) const {
    const auto n = state_count();
    const double move = 1.0 - laziness_;
    for (Vertex x = 0; x < n; ++x) {
        double acc = 0.0;
        for (std::uint32_t rest = masks_[x]; rest; rest &= rest - 1) {
            const Vertex y = x ^ (Vertex{1} << std::countr_zero(rest));
            acc += dist[y] * inv_degree_[y];
        }
        out[x] = laziness_ * dist[x] + move * acc;
    }
}

void ExactChain::apply(std::span<const double> f, std::span<double> out) const {
    const auto n = state_count();
    const double move = 1.0 - laziness_;
    for (Vertex x = 0; x < n; ++x) {
        double acc = 0.0;
        for (std::uint32_t rest = masks_[x]; rest; rest &= rest - 1) {
            acc += f[x ^ (Vertex{1} << std::countr_zero(rest))];
        }
        out[x] = laziness_ * f[x] + move * inv_degree_[x] * acc;
    }
}

ExactChain build_chain(const HypercubeSubgraph& g, double laziness) { return ExactChain(g, laziness); }

ReturnSeries return_series(const ExactChain& chain, Vertex v, std::uint64_t horizon) {
    if (horizon < 1) {
        throw ParameterError("return series horizon must be at least 1");
    }
    if (v >= chain.state_count()) {
        throw ParameterError("vertex out of range");
    }
    const auto n = chain.state_count();
    std::vector<double> dist(n, 0.0);
    std::vector<double> next(n);
    dist[v] = 1.0;
    ReturnSeries s;
    s.vertex = v;
    s.values.reserve(horizon);
    for (std::uint64_t t = 0; t < horizon; ++t) {
        s.values.push_back(dist[v]);
        if (t + 1 < horizon) {
            chain.push_forward(dist, next);
            dist.swap(next);
        }
    }
    return s;
}

double R_value(const ReturnSeries& series) {
    double sum = 0.0;
    for (double r : series.values) {
        sum += r;
    }
    return sum;
}

namespace {

std::complex<double> evaluate(std::span<const double> coeffs, std::complex<double> z) {
    std::complex<double> acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
        acc = acc * z + *it;
    }
    return acc;
}

} // namespace

CircleMinimum R_on_circle(const ReturnSeries& series, double K) {
    if (!(K > 0.0)) {
        throw ParameterError("K must be positive");
    }
    if (series.values.empty()) {
        throw ParameterError("empty return series");
    }
    const double T = static_cast<double>(series.horizon());
    const double radius = 1.0 + 1.0 / (K * T);
    const std::span<const double> coeffs(series.values);
    auto modulus_at = [&](double theta) { return std::abs(evaluate(coeffs, std::polar(radius, theta))); };

    constexpr double two_pi = 2.0 * std::numbers::pi;
    std::vector<double> grid(kCircleGrid);
    double winding = 0.0;
    std::complex<double> previous = evaluate(coeffs, radius);
    for (int j = 0; j < kCircleGrid; ++j) {
        const double theta = two_pi * j / kCircleGrid;
        const auto value = evaluate(coeffs, std::polar(radius, theta));
        grid[static_cast<std::size_t>(j)] = std::abs(value);
        if (j > 0) {
            winding += std::arg(value / previous);
        }
        previous = value;
    }
    winding += std::arg(evaluate(coeffs, radius) / previous);

    std::vector<int> order(kCircleGrid);
    for (int j = 0; j < kCircleGrid; ++j) {
        order[static_cast<std::size_t>(j)] = j;
    }
    std::partial_sort(order.begin(), order.begin() + 4, order.end(),
                      [&](int a, int b) { return grid[static_cast<std::size_t>(a)] < grid[static_cast<std::size_t>(b)]; });

    CircleMinimum best;
    best.radius = radius;
    best.min_modulus = grid[static_cast<std::size_t>(order[0])];
    best.angle = two_pi * order[0] / kCircleGrid;
    const double step = two_pi / kCircleGrid;
    const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int c = 0; c < 4; ++c) {
        double lo = two_pi * order[static_cast<std::size_t>(c)] / kCircleGrid - step;
        double hi = lo + 2.0 * step;
        double a = hi - golden * (hi - lo);
        double b = lo + golden * (hi - lo);
        double fa = modulus_at(a);
        double fb = modulus_at(b);
        for (int iter = 0; iter < 60; ++iter) {
            if (fa < fb) {
                hi = b;
                b = a;
                fb = fa;
                a = hi - golden * (hi - lo);
                fa = modulus_at(a);
            } else {
                lo = a;
                a = b;
                fa = fb;
                b = lo + golden * (hi - lo);
                fb = modulus_at(b);
            }
        }
        const double theta = 0.5 * (lo + hi);
        const double value = modulus_at(theta);
        if (value < best.min_modulus) {
            best.min_modulus = value;
            best.angle = std::remainder(theta, two_pi);
        }
    }
    best.zeros_inside = static_cast<int>(std::lround(winding / two_pi));
    return best;
}

std::optional<std::uint64_t> tv_mixing_time(const ExactChain& chain, double epsilon, std::uint64_t max_steps,
                                            Execution exec) {
    const auto n = chain.state_count();
    const auto pi = chain.stationary();
    // Row u of P^t, stored row-major.
    std::vector<double> rows(n * n, 0.0);
    std::vector<double> scratch(n * n);
    std::vector<double> row_dev(n);
    for (Vertex u = 0; u < n; ++u) {
        rows[u * n + u] = 1.0;
    }
    auto deviation = [&]() {
        for_each_index(n, exec, [&](std::uint64_t u) {
            double worst = 0.0;
            for (Vertex x = 0; x < n; ++x) {
                worst = std::max(worst, std::abs(rows[u * n + x] - pi[x]));
            }
            row_dev[u] = worst;
        });
        return *std::max_element(row_dev.begin(), row_dev.end());
    };
    if (deviation() <= epsilon) {
        return 0;
    }
    // Every instance is bipartite (parity of the label), so the simple walk never converges.
    if (chain.laziness() == 0.0) {
        return std::nullopt;
    }
    for (std::uint64_t t = 1; t <= max_steps; ++t) {
        for_each_index(n, exec, [&](std::uint64_t u) {
            chain.push_forward(std::span<const double>(rows.data() + u * n, n),
                               std::span<double>(scratch.data() + u * n, n));
        });
        rows.swap(scratch);
        if (deviation() <= epsilon) {
            return t;
        }
    }
    return std::nullopt;
}

std::vector<double> unvisited_curve(const ExactChain& chain, Vertex v, Vertex start, std::uint64_t t_max,
                                    std::uint64_t window_start) {
    const auto n = chain.state_count();
    if (v >= n || start >= n) {
        throw ParameterError("vertex out of range");
    }
    if (v == start && window_start == 0) {
        throw ParameterError("target vertex coincides with the start");
    }
    std::vector<double> dist(n, 0.0);
    std::vector<double> next(n);
    dist[start] = 1.0;
    std::vector<double> out;
    out.reserve(t_max + 1);
    out.push_back(1.0);
    for (std::uint64_t t = 1; t <= t_max; ++t) {
        chain.push_forward(dist, next);
        dist.swap(next);
        if (t >= window_start) {
            dist[v] = 0.0;
        }
        double mass = 0.0;
        for (double x : dist) {
            mass += x;
        }
        out.push_back(mass);
    }
    return out;
}

double unvisited_probability_exact(const ExactChain& chain, Vertex v, Vertex start, std::uint64_t t,
                                   std::uint64_t window_start) {
    return unvisited_curve(chain, v, start, t, window_start).back();
}

double exact_cover_time(const ExactChain& chain, Vertex start) {
    const auto n = chain.state_count();
    if (n > kMaxCoverStates) {
        throw CapacityError("exact cover time limited to 12 vertices");
    }
    if (start >= n) {
        throw ParameterError("start vertex out of range");
    }
    const std::uint32_t full = (std::uint32_t{1} << n) - 1U;
    // expected[S * n + x]: remaining steps with visited set S and walker at x in S.
    std::vector<double> expected(static_cast<std::size_t>(full + 1) * n, 0.0);

    std::vector<std::uint32_t> subsets(full);
    for (std::uint32_t s = 0; s < full; ++s) {
        subsets[s] = s + 1;
    }
    // Larger visited sets first: their values feed the smaller ones.
    std::stable_sort(subsets.begin(), subsets.end(),
                     [](std::uint32_t a, std::uint32_t b) { return std::popcount(a) > std::popcount(b); });

    for (std::uint32_t s : subsets) {
        if (s == full) {
            continue;
        }
        std::vector<Vertex> members;
        for (Vertex x = 0; x < n; ++x) {
            if (s & (1U << x)) {
                members.push_back(x);
            }
        }
        const auto k = static_cast<Eigen::Index>(members.size());
        Eigen::MatrixXd a = Eigen::MatrixXd::Identity(k, k);
        Eigen::VectorXd b = Eigen::VectorXd::Ones(k);
        for (Eigen::Index i = 0; i < k; ++i) {
            const Vertex x = members[static_cast<std::size_t>(i)];
            for (Vertex y = 0; y < n; ++y) {
                const double pxy = chain.transition(x, y);
                if (pxy == 0.0) {
                    continue;
                }
                if (s & (1U << y)) {
                    const auto j = std::find(members.begin(), members.end(), y) - members.begin();
                    a(i, j) -= pxy;
                } else {
                    b(i) += pxy * expected[static_cast<std::size_t>(s | (1U << y)) * n + y];
                }
            }
        }
        const Eigen::VectorXd solution = a.partialPivLu().solve(b);
        for (Eigen::Index i = 0; i < k; ++i) {
            expected[static_cast<std::size_t>(s) * n + members[static_cast<std::size_t>(i)]] = solution(i);
        }
    }
    return expected[static_cast<std::size_t>(1U << start) * n + start];
}

SpectralGap spectral_gap(const ExactChain& chain, double tolerance, std::uint64_t max_iterations) {
    const auto n = chain.state_count();
    const auto pi = chain.stationary();
    const bool shift = chain.laziness() < 0.5;
    std::vector<double> root_pi(n);
    for (Vertex v = 0; v < n; ++v) {
        root_pi[v] = std::sqrt(pi[v]);
    }
    SpectralGap out;
    if (n == 1) {
        out.gap = 1.0;
        return out;
    }

    // op(f) = D^{1/2} P D^{-1/2} f, optionally averaged with the identity.
    std::vector<double> scaled(n);
    std::vector<double> image(n);
    auto op = [&](const std::vector<double>& f, std::vector<double>& result) {
        for (Vertex v = 0; v < n; ++v) {
            scaled[v] = f[v] / root_pi[v];
        }
        chain.apply(scaled, image);
        for (Vertex v = 0; v < n; ++v) {
            result[v] = root_pi[v] * image[v];
            if (shift) {
                result[v] = 0.5 * (result[v] + f[v]);
            }
        }
    };
    auto deflate_normalize = [&](std::vector<double>& f) {
        double proj = 0.0;
        for (Vertex v = 0; v < n; ++v) {
            proj += f[v] * root_pi[v];
        }
        double norm = 0.0;
        for (Vertex v = 0; v < n; ++v) {
            f[v] -= proj * root_pi[v];
            norm += f[v] * f[v];
        }
        norm = std::sqrt(norm);
        for (auto& x : f) {
            x /= norm;
        }
    };

    std::vector<double> f(n);
    for (Vertex v = 0; v < n; ++v) {
        // Fixed, irregular start vector so no eigenvector is missed by symmetry.
        f[v] = std::sin(1.0 + 12.9898 * v) + 0.5 * std::cos(0.3 + 78.233 * v * v);
    }
    deflate_normalize(f);
    std::vector<double> g(n);
    double rayleigh = 0.0;
    double residual = 1.0;
    std::uint64_t it = 0;
    for (; it < max_iterations; ++it) {
        op(f, g);
        rayleigh = 0.0;
        for (Vertex v = 0; v < n; ++v) {
            rayleigh += f[v] * g[v];
        }
        double r2 = 0.0;
        for (Vertex v = 0; v < n; ++v) {
            const double diff = g[v] - rayleigh * f[v];
            r2 += diff * diff;
        }
        residual = std::sqrt(r2);
        if (residual <= tolerance) {
            break;
        }
        f.swap(g);
        deflate_normalize(f);
    }
    if (residual > tolerance) {
        throw NumericalError("spectral gap power iteration did not converge", residual);
    }
    out.lambda2 = shift ? 2.0 * rayleigh - 1.0 : rayleigh;
    out.gap = 1.0 - out.lambda2;
    out.iterations = it + 1;
    out.residual = shift ? 2.0 * residual : residual;
    return out;
}

} // namespace hcover
