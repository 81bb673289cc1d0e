#pragma once

#include <string>
#include <vector>

namespace hcover::theory {

// Logs are natural unless the name says log2; "n log n" is always n ln n.

/// (d, p) with the derived eps = 2p - 1, q = 1 - p, n = 2^d, expected edge count d n p / 2.
struct Params {
    int d = 0;
    double p = 0.0;

    static Params from_p(int d, double p);
    static Params from_eps(int d, double eps);

    double eps() const noexcept { return 2.0 * p - 1.0; }
    double q() const noexcept { return 1.0 - p; }
    double n() const;
    double expected_edges() const { return d * n() * p / 2.0; }
};

struct Prediction {
    std::string name;
    double value = 0.0;
    std::string formula_id;
    std::string validity; // empty when every precondition holds
};

/// (p / log 2) log(2p / (2p - 1)) n log n. DomainError for p <= 1/2.
double predicted_cover_time(const Params& params);

/// Small-eps form (1 / (2 log 2)) log(1 / eps) n log n.
double predicted_cover_time_small_eps(const Params& params);

/// alpha = log(2p / (2p - 1)), the root of 1 - p + p e^{-alpha} = 1/2.
double solve_alpha(double p);

/// n C(d, i) p^i q^{d-i}, evaluated in log space.
double expected_degree_count(const Params& params, int i);

/// Closed form E X (1 + E X (dp - i)^2 / (n d p q)); DomainError for p in {0, 1}.
double variance_degree_count(const Params& params, int i);

/// Exact finite-n variance n eta (1 - eta) + n eta^2 (dp - i)^2 / (d p q), eta = C(d,i) p^i q^{d-i}.
/// Differs from variance_degree_count by n eta^2: the closed form counts vertex
/// pairs at distance >= 2 as n(n - d) where n(n - 1 - d) is exact.
double variance_degree_count_exact(const Params& params, int i);

/// (1 / sqrt(2 pi d eps (1 - eps))) ((1 + eps) / eps)^{d eps}; DomainError unless 0 < eps < 1.
double expected_count_deps(const Params& params);

/// n (1 - p + p e^{-t / (n d p)})^d.
double survivor_prediction(const Params& params, double t);

struct UpperMark {
    double delta = 0.0; // log(d b) / log n unless given explicitly
    double alpha = 0.0; // log(p / (p - 1 + 2^{-(1 + delta)}))
    double t_upper = 0.0; // alpha n d p / (1 - nu)
};

/// Upper time mark with delta = log(d b) / log n; b >= 1.
UpperMark upper_time_mark(const Params& params, double b, double nu = 0.0);
/// Upper time mark with an explicit delta (delta = 0 reduces alpha to solve_alpha(p)).
UpperMark upper_time_mark_with_delta(const Params& params, double delta, double nu = 0.0);

struct LowerMark {
    double delta = 0.0;   // log d / (d eps log(1 / eps))
    double t_lower = 0.0; // (1 - delta) n d p log(2p / (2p - 1))
};

/// DomainError unless 0 < eps < 1.
LowerMark lower_time_mark(const Params& params);

/// N(i) = d^d / (i^i (d - i)^{d - i}) (p / q)^i q^d for real i in [0, d].
double degree_profile_N(const Params& params, double i);

/// G_eps(alpha) = (1 - alpha)^{-eps (1 - alpha)} ((1 - eps) / (1 - eps + alpha eps))^{1 - eps + alpha eps}.
double G_eps(double eps, double alpha);
/// log G_eps(alpha) and its first two derivatives. Defined for alpha in (max(-1, 1 - 1/eps), 1).
double F_eps(double eps, double alpha);
double F_eps_prime(double eps, double alpha);
double F_eps_second(double eps, double alpha);

struct LastDegreeProfile {
    double root = 0.0; // N(d eps (1 - alpha))^{1/d} = (1/2) ((1 + eps) / eps)^{eps (1 - alpha)} G
    double G = 0.0;
};

/// DomainError unless eps in (0, 1) and alpha in (max(-1, 1 - 1/eps), 1).
LastDegreeProfile last_degree_profile(const Params& params, double alpha);

/// e^{-(1 - nu) d_v t / (d n p)}.
double unvisited_decay(const Params& params, int d_v, double t, double nu = 0.0);

/// Connectivity threshold (1/2)(1 + theta log d / d); theta > 0 is a free constant.
double critical_p(int d, double theta);
/// Named predictions for one (d, p) cell, in a stable order. Cells with d eps < theta log d get a validity note.
std::vector<Prediction> prediction_table(const Params& params, double b = 0.0, double nu = 0.0, double theta = 1.0);

} // namespace hcover::theory
