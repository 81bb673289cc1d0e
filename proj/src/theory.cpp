#include "hcover/theory.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "hcover/error.hpp"

namespace hcover::theory {

namespace {

// x log y with the 0 log 0 = 0 convention.
double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); }

double log_choose(int d, int i) {
    return std::lgamma(d + 1.0) - std::lgamma(i + 1.0) - std::lgamma(d - i + 1.0);
}

void require_open_eps(double eps, const char* what) {
    if (!(eps > 0.0 && eps < 1.0)) {
        throw DomainError(std::string(what) + " needs 0 < eps < 1");
    }
}

} // namespace

Params Params::from_p(int d, double p) {
    if (d < 1 || d > 64) {
        throw ParameterError("dimension outside [1, 64]");
    }
    if (!(p > 0.0 && p <= 1.0)) {
        throw ParameterError("p must lie in (0, 1]");
    }
    return Params{d, p};
}

Params Params::from_eps(int d, double eps) { return from_p(d, (1.0 + eps) / 2.0); }

double Params::n() const { return std::ldexp(1.0, d); }

double solve_alpha(double p) {
    if (!(p > 0.5 && p <= 1.0)) {
        throw DomainError("alpha = log(2p / (2p - 1)) needs 1/2 < p <= 1");
    }
    return std::log(2.0 * p / (2.0 * p - 1.0));
}

double predicted_cover_time(const Params& params) {
    const double n = params.n();
    return params.p / std::numbers::ln2 * solve_alpha(params.p) * n * std::log(n);
}

double predicted_cover_time_small_eps(const Params& params) {
    const double eps = params.eps();
    if (!(eps > 0.0)) {
        throw DomainError("small-eps cover time needs eps > 0");
    }
    const double n = params.n();
    return 1.0 / (2.0 * std::numbers::ln2) * std::log(1.0 / eps) * n * std::log(n);
}

double expected_degree_count(const Params& params, int i) {
    if (i < 0 || i > params.d) {
        throw ParameterError("degree outside [0, d]");
    }
    const double q = params.q();
    if (q == 0.0) {
        return i == params.d ? params.n() : 0.0;
    }
    return params.n() * std::exp(log_choose(params.d, i) + xlogy(i, params.p) + xlogy(params.d - i, q));
}

double variance_degree_count(const Params& params, int i) {
    if (params.p <= 0.0 || params.p >= 1.0) {
        throw DomainError("degree-count variance needs 0 < p < 1");
    }
    const double ex = expected_degree_count(params, i);
    const double shift = params.d * params.p - i;
    return ex * (1.0 + ex * shift * shift / (params.n() * params.d * params.p * params.q()));
}

double variance_degree_count_exact(const Params& params, int i) {
    if (params.p <= 0.0 || params.p >= 1.0) {
        throw DomainError("degree-count variance needs 0 < p < 1");
    }
    const double ex = expected_degree_count(params, i);
    const double eta = ex / params.n();
    const double shift = params.d * params.p - i;
    return ex * (1.0 - eta) + ex * eta * shift * shift / (params.d * params.p * params.q());
}

double expected_count_deps(const Params& params) {
    const double eps = params.eps();
    require_open_eps(eps, "E X(d eps)");
    const double de = params.d * eps;
    return std::exp(de * std::log((1.0 + eps) / eps)) / std::sqrt(2.0 * std::numbers::pi * de * (1.0 - eps));
}

double survivor_prediction(const Params& params, double t) {
    if (t < 0.0) {
        throw ParameterError("time must be non-negative");
    }
    const double n = params.n();
    const double base = 1.0 - params.p + params.p * std::exp(-t / (n * params.d * params.p));
    return n * std::pow(base, params.d);
}

UpperMark upper_time_mark_with_delta(const Params& params, double delta, double nu) {
    if (delta < 0.0) {
        throw ParameterError("delta must be non-negative");
    }
    if (!(nu >= 0.0 && nu < 1.0)) {
        throw ParameterError("nu must lie in [0, 1)");
    }
    const double denom = params.p - 1.0 + std::pow(0.5, 1.0 + delta);
    if (!(denom > 0.0)) {
        throw DomainError("upper mark undefined: p - 1 + 2^{-(1 + delta)} <= 0");
    }
    UpperMark mark;
    mark.delta = delta;
    mark.alpha = std::log(params.p / denom);
    mark.t_upper = mark.alpha * params.n() * params.d * params.p / (1.0 - nu);
    return mark;
}

UpperMark upper_time_mark(const Params& params, double b, double nu) {
    if (!(b >= 1.0)) {
        throw ParameterError("b must be at least 1");
    }
    const double delta = std::log(params.d * b) / std::log(params.n());
    return upper_time_mark_with_delta(params, delta, nu);
}

LowerMark lower_time_mark(const Params& params) {
    const double eps = params.eps();
    require_open_eps(eps, "lower time mark");
    LowerMark mark;
    mark.delta = std::log(static_cast<double>(params.d)) / (params.d * eps * std::log(1.0 / eps));
    mark.t_lower = (1.0 - mark.delta) * params.n() * params.d * params.p * solve_alpha(params.p);
    return mark;
}

double degree_profile_N(const Params& params, double i) {
    const double d = params.d;
    if (!(i >= 0.0 && i <= d)) {
        throw ParameterError("degree outside [0, d]");
    }
    const double log_n = xlogy(d, d) - xlogy(i, i) - xlogy(d - i, d - i) + xlogy(i, params.p) +
                         xlogy(d - i, params.q());
    return std::exp(log_n);
}

namespace {

// tail > 0 is the degree bound d eps (1 - alpha) < d; it binds for eps > 1/2.
void require_alpha(double eps, double alpha, const char* what) {
    require_open_eps(eps, what);
    if (!(alpha > -1.0 && alpha < 1.0) || !(1.0 - eps + alpha * eps > 0.0)) {
        throw DomainError(std::string(what) + " needs -1 < alpha < 1 and alpha > 1 - 1/eps");
    }
}

} // namespace

double F_eps(double eps, double alpha) {
    require_alpha(eps, alpha, "G_eps");
    const double tail = 1.0 - eps + alpha * eps;
    return -eps * (1.0 - alpha) * std::log(1.0 - alpha) + tail * std::log((1.0 - eps) / tail);
}

double G_eps(double eps, double alpha) { return std::exp(F_eps(eps, alpha)); }

double F_eps_prime(double eps, double alpha) {
    require_alpha(eps, alpha, "F_eps'");
    return eps * std::log((1.0 - eps) * (1.0 - alpha) / (1.0 - eps + alpha * eps));
}

double F_eps_second(double eps, double alpha) {
    require_alpha(eps, alpha, "F_eps''");
    return -eps / ((1.0 - alpha) * (1.0 - eps * (1.0 - alpha)));
}

LastDegreeProfile last_degree_profile(const Params& params, double alpha) {
    const double eps = params.eps();
    LastDegreeProfile out;
    out.G = G_eps(eps, alpha);
    out.root = 0.5 * std::pow((1.0 + eps) / eps, eps * (1.0 - alpha)) * out.G;
    return out;
}

double unvisited_decay(const Params& params, int d_v, double t, double nu) {
    if (d_v < 1) {
        throw ParameterError("vertex degree must be at least 1");
    }
    if (!(nu >= 0.0 && nu <= 0.5)) {
        throw ParameterError("nu must lie in [0, 0.5]");
    }
    return std::exp(-(1.0 - nu) * d_v * t / (params.d * params.n() * params.p));
}

double critical_p(int d, double theta) {
    if (d < 2 || !(theta > 0.0)) {
        throw ParameterError("critical_p needs d >= 2 and theta > 0");
    }
    return 0.5 * (1.0 + theta * std::log(static_cast<double>(d)) / d);
}

std::vector<Prediction> prediction_table(const Params& params, double b, double nu, double theta) {
    std::vector<Prediction> rows;
    const double eps = params.eps();
    const double n = params.n();
    std::string threshold_note;
    if (eps <= 0.0) {
        threshold_note = "p <= 1/2: below the connectivity threshold";
    } else if (params.d * eps < theta * std::log(static_cast<double>(params.d))) {
        std::ostringstream note;
        note << "requires d eps >= theta log d (d eps = " << params.d * eps << ")";
        threshold_note = note.str();
    }
    rows.push_back({"n", n, "definition", ""});
    rows.push_back({"eps", eps, "p = (1 + eps) / 2", ""});
    rows.push_back({"expected_edges", params.expected_edges(), "d n p / 2", ""});
    if (params.d >= 2) {
        rows.push_back({"p_c", critical_p(params.d, theta), "p_c = (1/2)(1 + theta log d / d)", ""});
    }
    if (params.p > 0.5) {
        const double alpha = solve_alpha(params.p);
        rows.push_back({"cover_time", predicted_cover_time(params), "tcov", threshold_note});
        rows.push_back({"cover_time_ratio_to_nlogn", predicted_cover_time(params) / (n * std::log(n)), "tcov",
                        threshold_note});
        rows.push_back({"cover_time_small_eps", predicted_cover_time_small_eps(params), "tcov1/2",
                        eps > 0.1 ? "eps not small" : ""});
        rows.push_back({"alpha", alpha, "alpha = log(2p/(2p-1))", ""});
        rows.push_back({"t_star", alpha * n * params.d * params.p, "t = alpha n d p", threshold_note});
        rows.push_back({"survivor_at_t_star", survivor_prediction(params, alpha * n * params.d * params.p),
                        "E S(t) = 1", ""});
        const double b_used = b >= 1.0 ? b : static_cast<double>(params.d);
        try {
            const auto up = upper_time_mark(params, b_used, nu);
            rows.push_back({"delta_upper", up.delta, "delta = log(db)/log n", ""});
            rows.push_back({"t_upper", up.t_upper, "t_U", threshold_note});
        } catch (const DomainError& e) {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            rows.push_back({"t_upper", nan, "t_U", e.what()});
        }
    }
    if (eps > 0.0 && eps < 1.0) {
        const auto low = lower_time_mark(params);
        rows.push_back({"delta_lower", low.delta, "delta-val", low.delta >= 1.0 ? "delta >= 1: mark is vacuous" : ""});
        rows.push_back({"t_lower", low.t_lower, "t_L", low.delta >= 1.0 ? "delta >= 1: mark is vacuous" : threshold_note});
        rows.push_back({"expected_count_deps", expected_count_deps(params), "Edex",
                        eps > 0.9 ? "eps near 1: 1/sqrt(1 - eps) pole" : ""});
    }
    return rows;
}

} // namespace hcover::theory
