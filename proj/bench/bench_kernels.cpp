// Serial reference vs OpenMP kernel timings. Each pair must also agree bit-for-bit.
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>

#include "hcover/conductance.hpp"
#include "hcover/exact_chain.hpp"
#include "hcover/experiment.hpp"
#include "hcover/walk.hpp"

using namespace hcover;

namespace {

template <typename Fn>
double seconds(Fn&& fn, int repeats) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < repeats; ++i) {
        fn();
    }
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / repeats;
}

template <typename Result>
void compare(const char* name, const std::function<Result(Execution)>& kernel, int repeats) {
    Result serial_out{};
    Result parallel_out{};
    const double ts = seconds([&] { serial_out = kernel(Execution::serial); }, repeats);
    const double tp = seconds([&] { parallel_out = kernel(Execution::parallel); }, repeats);
    std::printf("%-28s serial %9.4f s   parallel %9.4f s   speedup %5.2fx   identical %s\n", name, ts, tp, ts / tp,
                serial_out == parallel_out ? "yes" : "NO");
}

} // namespace

int main() {
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
    const auto g12 = sample_connected(12, Probability::parse("0.75"), 1, 1000).graph.value();
    const auto g9 = sample_connected(9, Probability::parse("0.75"), 2, 1000).graph.value();
    const auto g4 = sample_connected(4, Probability::parse("0.8"), 3, 1000).graph.value();

    compare<std::vector<std::optional<std::uint64_t>>>(
        "cover_trials d=12 x32",
        [&](Execution e) {
            std::vector<std::optional<std::uint64_t>> out;
            for (const auto& r : cover_trials(g12, WalkConfig{0.0, Vertex{0}, std::nullopt, 9}, 32, e)) {
                out.push_back(r.cover_time);
            }
            return out;
        },
        1);
    compare<double>(
        "estimate_returns d=12",
        [&](Execution e) { return estimate_returns(g12, 0, 144, 20000, 4, 0.0, e).mean; }, 1);
    const auto chain = build_chain(g9, 0.5);
    compare<std::optional<std::uint64_t>>(
        "tv_mixing_time d=9", [&](Execution e) { return tv_mixing_time(chain, 1.0 / (512.0 * 512 * 512), 1'000'000, e); },
        1);
    compare<double>("exact_conductance d=4", [&](Execution e) { return exact_conductance(g4, e).phi; }, 20);
    compare<double>("harper_check d=4", [&](Execution e) { return harper_check(4, e).worst_slack; }, 5);
    compare<double>(
        "harper_check_sampled d=10", [&](Execution e) { return harper_check_sampled(10, 20000, 1, e).worst_slack; }, 1);
    return 0;
}
