#pragma once

#include <cstdint>

namespace hcover {

/// Selects the OpenMP kernel or the serial reference loop it must agree with.
enum class Execution { serial, parallel };

/// Calls fn(i) for every i in [0, count). Callers write into per-index slots,
/// so the outcome does not depend on thread count or scheduling.
template <typename Fn>
void for_each_index(std::uint64_t count, Execution exec, Fn&& fn) {
    if (exec == Execution::serial) {
        for (std::uint64_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    const auto total = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < total; ++i) {
        fn(static_cast<std::uint64_t>(i));
    }
}

} // namespace hcover
