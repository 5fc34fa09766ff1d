// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace mmimo {

/// Environment variable holding the default worker count.
inline constexpr const char* kWorkersEnv = "MMIMO_WORKERS";

/// Worker count from MMIMO_WORKERS, else the hardware concurrency (at least 1).
unsigned default_workers();

/// Runs body(i) for i in [0, count) on up to `workers` threads. Work items must write
/// to disjoint outputs; the first exception thrown is rethrown after all threads join.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body);

}  // namespace mmimo
