#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace mjls {

/// Worker cap used by every parallel map in the library. Zero means "not set":
/// fall back to MJLS_STAB_THREADS, then to the hardware concurrency.
void set_thread_limit(std::size_t threads) noexcept;
[[nodiscard]] std::size_t thread_limit() noexcept;

/// Calls `fn(i)` for i in [0, count) on up to thread_limit() workers. Indices
/// are handed out in contiguous chunks; the first exception thrown by any
/// task is rethrown after all workers joined.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

/// Ordered map: result[i] = fn(i).
template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t count, Fn&& fn) {
    std::vector<T> out(count);
    parallel_for(count, [&](std::size_t i) { out[i] = fn(i); });
    return out;
}

}  // namespace mjls
