#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace polyspec {

/// Worker count: an explicit request > 0 wins, then POLYSPEC_THREADS, then
/// the hardware concurrency.
int resolve_threads(int requested = 0);

/// Runs body(i) for i in [0, count) on up to `threads` workers. Exceptions
/// thrown by body are rethrown on the calling thread (first one wins).
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

/// splitmix64 step; used to derive independent substream seeds.
std::uint64_t splitmix64(std::uint64_t& state);

/// Seed of substream `index` derived from a master seed.
std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index);

}  // namespace polyspec
