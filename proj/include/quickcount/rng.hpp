#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

namespace quickcount {

using Rng = std::mt19937_64;

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Counter-derived seed: a pure function of (master, stream, substream).
/// Every replicate, draw, or chain gets its own generator seeded from its
/// index, so results never depend on how work is split across threads.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t substream = 0) noexcept {
  std::uint64_t s = detail::splitmix64(master);
  s = detail::splitmix64(s ^ (stream * 0xd1b54a32d192ed03ULL));
  s = detail::splitmix64(s ^ (substream * 0x8cb92ba72f3d8dd7ULL));
  return s;
}

inline Rng make_stream(std::uint64_t master, std::uint64_t stream,
                       std::uint64_t substream = 0) {
  return Rng{derive_seed(master, stream, substream)};
}

/// Open-interval uniform on (0, 1); never returns either endpoint.
inline double uniform_open(Rng& rng) {
  for (;;) {
    const double u = std::generate_canonical<double, 53>(rng);
    if (u > 0.0 && u < 1.0) return u;
  }
}

inline unsigned default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

/// Runs fn(i) for i in [0, count) over `workers` threads in contiguous
/// blocks. fn must only write to slots owned by its index.
template <class Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  const std::size_t block = (count + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = w * block;
    const std::size_t end = std::min(count, begin + block);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

/// Partial Fisher-Yates: the first k entries of `items` become a simple
/// random sample without replacement.
template <class T>
void partial_shuffle(std::vector<T>& items, std::size_t k, Rng& rng) {
  k = std::min(k, items.size());
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, items.size() - 1);
    std::swap(items[i], items[pick(rng)]);
  }
}

}  // namespace quickcount
