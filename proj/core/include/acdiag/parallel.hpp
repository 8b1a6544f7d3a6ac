#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace acdiag::par {

inline constexpr std::size_t kChunks = 64;

/// Runs fn(chunk, begin, end) over [0, n) split into kChunks fixed ranges.
/// The chunk layout is independent of the worker count, so reductions that
/// combine per-chunk partials in chunk order are bit-reproducible for any
/// number of threads.
inline void for_chunks(std::size_t n, int threads,
                       const std::function<void(std::size_t, std::size_t,
                                                std::size_t)>& fn) {
    if (n == 0) return;
    std::size_t chunks = std::min(kChunks, n);
    auto bounds = [&](std::size_t c) {
        std::size_t b = n * c / chunks;
        std::size_t e = n * (c + 1) / chunks;
        return std::pair{b, e};
    };
    if (threads <= 1) {
        for (std::size_t c = 0; c < chunks; ++c) {
            auto [b, e] = bounds(c);
            fn(c, b, e);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t c = next.fetch_add(1);
            if (c >= chunks) return;
            auto [b, e] = bounds(c);
            fn(c, b, e);
        }
    };
    std::size_t n_workers = std::min<std::size_t>(
        static_cast<std::size_t>(threads), chunks);
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

}  // namespace acdiag::par
