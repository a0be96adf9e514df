#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace rfsim {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(chunk_index, begin, end) over contiguous chunks of [0, n_items).
// Chunk boundaries depend only on (n_items, n_threads); callers that keep
// per-chunk state must merge it in chunk order so results stay independent
// of scheduling.
template <typename Fn>
void parallel_for_static(std::size_t n_items, int n_threads, Fn&& fn) {
    const std::size_t n_chunks =
        std::min<std::size_t>(static_cast<std::size_t>(resolve_threads(n_threads)),
                              n_items == 0 ? 1 : n_items);
    if (n_chunks <= 1) {
        fn(std::size_t{0}, std::size_t{0}, n_items);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(n_chunks);
    const std::size_t base = n_items / n_chunks;
    const std::size_t extra = n_items % n_chunks;
    std::size_t begin = 0;
    for (std::size_t c = 0; c < n_chunks; ++c) {
        const std::size_t len = base + (c < extra ? 1 : 0);
        const std::size_t end = begin + len;
        workers.emplace_back([&fn, c, begin, end] { fn(c, begin, end); });
        begin = end;
    }
    for (auto& w : workers) w.join();
}

}  // namespace rfsim
