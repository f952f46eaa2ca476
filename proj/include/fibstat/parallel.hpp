#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace fibstat {

/// Runs `work(slab, acc)` for every slab in [0, nslabs) on `threads` workers.
/// Each slab fills its own accumulator; accumulators are merged in slab order,
/// so the result never depends on the thread count.
template <class Acc, class Make, class Work>
Acc parallel_slabs(std::size_t nslabs, unsigned threads, Make make, Work work)
{
    std::vector<std::optional<Acc>> partial(nslabs);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t slab = next.fetch_add(1);
            if (slab >= nslabs) return;
            try {
                Acc acc = make();
                work(slab, acc);
                partial[slab].emplace(std::move(acc));
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(nslabs);
                return;
            }
        }
    };

    threads = std::max(1u, threads);
    if (threads == 1 || nslabs <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        const unsigned n = static_cast<unsigned>(std::min<std::size_t>(threads, nslabs));
        for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);

    Acc total = make();
    for (auto& p : partial) {
        if (p) total.merge(std::move(*p));
    }
    return total;
}

}  // namespace fibstat
