#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bidiruin {

// Sum, sum of squares and a Welford mean/M2 pair. Merged in a fixed order,
// so the result does not depend on how paths were spread over threads.
struct sample_stats {
    std::size_t n = 0;
    double sum = 0.0;
    double sum_sq = 0.0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) noexcept {
        ++n;
        sum += x;
        sum_sq += x * x;
        const double delta = x - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (x - mean);
    }

    void merge(const sample_stats& other) noexcept {
        if (other.n == 0) return;
        if (n == 0) {
            *this = other;
            return;
        }
        const double na = static_cast<double>(n);
        const double nb = static_cast<double>(other.n);
        const double delta = other.mean - mean;
        const double total = na + nb;
        mean += delta * nb / total;
        m2 += other.m2 + delta * delta * na * nb / total;
        sum += other.sum;
        sum_sq += other.sum_sq;
        n += other.n;
    }

    double average() const noexcept { return n ? sum / static_cast<double>(n) : 0.0; }

    double sample_variance() const noexcept {
        return n > 1 ? std::max(m2, 0.0) / static_cast<double>(n - 1) : 0.0;
    }

    double standard_error() const noexcept {
        return n > 1 ? std::sqrt(sample_variance() / static_cast<double>(n)) : 0.0;
    }

    // (sum x)^2 / sum x^2; equals n when all values are equal.
    double effective_sample_size() const noexcept {
        return sum_sq > 0.0 ? sum * sum / sum_sq : 0.0;
    }
};

inline unsigned resolve_workers(unsigned requested) noexcept {
    if (requested > 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

inline constexpr std::size_t kPathChunk = 256;

// Runs `body(path_index, stats)` for every path. Paths are grouped into
// fixed-size chunks, each chunk accumulates in path order and chunks are
// merged in chunk order. `body` is copied once per worker, so it may carry
// scratch buffers.
template <class PathBody>
sample_stats ordered_path_reduce(std::size_t n_paths, unsigned workers, const PathBody& body) {
    const std::size_t n_chunks = (n_paths + kPathChunk - 1) / kPathChunk;
    std::vector<sample_stats> partial(n_chunks);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto drain = [&]() {
        PathBody local = body;
        try {
            for (std::size_t chunk = next.fetch_add(1); chunk < n_chunks;
                 chunk = next.fetch_add(1)) {
                const std::size_t begin = chunk * kPathChunk;
                const std::size_t end = std::min(n_paths, begin + kPathChunk);
                sample_stats& acc = partial[chunk];
                for (std::size_t p = begin; p < end; ++p) local(p, acc);
            }
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next.store(n_chunks);
        }
    };

    const unsigned threads =
        static_cast<unsigned>(std::min<std::size_t>(resolve_workers(workers), std::max<std::size_t>(n_chunks, 1)));
    if (threads <= 1) {
        drain();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(drain);
    }
    if (failure) std::rethrow_exception(failure);

    sample_stats total;
    for (const auto& part : partial) total.merge(part);
    return total;
}

}  // namespace bidiruin
