#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace dlab {

// Fixed-size worker set handed to the numerical modules. Work is split into
// contiguous index chunks; results must be written to per-index slots so that
// the outcome never depends on the thread count.
class Executor {
public:
    explicit Executor(unsigned threads = 1);

    unsigned threads() const noexcept { return threads_; }

    // Calls fn(begin, end) on disjoint chunks covering [0, count). At most
    // threads() chunks are created. The first exception thrown by any chunk is
    // rethrown after all workers have joined.
    void for_chunks(std::size_t count,
                    const std::function<void(std::size_t, std::size_t)>& fn) const;

    void for_each(std::size_t count, const std::function<void(std::size_t)>& fn) const;

    static const Executor& serial();

    // DLAB_THREADS if set and positive, otherwise hardware concurrency.
    static unsigned default_threads();

private:
    unsigned threads_;
};

// Pairwise (cascade) summation in a fixed tree order.
double pairwise_sum(std::span<const double> values);

}  // namespace dlab
