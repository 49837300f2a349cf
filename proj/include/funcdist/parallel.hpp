#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace funcdist {

// =====================================================================
// Deterministic parallel kernels.
//
// Reductions are chunked with a FIXED chunk size, partials are produced
// per chunk (each chunk sequential) and combined in chunk order. Thread
// count only changes which thread computes a chunk, never the arithmetic
// order, so results are bit-identical for any worker count and the
// serial reference runs the very same algorithm. Several invariants
// lean on that (transfer-RMSE dominance, byte-identical reruns), so the
// kernels are correctness infrastructure, not just throughput.
// =====================================================================

inline constexpr std::size_t kReduceChunk = 2048;

namespace detail {

inline int clamp_workers(int workers) {
    if (workers < 1) workers = 1;
#ifdef _OPENMP
    return workers;
#else
    return 1;
#endif
}

}  // namespace detail

// Serial reference: identical chunked evaluation order.
template <typename Fn>
double transform_reduce_serial(std::size_t n, Fn&& fn) {
    double total = 0.0;
    for (std::size_t base = 0; base < n; base += kReduceChunk) {
        std::size_t end = base + kReduceChunk < n ? base + kReduceChunk : n;
        double partial = 0.0;
        for (std::size_t i = base; i < end; ++i) partial += fn(i);
        total += partial;
    }
    return total;
}

// Parallel version: same partials, combined in the same order.
template <typename Fn>
double transform_reduce(std::size_t n, int workers, Fn&& fn) {
    workers = detail::clamp_workers(workers);
    if (workers == 1 || n <= kReduceChunk) return transform_reduce_serial(n, fn);

    const std::size_t nchunks = (n + kReduceChunk - 1) / kReduceChunk;
    std::vector<double> partials(nchunks, 0.0);
    std::exception_ptr eptr = nullptr;

#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(workers)
#endif
    for (long long c = 0; c < static_cast<long long>(nchunks); ++c) {
        try {
            std::size_t base = static_cast<std::size_t>(c) * kReduceChunk;
            std::size_t end = base + kReduceChunk < n ? base + kReduceChunk : n;
            double partial = 0.0;
            for (std::size_t i = base; i < end; ++i) partial += fn(i);
            partials[static_cast<std::size_t>(c)] = partial;
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
            if (!eptr) eptr = std::current_exception();
        }
    }
    if (eptr) std::rethrow_exception(eptr);

    double total = 0.0;
    for (double p : partials) total += p;
    return total;
}

inline double sum_serial(const std::vector<double>& v) {
    return transform_reduce_serial(v.size(), [&](std::size_t i) { return v[i]; });
}

inline double sum(const std::vector<double>& v, int workers) {
    return transform_reduce(v.size(), workers, [&](std::size_t i) { return v[i]; });
}

// Independent jobs, each writing its own output slot; results never depend
// on scheduling. The first failing job (lowest index) wins error reporting.
template <typename Fn>
void parallel_jobs(std::size_t njobs, int workers, Fn&& fn) {
    workers = detail::clamp_workers(workers);
    if (workers == 1 || njobs <= 1) {
        for (std::size_t j = 0; j < njobs; ++j) fn(j);
        return;
    }

    std::vector<std::exception_ptr> errs(njobs, nullptr);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(workers)
#endif
    for (long long j = 0; j < static_cast<long long>(njobs); ++j) {
        try {
            fn(static_cast<std::size_t>(j));
        } catch (...) {
            errs[static_cast<std::size_t>(j)] = std::current_exception();
        }
    }
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

}  // namespace funcdist
