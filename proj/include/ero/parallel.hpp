#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace ero {

/// Caps the worker pool; 0 restores the runtime default.
void set_thread_count(int threads);
int thread_count();

/// Number of fixed-size blocks covering [0, n).
constexpr std::size_t block_count(std::size_t n, std::size_t block_size) {
    return (n + block_size - 1) / block_size;
}

/// Runs body(block, begin, end) over fixed-size blocks of [0, n) in parallel.
///
/// The block layout depends only on n and block_size, never on the number of
/// workers. Callers write per-block partial results into slots indexed by
/// `block` and combine them in block order afterwards, which keeps every
/// reduction bit-identical across thread counts. The first exception thrown by
/// any block is rethrown on the calling thread.
template <class Body>
void for_each_block(std::size_t n, std::size_t block_size, Body&& body) {
    const auto blocks = static_cast<std::ptrdiff_t>(block_count(n, block_size));
    std::exception_ptr failure;
    std::mutex failure_mutex;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t b = 0; b < blocks; ++b) {
        const std::size_t begin = static_cast<std::size_t>(b) * block_size;
        const std::size_t end = begin + block_size < n ? begin + block_size : n;
        try {
            body(static_cast<std::size_t>(b), begin, end);
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace ero
