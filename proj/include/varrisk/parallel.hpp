#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace varrisk {

/// Worker cap from the VARRISK_THREADS environment variable; 0, unset or
/// unparsable means hardware concurrency.
inline unsigned worker_count() {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const char* env = std::getenv("VARRISK_THREADS");
    if (env == nullptr || *env == '\0') return hw;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v <= 0) return hw;
    return static_cast<unsigned>(v);
}

/// Runs fn(i) for every i in [0, count), striding trials across workers.
/// fn must only write to per-index slots; with serial_only or a single
/// worker everything runs on the calling thread. Results are indexed by
/// trial, so aggregation never depends on the schedule.
template <class Fn>
void run_trials(long count, bool serial_only, Fn&& fn) {
    if (count <= 0) return;
    unsigned workers = serial_only ? 1u : worker_count();
    workers = std::min<unsigned>(workers, static_cast<unsigned>(count));
    if (workers <= 1) {
        for (long i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (long i = w; i < count; i += workers) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace varrisk
