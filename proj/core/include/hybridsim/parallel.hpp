#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace hybridsim {

/// Runs fn(i) for i in [0, count) on up to `jobs` threads. Work is assigned
/// by static index striding, so each index always lands in the same slot and
/// results are identical for any degree of parallelism. jobs == 0 means one
/// thread per available core.
inline void parallel_for_indexed(std::size_t count, unsigned jobs,
                                 const std::function<void(std::size_t)>& fn) {
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, count));
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(jobs);
    workers.reserve(jobs);
    for (unsigned w = 0; w < jobs; ++w) {
        workers.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < count; i += jobs) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : workers) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

} // namespace hybridsim
