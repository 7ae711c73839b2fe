// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <exception>
#include <vector>

#include <omp.h>

namespace ranging {

inline int available_workers() { return omp_get_max_threads(); }

// out[i] = f(i) for i in [0, n). jobs == 1 runs a plain loop; otherwise trials are spread
// over `jobs` threads (0 = all available). Results are stored by index, so any reduction done
// afterwards in index order is independent of the thread count. The first exception (by
// index) is rethrown.
template <class Out, class F>
std::vector<Out> map_trials(int n, int jobs, F&& f) {
    std::vector<Out> out(n);
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) out[i] = f(i);
        return out;
    }
    std::vector<std::exception_ptr> errors(n);
    const int threads = jobs > 0 ? jobs : available_workers();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (int i = 0; i < n; ++i) {
        try {
            out[i] = f(i);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

}  // namespace ranging
