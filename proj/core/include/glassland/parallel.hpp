#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace glassland {

// Worker count used by parallel_for. Defaults to hardware concurrency.
void set_thread_count(int n);
int thread_count();

// Runs body(i) for i in [0, n). Tasks must not depend on execution order;
// callers derive any randomness from the task index.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace glassland
