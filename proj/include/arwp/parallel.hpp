#pragma once

#include <Eigen/Core>

#include <functional>

namespace arwp {

// Worker count for data-parallel loops. 0 means hardware concurrency.
void set_thread_count(int n);
int thread_count();

// Calls f(i) for i in [0, n). Each index is handled exactly once; f must only
// write state owned by index i, which keeps results independent of scheduling.
void parallel_for(Eigen::Index n, const std::function<void(Eigen::Index)>& f);

}  // namespace arwp
