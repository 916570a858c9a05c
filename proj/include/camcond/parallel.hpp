// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace camcond {

/// Process-wide worker count for parallel_for. 0 = hardware concurrency.
void set_thread_count(int threads);
int thread_count();

/// Runs fn(i) for i in [0, n). Work items must write to disjoint output
/// slots; results are then identical for any worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace camcond
