// SPDX-FileCopyrightText: 2026 The cloudgauge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CLOUDGAUGE_PARALLEL_HPP
#define CLOUDGAUGE_PARALLEL_HPP

#include <cstddef>
#include <exception>
#include <functional>
#include <span>

namespace cloudgauge {

/// Worker count: CLOUDGAUGE_THREADS when set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
std::size_t worker_count();

/// Overrides worker_count() for the current process; 0 restores the default.
void set_worker_count(std::size_t n);

/// Runs body(begin, end) over contiguous chunks of [0, n). Each index is
/// visited exactly once; bodies must only write to per-index outputs. The
/// first exception thrown by any chunk is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

/// Pairwise summation with a fixed tree shape, so the result depends only on
/// the values and their order.
double pairwise_sum(std::span<const double> values);

}  // namespace cloudgauge

#endif  // CLOUDGAUGE_PARALLEL_HPP
