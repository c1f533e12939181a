#pragma once

#include <cstddef>
#include <span>

namespace indiff {

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};

/// Pairwise summation with a fixed tree shape (Neumaier-compensated
/// leaves), so the result only depends on the order of `values`.
double stable_sum(std::span<const double> values);

/// Sample mean and standard error sample_std / sqrt(n), two-pass.
MeanEstimate summarize(std::span<const double> values);

}  // namespace indiff
