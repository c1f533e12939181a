#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace indiff {

/// Strictly increasing simulation times. Built uniform, then refined with
/// event times (regime switches, coefficient breakpoints) so that no step
/// straddles an event.
class TimeGrid {
 public:
  static TimeGrid uniform(double start, double end, std::size_t steps);

  /// Inserts the given points that lie strictly inside (start, end).
  /// Points closer than 1e-12 to an existing node are merged into it.
  TimeGrid with_points(std::span<const double> extra) const;

  const std::vector<double>& times() const noexcept { return times_; }
  double start() const noexcept { return times_.front(); }
  double end() const noexcept { return times_.back(); }
  std::size_t steps() const noexcept { return times_.size() - 1; }

 private:
  explicit TimeGrid(std::vector<double> times) : times_(std::move(times)) {}
  std::vector<double> times_;
};

}  // namespace indiff
