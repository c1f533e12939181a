#include "indiff/time_grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "indiff/error.hpp"

namespace indiff {

TimeGrid TimeGrid::uniform(double start, double end, std::size_t steps) {
  if (!(end > start) || steps == 0) {
    throw Error(ErrorCode::InvalidParameter,
                "time grid needs end > start and at least one step (got [" + std::to_string(start) + ", " +
                    std::to_string(end) + "], " + std::to_string(steps) + " steps)");
  }
  std::vector<double> t(steps + 1);
  const double h = (end - start) / static_cast<double>(steps);
  for (std::size_t k = 0; k <= steps; ++k) t[k] = start + h * static_cast<double>(k);
  t.back() = end;
  return TimeGrid(std::move(t));
}

TimeGrid TimeGrid::with_points(std::span<const double> extra) const {
  constexpr double merge_tol = 1e-12;
  std::vector<double> merged = times_;
  for (double p : extra) {
    if (p > start() + merge_tol && p < end() - merge_tol) merged.push_back(p);
  }
  std::sort(merged.begin(), merged.end());
  std::vector<double> out;
  out.reserve(merged.size());
  for (double p : merged) {
    if (out.empty() || p - out.back() > merge_tol) out.push_back(p);
  }
  out.back() = end();
  return TimeGrid(std::move(out));
}

}  // namespace indiff
