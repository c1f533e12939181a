#include "indiff/statistics.hpp"

#include <cmath>
#include <vector>

namespace indiff {
namespace {

constexpr std::size_t kLeaf = 128;

double leaf_sum(std::span<const double> v) {
  double sum = 0.0;
  double comp = 0.0;
  for (double x : v) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

}  // namespace

double stable_sum(std::span<const double> values) {
  if (values.size() <= kLeaf) return leaf_sum(values);
  const std::size_t half = values.size() / 2;
  return stable_sum(values.first(half)) + stable_sum(values.subspan(half));
}

MeanEstimate summarize(std::span<const double> values) {
  MeanEstimate est;
  est.count = values.size();
  if (values.empty()) return est;
  const double n = static_cast<double>(values.size());
  est.mean = stable_sum(values) / n;
  if (values.size() < 2) return est;
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - est.mean;
    sq[i] = d * d;
  }
  const double var = stable_sum(sq) / (n - 1.0);
  est.std_error = std::sqrt(var / n);
  return est;
}

}  // namespace indiff
