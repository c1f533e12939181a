#include "indiff/regime_chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "indiff/error.hpp"

namespace indiff {
namespace {

using Matrix = std::vector<double>;

Matrix multiply(const Matrix& a, const Matrix& b, std::size_t n) {
  Matrix c(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = a[i * n + k];
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) c[i * n + j] += aik * b[k * n + j];
    }
  }
  return c;
}

void check_state(const GeneratorMatrix& gen, std::size_t state) {
  if (state >= gen.size()) {
    throw Error(ErrorCode::InvalidParameter,
                "regime index " + std::to_string(state) + " out of range for " + std::to_string(gen.size()) +
                    " regimes");
  }
}

}  // namespace

std::vector<std::vector<double>> GeneratorMatrix::rows() const {
  std::vector<std::vector<double>> out(regimes_, std::vector<double>(regimes_));
  for (std::size_t i = 0; i < regimes_; ++i)
    for (std::size_t j = 0; j < regimes_; ++j) out[i][j] = rate(i, j);
  return out;
}

GeneratorMatrix validate_generator(const std::vector<std::vector<double>>& rates) {
  const std::size_t n = rates.size();
  if (n == 0) throw Error(ErrorCode::NotSquare, "generator must have at least one regime");
  std::vector<double> flat;
  flat.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rates[i].size() != n) {
      throw Error(ErrorCode::NotSquare, "row " + std::to_string(i + 1) + " has " + std::to_string(rates[i].size()) +
                                            " entries, expected " + std::to_string(n));
    }
    double row_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double a = rates[i][j];
      if (!std::isfinite(a)) {
        throw Error(ErrorCode::InvalidParameter, "non-finite rate at (" + std::to_string(i + 1) + "," +
                                                     std::to_string(j + 1) + ")");
      }
      if (i != j && a < 0.0) {
        throw Error(ErrorCode::NegativeOffDiagonal, "a_" + std::to_string(i + 1) + std::to_string(j + 1) + " = " +
                                                        std::to_string(a) + " < 0");
      }
      row_sum += a;
      flat.push_back(a);
    }
    if (std::abs(row_sum) > 1e-12) {
      throw Error(ErrorCode::RowSumNonzero,
                  "row " + std::to_string(i + 1) + " sums to " + std::to_string(row_sum));
    }
  }
  return GeneratorMatrix(std::move(flat), n);
}

std::size_t RegimePath::state_at(double t) const {
  const auto it = std::upper_bound(switch_times.begin(), switch_times.end(), t);
  return states[static_cast<std::size_t>(it - switch_times.begin())];
}

RegimePath constant_regime_path(std::size_t state, double horizon) {
  RegimePath path;
  path.horizon = horizon;
  path.states.push_back(state);
  return path;
}

RegimePath sample_regime_path(const GeneratorMatrix& gen, std::size_t initial_state, double horizon,
                              Stream& stream) {
  check_state(gen, initial_state);
  if (!(horizon > 0.0)) throw Error(ErrorCode::InvalidParameter, "horizon must be positive");
  RegimePath path = constant_regime_path(initial_state, horizon);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double t = 0.0;
  std::size_t state = initial_state;
  for (;;) {
    const double q = gen.exit_rate(state);
    if (q <= 0.0) break;
    std::exponential_distribution<double> hold(q);
    t += hold(stream);
    if (t >= horizon) break;
    // Pick the destination proportionally to a_ij.
    double u = unit(stream) * q;
    std::size_t next = state;
    for (std::size_t j = 0; j < gen.size(); ++j) {
      if (j == state) continue;
      next = j;
      u -= gen.rate(state, j);
      if (u < 0.0) break;
    }
    state = next;
    path.switch_times.push_back(t);
    path.states.push_back(state);
  }
  return path;
}

std::vector<std::vector<double>> transition_matrix(const GeneratorMatrix& gen, double t) {
  if (!(t >= 0.0)) throw Error(ErrorCode::InvalidParameter, "time must be non-negative");
  const std::size_t n = gen.size();
  double norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += std::abs(gen.rate(i, j));
    norm = std::max(norm, row);
  }
  // Scale so that ||A h|| <= 2^-10; the degree-4 Taylor remainder is then
  // below double precision.
  int squarings = 0;
  double h = t;
  while (norm * h > std::ldexp(1.0, -10) && squarings < 200) {
    h *= 0.5;
    ++squarings;
  }
  Matrix ah(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) ah[i * n + j] = gen.rate(i, j) * h;
  // I + Ah + (Ah)^2/2 + (Ah)^3/6 + (Ah)^4/24 via Horner.
  Matrix step(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) step[i * n + i] = 1.0;
  for (int k = 4; k >= 1; --k) {
    Matrix next = multiply(ah, step, n);
    for (auto& x : next) x /= static_cast<double>(k);
    for (std::size_t i = 0; i < n; ++i) next[i * n + i] += 1.0;
    step = std::move(next);
  }
  for (int s = 0; s < squarings; ++s) step = multiply(step, step, n);
  std::vector<std::vector<double>> out(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i][j] = std::max(0.0, step[i * n + j]);
  return out;
}

std::vector<double> propagate(const GeneratorMatrix& gen, const std::vector<double>& p, double t) {
  if (p.size() != gen.size()) throw Error(ErrorCode::InvalidParameter, "distribution size mismatch");
  const auto m = transition_matrix(gen, t);
  std::vector<double> out(p.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < p.size(); ++j) out[j] += p[i] * m[i][j];
  return out;
}

std::vector<double> occupancy_probabilities(const GeneratorMatrix& gen, std::size_t initial_state, double t) {
  check_state(gen, initial_state);
  std::vector<double> p(gen.size(), 0.0);
  p[initial_state] = 1.0;
  if (t == 0.0) return p;
  return propagate(gen, p, t);
}

}  // namespace indiff
