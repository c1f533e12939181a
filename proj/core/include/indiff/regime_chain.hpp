#pragma once

#include <cstddef>
#include <vector>

#include "indiff/random.hpp"

namespace indiff {

/// Transition-rate matrix of the continuous-time chain driving the market
/// regime. Regimes are 0-based inside the library; configuration files and
/// CLI output use 1-based labels.
///
/// Only obtainable through validate_generator, so every instance satisfies
/// a_ij >= 0 (i != j) and zero row sums to 1e-12.
class GeneratorMatrix {
 public:
  std::size_t size() const noexcept { return regimes_; }
  double rate(std::size_t from, std::size_t to) const { return rates_[from * regimes_ + to]; }
  /// -a_ii, the rate of leaving `regime`.
  double exit_rate(std::size_t regime) const { return -rate(regime, regime); }
  std::vector<std::vector<double>> rows() const;

 private:
  friend GeneratorMatrix validate_generator(const std::vector<std::vector<double>>& rates);
  GeneratorMatrix(std::vector<double> rates, std::size_t regimes) : rates_(std::move(rates)), regimes_(regimes) {}

  std::vector<double> rates_;
  std::size_t regimes_;
};

GeneratorMatrix validate_generator(const std::vector<std::vector<double>>& rates);

/// One realisation of the chain on [0, horizon]. states[k] is the regime in
/// force on [switch_times[k-1], switch_times[k]) with switch_times[-1] = 0,
/// so states.size() == switch_times.size() + 1.
struct RegimePath {
  double horizon = 0.0;
  std::vector<double> switch_times;
  std::vector<std::size_t> states;

  std::size_t initial_state() const { return states.front(); }
  /// Right-continuous: at a switch time the new regime is returned.
  std::size_t state_at(double t) const;
};

/// A path that never leaves `state`.
RegimePath constant_regime_path(std::size_t state, double horizon);

/// Competing exponential clocks: hold in i for Exp(-a_ii), then jump to j
/// with probability a_ij / (-a_ii). This has the same law as the Poisson
/// random measure construction of the chain. Absorbing states (a_ii = 0)
/// hold forever.
RegimePath sample_regime_path(const GeneratorMatrix& gen, std::size_t initial_state, double horizon,
                              Stream& stream);

/// exp(A t) by scaling and squaring of a fourth-order Taylor (RK4) step.
std::vector<std::vector<double>> transition_matrix(const GeneratorMatrix& gen, double t);

/// Distribution of X_t given X_0 = initial_state.
std::vector<double> occupancy_probabilities(const GeneratorMatrix& gen, std::size_t initial_state, double t);

/// Row vector p propagated by exp(A t).
std::vector<double> propagate(const GeneratorMatrix& gen, const std::vector<double>& p, double t);

}  // namespace indiff
