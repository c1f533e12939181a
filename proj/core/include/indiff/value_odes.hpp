#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "indiff/market.hpp"
#include "indiff/pricing.hpp"
#include "indiff/regime_chain.hpp"

namespace indiff {

struct VarphiOptions {
  std::size_t steps = 1000;
  /// Step-doubling estimate of the global error that must be met.
  double tolerance = 1e-8;
  /// How many times the step count may be doubled before StepRejected.
  std::size_t max_doublings = 8;
};

/// phi(t, i) on a uniform grid over [0, T], cubic in t between nodes.
class VarphiSolution {
 public:
  VarphiSolution(MarketParams market, double alpha, double horizon, std::vector<double> times,
                 std::vector<std::vector<double>> values, double error_estimate);

  const MarketParams& market() const noexcept { return market_; }
  double alpha() const noexcept { return alpha_; }
  double rate() const noexcept { return market_.rate(); }
  double horizon() const noexcept { return horizon_; }
  std::size_t regimes() const noexcept { return values_.front().size(); }
  std::size_t steps() const noexcept { return times_.size() - 1; }
  const std::vector<double>& times() const noexcept { return times_; }
  /// values()[k][i] = phi(t_k, i).
  const std::vector<std::vector<double>>& values() const noexcept { return values_; }
  double error_estimate() const noexcept { return error_estimate_; }

  double phi(double t, std::size_t regime) const;

 private:
  MarketParams market_;
  double alpha_;
  double horizon_;
  std::vector<double> times_;
  std::vector<std::vector<double>> values_;
  double error_estimate_;
};

/// Per-regime rate h(t, i) of dphi/dt = -A phi - h phi.
using RegimeRateFn = std::function<double(double t, std::size_t regime)>;

/// Classical RK4 backward from phi(T) = 1 with `steps` uniform steps;
/// result[k][i] at t_k = k T / steps.
std::vector<std::vector<double>> solve_backward_system(const GeneratorMatrix& gen, const RegimeRateFn& rate,
                                                       double horizon, std::size_t steps);

/// dphi_i/dt = -sum_j a_ij phi_j - phi_i inf_Pi psi_bar(t, i), phi(T, i) = 1.
/// The step count is doubled until the step-doubling estimate meets the
/// tolerance; the finer of the last two runs is kept.
VarphiSolution solve_varphi(const GeneratorMatrix& gen, const MarketParams& market, double alpha, double horizon,
                            const VarphiOptions& options = {});

/// -exp(-w alpha e^{r(T-t)}) phi(t, i).
double value_bar(const VarphiSolution& sol, double t, double w, std::size_t regime);

/// value_bar times the linking function of `surface` at (t, lambda).
double value_full(const VarphiSolution& sol, const PriceSurface& surface, double t, double w, double lambda,
                  std::size_t regime);

struct ValueFunctionBar {
  const VarphiSolution& sol;
  double operator()(double t, double w, std::size_t regime) const { return value_bar(sol, t, w, regime); }
};

struct ValueFunctionFull {
  const VarphiSolution& sol;
  const PriceSurface& surface;
  double operator()(double t, double w, double lambda, std::size_t regime) const {
    return value_full(sol, surface, t, w, lambda, regime);
  }
};

struct HjbResidual {
  double residual = 0.0;
  /// Sum of the absolute values of the generator's terms at the maximiser.
  double scale = 0.0;
  double pi_argmax = 0.0;
};

/// sup_Pi of the regime-switching jump-diffusion generator applied to
/// value_bar at (t, w, i). Derivatives are finite differences of the
/// interpolated solution and the supremum comes from Brent's method, so the
/// check does not reuse the root solver.
HjbResidual hjb_residual_bar(const VarphiSolution& sol, const GeneratorMatrix& gen, double t, double w,
                             std::size_t regime);

}  // namespace indiff
