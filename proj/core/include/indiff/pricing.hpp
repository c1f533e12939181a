#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "indiff/hazard.hpp"

namespace indiff {

enum class ContractKind { PureEndowment, Portfolio, TermLife };

const char* to_string(ContractKind kind) noexcept;

/// Mortality-contingent liability written by the insurer.
struct PolicySpec {
  ContractKind kind = ContractKind::PureEndowment;
  double benefit = 1.0;  // K, paid per insured life
  unsigned cohort = 1;   // n, only used by Portfolio
  double maturity = 10.0;
  double alpha = 1.0;    // absolute risk aversion

  void validate() const;
  /// n for a portfolio, 1 otherwise.
  unsigned lives() const noexcept { return kind == ContractKind::Portfolio ? cohort : 1u; }
  /// Terminal value of the linking function, e^{n alpha K}.
  double terminal_value() const;
  /// Price on the terminal slice: n K (K for term life).
  double terminal_price() const noexcept { return benefit * static_cast<double>(lives()); }
};

/// Finite-difference grid in (t, ln lambda). The lambda axis is uniform in
/// ln lambda between lambda_min and lambda_max.
struct PdeGrid {
  std::size_t time_steps = 1000;
  std::size_t space_nodes = 2001;
  double lambda_min = 1e-4;
  double lambda_max = 1.0;
  /// Implicit-Euler sub-steps replacing the first Crank-Nicolson step.
  std::size_t rannacher_substeps = 2;
  /// Keep every k-th time level in the surface (time_steps is rounded up to
  /// a multiple of this).
  std::size_t store_every = 1;
  /// Allow one refinement of the lambda axis when the central-difference
  /// matrix loses its sign structure.
  bool auto_refine = true;
};

/// Grid covering [query_lo, query_hi] padded by `padding` on each side in
/// log space.
PdeGrid pde_grid_for(double query_lo, double query_hi, double padding = 10.0, std::size_t time_steps = 1000,
                     std::size_t space_nodes = 2001);

/// Linking function phi (or phi^(n), xi) on the stored (t, ln lambda) grid.
class PriceSurface {
 public:
  PriceSurface(PolicySpec policy, HazardModel hazard, std::vector<double> times, double log_lambda_min,
               double log_lambda_step, std::size_t space_nodes, std::vector<double> values, std::size_t refinements);

  const PolicySpec& policy() const noexcept { return policy_; }
  const HazardModel& hazard() const noexcept { return hazard_; }
  const std::vector<double>& times() const noexcept { return times_; }
  std::size_t time_levels() const noexcept { return times_.size(); }
  std::size_t space_nodes() const noexcept { return space_nodes_; }
  double log_lambda(std::size_t j) const noexcept { return log_lambda_min_ + log_lambda_step_ * static_cast<double>(j); }
  double lambda_min() const noexcept;
  double lambda_max() const noexcept;
  double node(std::size_t k, std::size_t j) const noexcept { return values_[k * space_nodes_ + j]; }
  std::size_t refinements() const noexcept { return refinements_; }
  bool contains(double t, double lambda) const noexcept;

  /// Tensor-product cubic interpolation in (t, ln lambda), limited to the
  /// range of the 4x4 stencil. Throws DomainError outside the grid.
  double value(double t, double lambda) const;

  static constexpr const char* kBoundaryNote =
      "lambda_max: Dirichlet, frozen-hazard solution; lambda_min: upwind transport with phi_xx = 0";

 private:
  PolicySpec policy_;
  HazardModel hazard_;
  std::vector<double> times_;
  double log_lambda_min_;
  double log_lambda_step_;
  std::size_t space_nodes_;
  std::vector<double> values_;
  std::size_t refinements_;
};

/// phi_t + b lambda phi_lambda + c^2 lambda^2 phi_lambdalambda / 2 - lambda (phi - 1) = 0,
/// phi(T) = e^{alpha K}: Crank-Nicolson in ln lambda with a Rannacher start.
PriceSurface solve_phi_pde(const HazardModel& hazard, const PolicySpec& policy, const PdeGrid& grid);

/// phi^(n) with source n lambda (phi^(n) - phi^(n-1)), phi^(0) = 1,
/// phi^(n)(T) = e^{n alpha K}; the chain is advanced level by level within
/// every time step.
PriceSurface solve_phi_group(const HazardModel& hazard, const PolicySpec& policy, const PdeGrid& grid);

/// xi with source -lambda (e^{alpha K} - xi) and xi(T) = e^{alpha K}. This
/// equation is solved by the constant e^{alpha K}, so the resulting price is
/// the discounted benefit K e^{-r(T-t)}.
PriceSurface solve_xi_term_life(const HazardModel& hazard, const PolicySpec& policy, const PdeGrid& grid);

/// Dispatch on policy.kind.
PriceSurface solve_surface(const HazardModel& hazard, const PolicySpec& policy, const PdeGrid& grid);

enum class Route { Pde, MonteCarlo, ClosedForm };

const char* to_string(Route route) noexcept;

struct PriceQuote {
  double price = 0.0;
  Route route = Route::Pde;
  double std_error = 0.0;
  double t = 0.0;
  double lambda = 0.0;
};

/// P = ln(phi(t, lambda)) / (alpha e^{r(T-t)}); P = n K exactly at t = T.
PriceQuote price_from_surface(const PriceSurface& surface, double t, double lambda, double r);

using McOptions = SurvivalOptions;

/// Feynman-Kac route: phi = 1 + (e^{alpha K} - 1) E[e^{-int lambda}] for a
/// pure endowment and phi^(n) = E[(1 + (e^{alpha K} - 1) e^{-int lambda})^n]
/// (conditional independence of the lives) for a portfolio. Standard errors
/// go through the logarithm by the delta method. Term life returns
/// K e^{-r(T-t)} with zero error.
PriceQuote price_feynman_kac(const HazardModel& hazard, const PolicySpec& policy, double t, double lambda, double r,
                             const McOptions& options);

/// Closed or semi-closed form, available for term life and for
/// deterministic hazards (survival by quadrature of the hazard ODE).
std::optional<PriceQuote> price_closed_form(const HazardModel& hazard, const PolicySpec& policy, double t,
                                            double lambda, double r);

struct PremiumResidual {
  double residual = 0.0;
  /// Sum of the absolute values of the individual terms.
  double scale = 0.0;
};

/// Residual of the nonlinear premium equation
///   rP = P_t + b lambda P_lambda + c^2 lambda^2 (P_lambdalambda + alpha e^{r(T-t)} P_lambda^2) / 2
///        + lambda (e^{-P alpha e^{r(T-t)}} - 1) / (alpha e^{r(T-t)})
/// at stored node (time_index, space_index), central differences on the
/// price field induced by a pure-endowment surface.
PremiumResidual premium_pde_residual(const PriceSurface& surface, double r, std::size_t time_index,
                                     std::size_t space_index);

}  // namespace indiff
