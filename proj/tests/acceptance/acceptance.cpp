#include <indiff/error.hpp>
#include <indiff/hazard.hpp>
#include <indiff/market.hpp>
#include <indiff/pricing.hpp>
#include <indiff/regime_chain.hpp>
#include <indiff/strategy.hpp>
#include <indiff/value_odes.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"

using namespace indiff;
namespace fs = std::filesystem;

namespace {

const RegimeCoefficients kGood{0.15, 0.15, 0.15, 0.3};
const RegimeCoefficients kBad{0.12, 0.25, 0.1, 0.35};
const std::vector<std::vector<double>> kGenerator{{-0.2, 0.2}, {0.1, -0.1}};
constexpr double kRate = 0.05;

MarketParams reference_market(double theta_up = 0.3, double theta_down = 0.4) {
  return MarketParams::constant(kRate, {kGood, kBad}, theta_up, theta_down);
}

PolicySpec endowment(double benefit = 1.0, double alpha = 1.0, double maturity = 10.0) {
  PolicySpec p;
  p.benefit = benefit;
  p.alpha = alpha;
  p.maturity = maturity;
  return p;
}

PolicySpec portfolio(unsigned lives) {
  PolicySpec p = endowment();
  p.kind = ContractKind::Portfolio;
  p.cohort = lives;
  return p;
}

HazardModel gompertz() { return gompertz_as_general(GompertzParams{}); }

McOptions mc_options(std::size_t paths, std::uint64_t seed = 20240607) {
  McOptions o;
  o.paths = paths;
  o.time_step = 0.01;
  o.rng.master_seed = seed;
  return o;
}

/// Collects failures for one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    ++count_;
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    failed_ += !ok;
  }
  bool ok() const noexcept { return failed_ == 0; }
  std::string report() const {
    std::ostringstream os;
    os << count_ << " checks";
    if (failed_) os << ", " << failed_ << " failed";
    for (const auto& f : failures_) os << "\n    " << f;
    return os.str();
  }
  std::ostringstream note;

 private:
  std::size_t count_ = 0;
  std::size_t failed_ = 0;
  std::vector<std::string> failures_;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

void ac1(Check& c) {
  const auto m = reference_market(0.0, 0.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> t_dist(0.0, 10.0), a_dist(0.1, 5.0);
  double worst = 0.0;
  for (int q = 0; q < 100; ++q) {
    const double t = t_dist(rng), alpha = a_dist(rng);
    const std::size_t i = static_cast<std::size_t>(q % 2);
    const auto& rc = i == 0 ? kGood : kBad;
    const double merton = (rc.mu - kRate) / (alpha * rc.sigma * rc.sigma * std::exp(kRate * (10.0 - t)));
    const double err = std::abs(solve_pi_star(StrategyQuery{m, t, i, alpha, 10.0}).pi_star - merton);
    worst = std::max(worst, err);
    c.expect(err <= 1e-12, fmt("t=%.3f alpha=%.3f err=%.3e", t, alpha, err));
  }
  c.note << "max |err| " << worst;
}

void ac2(Check& c) {
  const auto m = reference_market();
  double worst = 0.0;
  for (std::size_t i : {0u, 1u}) {
    const auto& rc = i == 0 ? kGood : kBad;
    for (double alpha : {0.5, 1.0, 2.0}) {
      for (double t : {0.0, 5.0, 9.9}) {
        const StrategyQuery q{m, t, i, alpha, 10.0};
        const auto s = solve_pi_star(q);
        const double a = alpha * std::exp(kRate * (10.0 - t));
        const double ref =
            static_cast<double>(oracle::pi_star({rc.mu, rc.sigma, rc.jump_up, rc.jump_down, 0.3, 0.4, kRate}, a));
        const double err = std::abs(s.pi_star - ref);
        worst = std::max(worst, err);
        const auto [lo, hi] = strategy_bounds(q);
        c.expect(err <= 1e-9, fmt("regime %.0f alpha=%.1f t=%.1f err=%.3e", double(i), alpha, t, err));
        c.expect(lo <= s.pi_star && s.pi_star <= hi && !s.widened,
                 fmt("root %.6f outside [%.6f, %.6f] at t=%.1f", s.pi_star, lo, hi, t));
      }
    }
  }
  c.note << "max |err| vs bisection " << worst;
}

void ac3(Check& c) {
  const double exact = std::log(1.0 + (std::exp(1.0) - 1.0) * std::exp(-0.2)) / std::exp(0.5);
  const auto h = HazardModel::constant(0.02);
  const auto surface = solve_phi_pde(h, endowment(), pde_grid_for(0.02, 0.02, 10.0, 1000, 401));
  const double pde = price_from_surface(surface, 0.0, 0.02, kRate).price;
  const auto mc = price_feynman_kac(h, endowment(), 0.0, 0.02, kRate, mc_options(100000));
  c.expect(std::abs(pde - exact) <= 1e-5, fmt("PDE err %.3e", pde - exact));
  c.expect(std::abs(mc.price - exact) <= std::max(3.0 * mc.std_error, 1e-12),
           fmt("MC err %.3e se %.3e", mc.price - exact, mc.std_error));
  c.note << "PDE err " << pde - exact << ", MC err " << mc.price - exact << " (se " << mc.std_error << ")";
}

void ac4(Check& c) {
  const auto h = gompertz();
  const auto surface = solve_phi_pde(h, endowment(), pde_grid_for(0.005, 0.03, 10.0, 1000, 2001));
  double worst_z = 0.0;
  for (double t : {0.0, 3.0, 6.0}) {
    for (double l : {0.005, 0.01, 0.03}) {
      const double pde = price_from_surface(surface, t, l, kRate).price;
      const auto mc = price_feynman_kac(h, endowment(), t, l, kRate, mc_options(50000));
      const double z = std::abs(pde - mc.price) / mc.std_error;
      worst_z = std::max(worst_z, z);
      c.expect(z <= 3.0, fmt("t=%.1f lambda=%.3f PDE %.8f MC %.8f", t, l, pde, mc.price));
    }
  }
  std::vector<double> p;
  for (std::size_t level : {1u, 2u, 4u}) {
    PdeGrid g = pde_grid_for(0.01, 0.01, 10.0, 40 * level, 600 * level + 1);
    g.store_every = level;
    p.push_back(price_from_surface(solve_phi_pde(h, endowment(), g), 0.0, 0.01, kRate).price);
  }
  const double order = std::log2((p[0] - p[1]) / (p[1] - p[2]));
  c.expect(order >= 1.8, fmt("observed order %.3f", order));
  c.note << "max |z| " << worst_z << ", observed order " << order;
}

void ac5(Check& c) {
  std::mt19937_64 rng(5);
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  std::size_t refined = 0;
  double worst_excess = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    GompertzParams gp;
    gp.lambda0 = std::exp(uni(std::log(0.002), std::log(0.08)));
    gp.c1 = uni(0.0, 0.12);
    gp.c2 = trial % 10 == 0 ? 0.0 : uni(0.05, 0.3);
    gp.mean_reversion = uni(0.0, 1.0);
    PolicySpec p = endowment(uni(0.0, 3.0), uni(0.2, 2.0), uni(1.0, 20.0));
    const int kind = trial % 3;
    if (kind == 1) {
      p.kind = ContractKind::Portfolio;
      p.cohort = 1 + static_cast<unsigned>(trial % 4);
    } else if (kind == 2) {
      p.kind = ContractKind::TermLife;
    }
    const double r = uni(0.0, 0.1);
    const HazardModel h = trial % 7 == 0 ? HazardModel::constant(gp.lambda0) : gompertz_as_general(gp);
    try {
      const auto s = solve_surface(h, p, pde_grid_for(gp.lambda0, gp.lambda0, 10.0, 100, 201));
      refined += s.refinements();
      const double top = p.terminal_value();
      for (std::size_t k = 0; k < s.time_levels(); ++k) {
        for (std::size_t j = 0; j < s.space_nodes(); ++j) {
          const double v = s.node(k, j);
          const double excess = std::max(1.0 - v, v - top) / top;
          worst_excess = std::max(worst_excess, excess);
          if (excess > 1e-12) {
            c.expect(false, fmt("trial %.0f: phi=%.15g outside [1, %.15g]", trial, v, top));
            k = s.time_levels() - 1;
            break;
          }
        }
      }
      for (double frac : {0.0, 0.3, 0.77}) {
        const double t = frac * p.maturity;
        for (double l : {gp.lambda0, 2.0 * gp.lambda0}) {
          const double price = price_from_surface(s, t, l, r).price;
          const double cap = p.terminal_price() * std::exp(-r * (p.maturity - t));
          c.expect(price >= 0.0 && price <= cap * (1.0 + 1e-12),
                   fmt("trial %.0f: P=%.15g outside [0, %.15g]", trial, price, cap));
        }
      }
      c.expect(price_from_surface(s, p.maturity, gp.lambda0, r).price == p.terminal_price(),
               fmt("trial %.0f: terminal price differs from nK", trial));
    } catch (const Error& e) {
      c.expect(false, fmt("trial %.0f: ", trial) + e.what());
    }
  }
  c.note << "max relative excess " << worst_excess << ", refined grids " << refined;
}

void ac6(Check& c) {
  const auto flat = HazardModel::constant(0.03);
  double worst = 0.0, worst_z = 0.0;
  for (unsigned n : {1u, 2u, 5u}) {
    const auto s = solve_phi_group(flat, portfolio(n), pde_grid_for(0.03, 0.03, 10.0, 1000, 401));
    for (double t : {0.0, 5.0}) {
      const double tau = 10.0 - t;
      const double exact =
          std::log(oracle::binomial_linking(std::exp(-0.03 * tau), 1.0, 1.0, n)) / std::exp(kRate * tau);
      const double err = std::abs(price_from_surface(s, t, 0.03, kRate).price - exact);
      worst = std::max(worst, err);
      c.expect(err <= 1e-6, fmt("constant hazard n=%.0f t=%.0f err=%.3e", n, t, err));
    }
    const auto g = solve_phi_group(gompertz(), portfolio(n), pde_grid_for(0.01, 0.01, 10.0, 1000, 2001));
    const double pde = price_from_surface(g, 0.0, 0.01, kRate).price;
    const auto mc = price_feynman_kac(gompertz(), portfolio(n), 0.0, 0.01, kRate, mc_options(50000));
    const double z = std::abs(pde - mc.price) / mc.std_error;
    worst_z = std::max(worst_z, z);
    c.expect(z <= 3.0, fmt("Gompertz n=%.0f PDE %.8f MC %.8f se %.2e", n, pde, mc.price, mc.std_error));
  }
  c.note << "max closed-form err " << worst << ", max |z| " << worst_z;
}

void ac7(Check& c) {
  const auto h = gompertz();
  PolicySpec p = endowment(1.3, 0.7);
  p.kind = ContractKind::TermLife;
  const auto s = solve_xi_term_life(h, p, pde_grid_for(0.01, 0.01, 10.0, 500, 1001));
  const double target = std::exp(0.7 * 1.3);
  double worst = 0.0;
  const auto& times = s.times();
  for (std::size_t k = 0; k + 1 < s.time_levels(); ++k) {
    const double dt = times[k + 1] - times[k];
    for (std::size_t j = 1; j + 1 < s.space_nodes(); ++j) {
      const double dx = s.log_lambda(j + 1) - s.log_lambda(j);
      const double l = std::exp(s.log_lambda(j));
      const double b = h.drift(times[k], l), vol = h.volatility(times[k], l);
      const double xt = (s.node(k + 1, j) - s.node(k, j)) / dt;
      const double xx = (s.node(k, j + 1) - s.node(k, j - 1)) / (2.0 * dx);
      const double xxx = (s.node(k, j + 1) - 2.0 * s.node(k, j) + s.node(k, j - 1)) / (dx * dx);
      const double res = xt + (b - 0.5 * vol * vol) * xx + 0.5 * vol * vol * xxx - l * (target - s.node(k, j));
      worst = std::max({worst, std::abs(res), std::abs(s.node(k, j) - target)});
    }
  }
  c.expect(worst <= 1e-10, fmt("xi residual %.3e", worst));
  double worst_price = 0.0;
  for (double t : {0.0, 2.5, 7.0, 10.0}) {
    for (double l : {0.002, 0.01, 0.05}) {
      const double exact = 1.3 * std::exp(-kRate * (10.0 - t));
      for (const auto& q : {price_from_surface(s, t, l, kRate), price_feynman_kac(h, p, t, l, kRate, mc_options(10)),
                            *price_closed_form(h, p, t, l, kRate)}) {
        const double err = std::abs(q.price - exact);
        worst_price = std::max(worst_price, err);
        c.expect(err <= 1e-10 && q.std_error == 0.0, std::string(to_string(q.route)) + fmt(" price err %.3e", err));
      }
    }
  }
  c.note << "max residual " << worst << ", max price err " << worst_price;
}

void ac8(Check& c) {
  const auto base = gompertz();
  const auto opts = mc_options(20000, 77);
  std::vector<double> by_lambda;
  for (double l : {0.002, 0.005, 0.0075, 0.01, 0.015, 0.02, 0.03, 0.045, 0.06, 0.08}) {
    const auto h = base.with_initial(l);
    by_lambda.push_back(price_feynman_kac(h, endowment(), 0.0, l, kRate, opts).price);
  }
  for (std::size_t k = 1; k < by_lambda.size(); ++k)
    c.expect(by_lambda[k] < by_lambda[k - 1], fmt("lambda0 step %.0f: %.8f !< %.8f", k, by_lambda[k], by_lambda[k - 1]));

  std::vector<double> by_alpha, by_rate, by_time;
  for (double a : {0.25, 0.5, 1.0, 2.0, 4.0})
    by_alpha.push_back(price_feynman_kac(base, endowment(1.0, a), 0.0, 0.01, kRate, opts).price);
  for (double r : {0.0, 0.02, 0.05, 0.08, 0.12})
    by_rate.push_back(price_feynman_kac(base, endowment(), 0.0, 0.01, r, opts).price);
  for (double t : {0.0, 2.5, 5.0, 7.5, 9.0, 10.0})
    by_time.push_back(price_feynman_kac(base, endowment(), t, 0.01, kRate, opts).price);
  for (std::size_t k = 1; k < by_alpha.size(); ++k)
    c.expect(by_alpha[k] > by_alpha[k - 1], fmt("alpha step %.0f: %.8f !> %.8f", k, by_alpha[k], by_alpha[k - 1]));
  for (std::size_t k = 1; k < by_rate.size(); ++k)
    c.expect(by_rate[k] < by_rate[k - 1], fmt("r step %.0f: %.8f !< %.8f", k, by_rate[k], by_rate[k - 1]));
  for (std::size_t k = 1; k < by_time.size(); ++k)
    c.expect(by_time[k] > by_time[k - 1], fmt("t step %.0f: %.8f !> %.8f", k, by_time[k], by_time[k - 1]));
  c.note << "P(lambda0) " << by_lambda.front() << " .. " << by_lambda.back() << ", P(alpha) " << by_alpha.front()
         << " .. " << by_alpha.back() << ", P(t) " << by_time.front() << " .. " << by_time.back();
}

double oracle_rate(std::size_t i, double alpha, double t) {
  const auto& rc = i == 0 ? kGood : kBad;
  return static_cast<double>(oracle::inf_psi({rc.mu, rc.sigma, rc.jump_up, rc.jump_down, 0.3, 0.4, kRate},
                                             alpha * std::exp(kRate * (10.0 - t))));
}

void ac9(Check& c) {
  const auto scalar_market = MarketParams::constant(kRate, {kGood}, 0.3, 0.4);
  const auto scalar = solve_varphi(validate_generator({{0.0}}), scalar_market, 1.0, 10.0);
  double worst_scalar = 0.0;
  for (double t : {0.0, 3.0, 8.0}) {
    const double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [](double s) { return oracle_rate(0, 1.0, s); }, t, 10.0, 12, 1e-13);
    const double err = std::abs(scalar.phi(t, 0) - std::exp(integral));
    worst_scalar = std::max(worst_scalar, err);
    c.expect(err <= 1e-6, fmt("scalar t=%.1f err=%.3e", t, err));
  }

  const auto gen = validate_generator(kGenerator);
  const auto sol = solve_varphi(gen, reference_market(), 1.0, 10.0);
  const auto euler =
      oracle::euler_backward(kGenerator, [](double t, std::size_t i) { return oracle_rate(i, 1.0, t); }, 10.0, 1000000);
  double worst_pair = 0.0;
  for (std::size_t i : {0u, 1u}) {
    const double err = std::abs(sol.phi(0.0, i) - euler[i]);
    worst_pair = std::max(worst_pair, err);
    c.expect(err <= 1e-5, fmt("regime %.0f: RK4 %.10f Euler %.10f", i, sol.phi(0.0, i), euler[i]));
  }

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> t_dist(0.1, 9.9), w_dist(-2.0, 5.0);
  double worst_ratio = 0.0;
  for (int q = 0; q < 100; ++q) {
    const double t = t_dist(rng), w = w_dist(rng);
    const std::size_t i = static_cast<std::size_t>(q % 2);
    const auto h = hjb_residual_bar(sol, gen, t, w, i);
    const double ratio = std::abs(h.residual) / h.scale;
    worst_ratio = std::max(worst_ratio, ratio);
    c.expect(ratio < 1e-5, fmt("t=%.3f w=%.3f residual %.3e scale %.3e", t, w, h.residual, h.scale));
  }
  c.note << "scalar err " << worst_scalar << ", Euler err " << worst_pair << ", max residual/scale " << worst_ratio;
}

#ifdef INDIFF_CLI_PATH
int run_cli(const std::string& args) {
  const std::string cmd = std::string(INDIFF_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}
#endif

void ac10(Check& c) {
#ifdef INDIFF_CLI_PATH
  const fs::path root = fs::temp_directory_path() / ("indiff_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const std::string common =
      " --set numerics.paths=64 --set numerics.steps=500 --set numerics.pde_time_steps=200"
      " --set numerics.pde_space_nodes=801 --set numerics.seed=4242";
  std::size_t compared = 0;
  for (const std::string command : {"simulate", "strategy", "value", "price", "sensitivity"}) {
    std::vector<fs::path> dirs;
    for (int threads : {1, 4, 8}) {
      const fs::path dir = root / (command + "_" + std::to_string(threads));
      const int code = run_cli("-o " + dir.string() + " -t " + std::to_string(threads) + common + " " + command);
      c.expect(code == 0, command + " exited with " + std::to_string(code));
      dirs.push_back(dir);
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dirs[0]))
      if (e.path().extension() == ".csv") files.push_back(e.path().filename());
    c.expect(!files.empty(), command + " wrote no CSV files");
    for (const auto& f : files) {
      const std::string ref = slurp(dirs[0] / f);
      for (std::size_t d = 1; d < dirs.size(); ++d) {
        ++compared;
        c.expect(fs::exists(dirs[d] / f) && slurp(dirs[d] / f) == ref,
                 command + "/" + f.string() + " differs at " + dirs[d].filename().string());
      }
    }
  }
  fs::remove_all(root);
  c.note << compared << " CSV comparisons";
#else
  c.expect(false, "CLI was not built");
#endif
}

struct Criterion {
  const char* id;
  const char* title;
  double budget_seconds;
  std::function<void(Check&)> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"AC1", "Merton degeneration", 1.0, ac1},
      {"AC2", "root certification", 1.0, ac2},
      {"AC3", "constant-hazard closed form", 30.0, ac3},
      {"AC4", "PDE vs Monte Carlo, Gompertz", 120.0, ac4},
      {"AC5", "price bounds and terminal condition", 60.0, ac5},
      {"AC6", "portfolio oracle", 120.0, ac6},
      {"AC7", "term-life constant solution", 5.0, ac7},
      {"AC8", "monotonicity under common random numbers", 180.0, ac8},
      {"AC9", "phi ODE verification", 60.0, ac9},
      {"AC10", "thread-count reproducibility", 120.0, ac10},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      cr.run(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    check.expect(seconds < cr.budget_seconds, fmt("runtime %.2f s over budget %.0f s", seconds, cr.budget_seconds));
    failed += !check.ok();
    std::printf("%-4s %s  %s (%.2f s): %s\n", cr.id, check.ok() ? "PASS" : "FAIL", cr.title, seconds,
                check.report().c_str());
    std::printf("     %s\n", check.note.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
