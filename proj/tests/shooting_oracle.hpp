#pragma once

// Independent reference solver: integrates Ly = lambda r y as a first-order
// system with an adaptive Runge-Kutta-Fehlberg 7(8) scheme, outward from the
// basepoint in both directions.

#include <boost/numeric/odeint.hpp>
#include <complex>
#include <functional>
#include <vector>

namespace spps::test {

struct ShootingProblem {
  int n = 0;
  /// phi[j-1](x) = phi_j(x).
  std::vector<std::function<double(double)>> phi;
  std::function<double(double)> weight;
};

/// Values y(x_i) at the given ascending nodes for the initial data
/// y^(l)(x0) = init[l]; x0 must be one of the nodes.
inline std::vector<std::complex<double>> shoot(const ShootingProblem& p, std::complex<double> lambda,
                                               const std::vector<std::complex<double>>& init,
                                               const std::vector<double>& nodes, std::size_t base) {
  namespace ode = boost::numeric::odeint;
  using State = std::vector<double>;
  const auto n = static_cast<std::size_t>(p.n);

  // state = (Re y, Re y', ..., Re y^(n-1), Im y, ..., Im y^(n-1))
  auto rhs = [&](const State& s, State& ds, double x) {
    for (std::size_t l = 0; l + 1 < n; ++l) {
      ds[l] = s[l + 1];
      ds[n + l] = s[n + l + 1];
    }
    const std::complex<double> lr = lambda * p.weight(x);
    std::complex<double> top = lr * std::complex<double>(s[0], s[n]);
    for (std::size_t j = 1; j <= n; ++j)
      top -= p.phi[j - 1](x) * std::complex<double>(s[n - j], s[2 * n - j]);
    ds[n - 1] = top.real();
    ds[2 * n - 1] = top.imag();
  };

  State start(2 * n);
  for (std::size_t l = 0; l < n; ++l) {
    start[l] = init[l].real();
    start[n + l] = init[l].imag();
  }

  std::vector<std::complex<double>> out(nodes.size());
  out[base] = init[0];
  auto stepper = ode::make_controlled(1e-14, 1e-14, ode::runge_kutta_fehlberg78<State>());

  auto sweep = [&](std::vector<std::size_t> order) {
    State s = start;
    double x = nodes[base];
    for (std::size_t idx : order) {
      const double target = nodes[idx];
      const double dt = (target - x) / 4.0;
      ode::integrate_adaptive(stepper, rhs, s, x, target, dt);
      x = target;
      out[idx] = {s[0], s[n]};
    }
  };
  std::vector<std::size_t> forward, backward;
  for (std::size_t i = base + 1; i < nodes.size(); ++i) forward.push_back(i);
  for (std::size_t i = base; i-- > 0;) backward.push_back(i);
  sweep(forward);
  sweep(backward);
  return out;
}

}  // namespace spps::test
