#include "swtex/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "swtex/errors.hpp"

namespace swtex {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

struct Pair {
  std::vector<double> s;
  std::vector<double> y;
  double rho;
};

// d = -H g by the two-loop recursion.
void two_loop(const std::deque<Pair>& pairs, std::span<const double> g, std::vector<double>& d) {
  d.assign(g.begin(), g.end());
  std::vector<double> alpha(pairs.size());
  for (std::size_t k = pairs.size(); k-- > 0;) {
    alpha[k] = pairs[k].rho * dot(pairs[k].s, d);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] -= alpha[k] * pairs[k].y[i];
  }
  if (!pairs.empty()) {
    const Pair& last = pairs.back();
    const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
    for (double& v : d) v *= gamma;
  }
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const double beta = pairs[k].rho * dot(pairs[k].y, d);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += (alpha[k] - beta) * pairs[k].s[i];
  }
  for (double& v : d) v = -v;
}

void require_finite(double f, int iteration) {
  if (!std::isfinite(f)) {
    throw NumericalError("non-finite loss at optimizer iteration " + std::to_string(iteration));
  }
}

}  // namespace

LbfgsResult minimize_lbfgs(SteppedObjective& objective, std::vector<double>& x,
                           const LbfgsOptions& options,
                           const std::function<void(const LbfgsStep&)>& on_step) {
  if (options.max_iterations < 0) throw_invalid("lbfgs: negative iteration count");
  if (!(options.learning_rate > 0.0)) throw_invalid("lbfgs: learning rate must be positive");
  const std::size_t n = x.size();
  LbfgsResult result;
  std::deque<Pair> pairs;
  std::vector<double> g(n), d, trial(n), g_trial(n);

  bool have_cached = false;
  int failures = 0;
  double f_cached = 0.0;

  for (int it = 0; it < options.max_iterations; ++it) {
    LbfgsStep step;
    step.iteration = it;
    const bool changed = objective.begin_step(it);
    double f;
    if (changed || !have_cached) {
      f = objective.evaluate(x, g);
      ++step.evaluations;
    } else {
      f = f_cached;
    }
    require_finite(f, it);
    step.loss = f;
    step.accepted = f;

    double gmax = 0.0;
    for (double v : g) gmax = std::max(gmax, std::abs(v));
    if (gmax <= options.gradient_tolerance) {
      result.converged = true;
      result.evaluations += step.evaluations;
      result.steps.push_back(step);
      if (on_step) on_step(step);
      break;
    }

    two_loop(pairs, g, d);
    double gd = dot(g, d);
    if (!(gd < 0.0)) {
      pairs.clear();
      d.assign(g.begin(), g.end());
      for (double& v : d) v = -v;
      gd = -dot(g, g);
    }
    double t = options.learning_rate;
    if (pairs.empty()) {
      double l1 = 0.0;
      for (double v : g) l1 += std::abs(v);
      t = std::min(1.0, 1.0 / l1) * options.learning_rate;
    }

    bool accepted = false;
    double f_trial = f;
    for (int ls = 0; ls < options.max_line_search; ++ls) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] + t * d[i];
      f_trial = objective.evaluate(trial, g_trial);
      ++step.evaluations;
      if (std::isfinite(f_trial) && f_trial <= f + options.armijo * t * gd) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }

    if (accepted) {
      Pair p{std::vector<double>(n), std::vector<double>(n), 0.0};
      for (std::size_t i = 0; i < n; ++i) {
        p.s[i] = trial[i] - x[i];
        p.y[i] = g_trial[i] - g[i];
      }
      const double ys = dot(p.y, p.s);
      if (ys > 1e-10) {
        p.rho = 1.0 / ys;
        pairs.push_back(std::move(p));
        if (static_cast<int>(pairs.size()) > options.history) pairs.pop_front();
      }
      x.swap(trial);
      g.swap(g_trial);
      f_cached = f_trial;
      have_cached = true;
      result.moved = true;
      step.accepted = f_trial;
      step.step_size = t;
    } else {
      // Keep x; the next step either redraws the objective or restarts from
      // steepest descent.
      pairs.clear();
      f_cached = f;
      have_cached = true;
    }
    result.evaluations += step.evaluations;
    result.steps.push_back(step);
    if (on_step) on_step(step);
    failures = accepted ? 0 : failures + 1;
    // On a fixed objective, two failed searches in a row (the second from
    // steepest descent) mean no further progress is possible.
    if (failures >= 2 && !changed) break;
  }
  return result;
}

}  // namespace swtex
