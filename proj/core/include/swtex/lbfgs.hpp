#pragma once

#include <functional>
#include <span>
#include <vector>

namespace swtex {

struct LbfgsOptions {
  int max_iterations = 100;
  double learning_rate = 1.0;  // initial trial step once curvature history exists
  int history = 20;
  int max_line_search = 25;
  double armijo = 1e-4;
  double gradient_tolerance = 0.0;  // stop when max |g| <= tolerance
};

/// Objective whose definition may change between optimizer steps (for
/// example when random slice directions are redrawn) but is fixed within a
/// step, so the line search sees one coherent function.
class SteppedObjective {
 public:
  virtual ~SteppedObjective() = default;

  /// Called before step `iteration`. Returns true if the objective changed
  /// since the previous step.
  virtual bool begin_step(int iteration) = 0;

  /// f(x); writes the gradient into `grad`.
  virtual double evaluate(std::span<const double> x, std::span<double> grad) = 0;
};

struct LbfgsStep {
  int iteration = 0;
  double loss = 0.0;       // f at the start of the step
  double accepted = 0.0;   // f after the step (== loss when no step was taken)
  double step_size = 0.0;  // 0 when the line search failed or the gradient vanished
  int evaluations = 0;
};

struct LbfgsResult {
  std::vector<LbfgsStep> steps;
  int evaluations = 0;
  bool moved = false;  // at least one step changed x
  bool converged = false;
};

/// Limited-memory BFGS with a backtracking Armijo line search. A step is only
/// accepted if it does not increase the step's objective.
LbfgsResult minimize_lbfgs(SteppedObjective& objective, std::vector<double>& x,
                           const LbfgsOptions& options,
                           const std::function<void(const LbfgsStep&)>& on_step = {});

}  // namespace swtex
