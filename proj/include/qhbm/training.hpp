#pragma once

// Shared training plumbing: configuration, per-step trace records, central
// finite differences, and a generic gradient-descent driver used by the
// qubit, boson, and fermion trainers.

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace qhbm {

struct TrainConfig {
  double learning_rate = 0.05;
  int max_steps = 200;
  double epsilon_fd = 1e-4;    // central-difference step
  std::uint64_t seed = 0;      // initialization seed; the loop is deterministic
  double convergence_tol = 0.0;  // |loss delta| threshold (5-step patience)
  bool use_adam = false;       // plain GD by default, for determinism
};

// One completed training step. Metric fields are NaN when no dense target
// state was available; relative_entropy may be +infinity when the trained
// state's support exceeds the target's.
struct TrainStep {
  int step = 0;
  double loss = 0.0;
  double trace_distance = 0.0;
  double fidelity = 0.0;
  double relative_entropy = 0.0;
};

struct TrainTrace {
  std::vector<TrainStep> steps;
  bool aborted = false;        // non-finite loss or gradient encountered
  std::string abort_reason;
};

// CSV with header `step,loss,trace_distance,fidelity,relative_entropy`;
// metric fields are empty when no dense target was available.
std::string trace_to_csv(const TrainTrace& trace);

// Central-difference gradient of an arbitrary scalar loss.
Eigen::VectorXd finite_diff_grad(
    const std::function<double(const Eigen::VectorXd&)>& loss,
    const Eigen::VectorXd& params, double epsilon);

// Fills step/loss and any diagnostic metrics for the record of one step.
using MetricsFn =
    std::function<TrainStep(int step, const Eigen::VectorXd& params, double loss)>;

// Gradient descent on a flat parameter vector. Stops at max_steps or when
// |loss delta| < convergence_tol for 5 consecutive steps; aborts (with the
// offending step recorded) on a non-finite loss or gradient. `metrics` may
// be null, in which case only step and loss are recorded.
std::pair<Eigen::VectorXd, TrainTrace> descend(
    const std::function<double(const Eigen::VectorXd&)>& loss,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
    const Eigen::VectorXd& init, const TrainConfig& config,
    const MetricsFn& metrics = nullptr);

}  // namespace qhbm
