#include "qhbm/training.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace qhbm {

namespace {

constexpr int kPatience = 5;  // consecutive small-delta steps before stopping
const double kNan = std::numeric_limits<double>::quiet_NaN();

std::string format_metric(double value) {
  if (std::isnan(value)) {
    return "";
  }
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  int t = 0;
};

Eigen::VectorXd adam_update(AdamState& state, const Eigen::VectorXd& grad,
                            double learning_rate) {
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  if (state.t == 0) {
    state.m = Eigen::VectorXd::Zero(grad.size());
    state.v = Eigen::VectorXd::Zero(grad.size());
  }
  ++state.t;
  state.m = beta1 * state.m + (1.0 - beta1) * grad;
  state.v = beta2 * state.v +
            (1.0 - beta2) * grad.array().square().matrix();
  double correction = std::sqrt(1.0 - std::pow(beta2, state.t)) /
                      (1.0 - std::pow(beta1, state.t));
  return learning_rate * correction *
         (state.m.array() / (state.v.array().sqrt() + eps)).matrix();
}

}  // namespace

std::string trace_to_csv(const TrainTrace& trace) {
  std::string csv = "step,loss,trace_distance,fidelity,relative_entropy\n";
  char buffer[64];
  for (const TrainStep& record : trace.steps) {
    std::snprintf(buffer, sizeof(buffer), "%d,%.17g,", record.step, record.loss);
    csv += buffer;
    csv += format_metric(record.trace_distance);
    csv += ',';
    csv += format_metric(record.fidelity);
    csv += ',';
    csv += format_metric(record.relative_entropy);
    csv += '\n';
  }
  return csv;
}

Eigen::VectorXd finite_diff_grad(
    const std::function<double(const Eigen::VectorXd&)>& loss,
    const Eigen::VectorXd& params, double epsilon) {
  if (epsilon <= 0.0) {
    throw std::invalid_argument("finite_diff_grad requires epsilon > 0");
  }
  Eigen::VectorXd grad(params.size());
  Eigen::VectorXd probe = params;
  for (Eigen::Index k = 0; k < params.size(); ++k) {
    probe[k] = params[k] + epsilon;
    double up = loss(probe);
    probe[k] = params[k] - epsilon;
    double down = loss(probe);
    probe[k] = params[k];
    grad[k] = (up - down) / (2.0 * epsilon);
  }
  return grad;
}

std::pair<Eigen::VectorXd, TrainTrace> descend(
    const std::function<double(const Eigen::VectorXd&)>& loss,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
    const Eigen::VectorXd& init, const TrainConfig& config,
    const MetricsFn& metrics) {
  if (config.learning_rate <= 0.0) {
    throw std::invalid_argument("train requires learning_rate > 0");
  }
  if (config.max_steps < 1) {
    throw std::invalid_argument("train requires max_steps >= 1");
  }

  Eigen::VectorXd current = init;
  TrainTrace trace;
  trace.steps.reserve(static_cast<std::size_t>(config.max_steps));
  AdamState adam;
  double previous_loss = kNan;
  int quiet_steps = 0;

  for (int step = 1; step <= config.max_steps; ++step) {
    double value = loss(current);
    Eigen::VectorXd gradient = grad(current);

    TrainStep record;
    if (metrics) {
      record = metrics(step, current, value);
    }
    record.step = step;
    record.loss = value;
    if (!metrics) {
      record.trace_distance = kNan;
      record.fidelity = kNan;
      record.relative_entropy = kNan;
    }
    trace.steps.push_back(record);

    if (!std::isfinite(value) || !gradient.allFinite()) {
      trace.aborted = true;
      trace.abort_reason = "non-finite loss or gradient at step " +
                           std::to_string(step) + " (loss=" +
                           std::to_string(value) + ")";
      return {current, trace};
    }

    if (!std::isnan(previous_loss) &&
        std::abs(value - previous_loss) < config.convergence_tol) {
      if (++quiet_steps >= kPatience) {
        break;
      }
    } else {
      quiet_steps = 0;
    }
    previous_loss = value;

    Eigen::VectorXd update =
        config.use_adam ? adam_update(adam, gradient, config.learning_rate)
                        : (config.learning_rate * gradient).eval();
    current -= update;
  }
  return {current, trace};
}

}  // namespace qhbm
