#include "qhbm/qhbm.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace qhbm {

namespace {

const double kNan = std::numeric_limits<double>::quiet_NaN();

// Real diagonal of U^dagger H U: the energies seen by each latent basis state
// after conjugation by the ansatz.
Eigen::VectorXd rotated_diagonal(const QnnAnsatz& ansatz,
                                 const PauliSumHamiltonian& h) {
  UnitaryMatrix u = build_unitary(ansatz);
  Eigen::MatrixXcd h_dense = dense_matrix(h);
  return (u.data.adjoint() * h_dense * u.data).diagonal().real();
}

}  // namespace

void validate_model(const QhbmModel& model) {
  if (latent_n_qubits(model.latent) != model.ansatz.n_qubits) {
    throw std::invalid_argument(
        "model latent acts on " +
        std::to_string(latent_n_qubits(model.latent)) +
        " qubits but ansatz expects " + std::to_string(model.ansatz.n_qubits));
  }
}

DensityMatrix visible_state(const QhbmModel& model) {
  validate_model(model);
  DensityMatrix rho = latent_density(model.latent);
  UnitaryMatrix u = build_unitary(model.ansatz);
  return DensityMatrix{rho.n_qubits, u.data * rho.data * u.data.adjoint()};
}

Eigen::VectorXd model_params(const QhbmModel& model) {
  Eigen::VectorXd thetas = latent_params(model.latent);
  Eigen::VectorXd joint(thetas.size() + model.ansatz.params.size());
  joint << thetas, model.ansatz.params;
  return joint;
}

QhbmModel with_model_params(const QhbmModel& model,
                            const Eigen::VectorXd& params) {
  Eigen::Index n_theta = latent_params(model.latent).size();
  if (params.size() != n_theta + model.ansatz.params.size()) {
    throw std::invalid_argument("joint parameter vector has wrong length");
  }
  QhbmModel updated = model;
  updated.latent = with_latent_params(model.latent, params.head(n_theta));
  updated.ansatz.params = params.tail(params.size() - n_theta);
  return updated;
}

double vqt_loss(const QhbmModel& model, const PauliSumHamiltonian& h,
                double beta) {
  validate_model(model);
  if (h.n_qubits != model.ansatz.n_qubits) {
    throw std::invalid_argument("vqt_loss: Hamiltonian width mismatch");
  }
  if (beta <= 0.0) {
    throw std::invalid_argument("vqt_loss requires beta > 0");
  }
  return beta * expectation(h, visible_state(model)) - entropy(model.latent);
}

Eigen::VectorXd vqt_grad(const QhbmModel& model, const PauliSumHamiltonian& h,
                         double beta, double epsilon_fd) {
  validate_model(model);
  const Eigen::VectorXd thetas = latent_params(model.latent);
  const Eigen::Index n_theta = thetas.size();
  const Eigen::Index n_phi = model.ansatz.params.size();
  Eigen::VectorXd grad(n_theta + n_phi);

  // theta gradient: the loss is sum_x P_theta(x) * diag(x) - S(theta) with
  // diag the rotated Hamiltonian diagonal, so d<H>/dtheta follows from the
  // closed-form derivative of the diagonal Gibbs weights.
  const Eigen::VectorXd diag = rotated_diagonal(model.ansatz, h);
  const Eigen::VectorXd probs = latent_probabilities(model.latent);
  const int n = model.ansatz.n_qubits;
  if (const auto* bern = std::get_if<BernoulliLatent>(&model.latent)) {
    for (Eigen::Index j = 0; j < n_theta; ++j) {
      double p_j = 1.0 / (1.0 + std::exp(bern->thetas[j]));
      double d_energy = 0.0;
      for (Eigen::Index x = 0; x < probs.size(); ++x) {
        double bit = static_cast<double>((x >> (n - 1 - j)) & 1);
        d_energy += probs[x] * (p_j - bit) * diag[x];
      }
      double d_entropy = -bern->thetas[j] * p_j * (1.0 - p_j);
      grad[j] = beta * d_energy - d_entropy;
    }
  } else {
    const auto& multi = std::get<MultinoulliLatent>(model.latent);
    double mean_diag = probs.dot(diag);
    double mean_energy = probs.dot(multi.energies);
    for (Eigen::Index y = 0; y < n_theta; ++y) {
      double d_energy = probs[y] * (mean_diag - diag[y]);
      double d_entropy = probs[y] * (mean_energy - multi.energies[y]);
      grad[y] = beta * d_energy - d_entropy;
    }
  }

  // phi gradient: central differences of the full loss.
  auto phi_loss = [&](const Eigen::VectorXd& phi) {
    QhbmModel probe = model;
    probe.ansatz.params = phi;
    return vqt_loss(probe, h, beta);
  };
  grad.tail(n_phi) = finite_diff_grad(phi_loss, model.ansatz.params, epsilon_fd);
  return grad;
}

double qmhl_loss(const QhbmModel& model, const DensityMatrix& sigma_d) {
  validate_model(model);
  DensityMatrix pulled = pulled_back_state(model.ansatz, sigma_d);
  return modular_expectation(model.latent, pulled) + log_partition(model.latent);
}

Eigen::VectorXd qmhl_grad(const QhbmModel& model, const DensityMatrix& sigma_d,
                          double epsilon_fd) {
  validate_model(model);
  const Eigen::Index n_theta = latent_params(model.latent).size();
  const Eigen::Index n_phi = model.ansatz.params.size();
  Eigen::VectorXd grad(n_theta + n_phi);

  DensityMatrix pulled = pulled_back_state(model.ansatz, sigma_d);
  grad.head(n_theta) = grad_modular_expectation(model.latent, pulled) +
                       grad_log_partition(model.latent);

  auto phi_loss = [&](const Eigen::VectorXd& phi) {
    QhbmModel probe = model;
    probe.ansatz.params = phi;
    return qmhl_loss(probe, sigma_d);
  };
  grad.tail(n_phi) = finite_diff_grad(phi_loss, model.ansatz.params, epsilon_fd);
  return grad;
}

double objective_loss(const QhbmModel& model, const Objective& objective) {
  return std::visit(
      [&](const auto& obj) -> double {
        using T = std::decay_t<decltype(obj)>;
        if constexpr (std::is_same_v<T, VqtObjective>) {
          return vqt_loss(model, obj.h, obj.beta);
        } else {
          return qmhl_loss(model, obj.sigma_d);
        }
      },
      objective);
}

Eigen::VectorXd objective_grad(const QhbmModel& model,
                               const Objective& objective, double epsilon_fd) {
  return std::visit(
      [&](const auto& obj) -> Eigen::VectorXd {
        using T = std::decay_t<decltype(obj)>;
        if constexpr (std::is_same_v<T, VqtObjective>) {
          return vqt_grad(model, obj.h, obj.beta, epsilon_fd);
        } else {
          return qmhl_grad(model, obj.sigma_d, epsilon_fd);
        }
      },
      objective);
}

DensityMatrix objective_target(const Objective& objective) {
  return std::visit(
      [&](const auto& obj) -> DensityMatrix {
        using T = std::decay_t<decltype(obj)>;
        if constexpr (std::is_same_v<T, VqtObjective>) {
          return thermal_state_oracle(obj.h, obj.beta);
        } else {
          return obj.sigma_d;
        }
      },
      objective);
}

std::pair<QhbmModel, TrainTrace> train(const QhbmModel& model,
                                       const Objective& objective,
                                       const TrainConfig& config) {
  validate_model(model);

  // Dense target for diagnostics; absent when the problem exceeds the dense
  // cap (the metrics columns then stay empty).
  bool has_target = true;
  DensityMatrix target;
  try {
    target = objective_target(objective);
  } catch (const std::exception&) {
    has_target = false;
  }
  const bool qmhl = std::holds_alternative<QmhlObjective>(objective);

  auto loss_of = [&](const Eigen::VectorXd& params) {
    return objective_loss(with_model_params(model, params), objective);
  };
  auto grad_of = [&](const Eigen::VectorXd& params) {
    return objective_grad(with_model_params(model, params), objective,
                          config.epsilon_fd);
  };
  MetricsFn metrics = [&](int step, const Eigen::VectorXd& params,
                          double loss) {
    TrainStep record;
    record.step = step;
    record.loss = loss;
    record.trace_distance = kNan;
    record.fidelity = kNan;
    record.relative_entropy = kNan;
    if (has_target) {
      DensityMatrix visible = visible_state(with_model_params(model, params));
      record.trace_distance = trace_distance(visible, target);
      record.fidelity = fidelity(visible, target);
      // Reported in the objective's natural direction: the QMHL loss gap is
      // D(sigma_D || rho), the VQT loss gap D(rho || sigma_beta).
      record.relative_entropy = qmhl ? relative_entropy(target, visible)
                                     : relative_entropy(visible, target);
    }
    return record;
  };

  auto [params, trace] =
      descend(loss_of, grad_of, model_params(model), config, metrics);
  return {with_model_params(model, params), trace};
}

}  // namespace qhbm
