#include "qhbm/latent.hpp"

#include <cmath>
#include <json.hpp>
#include <stdexcept>

namespace qhbm {

namespace {

// p = 1/(1 + e^theta), evaluated without overflow for any theta.
double bernoulli_p(double theta) {
  if (theta >= 0.0) {
    double e = std::exp(-theta);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(theta));
}

// ln(1 + e^{-theta}), the per-qubit log partition function.
double bernoulli_log_z(double theta) {
  return std::max(0.0, -theta) + std::log1p(std::exp(-std::abs(theta)));
}

Eigen::VectorXd diagonal_weights(const DensityMatrix& rho) {
  return rho.data.diagonal().real();
}

}  // namespace

int MultinoulliLatent::n_qubits() const {
  Eigen::Index dim = energies.size();
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if ((Eigen::Index{1} << n) != dim) {
    throw std::invalid_argument(
        "multinoulli energy vector length must be a power of 2");
  }
  return n;
}

int latent_n_qubits(const Latent& latent) {
  return std::visit([](const auto& l) { return l.n_qubits(); }, latent);
}

Eigen::VectorXd latent_params(const Latent& latent) {
  if (const auto* b = std::get_if<BernoulliLatent>(&latent)) return b->thetas;
  return std::get<MultinoulliLatent>(latent).energies;
}

Latent with_latent_params(const Latent& latent, const Eigen::VectorXd& params) {
  if (std::holds_alternative<BernoulliLatent>(latent)) {
    if (params.size() != std::get<BernoulliLatent>(latent).thetas.size()) {
      throw std::invalid_argument("latent parameter count mismatch");
    }
    return BernoulliLatent{params};
  }
  if (params.size() != std::get<MultinoulliLatent>(latent).energies.size()) {
    throw std::invalid_argument("latent parameter count mismatch");
  }
  return MultinoulliLatent{params};
}

Eigen::VectorXd latent_probabilities(const BernoulliLatent& latent) {
  const int n = latent.n_qubits();
  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::VectorXd p_one(n);
  for (int q = 0; q < n; ++q) p_one[q] = bernoulli_p(latent.thetas[q]);

  Eigen::VectorXd probs(dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    double p = 1.0;
    for (int q = 0; q < n; ++q) {
      bool bit = (k >> (n - 1 - q)) & 1;  // qubit 0 = MSB
      p *= bit ? p_one[q] : 1.0 - p_one[q];
    }
    probs[k] = p;
  }
  return probs;
}

Eigen::VectorXd latent_probabilities(const MultinoulliLatent& latent) {
  double log_z = log_partition(latent);
  return (-latent.energies.array() - log_z).exp();
}

Eigen::VectorXd latent_probabilities(const Latent& latent) {
  return std::visit([](const auto& l) { return latent_probabilities(l); },
                    latent);
}

DensityMatrix latent_density(const BernoulliLatent& latent) {
  Eigen::VectorXd probs = latent_probabilities(latent);
  DensityMatrix rho{latent.n_qubits(), probs.cast<std::complex<double>>().asDiagonal()};
  return rho;
}

DensityMatrix latent_density(const MultinoulliLatent& latent) {
  Eigen::VectorXd probs = latent_probabilities(latent);
  DensityMatrix rho{latent.n_qubits(), probs.cast<std::complex<double>>().asDiagonal()};
  return rho;
}

DensityMatrix latent_density(const Latent& latent) {
  return std::visit([](const auto& l) { return latent_density(l); }, latent);
}

double entropy(const BernoulliLatent& latent) {
  // Per-qubit Gibbs identity S_j = ln Z_j + theta_j p_j; exact and stable
  // even for frozen modes (theta -> +-inf).
  double s = 0.0;
  for (Eigen::Index j = 0; j < latent.thetas.size(); ++j) {
    double theta = latent.thetas[j];
    s += bernoulli_log_z(theta) + theta * bernoulli_p(theta);
  }
  return s;
}

double entropy(const MultinoulliLatent& latent) {
  // S = ln Z + sum_x p_x E_x.
  double log_z = log_partition(latent);
  double mean_energy = 0.0;
  for (Eigen::Index x = 0; x < latent.energies.size(); ++x) {
    double p = std::exp(-latent.energies[x] - log_z);
    mean_energy += p * latent.energies[x];
  }
  return log_z + mean_energy;
}

double entropy(const Latent& latent) {
  return std::visit([](const auto& l) { return entropy(l); }, latent);
}

double log_partition(const BernoulliLatent& latent) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < latent.thetas.size(); ++j) {
    total += bernoulli_log_z(latent.thetas[j]);
  }
  return total;
}

double log_partition(const MultinoulliLatent& latent) {
  // ln sum_x e^{-E_x}, max-shifted.
  double m = (-latent.energies).maxCoeff();
  double sum = ((-latent.energies.array()) - m).exp().sum();
  return m + std::log(sum);
}

double log_partition(const Latent& latent) {
  return std::visit([](const auto& l) { return log_partition(l); }, latent);
}

double modular_expectation(const BernoulliLatent& latent,
                           const DensityMatrix& rho) {
  const int n = latent.n_qubits();
  if (rho.dim() != (Eigen::Index{1} << n)) {
    throw std::invalid_argument("modular_expectation: dimension mismatch");
  }
  Eigen::VectorXd diag = diagonal_weights(rho);
  double total = 0.0;
  for (int q = 0; q < n; ++q) {
    double weight_one = 0.0;
    for (Eigen::Index k = 0; k < rho.dim(); ++k) {
      if ((k >> (n - 1 - q)) & 1) weight_one += diag[k];
    }
    total += latent.thetas[q] * weight_one;
  }
  return total;
}

double modular_expectation(const MultinoulliLatent& latent,
                           const DensityMatrix& rho) {
  if (rho.dim() != latent.energies.size()) {
    throw std::invalid_argument("modular_expectation: dimension mismatch");
  }
  return latent.energies.dot(diagonal_weights(rho));
}

double modular_expectation(const Latent& latent, const DensityMatrix& rho) {
  return std::visit(
      [&rho](const auto& l) { return modular_expectation(l, rho); }, latent);
}

Eigen::VectorXd grad_log_partition(const BernoulliLatent& latent) {
  Eigen::VectorXd grad(latent.thetas.size());
  for (Eigen::Index j = 0; j < grad.size(); ++j) {
    grad[j] = -bernoulli_p(latent.thetas[j]);
  }
  return grad;
}

Eigen::VectorXd grad_log_partition(const MultinoulliLatent& latent) {
  return -latent_probabilities(latent);
}

Eigen::VectorXd grad_log_partition(const Latent& latent) {
  return std::visit([](const auto& l) { return grad_log_partition(l); },
                    latent);
}

Eigen::VectorXd grad_modular_expectation(const BernoulliLatent& latent,
                                         const DensityMatrix& rho) {
  const int n = latent.n_qubits();
  if (rho.dim() != (Eigen::Index{1} << n)) {
    throw std::invalid_argument("grad_modular_expectation: dimension mismatch");
  }
  Eigen::VectorXd diag = diagonal_weights(rho);
  Eigen::VectorXd grad(n);
  for (int q = 0; q < n; ++q) {
    double weight_one = 0.0;
    for (Eigen::Index k = 0; k < rho.dim(); ++k) {
      if ((k >> (n - 1 - q)) & 1) weight_one += diag[k];
    }
    grad[q] = weight_one;
  }
  return grad;
}

Eigen::VectorXd grad_modular_expectation(const MultinoulliLatent& latent,
                                         const DensityMatrix& rho) {
  if (rho.dim() != latent.energies.size()) {
    throw std::invalid_argument("grad_modular_expectation: dimension mismatch");
  }
  return diagonal_weights(rho);
}

Eigen::VectorXd grad_modular_expectation(const Latent& latent,
                                         const DensityMatrix& rho) {
  return std::visit(
      [&rho](const auto& l) { return grad_modular_expectation(l, rho); },
      latent);
}

std::uint64_t sample(const BernoulliLatent& latent, Rng& rng) {
  const int n = latent.n_qubits();
  std::uint64_t index = 0;
  for (int q = 0; q < n; ++q) {
    if (uniform_unit(rng) < bernoulli_p(latent.thetas[q])) {
      index |= std::uint64_t{1} << (n - 1 - q);
    }
  }
  return index;
}

std::uint64_t sample(const MultinoulliLatent& latent, Rng& rng) {
  Eigen::VectorXd probs = latent_probabilities(latent);
  double u = uniform_unit(rng);
  double cumulative = 0.0;
  for (Eigen::Index x = 0; x < probs.size(); ++x) {
    cumulative += probs[x];
    if (u < cumulative) return static_cast<std::uint64_t>(x);
  }
  return static_cast<std::uint64_t>(probs.size() - 1);
}

std::uint64_t sample(const Latent& latent, Rng& rng) {
  return std::visit([&rng](const auto& l) { return sample(l, rng); }, latent);
}

std::string latent_to_json(const Latent& latent) {
  nlohmann::json doc;
  doc["kind"] = std::holds_alternative<BernoulliLatent>(latent)
                    ? "bernoulli"
                    : "multinoulli";
  Eigen::VectorXd params = latent_params(latent);
  doc["params"] = std::vector<double>(params.begin(), params.end());
  return doc.dump();
}

Latent latent_from_json(const std::string& text) {
  nlohmann::json doc = nlohmann::json::parse(text);
  std::string kind = doc.at("kind").get<std::string>();
  std::vector<double> values = doc.at("params").get<std::vector<double>>();
  Eigen::VectorXd params =
      Eigen::Map<Eigen::VectorXd>(values.data(), values.size());
  if (kind == "bernoulli") return BernoulliLatent{params};
  if (kind == "multinoulli") {
    MultinoulliLatent latent{params};
    latent.n_qubits();  // validates power-of-2 length
    return latent;
  }
  throw std::invalid_argument("unknown latent kind: " + kind);
}

}  // namespace qhbm
