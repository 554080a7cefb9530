#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <variant>

#include "qhbm/densesim.hpp"
#include "qhbm/rng.hpp"

namespace qhbm {

// Factorized qubit latent: one modular energy theta_j per qubit, with
// K_j = theta_j |1><1|_j, so p_j = P(|1>_j) = 1/(1 + e^{theta_j}) and the
// latent density matrix is a product of diag(1 - p_j, p_j).
struct BernoulliLatent {
  Eigen::VectorXd thetas;

  int n_qubits() const { return static_cast<int>(thetas.size()); }
};

// Fully general diagonal latent: one modular energy E_x per computational
// basis state, p_x = e^{-E_x} / sum_y e^{-E_y}.
struct MultinoulliLatent {
  Eigen::VectorXd energies;  // length 2^n

  int n_qubits() const;
};

using Latent = std::variant<BernoulliLatent, MultinoulliLatent>;

int latent_n_qubits(const Latent& latent);
Eigen::VectorXd latent_params(const Latent& latent);
Latent with_latent_params(const Latent& latent, const Eigen::VectorXd& params);

// Diagonal density matrix e^{-K_theta} / Z_theta.
DensityMatrix latent_density(const BernoulliLatent& latent);
DensityMatrix latent_density(const MultinoulliLatent& latent);
DensityMatrix latent_density(const Latent& latent);

// Entropy of the latent distribution in nats.
double entropy(const BernoulliLatent& latent);
double entropy(const MultinoulliLatent& latent);
double entropy(const Latent& latent);

// ln Z_theta, numerically stabilized.
double log_partition(const BernoulliLatent& latent);
double log_partition(const MultinoulliLatent& latent);
double log_partition(const Latent& latent);

// tr(K_theta rho) for the diagonal modular Hamiltonian K_theta.
double modular_expectation(const BernoulliLatent& latent,
                           const DensityMatrix& rho);
double modular_expectation(const MultinoulliLatent& latent,
                           const DensityMatrix& rho);
double modular_expectation(const Latent& latent, const DensityMatrix& rho);

// Analytic d/dtheta ln Z: Bernoulli component j is -p_j; multinoulli
// component x is -p_x.
Eigen::VectorXd grad_log_partition(const BernoulliLatent& latent);
Eigen::VectorXd grad_log_partition(const MultinoulliLatent& latent);
Eigen::VectorXd grad_log_partition(const Latent& latent);

// Analytic d/dtheta tr(K_theta rho) = <dK/dtheta>_rho: Bernoulli component
// j is the |1>_j weight of rho; multinoulli component x is rho_xx.
Eigen::VectorXd grad_modular_expectation(const BernoulliLatent& latent,
                                         const DensityMatrix& rho);
Eigen::VectorXd grad_modular_expectation(const MultinoulliLatent& latent,
                                         const DensityMatrix& rho);
Eigen::VectorXd grad_modular_expectation(const Latent& latent,
                                         const DensityMatrix& rho);

// Draw a computational basis index from p_theta.
std::uint64_t sample(const BernoulliLatent& latent, Rng& rng);
std::uint64_t sample(const MultinoulliLatent& latent, Rng& rng);
std::uint64_t sample(const Latent& latent, Rng& rng);

// Probability vector p_theta over basis states (diagonal of latent_density).
Eigen::VectorXd latent_probabilities(const BernoulliLatent& latent);
Eigen::VectorXd latent_probabilities(const MultinoulliLatent& latent);
Eigen::VectorXd latent_probabilities(const Latent& latent);

// JSON round-trip: {"kind": "bernoulli"|"multinoulli", "params": [floats]}.
std::string latent_to_json(const Latent& latent);
Latent latent_from_json(const std::string& text);

}  // namespace qhbm
