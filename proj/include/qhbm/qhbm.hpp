#pragma once

// Model core: visible states assembled from a diagonal latent state and a
// QNN unitary, VQT / QMHL losses, hybrid analytic + finite-difference
// gradients, and a plain gradient-descent training loop.

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "qhbm/densesim.hpp"
#include "qhbm/hamiltonians.hpp"
#include "qhbm/latent.hpp"
#include "qhbm/qnn.hpp"
#include "qhbm/training.hpp"

namespace qhbm {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

// rho(theta, phi) = U(phi) rho(theta) U(phi)^dagger. The latent supplies the
// classical parameters theta, the ansatz the unitary parameters phi.
struct QhbmModel {
  Latent latent;
  QnnAnsatz ansatz;
};

// Throws unless latent width matches the ansatz qubit count.
void validate_model(const QhbmModel& model);

// Training objectives.
struct VqtObjective {
  PauliSumHamiltonian h;
  double beta = 1.0;
};

struct QmhlObjective {
  DensityMatrix sigma_d;
};

using Objective = std::variant<VqtObjective, QmhlObjective>;

// ---------------------------------------------------------------------------
// Model evaluation
// ---------------------------------------------------------------------------

// U(phi) rho(theta) U(phi)^dagger; entropy equals the latent entropy.
DensityMatrix visible_state(const QhbmModel& model);

// Joint parameter vector (theta components first, then phi) and its inverse.
Eigen::VectorXd model_params(const QhbmModel& model);
QhbmModel with_model_params(const QhbmModel& model,
                            const Eigen::VectorXd& params);

// beta * tr(rho_visible H) - S(rho_visible). Lower-bounded by -ln Z_beta of
// the thermal target; the gap is the relative entropy to that target.
double vqt_loss(const QhbmModel& model, const PauliSumHamiltonian& h,
                double beta);

// Gradient over (theta, phi): theta analytically through the diagonal Gibbs
// weights and the latent entropy, phi via central differences of the loss.
Eigen::VectorXd vqt_grad(const QhbmModel& model, const PauliSumHamiltonian& h,
                         double beta, double epsilon_fd);

// tr(pulled-back sigma_D * K_theta) + ln Z_theta. Always >= S(sigma_D); the
// gap is D(sigma_D || visible_state).
double qmhl_loss(const QhbmModel& model, const DensityMatrix& sigma_d);

// Gradient over (theta, phi): theta fully analytic, phi central differences.
Eigen::VectorXd qmhl_grad(const QhbmModel& model, const DensityMatrix& sigma_d,
                          double epsilon_fd);

// Loss / gradient dispatch over either objective.
double objective_loss(const QhbmModel& model, const Objective& objective);
Eigen::VectorXd objective_grad(const QhbmModel& model,
                               const Objective& objective, double epsilon_fd);

// Dense target state the objective is trying to reach (thermal state for
// VQT, the data state itself for QMHL).
DensityMatrix objective_target(const Objective& objective);

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

// Gradient descent on the joint (theta, phi) vector. Stops at max_steps or
// when |loss delta| < convergence_tol for 5 consecutive steps. Records loss
// and, when a dense target is available, trace distance / fidelity /
// relative entropy against it at every step. Aborts (trace.aborted) on a
// non-finite loss or gradient.
std::pair<QhbmModel, TrainTrace> train(const QhbmModel& model,
                                       const Objective& objective,
                                       const TrainConfig& config);

}  // namespace qhbm
