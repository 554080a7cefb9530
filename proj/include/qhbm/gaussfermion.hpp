#pragma once

// Fermionic Gaussian backend: Majorana covariance matrices, Givens-network
// orthogonal ansatz, d-wave lattice Hamiltonians, thermal-covariance and
// dense Jordan-Wigner oracles, entropy/energy in nats, and VQT training
// with shift-rule gradients.
//
// Conventions (fixed against the dense oracle; see docs/conventions.md):
//   - Fermion mode u carries Majoranas c_{2u} = a_u + a_u^dag and
//     c_{2u+1} = i(a_u - a_u^dag), so {c_a, c_b} = 2 delta_ab.
//   - H = i * sum_ab h_ab c_a c_b + E with h real antisymmetric; the number
//     operator eps * n_u corresponds to h_{2u,2u+1} = -eps/4, E = eps/2.
//   - Gamma_ab = (i/2) tr(rho [c_a, c_b]); thermal occupation map
//     lambda_j = -tanh(2 beta eps_j) per canonical block eps_j.
//   - <H> = sum_ab h_ab Gamma_ab + E; ground-state energy -2 sum eps_j + E.

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qhbm/densesim.hpp"
#include "qhbm/training.hpp"

namespace qhbm {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

// Majorana covariance Gamma_ab = (i/2) tr(rho [c_a, c_b]): real,
// antisymmetric, singular values <= 1.
struct FermionCovariance {
  int n_majoranas = 0;  // even, = 2 * n_fermions
  Eigen::MatrixXd gamma;
};

FermionCovariance make_fermion_covariance(int n_majoranas,
                                          Eigen::MatrixXd gamma);
void validate_fermion_covariance(const FermionCovariance& cov);

// H = i * sum_ab h_ab c_a c_b + e_const with h real antisymmetric.
struct MajoranaQuadraticH {
  int n_majoranas = 0;
  Eigen::MatrixXd h;
  double e_const = 0.0;
};

MajoranaQuadraticH make_majorana_h(int n_majoranas, Eigen::MatrixXd h,
                                   double e_const);

// Ordered product of plane rotations; rotation k acts on modes (a, b) as
// [[cos, -sin], [sin, cos]] and the first listed rotation is applied first.
struct GivensRotation {
  int a = 0;
  int b = 0;
  double angle = 0.0;
};

struct GivensNetwork {
  std::vector<GivensRotation> rotations;
};

// Independent fermionic oscillators: latent covariance
// ⊕_j [[0, lambda_j], [-lambda_j, 0]] with lambda_j in (-1, 1).
struct FermionLatent {
  Eigen::VectorXd lambdas;
  int n_fermions() const { return static_cast<int>(lambdas.size()); }
};

FermionCovariance latent_fermion_covariance(const FermionLatent& latent);

// ---------------------------------------------------------------------------
// Givens networks
// ---------------------------------------------------------------------------

// Brick-wall pattern over adjacent mode pairs, all angles zero; n_layers
// alternating layers. n_modes layers reach the full n(n-1)/2 rotations.
GivensNetwork make_brick_wall(int n_modes, int n_layers);
int default_brick_wall_layers(int n_modes);

Eigen::MatrixXd realize_givens(const GivensNetwork& net, int n);

// ---------------------------------------------------------------------------
// Hamiltonians and oracles
// ---------------------------------------------------------------------------

// Spinful nx x ny lattice (site-major, spin-minor orbitals; open boundary)
// with uniform hopping -t for both spins, uniform pairing delta between
// opposite spins on each bond, and zero chemical potential.
MajoranaQuadraticH build_dwave(int nx, int ny, double t, double delta);

// O h O^T = ⊕ [[0, eps_j], [-eps_j, 0]] with eps_j >= 0 ascending.
struct CanonicalFermionForm {
  Eigen::VectorXd epsilons;
  Eigen::MatrixXd o;
};

CanonicalFermionForm canonical_form(const MajoranaQuadraticH& h);

// Exact Gibbs covariance: Gamma = O^T (⊕ [[0, lambda_j], [-lambda_j, 0]]) O
// with lambda_j = -tanh(2 beta eps_j). beta = 0 gives Gamma = 0.
FermionCovariance thermal_covariance_oracle(const MajoranaQuadraticH& h,
                                            double beta);

// ln tr exp(-beta H), canonical-mode closed form (includes e_const).
double fermion_log_partition(const MajoranaQuadraticH& h, double beta);

// ---------------------------------------------------------------------------
// Thermodynamics (nats)
// ---------------------------------------------------------------------------

// sum_j H_b((1 - |lambda_j|)/2), binary entropy in nats.
double fermion_entropy(const Eigen::VectorXd& lambdas);

// sum_ab h_ab Gamma_ab + e_const.
double energy_expectation(const MajoranaQuadraticH& h,
                          const FermionCovariance& gamma);

// ---------------------------------------------------------------------------
// VQT on covariance matrices
// ---------------------------------------------------------------------------

// Visible covariance O^T Gamma_theta O of the model.
FermionCovariance fermion_visible_covariance(const FermionLatent& latent,
                                             const GivensNetwork& net);

// beta * energy_expectation(h, O^T Gamma_theta O) - fermion_entropy(lambda);
// minimum over parameters is -fermion_log_partition... the free-energy bound
// -ln Z_beta.
double vqt_fermion_loss(const FermionLatent& latent, const GivensNetwork& net,
                        const MajoranaQuadraticH& h, double beta);

// Gradient over (lambda_1..lambda_Nf, angles in rotation order): lambda
// components analytic, angle components exact via the pi/2-shifted-rotation
// derivative of the energy term (the entropy is angle-independent).
Eigen::VectorXd vqt_fermion_grad(const FermionLatent& latent,
                                 const GivensNetwork& net,
                                 const MajoranaQuadraticH& h, double beta);

struct FermionVqtResult {
  FermionLatent latent;
  GivensNetwork net;
  TrainTrace trace;
};

// Called once per step with the current model so callers can attach extra
// diagnostics (e.g. dense fidelity) to the step record.
using FermionStepAnnotator = std::function<void(
    int step, const FermionLatent&, const GivensNetwork&, TrainStep&)>;

// Gradient descent on vqt_fermion_loss over (theta, angles) with
// lambda = tanh(theta); a brick-wall network of n_layers is initialized from
// config.seed. The trace's relative_entropy column records
// loss - (-ln Z_beta), the free-energy gap to the thermal target.
FermionVqtResult train_vqt_fermion(const MajoranaQuadraticH& h, double beta,
                                   int n_layers, const TrainConfig& config,
                                   const FermionStepAnnotator& annotate = nullptr);

// ---------------------------------------------------------------------------
// Dense Jordan-Wigner oracle (tiny systems)
// ---------------------------------------------------------------------------

// Dense Majorana operators c_0..c_{M-1} via Jordan-Wigner
// (c_{2k} = Z_0..Z_{k-1} X_k, c_{2k+1} = -Z_0..Z_{k-1} Y_k; qubit |1> is
// the occupied state).
std::vector<Eigen::MatrixXcd> dense_majoranas(int n_fermions);

// Exact Gibbs state of H = i sum h_ab c_a c_b + E on the JW qubit register.
// Capped at 5 fermions unless allow_large (<= 8) is set.
DensityMatrix dense_jw_oracle(const MajoranaQuadraticH& h, double beta,
                              bool allow_large = false);

// Gamma extracted from a dense JW-register state.
FermionCovariance covariance_from_dense(const DensityMatrix& rho);

// Dense state of the Gaussian model itself (for fidelity diagnostics):
// the Gibbs state at beta = 1 of the modular Hamiltonian determined by
// (lambda, O).
DensityMatrix dense_model_state(const FermionLatent& latent,
                                const GivensNetwork& net,
                                bool allow_large = false);

// ---------------------------------------------------------------------------
// External interfaces
// ---------------------------------------------------------------------------

// Row-major CSV with header `# n_majoranas=M kind=h|gamma` (h includes a
// second header line `# e_const=<value>`).
std::string majorana_h_to_csv(const MajoranaQuadraticH& h);
MajoranaQuadraticH majorana_h_from_csv(const std::string& text);
std::string fermion_covariance_to_csv(const FermionCovariance& cov);
FermionCovariance fermion_covariance_from_csv(const std::string& text);

}  // namespace qhbm
