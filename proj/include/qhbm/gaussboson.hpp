#pragma once

// Bosonic Gaussian backend: covariance matrices in (x1..xN, p1..pN) ordering
// with vacuum variance 1, symplectic transformations in Bloch-Messiah form,
// a Williamson-decomposition oracle, thermal entropy / log-partition in
// nats, harmonic-chain ground states, QMHL on covariance matrices,
// compression, and modular-mode extraction.

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qhbm/training.hpp"

namespace qhbm {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

// Quadrature covariance Gamma_ab = (1/2) tr(rho {xi_a, xi_b}) with
// xi = (x1..xN, p1..pN), [x_j, p_k] = 2i delta_jk, vacuum = identity.
struct BosonCovariance {
  int n_modes = 0;
  Eigen::MatrixXd gamma;
};

// Symmetry to 1e-10 and symplectic eigenvalues >= 1 - 1e-9.
BosonCovariance make_boson_covariance(int n_modes, Eigen::MatrixXd gamma);
void validate_covariance(const BosonCovariance& cov);

// The symplectic form [[0, I], [-I, 0]] in xxpp ordering.
Eigen::MatrixXd symplectic_form(int n_modes);

// Bloch-Messiah parameterization S = O1 * diag(e^r, e^-r) * O2. Each passive
// vector has N*(N-1) reals (re/im of the strictly lower triangle of a complex
// matrix L, row-major) followed by N phases; the anti-Hermitian generator is
// A = (L - L^dagger) + i*diag(phases) and O is the orthogonal-symplectic
// image [[X, Y], [-Y, X]] of exp(A) = X + iY.
struct SymplecticParams {
  int n_modes = 0;
  Eigen::VectorXd passive1;  // length N^2
  Eigen::VectorXd squeezes;  // length N
  Eigen::VectorXd passive2;  // length N^2
};

SymplecticParams make_symplectic_params(int n_modes);  // all zero -> S = I

// Product of N independent thermal oscillators with frequencies omega_j > 0;
// latent covariance diag(nu, nu) with nu_j = coth(omega_j / 2).
struct BosonLatent {
  Eigen::VectorXd omegas;
  int n_modes() const { return static_cast<int>(omegas.size()); }
};

// nu = coth(omega/2) and its inverse omega = ln((nu+1)/(nu-1)).
double nu_from_omega(double omega);
double omega_from_nu(double nu);

// diag(nu_1..nu_N, nu_1..nu_N) in xxpp ordering.
BosonCovariance latent_covariance(const BosonLatent& latent);

// ---------------------------------------------------------------------------
// Symplectic machinery
// ---------------------------------------------------------------------------

// Realize S = O1 D O2; satisfies S^T Omega S = Omega to 1e-9.
Eigen::MatrixXd realize_symplectic(const SymplecticParams& params);

// Williamson decomposition: S Gamma S^T = diag(nu, nu) with nu sorted
// ascending and S symplectic. Ground-truth oracle for the QMHL trainer.
struct WilliamsonResult {
  Eigen::VectorXd nus;  // ascending, length N
  Eigen::MatrixXd s;    // 2N x 2N symplectic
};

WilliamsonResult williamson_oracle(const BosonCovariance& cov);

// ---------------------------------------------------------------------------
// Thermodynamics (nats)
// ---------------------------------------------------------------------------

// S = sum_j omega/(e^omega - 1) - ln(1 - e^-omega), omega_j > 0.
double boson_entropy(const Eigen::VectorXd& omegas);

// Same entropy from symplectic eigenvalues; nu = 1 contributes 0.
double boson_entropy_from_nus(const Eigen::VectorXd& nus);

// ln Z = sum_j -omega/2 - ln(1 - e^-omega).
double boson_log_partition(const Eigen::VectorXd& omegas);

// ---------------------------------------------------------------------------
// States and reductions
// ---------------------------------------------------------------------------

// Ground-state covariance of the periodic chain
// H = sum_j omega (x_j^2 + p_j^2)/... with potential V = omega on the
// diagonal and chi on the ring's nearest-neighbour bonds:
// Gamma = diag((V/omega)^-1/2, (V/omega)^1/2). Requires omega > 2|chi|.
BosonCovariance harmonic_chain_ground(int n, double omega, double chi);

// Principal submatrix on the kept modes' (x, p) rows and columns.
BosonCovariance partial_trace_modes(const BosonCovariance& cov,
                                    const std::vector<int>& keep);

// ---------------------------------------------------------------------------
// QMHL on covariance matrices
// ---------------------------------------------------------------------------

// <K_theta> under the pulled-back data covariance S^-1 Gamma_D S^-T with
// K = sum_j (omega_j/4)(x_j^2 + p_j^2), plus ln Z_theta. Equals the
// entropy of Gamma_D at the optimum and never drops below it.
double qmhl_boson_loss(const BosonLatent& latent, const SymplecticParams& params,
                       const BosonCovariance& gamma_d);

struct BosonQmhlResult {
  BosonLatent latent;
  SymplecticParams params;
  TrainTrace trace;
};

// Gradient descent (central differences over all parameters) on
// qmhl_boson_loss; frequencies are trained as omega = exp(u) to stay
// positive. Initialization is drawn from config.seed. The trace's
// relative_entropy column records loss minus the Williamson-oracle entropy
// of gamma_d (the Gaussian relative entropy to the model).
BosonQmhlResult train_boson_qmhl(const BosonCovariance& gamma_d,
                                 const TrainConfig& config);

// Replace the ceil(ratio * N) lowest-entropy (largest-omega) latent modes of
// the pulled-back state by vacuum blocks, push forward again, and report the
// reconstruction together with max|Gamma_rec - Gamma_D| / max|Gamma_D|.
std::pair<BosonCovariance, double> compress(const BosonLatent& latent,
                                            const SymplecticParams& params,
                                            const BosonCovariance& gamma_d,
                                            double ratio);

// Columns of the realized S, unit-normalized with the largest-magnitude
// entry made positive. Within a degenerate Williamson block these are only
// defined up to rotation; compare subspaces, not individual columns.
std::vector<Eigen::VectorXd> modular_modes(const SymplecticParams& params);

// ---------------------------------------------------------------------------
// External interfaces
// ---------------------------------------------------------------------------

// Row-major CSV with header line `# n_modes=N ordering=xxpp`.
std::string covariance_to_csv(const BosonCovariance& cov);
BosonCovariance covariance_from_csv(const std::string& text);

// {"ratio": r, "error": e}
std::string compression_to_json(double ratio, double error);

}  // namespace qhbm
