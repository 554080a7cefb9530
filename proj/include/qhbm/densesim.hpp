#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace qhbm {

struct PauliSumHamiltonian;  // defined in hamiltonians.hpp

// Exact mixed state of an n-qubit register. Qubit 0 is the most significant
// bit of the computational-basis index, fixed project-wide.
//
// Invariants (checked by validate_density): Hermitian to 1e-10, unit trace
// to 1e-10, minimum eigenvalue >= -1e-10.
struct DensityMatrix {
  int n_qubits = 0;
  Eigen::MatrixXcd data;

  Eigen::Index dim() const { return data.rows(); }
};

// Unitary on a 2^k-dimensional register. Invariant: U U† = I to 1e-10.
struct UnitaryMatrix {
  int dim = 0;
  Eigen::MatrixXcd data;
};

// Brute-force cap on dense simulation size (protects against accidental
// huge allocations). Defaults to 12 qubits; the environment variable
// QHBM_DENSE_CAP overrides at startup, set_dense_qubit_cap at runtime.
int dense_qubit_cap();
void set_dense_qubit_cap(int n_qubits);

// Throw std::runtime_error if the value violates its type invariants.
void validate_density(const DensityMatrix& rho);
void validate_unitary(const UnitaryMatrix& u);

// Constructors that validate.
DensityMatrix make_density(int n_qubits, Eigen::MatrixXcd data);
UnitaryMatrix make_unitary(Eigen::MatrixXcd data);

// U rho U†. Trace and spectrum are preserved.
DensityMatrix apply_unitary(const DensityMatrix& rho, const UnitaryMatrix& u);

// Exact Gibbs state e^{-beta H}/Z via full eigendecomposition of the dense
// Hamiltonian. Errors when n_qubits exceeds the brute-force cap.
DensityMatrix thermal_state_oracle(const PauliSumHamiltonian& h, double beta);

// Same oracle for an already-dense Hermitian matrix (2^n x 2^n).
DensityMatrix thermal_state_of_dense(const Eigen::MatrixXcd& h_dense,
                                     double beta);

// Von Neumann entropy -sum lambda ln lambda in nats, with 0 ln 0 := 0.
// Eigenvalues in [-1e-10, 0] are clamped to 0; below that is an invariant
// violation (throws).
double von_neumann_entropy(const DensityMatrix& rho);

// (1/2) sum of singular values of rho - sigma; in [0, 1].
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);

// [tr sqrt(sqrt(rho) sigma sqrt(rho))]^2; in [0, 1]; symmetric.
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

// D(rho || sigma) = tr(rho ln rho) - tr(rho ln sigma), in nats.
// Returns +infinity when the support of rho is not contained in the
// support of sigma (sigma eigenvalues below 1e-12 carrying rho weight
// above 1e-12).
double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma);

// Reduced state on the kept qubits (listed order becomes the new qubit
// order). Indices must be valid and distinct.
DensityMatrix partial_trace(const DensityMatrix& rho,
                            const std::vector<int>& keep);

}  // namespace qhbm
