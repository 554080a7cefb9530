#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qhbm/densesim.hpp"

namespace qhbm {

// One weighted Pauli string: coeff * prod_q P_q with P in {X, Y, Z} acting
// on the qubits listed in `paulis` (absent qubits carry identity).
struct PauliTerm {
  double coeff = 0.0;
  std::map<int, char> paulis;
};

// Hermitian operator as a real-weighted sum of Pauli strings. Duplicate
// strings are merged on construction (make_pauli_sum).
struct PauliSumHamiltonian {
  int n_qubits = 0;
  std::vector<PauliTerm> terms;
};

// Validates qubit indices / Pauli letters, merges duplicate strings, and
// drops terms whose merged coefficient is exactly zero.
PauliSumHamiltonian make_pauli_sum(int n_qubits, std::vector<PauliTerm> terms);

// 2D Heisenberg model sum_bonds J S_i . S_j with S = sigma/2 on an open
// nx x ny grid (qubits indexed row-major): each horizontal bond contributes
// XX, YY, ZZ at jh/4 and each vertical bond at jv/4.
PauliSumHamiltonian heisenberg_2d(int nx, int ny, double jh, double jv);

// Open 1D chain -j sum S_i . S_{i+1} + sum_j (hx S^x_j + hz S^z_j):
// bond Pauli coefficient -j/4, field coefficients hx/2 and hz/2.
PauliSumHamiltonian heisenberg_1d_fields(int n, double j, double hx, double hz);

// Open chain with independent XX/YY/ZZ couplings per bond and a 3-component
// field per site, all uniform on [-1, 1]. Deterministic for a fixed seed:
// bonds are drawn first (left to right, XX then YY then ZZ), then sites
// (X then Y then Z field).
PauliSumHamiltonian random_coupling_chain(int n, std::uint64_t seed);

// Dense 2^n x 2^n matrix of the Pauli sum (qubit 0 = most significant bit).
Eigen::MatrixXcd dense_matrix(const PauliSumHamiltonian& h);

// sum_k alpha_k tr(P_k rho), computed termwise without materializing the
// dense Hamiltonian.
double expectation(const PauliSumHamiltonian& h, const DensityMatrix& rho);

// JSON round-trip: {"n_qubits": int, "terms": [{"coeff": f, "paulis":
// {"0": "X", ...}}]}.
std::string pauli_sum_to_json(const PauliSumHamiltonian& h);
PauliSumHamiltonian pauli_sum_from_json(const std::string& text);

}  // namespace qhbm
