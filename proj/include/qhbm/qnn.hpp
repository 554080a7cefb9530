#pragma once

#include <Eigen/Dense>
#include <string>

#include "qhbm/densesim.hpp"

namespace qhbm {

// Layered hardware-style ansatz. Each layer applies an arbitrary
// single-qubit rotation exp[i(p1 X + p2 Y + p3 Z)] to every qubit, then a
// two-qubit rotation exp[i(p4 XX + p5 YY + p6 ZZ)] to a staggered set of
// neighbor pairs: odd layers couple (0,1), (2,3), ...; even layers couple
// (1,2), (3,4), .... Open boundary (no wrap-around pair).
//
// Parameters are laid out layer-major: [layer 1 singles (3 per qubit,
// qubit 0 first), layer 1 pairs (3 per pair, leftmost pair first),
// layer 2 singles, ...]. No parameter is shared.
struct QnnAnsatz {
  int n_qubits = 0;
  int n_layers = 0;
  Eigen::VectorXd params;
};

// Number of coupled pairs in layer `layer` (1-based).
int qnn_pairs_in_layer(int n_qubits, int layer);

// Total parameter count: sum over layers of 3*n_qubits + 3*pairs(layer).
int qnn_param_count(int n_qubits, int n_layers);

// Ansatz with the given shape and all parameters zero (identity circuit).
QnnAnsatz make_qnn(int n_qubits, int n_layers);

// Exact dense unitary of the circuit; layer 1 acts first, and within a
// layer the single-qubit rotations act before the pair rotations.
UnitaryMatrix build_unitary(const QnnAnsatz& ansatz);

// U†(phi) sigma_d U(phi): the data state propagated through the inverse
// circuit. Entropy is preserved.
DensityMatrix pulled_back_state(const QnnAnsatz& ansatz,
                                const DensityMatrix& sigma_d);

// JSON round-trip: {"n_qubits": int, "n_layers": int, "params": [floats]}.
std::string qnn_to_json(const QnnAnsatz& ansatz);
QnnAnsatz qnn_from_json(const std::string& text);

}  // namespace qhbm
