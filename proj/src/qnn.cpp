#include "qhbm/qnn.hpp"

#include <cmath>
#include <complex>
#include <json.hpp>
#include <stdexcept>
#include <unsupported/Eigen/KroneckerProduct>

namespace qhbm {

namespace {

using Complex = std::complex<double>;
const Complex kI(0.0, 1.0);

// exp[i(a X + b Y + c Z)] = cos(r) I + i sin(r)/r (a X + b Y + c Z),
// r = |(a,b,c)|.
Eigen::Matrix2cd single_qubit_rotation(double a, double b, double c) {
  double r = std::sqrt(a * a + b * b + c * c);
  double sinc = (r > 0.0) ? std::sin(r) / r : 1.0;
  Eigen::Matrix2cd m;
  m << std::cos(r) + kI * sinc * c, kI * sinc * (a - kI * b),
      kI * sinc * (a + kI * b), std::cos(r) - kI * sinc * c;
  return m;
}

// exp[i(a XX + b YY + c ZZ)] via the shared eigenbasis of the commuting
// generators (the Bell basis): eigenvalues a-b+c, -a+b+c, a+b-c, -a-b-c on
// (|00>+|11>), (|00>-|11>), (|01>+|10>), (|01>-|10>) respectively.
Eigen::Matrix4cd pair_rotation(double a, double b, double c) {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Eigen::Matrix4cd bell = Eigen::Matrix4cd::Zero();
  bell(0, 0) = inv_sqrt2;  bell(3, 0) = inv_sqrt2;   // |00> + |11>
  bell(0, 1) = inv_sqrt2;  bell(3, 1) = -inv_sqrt2;  // |00> - |11>
  bell(1, 2) = inv_sqrt2;  bell(2, 2) = inv_sqrt2;   // |01> + |10>
  bell(1, 3) = inv_sqrt2;  bell(2, 3) = -inv_sqrt2;  // |01> - |10>
  Eigen::Vector4d eigenvalues(a - b + c, -a + b + c, a + b - c, -a - b - c);
  Eigen::Vector4cd phases = (kI * eigenvalues.cast<Complex>().array()).exp();
  return bell * phases.asDiagonal() * bell.adjoint();
}

// Embed a 4x4 operator on the adjacent pair (q, q+1) into the full register.
Eigen::MatrixXcd embed_pair(const Eigen::Matrix4cd& op, int q, int n_qubits) {
  Eigen::Index left = Eigen::Index{1} << q;
  Eigen::Index right = Eigen::Index{1} << (n_qubits - q - 2);
  Eigen::MatrixXcd result =
      kroneckerProduct(Eigen::MatrixXcd::Identity(left, left), op);
  return kroneckerProduct(result,
                          Eigen::MatrixXcd::Identity(right, right));
}

}  // namespace

int qnn_pairs_in_layer(int n_qubits, int layer) {
  // Odd layers couple (0,1),(2,3),...; even layers couple (1,2),(3,4),...
  return (layer % 2 == 1) ? n_qubits / 2 : (n_qubits - 1) / 2;
}

int qnn_param_count(int n_qubits, int n_layers) {
  int count = 0;
  for (int layer = 1; layer <= n_layers; ++layer) {
    count += 3 * n_qubits + 3 * qnn_pairs_in_layer(n_qubits, layer);
  }
  return count;
}

QnnAnsatz make_qnn(int n_qubits, int n_layers) {
  if (n_qubits < 1 || n_layers < 0) {
    throw std::invalid_argument("QNN needs n_qubits >= 1 and n_layers >= 0");
  }
  return QnnAnsatz{n_qubits, n_layers,
                   Eigen::VectorXd::Zero(qnn_param_count(n_qubits, n_layers))};
}

UnitaryMatrix build_unitary(const QnnAnsatz& ansatz) {
  const int n = ansatz.n_qubits;
  if (ansatz.params.size() != qnn_param_count(n, ansatz.n_layers)) {
    throw std::invalid_argument(
        "QNN parameter vector has length " +
        std::to_string(ansatz.params.size()) + ", expected " +
        std::to_string(qnn_param_count(n, ansatz.n_layers)));
  }
  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::MatrixXcd total = Eigen::MatrixXcd::Identity(dim, dim);

  Eigen::Index p = 0;
  for (int layer = 1; layer <= ansatz.n_layers; ++layer) {
    // Single-qubit rotations on every qubit (qubit 0 is the leftmost
    // Kronecker factor, matching its role as the most significant bit).
    Eigen::MatrixXcd singles = Eigen::MatrixXcd::Identity(1, 1);
    for (int q = 0; q < n; ++q) {
      Eigen::Matrix2cd u = single_qubit_rotation(
          ansatz.params[p], ansatz.params[p + 1], ansatz.params[p + 2]);
      p += 3;
      singles = kroneckerProduct(singles, u).eval();
    }
    total = singles * total;

    // Staggered pair rotations.
    int first = (layer % 2 == 1) ? 0 : 1;
    for (int q = first; q + 1 < n; q += 2) {
      Eigen::Matrix4cd u = pair_rotation(ansatz.params[p], ansatz.params[p + 1],
                                         ansatz.params[p + 2]);
      p += 3;
      total = embed_pair(u, q, n) * total;
    }
  }
  return UnitaryMatrix{static_cast<int>(dim), std::move(total)};
}

DensityMatrix pulled_back_state(const QnnAnsatz& ansatz,
                                const DensityMatrix& sigma_d) {
  UnitaryMatrix u = build_unitary(ansatz);
  if (sigma_d.dim() != u.data.rows()) {
    throw std::invalid_argument("pulled_back_state: dimension mismatch");
  }
  return DensityMatrix{sigma_d.n_qubits,
                       u.data.adjoint() * sigma_d.data * u.data};
}

std::string qnn_to_json(const QnnAnsatz& ansatz) {
  nlohmann::json doc;
  doc["n_qubits"] = ansatz.n_qubits;
  doc["n_layers"] = ansatz.n_layers;
  doc["params"] = std::vector<double>(ansatz.params.begin(), ansatz.params.end());
  return doc.dump();
}

QnnAnsatz qnn_from_json(const std::string& text) {
  nlohmann::json doc = nlohmann::json::parse(text);
  QnnAnsatz ansatz;
  ansatz.n_qubits = doc.at("n_qubits").get<int>();
  ansatz.n_layers = doc.at("n_layers").get<int>();
  std::vector<double> values = doc.at("params").get<std::vector<double>>();
  ansatz.params = Eigen::Map<Eigen::VectorXd>(values.data(), values.size());
  if (ansatz.params.size() !=
      qnn_param_count(ansatz.n_qubits, ansatz.n_layers)) {
    throw std::invalid_argument("QNN JSON parameter count mismatch");
  }
  return ansatz;
}

}  // namespace qhbm
