#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include <unsupported/Eigen/MatrixFunctions>

#include "qhbm/densesim.hpp"
#include "qhbm/hamiltonians.hpp"
#include "qhbm/qnn.hpp"
#include "qhbm/rng.hpp"

using namespace qhbm;
using std::complex;

namespace {

QnnAnsatz random_qnn(int n_qubits, int n_layers, std::uint64_t seed) {
  QnnAnsatz ansatz = make_qnn(n_qubits, n_layers);
  Rng rng(seed);
  for (Eigen::Index i = 0; i < ansatz.params.size(); ++i)
    ansatz.params[i] = uniform_in(rng, -1.0, 1.0);
  return ansatz;
}

// Oracle for a single layer: exponentiate sum of Pauli strings directly.
Eigen::MatrixXcd expi(const PauliSumHamiltonian& gen) {
  Eigen::MatrixXcd m = dense_matrix(gen);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  Eigen::VectorXcd phases =
      (complex<double>(0, 1) * es.eigenvalues().cast<complex<double>>())
          .array()
          .exp();
  return es.eigenvectors() * phases.asDiagonal() *
         es.eigenvectors().adjoint();
}

}  // namespace

TEST_CASE("parameter counting follows the staggered layout") {
  // Odd layers of 4 qubits have pairs (0,1), (2,3); even layers have (1,2).
  CHECK(qnn_pairs_in_layer(4, 1) == 2);
  CHECK(qnn_pairs_in_layer(4, 2) == 1);
  CHECK(qnn_pairs_in_layer(5, 1) == 2);
  CHECK(qnn_pairs_in_layer(5, 2) == 2);
  CHECK(qnn_pairs_in_layer(1, 1) == 0);
  CHECK(qnn_param_count(4, 3) == 51);  // 3*(3*4) + 3*(2+1+2)
  CHECK(qnn_param_count(1, 2) == 6);
  CHECK(make_qnn(3, 2).params.size() == qnn_param_count(3, 2));
  CHECK_THROWS(make_qnn(0, 1));
  CHECK_THROWS(make_qnn(2, -1));
}

TEST_CASE("zero parameters give the identity circuit") {
  QnnAnsatz ansatz = make_qnn(3, 2);
  UnitaryMatrix u = build_unitary(ansatz);
  CHECK((u.data - Eigen::MatrixXcd::Identity(8, 8)).norm() < 1e-12);
}

TEST_CASE("built circuits are unitary") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    QnnAnsatz ansatz = random_qnn(3, 3, seed);
    UnitaryMatrix u = build_unitary(ansatz);
    CHECK((u.data * u.data.adjoint() - Eigen::MatrixXcd::Identity(8, 8))
              .norm() < 1e-10);
  }
}

TEST_CASE("single-qubit rotation matches the closed form") {
  // One qubit, one layer, generator a X: exp(iaX) = cos a I + i sin a X.
  QnnAnsatz ansatz = make_qnn(1, 1);
  double a = 0.8;
  ansatz.params << a, 0.0, 0.0;
  UnitaryMatrix u = build_unitary(ansatz);
  CHECK(u.data(0, 0).real() == doctest::Approx(std::cos(a)).epsilon(1e-12));
  CHECK(u.data(0, 1).imag() == doctest::Approx(std::sin(a)).epsilon(1e-12));
  CHECK(std::abs(u.data(0, 1).real()) < 1e-14);

  // Full three-axis generator against the dense exponential oracle.
  ansatz.params << 0.3, -0.7, 0.45;
  PauliSumHamiltonian gen = make_pauli_sum(
      1, {PauliTerm{0.3, {{0, 'X'}}}, PauliTerm{-0.7, {{0, 'Y'}}},
          PauliTerm{0.45, {{0, 'Z'}}}});
  CHECK((build_unitary(ansatz).data - expi(gen)).norm() < 1e-11);
}

TEST_CASE("pair rotation matches the dense exponential oracle") {
  // Two qubits, one layer, singles zero: generator a XX + b YY + c ZZ.
  QnnAnsatz ansatz = make_qnn(2, 1);
  ansatz.params << 0, 0, 0, 0, 0, 0, 0.4, -0.9, 0.25;
  PauliSumHamiltonian gen = make_pauli_sum(
      2, {PauliTerm{0.4, {{0, 'X'}, {1, 'X'}}},
          PauliTerm{-0.9, {{0, 'Y'}, {1, 'Y'}}},
          PauliTerm{0.25, {{0, 'Z'}, {1, 'Z'}}}});
  CHECK((build_unitary(ansatz).data - expi(gen)).norm() < 1e-11);

  // Pure ZZ rotation is the diagonal phase diag(e^ic, e^-ic, e^-ic, e^ic).
  ansatz.params << 0, 0, 0, 0, 0, 0, 0, 0, 0.6;
  Eigen::MatrixXcd u = build_unitary(ansatz).data;
  complex<double> expc = std::exp(complex<double>(0, 0.6));
  CHECK(std::abs(u(0, 0) - expc) < 1e-12);
  CHECK(std::abs(u(1, 1) - std::conj(expc)) < 1e-12);
  CHECK(std::abs(u(3, 3) - expc) < 1e-12);
}

TEST_CASE("one full layer matches the oracle ordering") {
  // Singles act before the pair inside a layer: U = P * S1 * S0 where the
  // singles commute with each other.
  QnnAnsatz ansatz = random_qnn(2, 1, 17);
  Eigen::VectorXd p = ansatz.params;
  PauliSumHamiltonian g0 = make_pauli_sum(
      2, {PauliTerm{p[0], {{0, 'X'}}}, PauliTerm{p[1], {{0, 'Y'}}},
          PauliTerm{p[2], {{0, 'Z'}}}});
  PauliSumHamiltonian g1 = make_pauli_sum(
      2, {PauliTerm{p[3], {{1, 'X'}}}, PauliTerm{p[4], {{1, 'Y'}}},
          PauliTerm{p[5], {{1, 'Z'}}}});
  PauliSumHamiltonian gp = make_pauli_sum(
      2, {PauliTerm{p[6], {{0, 'X'}, {1, 'X'}}},
          PauliTerm{p[7], {{0, 'Y'}, {1, 'Y'}}},
          PauliTerm{p[8], {{0, 'Z'}, {1, 'Z'}}}});
  Eigen::MatrixXcd oracle = expi(gp) * expi(g1) * expi(g0);
  CHECK((build_unitary(ansatz).data - oracle).norm() < 1e-11);
}

TEST_CASE("layers compose with layer 1 acting first") {
  // Splitting a 2-layer circuit into two 1-layer circuits must satisfy
  // U = U2 * U1. Layer 2 of the full circuit couples pair (1,2), which a
  // standalone circuit only has in an even layer, so embed slice 2 as layer
  // 2 of a circuit whose layer 1 is the identity.
  QnnAnsatz full = random_qnn(3, 2, 23);
  int n1 = 3 * 3 + 3 * qnn_pairs_in_layer(3, 1);

  QnnAnsatz first = make_qnn(3, 1);
  first.params = full.params.head(n1);

  QnnAnsatz second = make_qnn(3, 2);
  second.params.setZero();
  second.params.tail(full.params.size() - n1) =
      full.params.tail(full.params.size() - n1);

  Eigen::MatrixXcd composed =
      build_unitary(second).data * build_unitary(first).data;
  CHECK((build_unitary(full).data - composed).norm() < 1e-11);
}

TEST_CASE("pulled-back states preserve entropy and invert the circuit") {
  QnnAnsatz ansatz = random_qnn(3, 2, 31);
  DensityMatrix sigma = thermal_state_oracle(random_coupling_chain(3, 5), 0.8);

  DensityMatrix pulled = pulled_back_state(ansatz, sigma);
  CHECK_NOTHROW(validate_density(pulled));
  CHECK(von_neumann_entropy(pulled) ==
        doctest::Approx(von_neumann_entropy(sigma)).epsilon(1e-10));

  // Pulling back U sigma U† recovers sigma.
  DensityMatrix pushed = apply_unitary(sigma, build_unitary(ansatz));
  DensityMatrix back = pulled_back_state(ansatz, pushed);
  CHECK((back.data - sigma.data).norm() < 1e-10);

  CHECK_THROWS(pulled_back_state(
      ansatz, thermal_state_oracle(random_coupling_chain(2, 5), 0.8)));
}

TEST_CASE("JSON round-trip") {
  QnnAnsatz ansatz = random_qnn(3, 2, 41);
  QnnAnsatz back = qnn_from_json(qnn_to_json(ansatz));
  CHECK(back.n_qubits == ansatz.n_qubits);
  CHECK(back.n_layers == ansatz.n_layers);
  CHECK((back.params - ansatz.params).norm() < 1e-15);
  CHECK_THROWS(qnn_from_json(
      R"({"n_qubits": 2, "n_layers": 1, "params": [0.0]})"));
}
