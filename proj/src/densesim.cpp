#include "qhbm/densesim.hpp"

#include <Eigen/Eigenvalues>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>

#include "qhbm/hamiltonians.hpp"

namespace qhbm {

namespace {

constexpr double kHermTol = 1e-10;
constexpr double kTraceTol = 1e-10;
constexpr double kEigTol = 1e-10;

std::atomic<int>& cap_storage() {
  static std::atomic<int> cap = [] {
    if (const char* env = std::getenv("QHBM_DENSE_CAP")) {
      int v = std::atoi(env);
      if (v >= 1) return v;
    }
    return 12;
  }();
  return cap;
}

bool is_power_of_two(Eigen::Index n) { return n > 0 && (n & (n - 1)) == 0; }

// Eigenvalues of a density matrix, clamped per the project convention:
// [-1e-10, 0] -> 0, below -1e-10 -> error.
Eigen::VectorXd clamped_spectrum(const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho.data,
                                                         Eigen::EigenvaluesOnly);
  Eigen::VectorXd evals = solver.eigenvalues();
  for (Eigen::Index i = 0; i < evals.size(); ++i) {
    if (evals[i] < -kEigTol) {
      throw std::runtime_error(
          "density matrix has eigenvalue " + std::to_string(evals[i]) +
          " below the -1e-10 positivity tolerance");
    }
    if (evals[i] < 0.0) evals[i] = 0.0;
  }
  return evals;
}

}  // namespace

int dense_qubit_cap() { return cap_storage().load(); }

void set_dense_qubit_cap(int n_qubits) {
  if (n_qubits < 1) {
    throw std::invalid_argument("dense qubit cap must be at least 1");
  }
  cap_storage().store(n_qubits);
}

void validate_density(const DensityMatrix& rho) {
  const Eigen::Index dim = rho.data.rows();
  if (rho.data.cols() != dim || !is_power_of_two(dim) ||
      dim != (Eigen::Index{1} << rho.n_qubits)) {
    throw std::runtime_error("density matrix dimension does not match 2^n_qubits");
  }
  double herm_err = (rho.data - rho.data.adjoint()).cwiseAbs().maxCoeff();
  if (herm_err > kHermTol) {
    throw std::runtime_error("density matrix is not Hermitian (max |rho - rho†| = " +
                             std::to_string(herm_err) + ")");
  }
  double trace_err = std::abs(rho.data.trace() - std::complex<double>(1.0, 0.0));
  if (trace_err > kTraceTol) {
    throw std::runtime_error("density matrix trace differs from 1 by " +
                             std::to_string(trace_err));
  }
  clamped_spectrum(rho);  // throws on positivity violation
}

void validate_unitary(const UnitaryMatrix& u) {
  const Eigen::Index dim = u.data.rows();
  if (u.data.cols() != dim || dim != u.dim || !is_power_of_two(dim)) {
    throw std::runtime_error("unitary matrix must be square with power-of-2 dimension");
  }
  Eigen::MatrixXcd residual =
      u.data * u.data.adjoint() - Eigen::MatrixXcd::Identity(dim, dim);
  double err = residual.cwiseAbs().maxCoeff();
  if (err > kHermTol) {
    throw std::runtime_error("matrix is not unitary (max |UU† - I| = " +
                             std::to_string(err) + ")");
  }
}

DensityMatrix make_density(int n_qubits, Eigen::MatrixXcd data) {
  DensityMatrix rho{n_qubits, std::move(data)};
  validate_density(rho);
  return rho;
}

UnitaryMatrix make_unitary(Eigen::MatrixXcd data) {
  UnitaryMatrix u{static_cast<int>(data.rows()), std::move(data)};
  validate_unitary(u);
  return u;
}

DensityMatrix apply_unitary(const DensityMatrix& rho, const UnitaryMatrix& u) {
  if (rho.dim() != u.data.rows()) {
    throw std::invalid_argument("apply_unitary: dimension mismatch");
  }
  return DensityMatrix{rho.n_qubits, u.data * rho.data * u.data.adjoint()};
}

DensityMatrix thermal_state_of_dense(const Eigen::MatrixXcd& h_dense,
                                     double beta) {
  if (beta < 0.0) {
    throw std::invalid_argument("thermal state requires beta >= 0");
  }
  const Eigen::Index dim = h_dense.rows();
  if (h_dense.cols() != dim || !is_power_of_two(dim)) {
    throw std::invalid_argument("dense Hamiltonian must be square with power-of-2 dimension");
  }
  int n_qubits = 0;
  while ((Eigen::Index{1} << n_qubits) < dim) ++n_qubits;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h_dense);
  // Gibbs weights relative to the ground energy, for overflow safety.
  Eigen::VectorXd evals = solver.eigenvalues();
  double e_min = evals.minCoeff();
  Eigen::VectorXd weights = (-beta * (evals.array() - e_min)).exp();
  weights /= weights.sum();
  Eigen::MatrixXcd rho = solver.eigenvectors() * weights.asDiagonal() *
                         solver.eigenvectors().adjoint();
  // Symmetrize away the last bits of round-off.
  rho = 0.5 * (rho + rho.adjoint().eval());
  return DensityMatrix{n_qubits, std::move(rho)};
}

DensityMatrix thermal_state_oracle(const PauliSumHamiltonian& h, double beta) {
  if (h.n_qubits > dense_qubit_cap()) {
    throw std::runtime_error("thermal_state_oracle: " + std::to_string(h.n_qubits) +
                             " qubits exceeds the dense cap of " +
                             std::to_string(dense_qubit_cap()));
  }
  return thermal_state_of_dense(dense_matrix(h), beta);
}

double von_neumann_entropy(const DensityMatrix& rho) {
  Eigen::VectorXd evals = clamped_spectrum(rho);
  double s = 0.0;
  for (Eigen::Index i = 0; i < evals.size(); ++i) {
    if (evals[i] > 0.0) s -= evals[i] * std::log(evals[i]);
  }
  return s;
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) {
    throw std::invalid_argument("trace_distance: dimension mismatch");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho.data - sigma.data,
                                                         Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) {
    throw std::invalid_argument("fidelity: dimension mismatch");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> rho_solver(rho.data);
  Eigen::VectorXd rho_evals = rho_solver.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXcd sqrt_rho = rho_solver.eigenvectors() *
                              rho_evals.cwiseSqrt().asDiagonal() *
                              rho_solver.eigenvectors().adjoint();
  Eigen::MatrixXcd inner = sqrt_rho * sigma.data * sqrt_rho;
  // inner is Hermitian positive semidefinite; fidelity = (tr sqrt(inner))^2.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> inner_solver(
      inner, Eigen::EigenvaluesOnly);
  double root_sum = inner_solver.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return root_sum * root_sum;
}

double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) {
    throw std::invalid_argument("relative_entropy: dimension mismatch");
  }
  constexpr double kSupportTol = 1e-12;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> sigma_solver(sigma.data);
  Eigen::VectorXd q = sigma_solver.eigenvalues();
  // Weight of rho on each eigenvector of sigma.
  Eigen::MatrixXcd rho_in_sigma_basis = sigma_solver.eigenvectors().adjoint() *
                                        rho.data * sigma_solver.eigenvectors();

  double cross = 0.0;  // tr(rho ln sigma)
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    double w = rho_in_sigma_basis(i, i).real();
    if (q[i] < kSupportTol) {
      if (w > kSupportTol) {
        return std::numeric_limits<double>::infinity();
      }
      continue;  // negligible weight on a null direction
    }
    cross += w * std::log(q[i]);
  }

  double result = -von_neumann_entropy(rho) - cross;
  // Clamp round-off noise: the divergence is nonnegative by Klein's inequality.
  if (result < 0.0 && result > -1e-9) result = 0.0;
  return result;
}

DensityMatrix partial_trace(const DensityMatrix& rho,
                            const std::vector<int>& keep) {
  const int n = rho.n_qubits;
  std::vector<bool> seen(n, false);
  for (int q : keep) {
    if (q < 0 || q >= n) {
      throw std::invalid_argument("partial_trace: qubit index " +
                                  std::to_string(q) + " out of range");
    }
    if (seen[q]) {
      throw std::invalid_argument("partial_trace: duplicate qubit index " +
                                  std::to_string(q));
    }
    seen[q] = true;
  }

  const int k = static_cast<int>(keep.size());
  const Eigen::Index dim_keep = Eigen::Index{1} << k;
  const int n_traced = n - k;
  const Eigen::Index dim_traced = Eigen::Index{1} << n_traced;

  std::vector<int> traced;
  for (int q = 0; q < n; ++q) {
    if (!seen[q]) traced.push_back(q);
  }

  // Bit position of qubit q in the full index (qubit 0 is the MSB).
  auto bit_pos = [n](int q) { return n - 1 - q; };

  // Precompute the full-index contribution of each kept / traced sub-index.
  std::vector<Eigen::Index> keep_mask(dim_keep, 0);
  for (Eigen::Index a = 0; a < dim_keep; ++a) {
    Eigen::Index idx = 0;
    for (int i = 0; i < k; ++i) {
      if ((a >> (k - 1 - i)) & 1) idx |= Eigen::Index{1} << bit_pos(keep[i]);
    }
    keep_mask[a] = idx;
  }
  std::vector<Eigen::Index> traced_mask(dim_traced, 0);
  for (Eigen::Index e = 0; e < dim_traced; ++e) {
    Eigen::Index idx = 0;
    for (int i = 0; i < n_traced; ++i) {
      if ((e >> (n_traced - 1 - i)) & 1) {
        idx |= Eigen::Index{1} << bit_pos(traced[i]);
      }
    }
    traced_mask[e] = idx;
  }

  Eigen::MatrixXcd reduced = Eigen::MatrixXcd::Zero(dim_keep, dim_keep);
  for (Eigen::Index a = 0; a < dim_keep; ++a) {
    for (Eigen::Index b = 0; b < dim_keep; ++b) {
      std::complex<double> sum = 0.0;
      for (Eigen::Index e = 0; e < dim_traced; ++e) {
        sum += rho.data(keep_mask[a] | traced_mask[e],
                        keep_mask[b] | traced_mask[e]);
      }
      reduced(a, b) = sum;
    }
  }
  return DensityMatrix{k, std::move(reduced)};
}

}  // namespace qhbm
