#include "qhbm/gaussboson.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <json.hpp>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "antisymmetric_blocks.hpp"
#include "qhbm/rng.hpp"

namespace qhbm {

namespace {

constexpr double kSymTol = 1e-10;   // covariance symmetry
constexpr double kNuTol = 1e-9;     // uncertainty slack on nu >= 1
const double kNan = std::numeric_limits<double>::quiet_NaN();

void check_shape(const BosonCovariance& cov) {
  if (cov.n_modes < 1) {
    throw std::invalid_argument("covariance needs at least one mode");
  }
  Eigen::Index dim = 2 * static_cast<Eigen::Index>(cov.n_modes);
  if (cov.gamma.rows() != dim || cov.gamma.cols() != dim) {
    throw std::invalid_argument("covariance matrix must be 2N x 2N");
  }
}

// Unitary exp(A) for the anti-Hermitian generator encoded by `passive`
// (strict lower triangle re/im pairs, then N diagonal phases).
Eigen::MatrixXcd passive_unitary(const Eigen::VectorXd& passive, int n) {
  if (passive.size() != Eigen::Index{n} * n) {
    throw std::invalid_argument("passive parameter vector must have length N^2");
  }
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
  Eigen::Index k = 0;
  for (int i = 1; i < n; ++i) {
    for (int j = 0; j < i; ++j) {
      std::complex<double> l(passive[k], passive[k + 1]);
      k += 2;
      a(i, j) += l;
      a(j, i) -= std::conj(l);
    }
  }
  for (int i = 0; i < n; ++i) {
    a(i, i) = std::complex<double>(0.0, passive[k + i]);
  }
  // exp(A) = exp(iH) with H = -iA Hermitian.
  Eigen::MatrixXcd h = std::complex<double>(0.0, -1.0) * a;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h);
  Eigen::VectorXcd phases =
      (std::complex<double>(0.0, 1.0) * eig.eigenvalues().cast<std::complex<double>>().array())
          .exp();
  return eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
}

// Orthogonal-symplectic image [[X, Y], [-Y, X]] of a unitary X + iY.
Eigen::MatrixXd orthogonal_symplectic(const Eigen::MatrixXcd& u) {
  Eigen::Index n = u.rows();
  Eigen::MatrixXd o(2 * n, 2 * n);
  o.topLeftCorner(n, n) = u.real();
  o.topRightCorner(n, n) = u.imag();
  o.bottomLeftCorner(n, n) = -u.imag();
  o.bottomRightCorner(n, n) = u.real();
  return o;
}

// Williamson decomposition without the uncertainty check (shared by the
// oracle and the covariance validator).
WilliamsonResult williamson_impl(const Eigen::MatrixXd& gamma) {
  const Eigen::Index dim = gamma.rows();
  const Eigen::Index n = dim / 2;
  if ((gamma - gamma.transpose()).cwiseAbs().maxCoeff() > kSymTol) {
    throw std::invalid_argument("covariance matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gamma);
  if (eig.eigenvalues().minCoeff() <= 0.0) {
    throw std::invalid_argument("covariance matrix is not positive definite");
  }
  Eigen::MatrixXd inv_sqrt =
      eig.eigenvectors() *
      eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
      eig.eigenvectors().transpose();

  Eigen::MatrixXd omega = symplectic_form(static_cast<int>(n));
  Eigen::MatrixXd m = inv_sqrt * omega * inv_sqrt;
  m = 0.5 * (m - m.transpose().eval());
  AntisymmetricBlocks blocks = antisymmetric_canonical_blocks(m);
  if (blocks.b.minCoeff() <= 0.0) {
    throw std::invalid_argument("covariance matrix has a singular direction");
  }

  // Sort symplectic eigenvalues nu = 1/b ascending, carrying column pairs.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b2) {
    return blocks.b[a] > blocks.b[b2];
  });

  // Interleaved frame: S_int = D^{1/2} P^T Gamma^{-1/2} sends Gamma to
  // diag(nu_1, nu_1, ...) and Omega to the interleaved symplectic form.
  Eigen::VectorXd nus(n);
  Eigen::MatrixXd p(dim, dim);
  Eigen::VectorXd sqrt_nu_int(dim);
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index src = order[static_cast<std::size_t>(k)];
    nus[k] = 1.0 / blocks.b[src];
    p.col(2 * k) = blocks.u.col(2 * src);
    p.col(2 * k + 1) = blocks.u.col(2 * src + 1);
    sqrt_nu_int[2 * k] = std::sqrt(nus[k]);
    sqrt_nu_int[2 * k + 1] = sqrt_nu_int[2 * k];
  }
  Eigen::MatrixXd s_int = sqrt_nu_int.asDiagonal() * p.transpose() * inv_sqrt;

  // De-interleave rows back to xxpp ordering.
  WilliamsonResult result;
  result.nus = std::move(nus);
  result.s.resize(dim, dim);
  for (Eigen::Index k = 0; k < n; ++k) {
    result.s.row(k) = s_int.row(2 * k);
    result.s.row(n + k) = s_int.row(2 * k + 1);
  }
  return result;
}

void check_omegas(const Eigen::VectorXd& omegas) {
  if (omegas.size() < 1) {
    throw std::invalid_argument("need at least one mode frequency");
  }
  if (omegas.minCoeff() <= 0.0) {
    throw std::invalid_argument("mode frequencies must be positive");
  }
}

// Flat training vector layout: [u (N), passive1 (N^2), squeezes (N),
// passive2 (N^2)] with omega = exp(u).
std::pair<BosonLatent, SymplecticParams> unflatten_boson(
    const Eigen::VectorXd& flat, int n_modes) {
  Eigen::Index n = n_modes;
  BosonLatent latent;
  latent.omegas =
      flat.head(n).array().min(50.0).max(-50.0).exp();  // keep omega finite
  SymplecticParams params;
  params.n_modes = n_modes;
  params.passive1 = flat.segment(n, n * n);
  params.squeezes = flat.segment(n + n * n, n);
  params.passive2 = flat.tail(n * n);
  return {std::move(latent), std::move(params)};
}

}  // namespace

// ---------------------------------------------------------------------------
// Covariances
// ---------------------------------------------------------------------------

Eigen::MatrixXd symplectic_form(int n_modes) {
  Eigen::Index n = n_modes;
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  omega.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
  omega.bottomLeftCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
  return omega;
}

void validate_covariance(const BosonCovariance& cov) {
  check_shape(cov);
  WilliamsonResult result = williamson_impl(cov.gamma);
  if (result.nus.minCoeff() < 1.0 - kNuTol) {
    throw std::invalid_argument(
        "covariance violates the uncertainty relation: min symplectic "
        "eigenvalue " +
        std::to_string(result.nus.minCoeff()));
  }
}

BosonCovariance make_boson_covariance(int n_modes, Eigen::MatrixXd gamma) {
  BosonCovariance cov{n_modes, std::move(gamma)};
  validate_covariance(cov);
  return cov;
}

WilliamsonResult williamson_oracle(const BosonCovariance& cov) {
  check_shape(cov);
  WilliamsonResult result = williamson_impl(cov.gamma);
  if (result.nus.minCoeff() < 1.0 - kNuTol) {
    throw std::invalid_argument(
        "covariance violates the uncertainty relation: min symplectic "
        "eigenvalue " +
        std::to_string(result.nus.minCoeff()));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Symplectic parameterization
// ---------------------------------------------------------------------------

SymplecticParams make_symplectic_params(int n_modes) {
  if (n_modes < 1) {
    throw std::invalid_argument("need at least one mode");
  }
  Eigen::Index n = n_modes;
  return SymplecticParams{n_modes, Eigen::VectorXd::Zero(n * n),
                          Eigen::VectorXd::Zero(n),
                          Eigen::VectorXd::Zero(n * n)};
}

Eigen::MatrixXd realize_symplectic(const SymplecticParams& params) {
  const int n = params.n_modes;
  if (n < 1) {
    throw std::invalid_argument("need at least one mode");
  }
  if (params.squeezes.size() != n) {
    throw std::invalid_argument("squeeze vector must have length N");
  }
  Eigen::MatrixXd o1 = orthogonal_symplectic(passive_unitary(params.passive1, n));
  Eigen::MatrixXd o2 = orthogonal_symplectic(passive_unitary(params.passive2, n));
  Eigen::VectorXd d(2 * n);
  d.head(n) = params.squeezes.array().exp();
  d.tail(n) = (-params.squeezes.array()).exp();
  return o1 * d.asDiagonal() * o2;
}

// ---------------------------------------------------------------------------
// Latent thermal oscillators
// ---------------------------------------------------------------------------

double nu_from_omega(double omega) {
  if (omega <= 0.0) {
    throw std::invalid_argument("nu_from_omega requires omega > 0");
  }
  return 1.0 / std::tanh(0.5 * omega);
}

double omega_from_nu(double nu) {
  if (nu < 1.0 - kNuTol) {
    throw std::invalid_argument("omega_from_nu requires nu >= 1");
  }
  if (nu <= 1.0) {
    return std::numeric_limits<double>::infinity();
  }
  return std::log((nu + 1.0) / (nu - 1.0));
}

BosonCovariance latent_covariance(const BosonLatent& latent) {
  check_omegas(latent.omegas);
  Eigen::Index n = latent.omegas.size();
  Eigen::VectorXd nus(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    nus[j] = nu_from_omega(latent.omegas[j]);
  }
  Eigen::VectorXd diag(2 * n);
  diag << nus, nus;
  return BosonCovariance{static_cast<int>(n),
                         Eigen::MatrixXd(diag.asDiagonal())};
}

// ---------------------------------------------------------------------------
// Thermodynamics
// ---------------------------------------------------------------------------

double boson_entropy(const Eigen::VectorXd& omegas) {
  check_omegas(omegas);
  double total = 0.0;
  for (Eigen::Index j = 0; j < omegas.size(); ++j) {
    double w = omegas[j];
    total += w / std::expm1(w) - std::log1p(-std::exp(-w));
  }
  return total;
}

double boson_entropy_from_nus(const Eigen::VectorXd& nus) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < nus.size(); ++j) {
    if (nus[j] < 1.0 - kNuTol) {
      throw std::invalid_argument("symplectic eigenvalue below 1");
    }
    if (nus[j] <= 1.0) {
      continue;  // pure mode contributes nothing
    }
    double w = omega_from_nu(nus[j]);
    total += w / std::expm1(w) - std::log1p(-std::exp(-w));
  }
  return total;
}

double boson_log_partition(const Eigen::VectorXd& omegas) {
  check_omegas(omegas);
  double total = 0.0;
  for (Eigen::Index j = 0; j < omegas.size(); ++j) {
    total += -0.5 * omegas[j] - std::log1p(-std::exp(-omegas[j]));
  }
  return total;
}

// ---------------------------------------------------------------------------
// States and reductions
// ---------------------------------------------------------------------------

BosonCovariance harmonic_chain_ground(int n, double omega, double chi) {
  if (n < 1) {
    throw std::invalid_argument("chain needs at least one site");
  }
  if (omega <= 2.0 * std::abs(chi)) {
    throw std::invalid_argument(
        "harmonic chain is critical or unstable: need omega > 2|chi|");
  }
  Eigen::MatrixXd v = omega * Eigen::MatrixXd::Identity(n, n);
  for (int j = 0; j < n; ++j) {
    v(j, (j + 1) % n) += chi;
    v((j + 1) % n, j) += chi;
  }
  // Normalized potential W = V / omega gives the vacuum at chi = 0;
  // Gamma = diag(W^-1/2, W^1/2) is the pure ground-state covariance.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(v / omega);
  Eigen::VectorXd roots = eig.eigenvalues().cwiseSqrt();
  Eigen::MatrixXd sqrt_w =
      eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
  Eigen::MatrixXd inv_sqrt_w = eig.eigenvectors() *
                               roots.cwiseInverse().asDiagonal() *
                               eig.eigenvectors().transpose();
  Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  gamma.topLeftCorner(n, n) = inv_sqrt_w;
  gamma.bottomRightCorner(n, n) = sqrt_w;
  return make_boson_covariance(n, std::move(gamma));
}

BosonCovariance partial_trace_modes(const BosonCovariance& cov,
                                    const std::vector<int>& keep) {
  check_shape(cov);
  if (keep.empty()) {
    throw std::invalid_argument("must keep at least one mode");
  }
  std::vector<bool> seen(static_cast<std::size_t>(cov.n_modes), false);
  for (int idx : keep) {
    if (idx < 0 || idx >= cov.n_modes) {
      throw std::invalid_argument("mode index out of range");
    }
    if (seen[static_cast<std::size_t>(idx)]) {
      throw std::invalid_argument("duplicate mode index");
    }
    seen[static_cast<std::size_t>(idx)] = true;
  }
  Eigen::Index m = static_cast<Eigen::Index>(keep.size());
  Eigen::Index n = cov.n_modes;
  Eigen::MatrixXd sub(2 * m, 2 * m);
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index c = 0; c < m; ++c) {
      Eigen::Index kr = keep[static_cast<std::size_t>(r)];
      Eigen::Index kc = keep[static_cast<std::size_t>(c)];
      sub(r, c) = cov.gamma(kr, kc);
      sub(r, m + c) = cov.gamma(kr, n + kc);
      sub(m + r, c) = cov.gamma(n + kr, kc);
      sub(m + r, m + c) = cov.gamma(n + kr, n + kc);
    }
  }
  return make_boson_covariance(static_cast<int>(m), std::move(sub));
}

// ---------------------------------------------------------------------------
// QMHL
// ---------------------------------------------------------------------------

double qmhl_boson_loss(const BosonLatent& latent, const SymplecticParams& params,
                       const BosonCovariance& gamma_d) {
  check_omegas(latent.omegas);
  check_shape(gamma_d);
  const int n = gamma_d.n_modes;
  if (latent.n_modes() != n || params.n_modes != n) {
    throw std::invalid_argument("qmhl_boson_loss: mode count mismatch");
  }
  Eigen::MatrixXd s = realize_symplectic(params);
  Eigen::MatrixXd omega = symplectic_form(n);
  Eigen::MatrixXd s_inv = omega.transpose() * s.transpose() * omega;
  Eigen::MatrixXd pulled = s_inv * gamma_d.gamma * s_inv.transpose();
  // K = sum_j (omega_j / 4)(x_j^2 + p_j^2); <x^2> and <p^2> are the pulled-
  // back diagonal entries, and the zero-point term is carried by ln Z.
  double modular = 0.0;
  for (int j = 0; j < n; ++j) {
    modular += 0.25 * latent.omegas[j] * (pulled(j, j) + pulled(n + j, n + j));
  }
  return modular + boson_log_partition(latent.omegas);
}

BosonQmhlResult train_boson_qmhl(const BosonCovariance& gamma_d,
                                 const TrainConfig& config) {
  validate_covariance(gamma_d);
  const int n = gamma_d.n_modes;
  const double oracle_entropy =
      boson_entropy_from_nus(williamson_oracle(gamma_d).nus);

  Rng rng(config.seed);
  Eigen::VectorXd flat(2 * Eigen::Index{n} * n + 2 * n);
  for (Eigen::Index k = 0; k < flat.size(); ++k) {
    flat[k] = (k < n) ? uniform_in(rng, -0.3, 0.3) : uniform_in(rng, -0.1, 0.1);
  }

  auto loss_of = [&](const Eigen::VectorXd& v) {
    auto [latent, params] = unflatten_boson(v, n);
    return qmhl_boson_loss(latent, params, gamma_d);
  };
  auto grad_of = [&](const Eigen::VectorXd& v) {
    return finite_diff_grad(loss_of, v, config.epsilon_fd);
  };
  MetricsFn metrics = [&](int step, const Eigen::VectorXd&, double loss) {
    TrainStep record;
    record.step = step;
    record.loss = loss;
    record.trace_distance = kNan;
    record.fidelity = kNan;
    record.relative_entropy = loss - oracle_entropy;
    return record;
  };

  auto [final_flat, trace] = descend(loss_of, grad_of, flat, config, metrics);
  auto [latent, params] = unflatten_boson(final_flat, n);
  return BosonQmhlResult{std::move(latent), std::move(params), std::move(trace)};
}

std::pair<BosonCovariance, double> compress(const BosonLatent& latent,
                                            const SymplecticParams& params,
                                            const BosonCovariance& gamma_d,
                                            double ratio) {
  check_omegas(latent.omegas);
  check_shape(gamma_d);
  if (ratio < 0.0 || ratio > 1.0) {
    throw std::invalid_argument("compression ratio must lie in [0, 1]");
  }
  const int n = gamma_d.n_modes;
  if (latent.n_modes() != n || params.n_modes != n) {
    throw std::invalid_argument("compress: mode count mismatch");
  }
  Eigen::MatrixXd s = realize_symplectic(params);
  Eigen::MatrixXd omega = symplectic_form(n);
  Eigen::MatrixXd s_inv = omega.transpose() * s.transpose() * omega;
  Eigen::MatrixXd pulled = s_inv * gamma_d.gamma * s_inv.transpose();

  // Largest omega = coldest latent mode = least entropy carried.
  int k = static_cast<int>(std::ceil(ratio * n - 1e-9));
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return latent.omegas[a] > latent.omegas[b];
  });
  for (int chosen = 0; chosen < k; ++chosen) {
    Eigen::Index j = order[static_cast<std::size_t>(chosen)];
    pulled.row(j).setZero();
    pulled.col(j).setZero();
    pulled.row(n + j).setZero();
    pulled.col(n + j).setZero();
    pulled(j, j) = 1.0;
    pulled(n + j, n + j) = 1.0;
  }

  Eigen::MatrixXd reconstructed = s * pulled * s.transpose();
  double error = (reconstructed - gamma_d.gamma).cwiseAbs().maxCoeff() /
                 gamma_d.gamma.cwiseAbs().maxCoeff();
  return {make_boson_covariance(n, std::move(reconstructed)), error};
}

std::vector<Eigen::VectorXd> modular_modes(const SymplecticParams& params) {
  Eigen::MatrixXd s = realize_symplectic(params);
  std::vector<Eigen::VectorXd> modes;
  modes.reserve(static_cast<std::size_t>(s.cols()));
  for (Eigen::Index c = 0; c < s.cols(); ++c) {
    Eigen::VectorXd column = s.col(c).normalized();
    Eigen::Index peak = 0;
    column.cwiseAbs().maxCoeff(&peak);
    if (column[peak] < 0.0) {
      column = -column;
    }
    modes.push_back(std::move(column));
  }
  return modes;
}

// ---------------------------------------------------------------------------
// External interfaces
// ---------------------------------------------------------------------------

std::string covariance_to_csv(const BosonCovariance& cov) {
  check_shape(cov);
  std::string csv = "# n_modes=" + std::to_string(cov.n_modes) +
                    " ordering=xxpp\n";
  char buffer[64];
  for (Eigen::Index r = 0; r < cov.gamma.rows(); ++r) {
    for (Eigen::Index c = 0; c < cov.gamma.cols(); ++c) {
      std::snprintf(buffer, sizeof(buffer), "%.17g", cov.gamma(r, c));
      csv += buffer;
      csv += (c + 1 < cov.gamma.cols()) ? ',' : '\n';
    }
  }
  return csv;
}

BosonCovariance covariance_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("empty covariance CSV");
  }
  int n_modes = 0;
  if (std::sscanf(line.c_str(), "# n_modes=%d ordering=xxpp", &n_modes) != 1 ||
      n_modes < 1) {
    throw std::invalid_argument("covariance CSV must start with "
                                "`# n_modes=N ordering=xxpp`");
  }
  Eigen::Index dim = 2 * static_cast<Eigen::Index>(n_modes);
  Eigen::MatrixXd gamma(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    if (!std::getline(in, line)) {
      throw std::invalid_argument("covariance CSV has too few rows");
    }
    std::istringstream row(line);
    std::string cell;
    for (Eigen::Index c = 0; c < dim; ++c) {
      if (!std::getline(row, cell, ',')) {
        throw std::invalid_argument("covariance CSV has too few columns");
      }
      gamma(r, c) = std::stod(cell);
    }
  }
  return make_boson_covariance(n_modes, std::move(gamma));
}

std::string compression_to_json(double ratio, double error) {
  nlohmann::json doc;
  doc["ratio"] = ratio;
  doc["error"] = error;
  return doc.dump();
}

}  // namespace qhbm
