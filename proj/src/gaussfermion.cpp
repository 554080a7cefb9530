#include "qhbm/gaussfermion.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unsupported/Eigen/KroneckerProduct>

#include "antisymmetric_blocks.hpp"
#include "qhbm/rng.hpp"

namespace qhbm {

namespace {

constexpr double kAntisymTol = 1e-10;
constexpr double kPhysTol = 1e-9;  // slack on singular values <= 1
constexpr int kDenseFermionCap = 5;
constexpr int kDenseFermionCapLarge = 8;
const double kNan = std::numeric_limits<double>::quiet_NaN();

void check_antisymmetric(const Eigen::MatrixXd& m, const char* what) {
  if ((m + m.transpose()).cwiseAbs().maxCoeff() > kAntisymTol) {
    throw std::invalid_argument(std::string(what) + " must be antisymmetric");
  }
}

void check_even_dim(int n_majoranas, const Eigen::MatrixXd& m,
                    const char* what) {
  if (n_majoranas < 2 || n_majoranas % 2 != 0) {
    throw std::invalid_argument(std::string(what) +
                                " needs an even, positive Majorana count");
  }
  if (m.rows() != n_majoranas || m.cols() != n_majoranas) {
    throw std::invalid_argument(std::string(what) + " has a mismatched shape");
  }
}

double binary_entropy(double p) {
  double total = 0.0;
  if (p > 0.0) total -= p * std::log(p);
  if (p < 1.0) total -= (1.0 - p) * std::log(1.0 - p);
  return total;
}

// ln(1 + e^x) without overflow.
double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

void check_lambdas(const Eigen::VectorXd& lambdas) {
  if (lambdas.size() < 1) {
    throw std::invalid_argument("need at least one fermionic mode");
  }
  if (lambdas.cwiseAbs().maxCoeff() > 1.0 + kPhysTol) {
    throw std::invalid_argument("fermionic occupation |lambda| exceeds 1");
  }
}

void check_rotations(const GivensNetwork& net, int n) {
  for (const GivensRotation& rot : net.rotations) {
    if (rot.a < 0 || rot.b < 0 || rot.a >= n || rot.b >= n || rot.a == rot.b) {
      throw std::invalid_argument("Givens rotation pair out of range");
    }
  }
}

// i * eps * c_a c_b contributes h_ab += eps/2, h_ba -= eps/2.
void add_term(Eigen::MatrixXd& h, int a, int b, double eps) {
  h(a, b) += 0.5 * eps;
  h(b, a) -= 0.5 * eps;
}

}  // namespace

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

void validate_fermion_covariance(const FermionCovariance& cov) {
  check_even_dim(cov.n_majoranas, cov.gamma, "fermion covariance");
  check_antisymmetric(cov.gamma, "fermion covariance");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cov.gamma);
  if (svd.singularValues().maxCoeff() > 1.0 + kPhysTol) {
    throw std::invalid_argument(
        "fermion covariance is unphysical: largest singular value " +
        std::to_string(svd.singularValues().maxCoeff()));
  }
}

FermionCovariance make_fermion_covariance(int n_majoranas,
                                          Eigen::MatrixXd gamma) {
  FermionCovariance cov{n_majoranas, std::move(gamma)};
  validate_fermion_covariance(cov);
  return cov;
}

MajoranaQuadraticH make_majorana_h(int n_majoranas, Eigen::MatrixXd h,
                                   double e_const) {
  check_even_dim(n_majoranas, h, "Majorana Hamiltonian");
  check_antisymmetric(h, "Majorana Hamiltonian");
  return MajoranaQuadraticH{n_majoranas, std::move(h), e_const};
}

FermionCovariance latent_fermion_covariance(const FermionLatent& latent) {
  check_lambdas(latent.lambdas);
  int m = 2 * latent.n_fermions();
  Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(m, m);
  for (int j = 0; j < latent.n_fermions(); ++j) {
    gamma(2 * j, 2 * j + 1) = latent.lambdas[j];
    gamma(2 * j + 1, 2 * j) = -latent.lambdas[j];
  }
  return FermionCovariance{m, std::move(gamma)};
}

// ---------------------------------------------------------------------------
// Givens networks
// ---------------------------------------------------------------------------

GivensNetwork make_brick_wall(int n_modes, int n_layers) {
  if (n_modes < 2 || n_layers < 0) {
    throw std::invalid_argument("brick wall needs n_modes >= 2, n_layers >= 0");
  }
  GivensNetwork net;
  for (int layer = 1; layer <= n_layers; ++layer) {
    int first = (layer % 2 == 1) ? 0 : 1;
    for (int a = first; a + 1 < n_modes; a += 2) {
      net.rotations.push_back(GivensRotation{a, a + 1, 0.0});
    }
  }
  return net;
}

int default_brick_wall_layers(int n_modes) {
  // n_modes alternating layers give exactly n(n-1)/2 rotations for even n.
  return n_modes;
}

Eigen::MatrixXd realize_givens(const GivensNetwork& net, int n) {
  if (n < 1) {
    throw std::invalid_argument("realize_givens needs n >= 1");
  }
  check_rotations(net, n);
  Eigen::MatrixXd o = Eigen::MatrixXd::Identity(n, n);
  for (const GivensRotation& rot : net.rotations) {
    // Left-multiply by the embedded rotation: only rows a and b change.
    double c = std::cos(rot.angle), s = std::sin(rot.angle);
    Eigen::RowVectorXd row_a = o.row(rot.a);
    o.row(rot.a) = c * row_a - s * o.row(rot.b);
    o.row(rot.b) = s * row_a + c * o.row(rot.b);
  }
  return o;
}

// ---------------------------------------------------------------------------
// Hamiltonians and oracles
// ---------------------------------------------------------------------------

MajoranaQuadraticH build_dwave(int nx, int ny, double t, double delta) {
  if (nx < 1 || ny < 1) {
    throw std::invalid_argument("d-wave lattice needs nx, ny >= 1");
  }
  const int n_orbitals = 2 * nx * ny;  // orbital = 2*site + spin (up=0)
  const int m = 2 * n_orbitals;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, m);

  auto orbital = [&](int x, int y, int spin) {
    return 2 * (y * nx + x) + spin;
  };
  // Hopping -t(a_u^dag a_v + h.c.) = i(t/2)(c_{2u} c_{2v+1} - c_{2u+1} c_{2v});
  // pairing D(a_u^dag a_v^dag + a_v a_u) = i(D/2)(c_{2u} c_{2v+1} + c_{2u+1} c_{2v}).
  auto add_bond = [&](int site_u_x, int site_u_y, int site_v_x, int site_v_y) {
    for (int spin = 0; spin < 2; ++spin) {
      int u = orbital(site_u_x, site_u_y, spin);
      int v = orbital(site_v_x, site_v_y, spin);
      add_term(h, 2 * u, 2 * v + 1, 0.5 * t);
      add_term(h, 2 * u + 1, 2 * v, -0.5 * t);
    }
    int up_u = orbital(site_u_x, site_u_y, 0);
    int dn_u = orbital(site_u_x, site_u_y, 1);
    int up_v = orbital(site_v_x, site_v_y, 0);
    int dn_v = orbital(site_v_x, site_v_y, 1);
    // +delta (u up, v down) and -delta (u down, v up) singlet pairing.
    add_term(h, 2 * up_u, 2 * dn_v + 1, 0.5 * delta);
    add_term(h, 2 * up_u + 1, 2 * dn_v, 0.5 * delta);
    add_term(h, 2 * dn_u, 2 * up_v + 1, -0.5 * delta);
    add_term(h, 2 * dn_u + 1, 2 * up_v, -0.5 * delta);
  };

  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      if (x + 1 < nx) add_bond(x, y, x + 1, y);
      if (y + 1 < ny) add_bond(x, y, x, y + 1);
    }
  }
  return MajoranaQuadraticH{m, std::move(h), 0.0};
}

CanonicalFermionForm canonical_form(const MajoranaQuadraticH& h) {
  check_even_dim(h.n_majoranas, h.h, "Majorana Hamiltonian");
  check_antisymmetric(h.h, "Majorana Hamiltonian");
  AntisymmetricBlocks blocks = antisymmetric_canonical_blocks(h.h);
  const Eigen::Index n = h.n_majoranas / 2;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return blocks.b[a] < blocks.b[b];
  });

  CanonicalFermionForm result;
  result.epsilons.resize(n);
  Eigen::MatrixXd u(h.n_majoranas, h.n_majoranas);
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index src = order[static_cast<std::size_t>(k)];
    result.epsilons[k] = blocks.b[src];
    u.col(2 * k) = blocks.u.col(2 * src);
    u.col(2 * k + 1) = blocks.u.col(2 * src + 1);
  }
  result.o = u.transpose();  // O h O^T = canonical blocks
  return result;
}

FermionCovariance thermal_covariance_oracle(const MajoranaQuadraticH& h,
                                            double beta) {
  if (beta < 0.0) {
    throw std::invalid_argument("thermal covariance requires beta >= 0");
  }
  CanonicalFermionForm canon = canonical_form(h);
  FermionLatent latent;
  latent.lambdas = (-(2.0 * beta) * canon.epsilons.array()).tanh();
  Eigen::MatrixXd gamma_can = latent_fermion_covariance(latent).gamma;
  return FermionCovariance{h.n_majoranas,
                           canon.o.transpose() * gamma_can * canon.o};
}

double fermion_log_partition(const MajoranaQuadraticH& h, double beta) {
  CanonicalFermionForm canon = canonical_form(h);
  double log_z = -beta * h.e_const;
  for (Eigen::Index j = 0; j < canon.epsilons.size(); ++j) {
    // Canonical block eps: mode energies {0, -4 eps} plus constant 2 eps.
    log_z += softplus(4.0 * beta * canon.epsilons[j]) -
             2.0 * beta * canon.epsilons[j];
  }
  return log_z;
}

// ---------------------------------------------------------------------------
// Thermodynamics
// ---------------------------------------------------------------------------

double fermion_entropy(const Eigen::VectorXd& lambdas) {
  check_lambdas(lambdas);
  double total = 0.0;
  for (Eigen::Index j = 0; j < lambdas.size(); ++j) {
    double mag = std::min(std::abs(lambdas[j]), 1.0);
    total += binary_entropy(0.5 * (1.0 - mag));
  }
  return total;
}

double energy_expectation(const MajoranaQuadraticH& h,
                          const FermionCovariance& gamma) {
  if (h.n_majoranas != gamma.n_majoranas) {
    throw std::invalid_argument("energy_expectation: dimension mismatch");
  }
  return h.h.cwiseProduct(gamma.gamma).sum() + h.e_const;
}

// ---------------------------------------------------------------------------
// VQT
// ---------------------------------------------------------------------------

FermionCovariance fermion_visible_covariance(const FermionLatent& latent,
                                             const GivensNetwork& net) {
  int m = 2 * latent.n_fermions();
  Eigen::MatrixXd o = realize_givens(net, m);
  Eigen::MatrixXd gamma = latent_fermion_covariance(latent).gamma;
  return FermionCovariance{m, o.transpose() * gamma * o};
}

double vqt_fermion_loss(const FermionLatent& latent, const GivensNetwork& net,
                        const MajoranaQuadraticH& h, double beta) {
  if (2 * latent.n_fermions() != h.n_majoranas) {
    throw std::invalid_argument("vqt_fermion_loss: dimension mismatch");
  }
  if (beta <= 0.0) {
    throw std::invalid_argument("vqt_fermion_loss requires beta > 0");
  }
  return beta * energy_expectation(h, fermion_visible_covariance(latent, net)) -
         fermion_entropy(latent.lambdas);
}

Eigen::VectorXd vqt_fermion_grad(const FermionLatent& latent,
                                 const GivensNetwork& net,
                                 const MajoranaQuadraticH& h, double beta) {
  const int m = h.n_majoranas;
  const int n_f = latent.n_fermions();
  if (2 * n_f != m) {
    throw std::invalid_argument("vqt_fermion_grad: dimension mismatch");
  }
  check_rotations(net, m);
  const Eigen::Index n_rot = static_cast<Eigen::Index>(net.rotations.size());
  Eigen::VectorXd grad(n_f + n_rot);

  Eigen::MatrixXd o = realize_givens(net, m);

  // lambda components: d<H>/dlambda_j = 2 O_row(2j) h O_row(2j+1)^T and
  // dS/dlambda = -atanh(lambda).
  for (int j = 0; j < n_f; ++j) {
    double d_energy = 2.0 * o.row(2 * j) * h.h * o.row(2 * j + 1).transpose();
    grad[j] = beta * d_energy + std::atanh(latent.lambdas[j]);
  }

  // Angle components. With W = Gamma_theta O h and the derivative of one
  // rotation being the same rotation at angle + pi/2 restricted to its 2x2
  // block, d<H>/dphi_k = -2 sum(dO_k ∘ W), dO_k = suffix_k dG_k prefix_{k-1}.
  if (n_rot > 0) {
    Eigen::MatrixXd gamma_theta = latent_fermion_covariance(latent).gamma;
    Eigen::MatrixXd w = gamma_theta * o * h.h;

    std::vector<Eigen::MatrixXd> prefixes;
    prefixes.reserve(static_cast<std::size_t>(n_rot));
    Eigen::MatrixXd running = Eigen::MatrixXd::Identity(m, m);
    for (const GivensRotation& rot : net.rotations) {
      prefixes.push_back(running);  // prefix_{k-1}
      double c = std::cos(rot.angle), s = std::sin(rot.angle);
      Eigen::RowVectorXd row_a = running.row(rot.a);
      running.row(rot.a) = c * row_a - s * running.row(rot.b);
      running.row(rot.b) = s * row_a + c * running.row(rot.b);
    }

    Eigen::MatrixXd suffix = Eigen::MatrixXd::Identity(m, m);
    for (Eigen::Index k = n_rot - 1; k >= 0; --k) {
      const GivensRotation& rot = net.rotations[static_cast<std::size_t>(k)];
      double c = std::cos(rot.angle), s = std::sin(rot.angle);
      const Eigen::MatrixXd& prefix = prefixes[static_cast<std::size_t>(k)];
      // Rows of dG_k * prefix: the shifted rotation's 2x2 block only.
      Eigen::RowVectorXd row_a = -s * prefix.row(rot.a) - c * prefix.row(rot.b);
      Eigen::RowVectorXd row_b = c * prefix.row(rot.a) - s * prefix.row(rot.b);
      double contraction = suffix.col(rot.a).dot(w * row_a.transpose()) +
                           suffix.col(rot.b).dot(w * row_b.transpose());
      grad[n_f + k] = -2.0 * beta * contraction;
      // Fold G_k into the suffix for the next (earlier) rotation.
      Eigen::VectorXd col_a = suffix.col(rot.a);
      suffix.col(rot.a) = c * col_a + s * suffix.col(rot.b);
      suffix.col(rot.b) = -s * col_a + c * suffix.col(rot.b);
    }
  }
  return grad;
}

FermionVqtResult train_vqt_fermion(const MajoranaQuadraticH& h, double beta,
                                   int n_layers, const TrainConfig& config,
                                   const FermionStepAnnotator& annotate) {
  const int m = h.n_majoranas;
  const int n_f = m / 2;
  GivensNetwork net = make_brick_wall(m, n_layers);
  const Eigen::Index n_rot = static_cast<Eigen::Index>(net.rotations.size());
  const double minus_log_z = -fermion_log_partition(h, beta);

  Rng rng(config.seed);
  Eigen::VectorXd flat(n_f + n_rot);
  for (int j = 0; j < n_f; ++j) {
    flat[j] = uniform_in(rng, -1.0, 1.0);
  }
  for (Eigen::Index k = 0; k < n_rot; ++k) {
    flat[n_f + k] = uniform_in(rng, -0.5, 0.5);
  }

  auto unflatten = [&](const Eigen::VectorXd& v) {
    FermionLatent latent;
    latent.lambdas = v.head(n_f).array().tanh();
    GivensNetwork current = net;
    for (Eigen::Index k = 0; k < n_rot; ++k) {
      current.rotations[static_cast<std::size_t>(k)].angle = v[n_f + k];
    }
    return std::make_pair(std::move(latent), std::move(current));
  };
  auto loss_of = [&](const Eigen::VectorXd& v) {
    auto [latent, current] = unflatten(v);
    return vqt_fermion_loss(latent, current, h, beta);
  };
  auto grad_of = [&](const Eigen::VectorXd& v) {
    auto [latent, current] = unflatten(v);
    Eigen::VectorXd g = vqt_fermion_grad(latent, current, h, beta);
    // Chain rule through lambda = tanh(theta).
    g.head(n_f).array() *= 1.0 - latent.lambdas.array().square();
    return g;
  };
  MetricsFn metrics = [&](int step, const Eigen::VectorXd& v, double loss) {
    TrainStep record;
    record.step = step;
    record.loss = loss;
    record.trace_distance = kNan;
    record.fidelity = kNan;
    record.relative_entropy = loss - minus_log_z;  // free-energy gap
    if (annotate) {
      auto [latent, current] = unflatten(v);
      annotate(step, latent, current, record);
    }
    return record;
  };

  auto [final_flat, trace] = descend(loss_of, grad_of, flat, config, metrics);
  auto [latent, final_net] = unflatten(final_flat);
  return FermionVqtResult{std::move(latent), std::move(final_net),
                          std::move(trace)};
}

// ---------------------------------------------------------------------------
// Dense Jordan-Wigner oracle
// ---------------------------------------------------------------------------

std::vector<Eigen::MatrixXcd> dense_majoranas(int n_fermions) {
  if (n_fermions < 1 || n_fermions > kDenseFermionCapLarge) {
    throw std::invalid_argument("dense Majoranas support 1 to 8 fermions");
  }
  Eigen::Matrix2cd x, y, z, id;
  x << 0, 1, 1, 0;
  y << 0, std::complex<double>(0, -1), std::complex<double>(0, 1), 0;
  z << 1, 0, 0, -1;
  id.setIdentity();

  std::vector<Eigen::MatrixXcd> majoranas;
  majoranas.reserve(2 * static_cast<std::size_t>(n_fermions));
  for (int k = 0; k < n_fermions; ++k) {
    for (int type = 0; type < 2; ++type) {
      // c_{2k} = Z_0..Z_{k-1} X_k; c_{2k+1} = -Z_0..Z_{k-1} Y_k.
      Eigen::MatrixXcd op = Eigen::MatrixXcd::Identity(1, 1);
      for (int q = 0; q < n_fermions; ++q) {
        const Eigen::Matrix2cd& factor =
            (q < k) ? z : (q == k) ? (type == 0 ? x : y) : id;
        op = kroneckerProduct(op, factor).eval();
      }
      majoranas.push_back(type == 0 ? op : (-op).eval());
    }
  }
  return majoranas;
}

DensityMatrix dense_jw_oracle(const MajoranaQuadraticH& h, double beta,
                              bool allow_large) {
  check_even_dim(h.n_majoranas, h.h, "Majorana Hamiltonian");
  check_antisymmetric(h.h, "Majorana Hamiltonian");
  const int n_f = h.n_majoranas / 2;
  const int cap = allow_large ? kDenseFermionCapLarge : kDenseFermionCap;
  if (n_f > cap) {
    throw std::invalid_argument("dense JW oracle capped at " +
                                std::to_string(cap) + " fermions");
  }
  std::vector<Eigen::MatrixXcd> c = dense_majoranas(n_f);
  const Eigen::Index dim = Eigen::Index{1} << n_f;
  Eigen::MatrixXcd dense = h.e_const * Eigen::MatrixXcd::Identity(dim, dim);
  const std::complex<double> two_i(0.0, 2.0);
  for (int a = 0; a < h.n_majoranas; ++a) {
    for (int b = a + 1; b < h.n_majoranas; ++b) {
      if (h.h(a, b) != 0.0) {
        // i sum_ab = 2i sum_{a<b} for antisymmetric h.
        dense += (two_i * h.h(a, b)) * (c[a] * c[b]);
      }
    }
  }
  return thermal_state_of_dense(dense, beta);
}

FermionCovariance covariance_from_dense(const DensityMatrix& rho) {
  const int n_f = rho.n_qubits;
  const int m = 2 * n_f;
  std::vector<Eigen::MatrixXcd> c = dense_majoranas(n_f);
  Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(m, m);
  for (int a = 0; a < m; ++a) {
    Eigen::MatrixXcd rho_ca = rho.data * c[a];
    for (int b = a + 1; b < m; ++b) {
      // Gamma_ab = (i/2) tr(rho [c_a, c_b]) = i tr(rho c_a c_b) for a != b.
      std::complex<double> trace = (rho_ca.cwiseProduct(c[b].transpose())).sum();
      gamma(a, b) = -trace.imag();
      gamma(b, a) = -gamma(a, b);
    }
  }
  return FermionCovariance{m, std::move(gamma)};
}

DensityMatrix dense_model_state(const FermionLatent& latent,
                                const GivensNetwork& net, bool allow_large) {
  check_lambdas(latent.lambdas);
  const int m = 2 * latent.n_fermions();
  Eigen::MatrixXd o = realize_givens(net, m);
  Eigen::MatrixXd blocks = Eigen::MatrixXd::Zero(m, m);
  for (int j = 0; j < latent.n_fermions(); ++j) {
    // lambda = -tanh(2 eps) at beta = 1 inverts to eps = -atanh(lambda)/2.
    double lam = std::clamp(latent.lambdas[j], -1.0 + 1e-12, 1.0 - 1e-12);
    double eps = -0.5 * std::atanh(lam);
    blocks(2 * j, 2 * j + 1) = eps;
    blocks(2 * j + 1, 2 * j) = -eps;
  }
  MajoranaQuadraticH model_h{m, o.transpose() * blocks * o, 0.0};
  return dense_jw_oracle(model_h, 1.0, allow_large);
}

// ---------------------------------------------------------------------------
// External interfaces
// ---------------------------------------------------------------------------

namespace {

std::string matrix_rows_to_csv(const Eigen::MatrixXd& m) {
  std::string csv;
  char buffer[64];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buffer, sizeof(buffer), "%.17g", m(r, c));
      csv += buffer;
      csv += (c + 1 < m.cols()) ? ',' : '\n';
    }
  }
  return csv;
}

Eigen::MatrixXd matrix_rows_from_csv(std::istream& in, Eigen::Index dim) {
  Eigen::MatrixXd m(dim, dim);
  std::string line;
  for (Eigen::Index r = 0; r < dim; ++r) {
    if (!std::getline(in, line)) {
      throw std::invalid_argument("matrix CSV has too few rows");
    }
    std::istringstream row(line);
    std::string cell;
    for (Eigen::Index c = 0; c < dim; ++c) {
      if (!std::getline(row, cell, ',')) {
        throw std::invalid_argument("matrix CSV has too few columns");
      }
      m(r, c) = std::stod(cell);
    }
  }
  return m;
}

}  // namespace

std::string majorana_h_to_csv(const MajoranaQuadraticH& h) {
  char header[96];
  std::snprintf(header, sizeof(header),
                "# n_majoranas=%d kind=h\n# e_const=%.17g\n", h.n_majoranas,
                h.e_const);
  return header + matrix_rows_to_csv(h.h);
}

MajoranaQuadraticH majorana_h_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int m = 0;
  double e_const = 0.0;
  if (!std::getline(in, line) ||
      std::sscanf(line.c_str(), "# n_majoranas=%d kind=h", &m) != 1) {
    throw std::invalid_argument("expected header `# n_majoranas=M kind=h`");
  }
  if (!std::getline(in, line) ||
      std::sscanf(line.c_str(), "# e_const=%lf", &e_const) != 1) {
    throw std::invalid_argument("expected header `# e_const=<value>`");
  }
  return make_majorana_h(m, matrix_rows_from_csv(in, m), e_const);
}

std::string fermion_covariance_to_csv(const FermionCovariance& cov) {
  char header[64];
  std::snprintf(header, sizeof(header), "# n_majoranas=%d kind=gamma\n",
                cov.n_majoranas);
  return header + matrix_rows_to_csv(cov.gamma);
}

FermionCovariance fermion_covariance_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int m = 0;
  if (!std::getline(in, line) ||
      std::sscanf(line.c_str(), "# n_majoranas=%d kind=gamma", &m) != 1) {
    throw std::invalid_argument("expected header `# n_majoranas=M kind=gamma`");
  }
  return make_fermion_covariance(m, matrix_rows_from_csv(in, m));
}

}  // namespace qhbm
