// Acceptance suite: one pass/fail line per criterion, tolerances pinned in
// code. Exit status is the number of failed criteria.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "qhbm/densesim.hpp"
#include "qhbm/gaussboson.hpp"
#include "qhbm/gaussfermion.hpp"
#include "qhbm/hamiltonians.hpp"
#include "qhbm/qhbm.hpp"
#include "qhbm/rng.hpp"
#include "qhbm/training.hpp"

using namespace qhbm;

namespace {

struct Criterion {
  int number;
  std::string name;
  std::function<bool(std::string&)> run;
};

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

QhbmModel random_model(int n_qubits, int n_layers, const std::string& kind,
                       std::uint64_t seed) {
  Rng rng(seed);
  Latent latent;
  if (kind == "bernoulli") {
    BernoulliLatent b;
    b.thetas.resize(n_qubits);
    for (int j = 0; j < n_qubits; ++j) b.thetas[j] = uniform_in(rng, -1.0, 1.0);
    latent = std::move(b);
  } else {
    MultinoulliLatent m;
    m.energies.resize(Eigen::Index{1} << n_qubits);
    for (Eigen::Index x = 0; x < m.energies.size(); ++x) {
      m.energies[x] = uniform_in(rng, -1.0, 1.0);
    }
    latent = std::move(m);
  }
  QnnAnsatz ansatz = make_qnn(n_qubits, n_layers);
  for (Eigen::Index k = 0; k < ansatz.params.size(); ++k) {
    ansatz.params[k] = uniform_in(rng, -0.5, 0.5);
  }
  return QhbmModel{std::move(latent), std::move(ansatz)};
}

MajoranaQuadraticH random_majorana(int n_fermions, std::uint64_t seed,
                                   double scale) {
  int m = 2 * n_fermions;
  Rng rng(seed);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, m);
  for (int a = 0; a < m; ++a) {
    for (int b = a + 1; b < m; ++b) {
      h(a, b) = uniform_in(rng, -scale, scale);
      h(b, a) = -h(a, b);
    }
  }
  return make_majorana_h(m, h, uniform_in(rng, -0.5, 0.5));
}

SymplecticParams random_symplectic(int n_modes, Rng& rng, double scale) {
  SymplecticParams params = make_symplectic_params(n_modes);
  for (Eigen::Index i = 0; i < params.passive1.size(); ++i) {
    params.passive1[i] = uniform_in(rng, -scale, scale);
  }
  for (Eigen::Index i = 0; i < params.squeezes.size(); ++i) {
    params.squeezes[i] = uniform_in(rng, -scale, scale);
  }
  for (Eigen::Index i = 0; i < params.passive2.size(); ++i) {
    params.passive2[i] = uniform_in(rng, -scale, scale);
  }
  return params;
}

char buffer[512];

std::string fmt(const char* format, ...) {
  va_list args;
  va_start(args, format);
  std::vsnprintf(buffer, sizeof(buffer), format, args);
  va_end(args);
  return std::string(buffer);
}

// ---------------------------------------------------------------------------
// 1. VQE limit: converged vqt_loss / beta approaches the ground energy.
// ---------------------------------------------------------------------------

// Mirror of the library's circuit layout with closed-form gate exponentials
// and cached layer prefix/suffix products, so a finite-difference probe only
// rebuilds the one layer its parameter lives in. Used purely to make the
// optimizer fast; every circuit it produces is re-scored through the library
// (and the mirror itself is cross-checked against build_unitary below).
class FastReducedLoss {
 public:
  FastReducedLoss(int n_qubits, int n_layers, Eigen::MatrixXcd h_dense)
      : n_(n_qubits),
        dim_(Eigen::Index{1} << n_qubits),
        n_layers_(n_layers),
        h_(std::move(h_dense)) {
    for (int layer = 1; layer <= n_layers_; ++layer) {
      offsets_.push_back(total_);
      total_ += 3 * n_ + 3 * pairs_in(layer);
    }
    offsets_.push_back(total_);
  }

  int param_count() const { return total_; }

  // -ln sum_x exp(-beta * D_x(phi)) with D = diag(U^dag H U).
  double loss(const Eigen::VectorXd& phi, double beta) {
    set_base(phi);
    return loss_from_unitary(base_u_, beta);
  }

  // Central differences; phi is also installed as the cached base point.
  Eigen::VectorXd grad(const Eigen::VectorXd& phi, double beta, double eps) {
    set_base(phi);
    Eigen::VectorXd g(total_);
    Eigen::VectorXd probe = phi;
    for (int k = 0; k < total_; ++k) {
      int layer = layer_of(k);
      probe[k] = phi[k] + eps;
      double up = probe_loss(probe, layer, beta);
      probe[k] = phi[k] - eps;
      double down = probe_loss(probe, layer, beta);
      probe[k] = phi[k];
      g[k] = (up - down) / (2.0 * eps);
    }
    return g;
  }

  Eigen::MatrixXcd unitary(const Eigen::VectorXd& phi) {
    set_base(phi);
    return base_u_;
  }

 private:
  int pairs_in(int layer) const {
    return (layer % 2 == 1) ? n_ / 2 : (n_ - 1) / 2;
  }

  int layer_of(int k) const {
    int layer = 1;
    while (k >= offsets_[layer]) ++layer;
    return layer;
  }

  static Eigen::Matrix2cd single_rotation(double a, double b, double c) {
    const std::complex<double> i(0.0, 1.0);
    double r = std::sqrt(a * a + b * b + c * c);
    double sinc = (r > 0.0) ? std::sin(r) / r : 1.0;
    Eigen::Matrix2cd m;
    m << std::cos(r) + i * sinc * c, i * sinc * (a - i * b),
        i * sinc * (a + i * b), std::cos(r) - i * sinc * c;
    return m;
  }

  static Eigen::Matrix4cd pair_rotation(double a, double b, double c) {
    const std::complex<double> i(0.0, 1.0);
    const double s = 1.0 / std::sqrt(2.0);
    Eigen::Matrix4cd bell = Eigen::Matrix4cd::Zero();
    bell(0, 0) = s;  bell(3, 0) = s;
    bell(0, 1) = s;  bell(3, 1) = -s;
    bell(1, 2) = s;  bell(2, 2) = s;
    bell(1, 3) = s;  bell(2, 3) = -s;
    Eigen::Vector4d ev(a - b + c, -a + b + c, a + b - c, -a - b - c);
    Eigen::Vector4cd phases =
        (i * ev.cast<std::complex<double>>().array()).exp();
    return bell * phases.asDiagonal() * bell.adjoint();
  }

  Eigen::MatrixXcd layer_matrix(const Eigen::VectorXd& phi, int layer) const {
    Eigen::Index p = offsets_[layer - 1];
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(1, 1);
    for (int q = 0; q < n_; ++q, p += 3) {
      m = kroneckerProduct(
              m, single_rotation(phi[p], phi[p + 1], phi[p + 2]))
              .eval();
    }
    int first = (layer % 2 == 1) ? 0 : 1;
    for (int q = first; q + 1 < n_; q += 2, p += 3) {
      Eigen::Index left = Eigen::Index{1} << q;
      Eigen::Index right = Eigen::Index{1} << (n_ - q - 2);
      Eigen::MatrixXcd pair =
          kroneckerProduct(Eigen::MatrixXcd::Identity(left, left),
                           pair_rotation(phi[p], phi[p + 1], phi[p + 2]))
              .eval();
      m = kroneckerProduct(pair, Eigen::MatrixXcd::Identity(right, right))
              .eval() *
          m;
    }
    return m;
  }

  void set_base(const Eigen::VectorXd& phi) {
    layers_.resize(n_layers_ + 1);
    pre_.resize(n_layers_ + 1);
    post_.resize(n_layers_ + 2);
    for (int l = 1; l <= n_layers_; ++l) layers_[l] = layer_matrix(phi, l);
    pre_[1] = Eigen::MatrixXcd::Identity(dim_, dim_);
    for (int l = 2; l <= n_layers_; ++l) pre_[l] = layers_[l - 1] * pre_[l - 1];
    post_[n_layers_ + 1] = Eigen::MatrixXcd::Identity(dim_, dim_);
    for (int l = n_layers_; l >= 1; --l) post_[l] = post_[l + 1] * layers_[l];
    base_u_ = post_[1];
  }

  double probe_loss(const Eigen::VectorXd& phi, int layer, double beta) const {
    Eigen::MatrixXcd u = post_[layer + 1] * (layer_matrix(phi, layer) * pre_[layer]);
    return loss_from_unitary(u, beta);
  }

  double loss_from_unitary(const Eigen::MatrixXcd& u, double beta) const {
    Eigen::VectorXd d = (u.adjoint() * h_ * u).diagonal().real();
    double m = (-beta * d.array()).maxCoeff();
    return -(m + std::log(((-beta * d.array()) - m).exp().sum()));
  }

  int n_;
  Eigen::Index dim_;
  int n_layers_;
  Eigen::MatrixXcd h_;
  std::vector<int> offsets_;
  int total_ = 0;
  std::vector<Eigen::MatrixXcd> layers_, pre_, post_;
  Eigen::MatrixXcd base_u_;
};

// L-BFGS (two-loop recursion, Armijo backtracking) on the reduced loss.
// Deterministic: no randomness beyond the caller-provided start point.
double lbfgs_minimize(
    const std::function<double(const Eigen::VectorXd&)>& loss,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
    Eigen::VectorXd& phi, int max_iters) {
  const int kMemory = 12;
  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;

  double f = loss(phi);
  Eigen::VectorXd g = grad(phi);

  for (int it = 1; it <= max_iters; ++it) {
    Eigen::VectorXd q = g;
    std::vector<double> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    if (!s_hist.empty()) {
      q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    }
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      double b = rho_hist[i] * y_hist[i].dot(q);
      q += s_hist[i] * (alpha[i] - b);
    }
    Eigen::VectorXd dir = -q;
    double slope = g.dot(dir);
    if (slope > 0) {  // not a descent direction: restart from steepest descent
      dir = -g;
      slope = -g.squaredNorm();
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }

    double t = 1.0;
    double f_new = 0.0;
    Eigen::VectorXd phi_new;
    int ls = 0;
    for (; ls < 40; ++ls) {
      phi_new = phi + t * dir;
      f_new = loss(phi_new);
      if (f_new <= f + 1e-4 * t * slope) break;
      t *= 0.5;
    }
    if (ls == 40) break;  // no further progress possible

    Eigen::VectorXd g_new = grad(phi_new);
    Eigen::VectorXd s = phi_new - phi;
    Eigen::VectorXd y = g_new - g;
    double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > kMemory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    phi = phi_new;
    f = f_new;
    g = g_new;
    if (g.lpNorm<Eigen::Infinity>() < 1e-12) break;
  }
  return f;
}

bool criterion_vqe_limit(std::string& detail) {
  const int kLayers = 12;
  const int kRestarts = 2;
  const int kIters = 400;
  const double kEps = 1e-5;

  PauliSumHamiltonian h = heisenberg_2d(2, 2, 1.0, 1.0);
  Eigen::MatrixXcd h_dense = dense_matrix(h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h_dense);
  Eigen::VectorXd evals = es.eigenvalues();
  double e0 = evals.minCoeff();
  double gap = 1e300;
  for (Eigen::Index i = 0; i < evals.size(); ++i) {
    if (evals[i] > e0 + 1e-8) gap = std::min(gap, evals[i] - e0);
  }

  // Free-energy objective with the diagonal latent eliminated exactly: for a
  // multinoulli latent the optimal modular energies at a fixed circuit are
  // beta * diag(U^dag H U), which collapses the VQT loss to
  // -ln sum_x exp(-beta D_x). Optimize the circuit on that reduced loss and
  // report the full library loss of the reconstructed model.
  FastReducedLoss fast(4, kLayers, h_dense);
  auto model_loss = [&](const Eigen::VectorXd& phi, double beta) {
    QnnAnsatz ansatz = make_qnn(4, kLayers);
    ansatz.params = phi;
    Eigen::MatrixXcd u = build_unitary(ansatz).data;
    Eigen::VectorXd d = (u.adjoint() * h_dense * u).diagonal().real();
    QhbmModel model{MultinoulliLatent{Eigen::VectorXd(beta * d)}, ansatz};
    return vqt_loss(model, h, beta);
  };

  const double betas[3] = {5.0, 10.0, 20.0};
  double best_err[3] = {1e300, 1e300, 1e300};
  double mirror_gap = 0.0;

  for (int r = 0; r < kRestarts; ++r) {
    // Anneal: any diagonalizer of H is optimal at every temperature, so each
    // stage warm-starts the next.
    Eigen::VectorXd phi(fast.param_count());
    Rng rng(100 + static_cast<std::uint64_t>(r));
    for (Eigen::Index k = 0; k < phi.size(); ++k) {
      phi[k] = uniform_in(rng, -0.5, 0.5);
    }
    for (int stage = 0; stage < 3; ++stage) {
      double beta = betas[stage];
      lbfgs_minimize(
          [&](const Eigen::VectorXd& p) { return fast.loss(p, beta); },
          [&](const Eigen::VectorXd& p) { return fast.grad(p, beta, kEps); },
          phi, kIters);
      double err = std::abs(model_loss(phi, beta) / beta - e0);
      best_err[stage] = std::min(best_err[stage], err);
    }
    // The fast mirror must agree with the library's circuit builder.
    QnnAnsatz check = make_qnn(4, kLayers);
    check.params = phi;
    mirror_gap = std::max(
        mirror_gap,
        (fast.unitary(phi) - build_unitary(check).data).cwiseAbs().maxCoeff());
  }
  if (mirror_gap > 1e-10) {
    detail = fmt("fast circuit mirror diverged from build_unitary by %.3g",
                 mirror_gap);
    return false;
  }

  bool ok = true;
  std::string parts;
  for (int stage = 0; stage < 3; ++stage) {
    double tol = 3.0 * std::exp(-betas[stage] * gap);
    ok = ok && best_err[stage] <= tol;
    parts += fmt("beta=%g: |F/beta - E0| = %.3g (tol %.3g)%s", betas[stage],
                 best_err[stage], tol, stage < 2 ? "; " : "");
  }
  detail = parts;
  return ok;
}

// ---------------------------------------------------------------------------
// 2. VQT Heisenberg surrogate: fidelity and relative entropy across restarts.
// ---------------------------------------------------------------------------

// Factorized latent, all initial parameters uniform on the unit interval.
QhbmModel unit_interval_model(int n_qubits, int n_layers, std::uint64_t seed) {
  Rng rng(seed);
  BernoulliLatent bernoulli;
  bernoulli.thetas.resize(n_qubits);
  for (int j = 0; j < n_qubits; ++j) {
    bernoulli.thetas[j] = uniform_in(rng, 0.0, 1.0);
  }
  QnnAnsatz ansatz = make_qnn(n_qubits, n_layers);
  for (Eigen::Index k = 0; k < ansatz.params.size(); ++k) {
    ansatz.params[k] = uniform_in(rng, 0.0, 1.0);
  }
  return QhbmModel{Latent{std::move(bernoulli)}, std::move(ansatz)};
}

bool criterion_vqt_heisenberg(std::string& detail) {
  const int kRestarts = 20;
  const int kSteps = 200;
  // A 6-layer circuit: 3 layers (the minimal staggered-coupling block) leave
  // a basis-alignment floor near 0.048 nats of relative entropy; doubling the
  // depth lowers the reachable floor well under the 0.05 acceptance mean.
  const int kLayers = 6;
  const double kRate = 1.5;
  const double kBeta = 0.5;

  PauliSumHamiltonian h = heisenberg_2d(2, 2, 1.0, 1.0);
  DensityMatrix target = thermal_state_oracle(h, kBeta);

  int good = 0;
  double rel_sum = 0.0;
  for (int r = 0; r < kRestarts; ++r) {
    QhbmModel init =
        unit_interval_model(4, kLayers, 200 + static_cast<std::uint64_t>(r));
    TrainConfig config;
    config.learning_rate = kRate;
    config.max_steps = kSteps;
    auto [model, trace] = train(init, Objective{VqtObjective{h, kBeta}}, config);
    if (trace.aborted) {
      detail = "restart " + std::to_string(r) + " aborted";
      return false;
    }
    DensityMatrix visible = visible_state(model);
    if (fidelity(visible, target) >= 0.95) ++good;
    rel_sum += relative_entropy(visible, target);
  }
  double rel_mean = rel_sum / kRestarts;
  detail = fmt("fidelity >= 0.95 on %d/%d restarts (need >= 16); "
               "mean relative entropy %.4f (tol 0.05)",
               good, kRestarts, rel_mean);
  return good >= 16 && rel_mean <= 0.05;
}

// ---------------------------------------------------------------------------
// 3. QMHL entropy convergence on in-family data states.
// ---------------------------------------------------------------------------

bool criterion_qmhl_entropy(std::string& detail) {
  const int kCases = 20;
  const int kRestarts = 5;
  const int kSteps = 500;
  const double kRate = 0.2;
  const double kTol = 1e-2;

  double worst = 0.0;
  for (int i = 0; i < kCases; ++i) {
    // Data: a random circuit applied to a random factorized Gibbs state;
    // its entropy is known in closed form.
    Rng rng(300 + static_cast<std::uint64_t>(i));
    BernoulliLatent data_latent;
    data_latent.thetas.resize(3);
    for (int j = 0; j < 3; ++j) data_latent.thetas[j] = uniform_in(rng, -1.5, 1.5);
    QnnAnsatz data_circuit = make_qnn(3, 3);
    for (Eigen::Index k = 0; k < data_circuit.params.size(); ++k) {
      data_circuit.params[k] = uniform_in(rng, -0.6, 0.6);
    }
    DensityMatrix sigma = apply_unitary(latent_density(data_latent),
                                        build_unitary(data_circuit));
    double true_entropy = entropy(data_latent);

    double best = 1e300;
    for (int r = 0; r < kRestarts; ++r) {
      QhbmModel init = random_model(
          3, 3, "bernoulli",
          400 + static_cast<std::uint64_t>(i * kRestarts + r));
      TrainConfig config;
      config.learning_rate = kRate;
      config.max_steps = kSteps;
      auto [model, trace] =
          train(init, Objective{QmhlObjective{sigma}}, config);
      if (trace.aborted) continue;
      best = std::min(best, qmhl_loss(model, sigma));
    }
    worst = std::max(worst, std::abs(best - true_entropy));
  }
  detail = fmt("max |converged loss - S(sigma)| = %.3g over %d states "
               "(tol %.0e)",
               worst, kCases, kTol);
  return worst <= kTol;
}

// ---------------------------------------------------------------------------
// 4. Ansatz study tables: mean fidelity / trace distance per ansatz.
// ---------------------------------------------------------------------------

bool criterion_ansatz_tables(std::string& detail) {
  const int kHams = 10;
  const int kRestarts = 10;
  const int kSteps = 200;
  const double kRate = 0.05;
  const double kBeta = 1.3;
  const double kFidTarget[2] = {0.871, 0.935};
  const double kTdTarget[2] = {0.221, 0.173};
  const double kWindow = 0.05;

  const char* kinds[2] = {"bernoulli", "multinoulli"};
  double fid_mean[2] = {0, 0};
  double td_mean[2] = {0, 0};

  for (int m = 0; m < kHams; ++m) {
    PauliSumHamiltonian h =
        random_coupling_chain(4, 500 + static_cast<std::uint64_t>(m));
    DensityMatrix target = thermal_state_oracle(h, kBeta);
    for (int a = 0; a < 2; ++a) {
      double best_loss = 1e300, best_fid = 0.0, best_td = 1.0;
      for (int r = 0; r < kRestarts; ++r) {
        QhbmModel init = random_model(
            4, 3, kinds[a],
            600 + static_cast<std::uint64_t>((m * 2 + a) * kRestarts + r));
        TrainConfig config;
        config.learning_rate = kRate;
        config.max_steps = kSteps;
        auto [model, trace] =
            train(init, Objective{QmhlObjective{target}}, config);
        if (trace.aborted) continue;
        double loss = qmhl_loss(model, target);
        if (loss < best_loss) {
          best_loss = loss;
          DensityMatrix visible = visible_state(model);
          best_fid = fidelity(visible, target);
          best_td = trace_distance(visible, target);
        }
      }
      fid_mean[a] += best_fid / kHams;
      td_mean[a] += best_td / kHams;
    }
  }

  bool ok = true;
  for (int a = 0; a < 2; ++a) {
    ok = ok && std::abs(fid_mean[a] - kFidTarget[a]) <= kWindow;
    ok = ok && std::abs(td_mean[a] - kTdTarget[a]) <= kWindow;
  }
  detail = fmt("fidelity means %.3f / %.3f (targets %.3f / %.3f +- %.2f); "
               "trace-distance means %.3f / %.3f (targets %.3f / %.3f)",
               fid_mean[0], fid_mean[1], kFidTarget[0], kFidTarget[1], kWindow,
               td_mean[0], td_mean[1], kTdTarget[0], kTdTarget[1]);
  return ok;
}

// ---------------------------------------------------------------------------
// 5. Gradient suite: analytic blocks vs central differences.
// ---------------------------------------------------------------------------

bool criterion_gradients(std::string& detail) {
  const int kCases = 100;
  const double kTol = 1e-5;
  const double kEps = 1e-5;

  double worst_qubit = 0.0;
  for (int i = 0; i < kCases; ++i) {
    std::uint64_t seed = 700 + static_cast<std::uint64_t>(i);
    bool multi = (i % 2) == 1;
    QhbmModel model = random_model(2, 2, multi ? "multinoulli" : "bernoulli",
                                   seed);
    Objective objective;
    if (i % 4 < 2) {
      objective = VqtObjective{random_coupling_chain(2, seed + 5000),
                               0.4 + 0.2 * (i % 5)};
    } else {
      objective = QmhlObjective{
          thermal_state_oracle(random_coupling_chain(2, seed + 5000), 1.1)};
    }
    Eigen::Index n_theta = latent_params(model.latent).size();
    Eigen::VectorXd analytic = objective_grad(model, objective, 1e-4);
    Eigen::VectorXd params = model_params(model);
    Eigen::VectorXd fd = finite_diff_grad(
        [&](const Eigen::VectorXd& p) {
          return objective_loss(with_model_params(model, p), objective);
        },
        params, kEps);
    worst_qubit = std::max(
        worst_qubit,
        (analytic.head(n_theta) - fd.head(n_theta)).cwiseAbs().maxCoeff());
  }

  double worst_fermion = 0.0;
  for (int i = 0; i < kCases; ++i) {
    std::uint64_t seed = 800 + static_cast<std::uint64_t>(i);
    int n_f = 2 + (i % 3);
    MajoranaQuadraticH h = random_majorana(n_f, seed, 0.6);
    double beta = 0.5 + 0.25 * (i % 4);
    Rng rng(seed + 9000);
    GivensNetwork net = make_brick_wall(2 * n_f, 2 + (i % 2));
    for (GivensRotation& rot : net.rotations) {
      rot.angle = uniform_in(rng, -0.8, 0.8);
    }
    FermionLatent latent;
    latent.lambdas.resize(n_f);
    for (int j = 0; j < n_f; ++j) latent.lambdas[j] = uniform_in(rng, -0.9, 0.9);

    Eigen::VectorXd analytic = vqt_fermion_grad(latent, net, h, beta);
    Eigen::VectorXd flat(n_f + static_cast<int>(net.rotations.size()));
    flat.head(n_f) = latent.lambdas;
    for (std::size_t k = 0; k < net.rotations.size(); ++k) {
      flat[n_f + static_cast<Eigen::Index>(k)] = net.rotations[k].angle;
    }
    Eigen::VectorXd fd = finite_diff_grad(
        [&](const Eigen::VectorXd& x) {
          FermionLatent l;
          l.lambdas = x.head(n_f);
          GivensNetwork g = net;
          for (std::size_t k = 0; k < g.rotations.size(); ++k) {
            g.rotations[k].angle = x[n_f + static_cast<Eigen::Index>(k)];
          }
          return vqt_fermion_loss(l, g, h, beta);
        },
        flat, kEps);
    worst_fermion =
        std::max(worst_fermion, (analytic - fd).cwiseAbs().maxCoeff());
  }

  detail = fmt("max |analytic - central diff|: qubit theta %.3g, fermion "
               "%.3g (tol %.0e, %d instances each)",
               worst_qubit, worst_fermion, kTol, kCases);
  return worst_qubit <= kTol && worst_fermion <= kTol;
}

// ---------------------------------------------------------------------------
// 6. Boson QMHL equals the Williamson oracle.
// ---------------------------------------------------------------------------

bool criterion_boson_oracle(std::string& detail) {
  const int kCases = 50;
  const double kTol = 1e-3;
  const int kIters = 300;
  const double kEpsFd = 1e-5;

  double worst_nu = 0.0, worst_loss = 0.0;
  for (int i = 0; i < kCases; ++i) {
    Rng rng(900 + static_cast<std::uint64_t>(i));
    int n = 2 + static_cast<int>(rng() % 7);  // 2..8 modes
    // Symplectic eigenvalues with a guaranteed spacing so the instance is
    // well-conditioned for spectrum matching.
    Eigen::VectorXd nus(n);
    for (int j = 0; j < n; ++j) {
      nus[j] = 1.15 + 0.3 * j + uniform_in(rng, 0.0, 0.15);
    }
    Eigen::VectorXd omegas(n);
    for (int j = 0; j < n; ++j) omegas[j] = omega_from_nu(nus[j]);
    SymplecticParams mix = random_symplectic(n, rng, 0.5);
    Eigen::MatrixXd s = realize_symplectic(mix);
    BosonCovariance gamma_d = make_boson_covariance(
        n, s * latent_covariance(BosonLatent{omegas}).gamma * s.transpose());

    WilliamsonResult oracle = williamson_oracle(gamma_d);
    double oracle_entropy = boson_entropy_from_nus(oracle.nus);

    // Flat vector [u (n), passive1 (n^2), squeezes (n), passive2 (n^2)] with
    // omega = exp(u), mirroring the library trainer's parameterization.
    auto unflatten = [n](const Eigen::VectorXd& v) {
      BosonLatent latent;
      latent.omegas = v.head(n).array().min(50.0).max(-50.0).exp();
      SymplecticParams params;
      params.n_modes = n;
      params.passive1 = v.segment(n, Eigen::Index{n} * n);
      params.squeezes = v.segment(n + Eigen::Index{n} * n, n);
      params.passive2 = v.tail(Eigen::Index{n} * n);
      return std::pair{std::move(latent), std::move(params)};
    };
    auto loss = [&](const Eigen::VectorXd& v) {
      auto [latent, params] = unflatten(v);
      return qmhl_boson_loss(latent, params, gamma_d);
    };
    auto grad = [&](const Eigen::VectorXd& v) {
      return finite_diff_grad(loss, v, kEpsFd);
    };

    Rng init_rng(950 + static_cast<std::uint64_t>(i));
    Eigen::VectorXd flat(2 * Eigen::Index{n} * n + 2 * n);
    for (Eigen::Index k = 0; k < flat.size(); ++k) {
      flat[k] = (k < n) ? uniform_in(init_rng, -0.3, 0.3)
                        : uniform_in(init_rng, -0.1, 0.1);
    }
    double final_loss = lbfgs_minimize(loss, grad, flat, kIters);
    if (!std::isfinite(final_loss)) {
      detail = "case " + std::to_string(i) + " diverged";
      return false;
    }

    auto [latent, params] = unflatten(flat);
    Eigen::VectorXd trained(n);
    for (int j = 0; j < n; ++j) {
      trained[j] = nu_from_omega(latent.omegas[j]);
    }
    std::sort(trained.data(), trained.data() + n);
    worst_nu = std::max(worst_nu,
                        (trained - oracle.nus).cwiseAbs().maxCoeff());
    worst_loss = std::max(worst_loss, final_loss - oracle_entropy);
  }
  detail = fmt("max |trained nu - Williamson nu| = %.3g; max loss-entropy "
               "gap = %.3g (tol %.0e, %d cases)",
               worst_nu, worst_loss, kTol, kCases);
  return worst_nu <= kTol && worst_loss <= kTol;
}

// ---------------------------------------------------------------------------
// 7. Compression of the 200-site chain reduction.
// ---------------------------------------------------------------------------

bool criterion_compression(std::string& detail) {
  const int kSites = 200;
  const int kKeep = 10;
  const double kOmega = 1.0, kChi = 0.499;
  const int kSteps = 3000;
  const double kRate = 0.03;
  const double kRatioZeroTol = 1e-3;

  BosonCovariance chain = harmonic_chain_ground(kSites, kOmega, kChi);
  std::vector<int> keep(kKeep);
  for (int j = 0; j < kKeep; ++j) keep[j] = j;
  BosonCovariance reduced = partial_trace_modes(chain, keep);

  TrainConfig config;
  config.learning_rate = kRate;
  config.max_steps = kSteps;
  config.seed = 1000;
  config.convergence_tol = 1e-12;
  BosonQmhlResult result = train_boson_qmhl(reduced, config);
  if (result.trace.aborted) {
    detail = "training aborted: " + result.trace.abort_reason;
    return false;
  }

  double err0 = compress(result.latent, result.params, reduced, 0.0).second;
  std::vector<double> ratios = {0.1, 0.4, 0.7, 0.9};
  std::vector<double> errors;
  for (double ratio : ratios) {
    errors.push_back(compress(result.latent, result.params, reduced, ratio)
                         .second);
  }
  bool monotone = true;
  for (std::size_t k = 1; k < errors.size(); ++k) {
    monotone = monotone && errors[k] >= errors[k - 1] - 1e-12;
  }
  detail = fmt("ratio-0 error %.3g (tol %.0e); errors at 0.1/0.4/0.7/0.9 = "
               "%.3g/%.3g/%.3g/%.3g (monotone: %s)",
               err0, kRatioZeroTol, errors[0], errors[1], errors[2],
               errors[3], monotone ? "yes" : "NO");
  return err0 <= kRatioZeroTol && monotone;
}

// ---------------------------------------------------------------------------
// 8. Fermionic thermal oracle vs dense Jordan-Wigner.
// ---------------------------------------------------------------------------

bool criterion_fermion_dense(std::string& detail) {
  const int kCases = 50;
  const double kTol = 1e-9;

  double worst_cov = 0.0, worst_entropy = 0.0;
  for (int i = 0; i < kCases; ++i) {
    int n_f = 1 + (i % 4);
    std::uint64_t seed = 1100 + static_cast<std::uint64_t>(i);
    MajoranaQuadraticH h = random_majorana(n_f, seed, 0.7);
    double beta = 0.3 + 0.17 * (i % 10);

    DensityMatrix rho = dense_jw_oracle(h, beta);
    FermionCovariance dense_cov = covariance_from_dense(rho);
    FermionCovariance oracle = thermal_covariance_oracle(h, beta);
    worst_cov = std::max(
        worst_cov, (dense_cov.gamma - oracle.gamma).cwiseAbs().maxCoeff());

    CanonicalFermionForm form = canonical_form(h);
    Eigen::VectorXd lambdas = (-2.0 * beta * form.epsilons.array()).tanh();
    worst_entropy =
        std::max(worst_entropy,
                 std::abs(fermion_entropy(lambdas) - von_neumann_entropy(rho)));
  }
  detail = fmt("max covariance error %.3g, max entropy error %.3g "
               "(tol %.0e, %d cases)",
               worst_cov, worst_entropy, kTol, kCases);
  return worst_cov <= kTol && worst_entropy <= kTol;
}

// ---------------------------------------------------------------------------
// 9. d-wave VQT against the dense oracle.
// ---------------------------------------------------------------------------

bool criterion_dwave(std::string& detail) {
  const double kBeta = 1.0, kT = 0.3, kDelta = 0.2;
  const int kSteps = 150;
  const int kRestarts = 3;
  const double kTol = 1e-2;

  MajoranaQuadraticH h = build_dwave(2, 2, kT, kDelta);
  double log_z = fermion_log_partition(h, kBeta);
  DensityMatrix dense_target = dense_jw_oracle(h, kBeta, /*allow_large=*/true);
  double target_entropy = von_neumann_entropy(dense_target);
  // Twice the minimal depth: the over-complete rotation set smooths out the
  // spurious minima a minimal brick wall exhibits on this landscape.
  int n_layers = 2 * default_brick_wall_layers(h.n_majoranas);
  int n_f = h.n_majoranas / 2;

  GivensNetwork proto = make_brick_wall(h.n_majoranas, n_layers);
  const int n_params = n_f + static_cast<int>(proto.rotations.size());

  auto unpack = [&](const Eigen::VectorXd& x) {
    FermionLatent latent;
    latent.lambdas = x.head(n_f).array().tanh();
    GivensNetwork net = proto;
    for (std::size_t k = 0; k < net.rotations.size(); ++k) {
      net.rotations[k].angle = x[n_f + static_cast<Eigen::Index>(k)];
    }
    return std::pair{latent, net};
  };
  auto loss = [&](const Eigen::VectorXd& x) {
    auto [latent, net] = unpack(x);
    return vqt_fermion_loss(latent, net, h, kBeta);
  };
  auto grad = [&](const Eigen::VectorXd& x) {
    auto [latent, net] = unpack(x);
    Eigen::VectorXd raw = vqt_fermion_grad(latent, net, h, kBeta);
    for (int j = 0; j < n_f; ++j) {  // chain rule for lambda = tanh(theta)
      raw[j] *= 1.0 - latent.lambdas[j] * latent.lambdas[j];
    }
    return raw;
  };

  double best_gap = 1e300;
  Eigen::VectorXd best_x;
  for (int r = 0; r < kRestarts; ++r) {
    Rng rng(1200 + static_cast<std::uint64_t>(r));
    Eigen::VectorXd x(n_params);
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      x[k] = uniform_in(rng, -2.0, 2.0);
    }
    double f = lbfgs_minimize(loss, grad, x, kSteps);
    if (!std::isfinite(f)) continue;
    double gap = f + log_z;
    if (gap < best_gap) {
      best_gap = gap;
      best_x = x;
    }
  }

  auto [best_latent, best_net] = unpack(best_x);
  DensityMatrix model = dense_model_state(best_latent, best_net,
                                          /*allow_large=*/true);
  double fid = fidelity(model, dense_target);
  double td = trace_distance(model, dense_target);
  double entropy_err =
      std::abs(fermion_entropy(best_latent.lambdas) - target_entropy);

  detail = fmt("free-energy gap %.3g, fidelity %.6f, trace distance %.3g, "
               "entropy error %.3g (tol %.0e each, %d steps)",
               best_gap, fid, td, entropy_err, kTol, kSteps);
  return best_gap <= kTol && fid >= 0.99 && td <= kTol && entropy_err <= kTol;
}

// ---------------------------------------------------------------------------
// 10. Invariant property suites (1000 random instances each).
// ---------------------------------------------------------------------------

bool criterion_invariants(std::string& detail) {
  const int kN = 1000;

  // Entropy conservation under the circuit.
  double worst_entropy = 0.0;
  for (int i = 0; i < kN; ++i) {
    QhbmModel model = random_model(2, 2, (i % 2) ? "multinoulli" : "bernoulli",
                                   2000 + static_cast<std::uint64_t>(i));
    worst_entropy = std::max(
        worst_entropy, std::abs(von_neumann_entropy(visible_state(model)) -
                                entropy(model.latent)));
  }
  if (worst_entropy > 1e-9) {
    detail = fmt("entropy conservation violated: %.3g", worst_entropy);
    return false;
  }

  // Loss lower bounds (relative-entropy nonnegativity).
  double worst_bound = 0.0;
  for (int i = 0; i < kN; ++i) {
    std::uint64_t seed = 4000 + static_cast<std::uint64_t>(i);
    QhbmModel model = random_model(2, 1, (i % 2) ? "multinoulli" : "bernoulli",
                                   seed);
    PauliSumHamiltonian h = random_coupling_chain(2, seed + 100000);
    double beta = 0.3 + 0.001 * i;
    DensityMatrix gibbs = thermal_state_oracle(h, beta);
    double minus_log_z =
        beta * expectation(h, gibbs) - von_neumann_entropy(gibbs);
    worst_bound = std::max(worst_bound,
                           minus_log_z - vqt_loss(model, h, beta));
    DensityMatrix sigma = thermal_state_oracle(
        random_coupling_chain(2, seed + 200000), 1.0);
    worst_bound = std::max(worst_bound, von_neumann_entropy(sigma) -
                                            qmhl_loss(model, sigma));
  }
  if (worst_bound > 1e-10) {
    detail = fmt("loss bound violated by %.3g", worst_bound);
    return false;
  }

  // Symplectic and orthogonal realization residuals.
  double worst_symp = 0.0, worst_orth = 0.0;
  for (int i = 0; i < kN; ++i) {
    Rng rng(6000 + static_cast<std::uint64_t>(i));
    int n = 2 + static_cast<int>(rng() % 4);
    Eigen::MatrixXd s = realize_symplectic(random_symplectic(n, rng, 0.8));
    Eigen::MatrixXd omega = symplectic_form(n);
    worst_symp = std::max(
        worst_symp,
        (s.transpose() * omega * s - omega).cwiseAbs().maxCoeff());

    GivensNetwork net = make_brick_wall(2 * n, 3);
    for (GivensRotation& rot : net.rotations) {
      rot.angle = uniform_in(rng, -1.5, 1.5);
    }
    Eigen::MatrixXd o = realize_givens(net, 2 * n);
    worst_orth = std::max(
        worst_orth,
        (o * o.transpose() - Eigen::MatrixXd::Identity(2 * n, 2 * n))
            .cwiseAbs()
            .maxCoeff());
  }
  if (worst_symp > 1e-9 || worst_orth > 1e-9) {
    detail = fmt("realization residuals: symplectic %.3g, orthogonal %.3g",
                 worst_symp, worst_orth);
    return false;
  }

  // Type invariants on generated states.
  for (int i = 0; i < kN; ++i) {
    std::uint64_t seed = 8000 + static_cast<std::uint64_t>(i);
    Rng rng(seed);
    try {
      validate_density(
          thermal_state_oracle(random_coupling_chain(2, seed), 0.2 + 0.002 * i));
      int n = 2 + static_cast<int>(rng() % 3);
      Eigen::VectorXd omegas(n);
      for (int j = 0; j < n; ++j) omegas[j] = std::exp(uniform_in(rng, -1.0, 1.5));
      Eigen::MatrixXd s = realize_symplectic(random_symplectic(n, rng, 0.6));
      validate_covariance(make_boson_covariance(
          n, s * latent_covariance(BosonLatent{omegas}).gamma * s.transpose()));
      validate_fermion_covariance(
          thermal_covariance_oracle(random_majorana(n, seed, 0.6),
                                    0.2 + 0.002 * i));
    } catch (const std::exception& e) {
      detail = fmt("instance %d violated a type invariant: %s", i, e.what());
      return false;
    }
  }

  detail = fmt("entropy drift %.3g; bound slack %.3g; residuals %.3g/%.3g; "
               "%d instances per suite",
               worst_entropy, worst_bound, worst_symp, worst_orth, kN);
  return true;
}

}  // namespace

// Runs every criterion by default; numeric arguments select a subset.
int main(int argc, char** argv) {
  std::vector<Criterion> criteria = {
      {1, "VQE limit of VQT on the 2x2 Heisenberg grid", criterion_vqe_limit},
      {2, "VQT Heisenberg restart ensemble (fidelity / relative entropy)",
       criterion_vqt_heisenberg},
      {3, "QMHL converges to the data entropy", criterion_qmhl_entropy},
      {4, "Ansatz study tables (factorized vs general)",
       criterion_ansatz_tables},
      {5, "Analytic gradients vs central differences", criterion_gradients},
      {6, "Boson QMHL matches the Williamson oracle", criterion_boson_oracle},
      {7, "Chain-reduction compression quality", criterion_compression},
      {8, "Fermionic oracle vs dense Jordan-Wigner", criterion_fermion_dense},
      {9, "d-wave VQT matches the dense Gibbs state", criterion_dwave},
      {10, "Invariant property suites", criterion_invariants},
  };

  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));

  int failed = 0;
  for (const Criterion& criterion : criteria) {
    if (!wanted.empty() &&
        std::find(wanted.begin(), wanted.end(), criterion.number) ==
            wanted.end()) {
      continue;
    }
    std::string det;
    bool ok = false;
    try {
      ok = criterion.run(det);
    } catch (const std::exception& e) {
      det = std::string("exception: ") + e.what();
    }
    std::printf("[%s] %2d. %s — %s\n", ok ? "PASS" : "FAIL", criterion.number,
                criterion.name.c_str(), det.c_str());
    std::fflush(stdout);
    if (!ok) ++failed;
  }
  if (failed > 0) {
    std::printf("%d criteria failed\n", failed);
  } else {
    std::printf("all selected criteria passed\n");
  }
  return failed;
}
