#pragma once

// Experiment engine: the four built-in studies, each driven by a JSON config
// and emitting figure-ready CSV data plus a JSON summary.
//
// Output layout, fixed across experiments:
//   <outdir>/trace.csv            per-step metric bands across restarts
//   <outdir>/summary.json         config echo, content hash, wall clock,
//                                 per-restart finals, experiment results
//   <outdir>/snapshots/*.csv      experiment-specific artifacts (density or
//                                 covariance dumps, heat maps, mode vectors)
//
// Every CSV is written with %.17g formatting and deterministic ordering, so
// a fixed seed reproduces byte-identical files; summary.json differs only in
// its wall_clock_seconds field across repeated runs.

#include <cstdint>
#include <string>
#include <vector>

#include "qhbm/densesim.hpp"
#include "qhbm/training.hpp"

namespace qhbm {

enum class ExperimentKind {
  VqtHeisenberg,    // "vqt-heisenberg"
  QmhlAnsatzStudy,  // "qmhl-ansatz-study"
  BosonCompress,    // "boson-compress"
  FermionDwave,     // "fermion-dwave"
};

// Thermal-state learning on the open 2D Heisenberg lattice: per restart,
// train VQT against the dense Gibbs oracle and record loss / trace distance
// / fidelity / relative entropy at every step.
struct VqtHeisenbergParams {
  int nx = 2;
  int ny = 2;
  double beta = 0.5;
  double jh = 1.0;
  double jv = 1.0;
  int n_layers = 3;
  std::string latent = "bernoulli";  // or "multinoulli"
  bool dump_final_state = false;     // best restart's state + target as CSV
};

// Modular-Hamiltonian learning on random coupling chains: for each sampled
// Hamiltonian, run restarts with a factorized and with a general latent and
// tabulate mean/min/max fidelity and trace distance across Hamiltonians.
// Optionally sweep beta on the fixed-field chain.
struct QmhlAnsatzStudyParams {
  int n_qubits = 4;
  double beta = 1.3;
  int n_hamiltonians = 10;
  int n_layers = 3;
  std::vector<double> beta_sweep;  // empty = skip the sweep
  int sweep_restarts = 50;
};

// Subsystem compression study on the periodic harmonic chain: reduce the
// ground state to the first n_keep modes, train boson QMHL, compress at the
// given ratios, and emit reconstruction errors, |Gamma_rec - Gamma_D| heat
// maps, and the learned modular modes.
struct BosonCompressParams {
  int n_sites = 200;
  int n_keep = 10;
  double omega = 1.0;
  double chi = 0.499;
  std::vector<double> ratios = {0.1, 0.4, 0.7, 0.9};
};

// Fermionic VQT on the open d-wave lattice: train against the covariance
// oracle, snapshot the visible covariance on a fixed cadence, and (at <= 8
// fermions) verify against the dense Jordan-Wigner Gibbs state.
struct FermionDwaveParams {
  int nx = 2;
  int ny = 2;
  double beta = 1.0;
  double t = 0.3;
  double delta = 0.2;
  int n_layers = 0;  // 0 = full brick wall (one layer per Majorana mode)
  int snapshot_every = 20;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::VqtHeisenberg;
  VqtHeisenbergParams vqt;
  QmhlAnsatzStudyParams qmhl;
  BosonCompressParams boson;
  FermionDwaveParams fermion;

  TrainConfig train;
  std::string outdir = "out";
  int restarts = 0;  // 0 = per-kind default (20 / 10 / 3 / 1)
  std::uint64_t seed = 0;

  // Raw JSON this config was loaded from; hashed into summary.json. Left
  // empty for configs built in code (the canonical echo is hashed instead).
  std::string source_text;
};

// Parse and validate a config document; throws std::invalid_argument with a
// field-level message on any violation. See README for the schema.
ExperimentConfig experiment_config_from_json(const std::string& text);

// Canonical JSON echo of a config (alphabetical keys, all defaults filled).
std::string experiment_config_to_json(const ExperimentConfig& config);

// Run one experiment, writing trace.csv / summary.json / snapshots under
// config.outdir; restarts are distributed over n_threads workers, each
// seeded as seed + restart_index, with results merged in restart order.
// Returns the summary JSON. Throws std::invalid_argument on config errors
// and std::runtime_error when training aborts on non-finite numbers.
std::string run_experiment(const ExperimentConfig& config, int n_threads = 1);

// The individual studies behind run_experiment's dispatch.
std::string run_vqt_heisenberg(const ExperimentConfig& config, int n_threads);
std::string run_qmhl_ansatz_study(const ExperimentConfig& config,
                                  int n_threads);
std::string run_boson_compress(const ExperimentConfig& config, int n_threads);
std::string run_fermion_dwave(const ExperimentConfig& config, int n_threads);

// Density-matrix CSV dump (row-major; each entry as re,im pair) with header
// `# n_qubits=N kind=density`. Re-loaded artifacts are validated.
std::string density_to_csv(const DensityMatrix& rho);
DensityMatrix density_from_csv(const std::string& text);

// FNV-1a 64-bit content hash, printed as 16 hex digits.
std::string content_hash(const std::string& text);

}  // namespace qhbm
