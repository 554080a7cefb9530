#include "qhbm/experiments.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "qhbm/gaussboson.hpp"
#include "qhbm/gaussfermion.hpp"
#include "qhbm/hamiltonians.hpp"
#include "qhbm/qhbm.hpp"
#include "qhbm/rng.hpp"

namespace qhbm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Small utilities
// ---------------------------------------------------------------------------

std::string fmt17(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

// CSV cell: empty when the metric was unavailable.
std::string csv_cell(double v) { return std::isnan(v) ? "" : fmt17(v); }

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) {
    throw std::runtime_error("failed to write " + path.string());
  }
}

// Empirical percentile with linear interpolation; `sorted` must be sorted.
double percentile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (sorted.size() == 1) return sorted[0];
  double pos = (p / 100.0) * static_cast<double>(sorted.size() - 1);
  auto lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

// Run fn(0..n_tasks-1) on up to n_threads workers; first exception rethrown.
void parallel_for(int n_tasks, int n_threads,
                  const std::function<void(int)>& fn) {
  n_threads = std::max(1, std::min(n_threads, n_tasks));
  if (n_threads == 1) {
    for (int i = 0; i < n_tasks; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n_tasks) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t) workers.emplace_back(worker);
  for (std::thread& t : workers) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

void throw_if_aborted(const std::vector<TrainTrace>& traces) {
  for (std::size_t r = 0; r < traces.size(); ++r) {
    if (traces[r].aborted) {
      throw std::runtime_error("restart " + std::to_string(r) +
                               " aborted: " + traces[r].abort_reason);
    }
  }
}

// ---------------------------------------------------------------------------
// Per-step bands across restarts
// ---------------------------------------------------------------------------

// Shorter traces (early convergence) are padded with their final row: a
// converged run holds its converged value.
struct MetricBands {
  std::vector<double> mean, p025, p975;
};

struct BandTable {
  int n_steps = 0;
  MetricBands loss, trace_distance, fidelity, relative_entropy;
};

BandTable aggregate_bands(const std::vector<TrainTrace>& traces) {
  BandTable table;
  for (const TrainTrace& t : traces) {
    table.n_steps = std::max(table.n_steps, static_cast<int>(t.steps.size()));
  }
  auto fill = [&](MetricBands& bands, auto field) {
    bands.mean.resize(table.n_steps);
    bands.p025.resize(table.n_steps);
    bands.p975.resize(table.n_steps);
    std::vector<double> values;
    for (int s = 0; s < table.n_steps; ++s) {
      values.clear();
      for (const TrainTrace& t : traces) {
        if (t.steps.empty()) continue;
        std::size_t idx = std::min(static_cast<std::size_t>(s),
                                   t.steps.size() - 1);
        double v = t.steps[idx].*field;
        if (!std::isnan(v)) values.push_back(v);
      }
      if (values.empty()) {
        double nan = std::numeric_limits<double>::quiet_NaN();
        bands.mean[s] = bands.p025[s] = bands.p975[s] = nan;
        continue;
      }
      std::sort(values.begin(), values.end());
      double sum = 0.0;
      for (double v : values) sum += v;
      bands.mean[s] = sum / static_cast<double>(values.size());
      bands.p025[s] = percentile(values, 2.5);
      bands.p975[s] = percentile(values, 97.5);
    }
  };
  fill(table.loss, &TrainStep::loss);
  fill(table.trace_distance, &TrainStep::trace_distance);
  fill(table.fidelity, &TrainStep::fidelity);
  fill(table.relative_entropy, &TrainStep::relative_entropy);
  return table;
}

constexpr const char* kBandColumns =
    "loss_mean,loss_p025,loss_p975,"
    "trace_distance_mean,trace_distance_p025,trace_distance_p975,"
    "fidelity_mean,fidelity_p025,fidelity_p975,"
    "relative_entropy_mean,relative_entropy_p025,relative_entropy_p975";

void append_band_rows(std::string& csv, const BandTable& table,
                      const std::string& row_prefix) {
  for (int s = 0; s < table.n_steps; ++s) {
    csv += row_prefix + std::to_string(s);
    for (const MetricBands* bands :
         {&table.loss, &table.trace_distance, &table.fidelity,
          &table.relative_entropy}) {
      csv += ',' + csv_cell(bands->mean[s]) + ',' + csv_cell(bands->p025[s]) +
             ',' + csv_cell(bands->p975[s]);
    }
    csv += '\n';
  }
}

std::string bands_to_csv(const BandTable& table) {
  std::string csv = std::string("step,") + kBandColumns + "\n";
  append_band_rows(csv, table, "");
  return csv;
}

json bands_to_json(const BandTable& table) {
  auto arr = [](const std::vector<double>& v) { return json(v); };
  return json{{"loss_mean", arr(table.loss.mean)},
              {"loss_p025", arr(table.loss.p025)},
              {"loss_p975", arr(table.loss.p975)},
              {"trace_distance_mean", arr(table.trace_distance.mean)},
              {"trace_distance_p025", arr(table.trace_distance.p025)},
              {"trace_distance_p975", arr(table.trace_distance.p975)},
              {"fidelity_mean", arr(table.fidelity.mean)},
              {"fidelity_p025", arr(table.fidelity.p025)},
              {"fidelity_p975", arr(table.fidelity.p975)},
              {"relative_entropy_mean", arr(table.relative_entropy.mean)},
              {"relative_entropy_p025", arr(table.relative_entropy.p025)},
              {"relative_entropy_p975", arr(table.relative_entropy.p975)}};
}

// ---------------------------------------------------------------------------
// Config schema
// ---------------------------------------------------------------------------

const char* kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::VqtHeisenberg: return "vqt-heisenberg";
    case ExperimentKind::QmhlAnsatzStudy: return "qmhl-ansatz-study";
    case ExperimentKind::BosonCompress: return "boson-compress";
    case ExperimentKind::FermionDwave: return "fermion-dwave";
  }
  throw std::logic_error("unreachable experiment kind");
}

ExperimentKind kind_from_name(const std::string& name) {
  for (ExperimentKind kind :
       {ExperimentKind::VqtHeisenberg, ExperimentKind::QmhlAnsatzStudy,
        ExperimentKind::BosonCompress, ExperimentKind::FermionDwave}) {
    if (name == kind_name(kind)) return kind;
  }
  throw std::invalid_argument("unknown experiment kind: " + name);
}

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) {
      if (it.key() == key) { known = true; break; }
    }
    if (!known) {
      throw std::invalid_argument("unknown key \"" + it.key() + "\" in " +
                                  where);
    }
  }
}

double get_number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) {
    throw std::invalid_argument(std::string(key) + " must be a number");
  }
  return j.at(key).get<double>();
}

int get_int(const json& j, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) {
    throw std::invalid_argument(std::string(key) + " must be an integer");
  }
  return j.at(key).get<int>();
}

void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

int default_restarts(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::VqtHeisenberg: return 20;
    case ExperimentKind::QmhlAnsatzStudy: return 10;
    case ExperimentKind::BosonCompress: return 3;
    case ExperimentKind::FermionDwave: return 1;
  }
  throw std::logic_error("unreachable experiment kind");
}

void validate_config(const ExperimentConfig& c) {
  require(c.restarts >= 0, "restarts must be >= 0");
  require(c.train.learning_rate > 0.0, "train.learning_rate must be > 0");
  require(c.train.max_steps >= 1, "train.max_steps must be >= 1");
  require(c.train.epsilon_fd > 0.0, "train.epsilon_fd must be > 0");
  require(c.train.convergence_tol >= 0.0,
          "train.convergence_tol must be >= 0");
  require(!c.outdir.empty(), "outdir must be non-empty");
  switch (c.kind) {
    case ExperimentKind::VqtHeisenberg: {
      const auto& p = c.vqt;
      require(p.nx >= 1 && p.ny >= 1, "nx and ny must be >= 1");
      require(p.nx * p.ny <= dense_qubit_cap(),
              "nx*ny exceeds the dense qubit cap");
      require(p.beta > 0.0, "beta must be > 0");
      require(p.n_layers >= 1, "n_layers must be >= 1");
      require(p.latent == "bernoulli" || p.latent == "multinoulli",
              "latent must be \"bernoulli\" or \"multinoulli\"");
      break;
    }
    case ExperimentKind::QmhlAnsatzStudy: {
      const auto& p = c.qmhl;
      require(p.n_qubits >= 2, "n_qubits must be >= 2");
      require(p.n_qubits <= dense_qubit_cap(),
              "n_qubits exceeds the dense qubit cap");
      require(p.beta > 0.0, "beta must be > 0");
      require(p.n_hamiltonians >= 1, "n_hamiltonians must be >= 1");
      require(p.n_layers >= 1, "n_layers must be >= 1");
      require(p.sweep_restarts >= 1, "sweep_restarts must be >= 1");
      for (double b : p.beta_sweep) require(b > 0.0, "beta_sweep entries must be > 0");
      break;
    }
    case ExperimentKind::BosonCompress: {
      const auto& p = c.boson;
      require(p.n_sites >= 1, "n_sites must be >= 1");
      require(p.n_keep >= 1 && p.n_keep <= p.n_sites,
              "n_keep must lie in [1, n_sites]");
      require(p.omega > 2.0 * std::abs(p.chi),
              "stability requires omega > 2|chi|");
      for (double r : p.ratios) {
        require(r >= 0.0 && r <= 1.0, "ratios must lie in [0, 1]");
      }
      break;
    }
    case ExperimentKind::FermionDwave: {
      const auto& p = c.fermion;
      require(p.nx >= 1 && p.ny >= 1, "nx and ny must be >= 1");
      require(p.beta > 0.0, "beta must be > 0");
      require(std::isfinite(p.t) && std::isfinite(p.delta),
              "t and delta must be finite");
      require(p.n_layers >= 0, "n_layers must be >= 0");
      require(p.snapshot_every >= 1, "snapshot_every must be >= 1");
      break;
    }
  }
}

json config_echo(const ExperimentConfig& c) {
  json physics;
  switch (c.kind) {
    case ExperimentKind::VqtHeisenberg:
      physics = json{{"nx", c.vqt.nx},
                     {"ny", c.vqt.ny},
                     {"beta", c.vqt.beta},
                     {"jh", c.vqt.jh},
                     {"jv", c.vqt.jv},
                     {"n_layers", c.vqt.n_layers},
                     {"latent", c.vqt.latent},
                     {"dump_final_state", c.vqt.dump_final_state}};
      break;
    case ExperimentKind::QmhlAnsatzStudy:
      physics = json{{"n_qubits", c.qmhl.n_qubits},
                     {"beta", c.qmhl.beta},
                     {"n_hamiltonians", c.qmhl.n_hamiltonians},
                     {"n_layers", c.qmhl.n_layers},
                     {"beta_sweep", c.qmhl.beta_sweep},
                     {"sweep_restarts", c.qmhl.sweep_restarts}};
      break;
    case ExperimentKind::BosonCompress:
      physics = json{{"n_sites", c.boson.n_sites},
                     {"n_keep", c.boson.n_keep},
                     {"omega", c.boson.omega},
                     {"chi", c.boson.chi},
                     {"ratios", c.boson.ratios}};
      break;
    case ExperimentKind::FermionDwave:
      physics = json{{"nx", c.fermion.nx},
                     {"ny", c.fermion.ny},
                     {"beta", c.fermion.beta},
                     {"t", c.fermion.t},
                     {"delta", c.fermion.delta},
                     {"n_layers", c.fermion.n_layers},
                     {"snapshot_every", c.fermion.snapshot_every}};
      break;
  }
  return json{{"experiment", kind_name(c.kind)},
              {"outdir", c.outdir},
              {"restarts", c.restarts == 0 ? default_restarts(c.kind)
                                           : c.restarts},
              {"seed", c.seed},
              {"train", json{{"learning_rate", c.train.learning_rate},
                             {"max_steps", c.train.max_steps},
                             {"epsilon_fd", c.train.epsilon_fd},
                             {"convergence_tol", c.train.convergence_tol},
                             {"use_adam", c.train.use_adam}}},
              {"physics", physics}};
}

// ---------------------------------------------------------------------------
// Shared experiment plumbing
// ---------------------------------------------------------------------------

struct RunContext {
  fs::path outdir;
  fs::path snapshots;
  json summary;
  std::chrono::steady_clock::time_point started;
};

RunContext begin_run(const ExperimentConfig& config) {
  RunContext ctx;
  ctx.outdir = fs::path(config.outdir);
  ctx.snapshots = ctx.outdir / "snapshots";
  fs::create_directories(ctx.snapshots);
  ctx.started = std::chrono::steady_clock::now();
  ctx.summary["experiment"] = kind_name(config.kind);
  ctx.summary["config"] = config_echo(config);
  ctx.summary["content_hash"] = content_hash(
      config.source_text.empty() ? experiment_config_to_json(config)
                                 : config.source_text);
  return ctx;
}

std::string finish_run(RunContext& ctx) {
  double elapsed = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - ctx.started)
                       .count();
  ctx.summary["wall_clock_seconds"] = elapsed;
  std::string text = ctx.summary.dump(2) + "\n";
  write_text_file(ctx.outdir / "summary.json", text);
  return text;
}

int effective_restarts(const ExperimentConfig& config) {
  return config.restarts == 0 ? default_restarts(config.kind)
                              : config.restarts;
}

// Random initial qubit model: latent parameters uniform on [-1, 1], circuit
// parameters uniform on [-0.5, 0.5].
QhbmModel random_qubit_model(int n_qubits, int n_layers,
                             const std::string& latent_kind,
                             std::uint64_t seed) {
  Rng rng(seed);
  Latent latent;
  if (latent_kind == "bernoulli") {
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

struct QubitRunOutcome {
  QhbmModel model;
  TrainTrace trace;
  double final_loss = 0.0;
  double final_fidelity = 0.0;
  double final_trace_distance = 0.0;
  double final_relative_entropy = 0.0;
};

// Train one restart and evaluate the returned (post-update) model against
// the objective's dense target.
QubitRunOutcome run_qubit_restart(const QhbmModel& init,
                                  const Objective& objective,
                                  const DensityMatrix& target,
                                  bool qmhl_direction,
                                  const TrainConfig& train_config) {
  auto [model, trace] = train(init, objective, train_config);
  QubitRunOutcome out{std::move(model), std::move(trace), 0, 0, 0, 0};
  DensityMatrix visible = visible_state(out.model);
  out.final_loss = objective_loss(out.model, objective);
  out.final_fidelity = fidelity(visible, target);
  out.final_trace_distance = trace_distance(visible, target);
  out.final_relative_entropy = qmhl_direction
                                   ? relative_entropy(target, visible)
                                   : relative_entropy(visible, target);
  return out;
}

json finals_json(const std::vector<QubitRunOutcome>& outcomes) {
  json loss = json::array(), fid = json::array(), td = json::array(),
       rel = json::array();
  for (const QubitRunOutcome& o : outcomes) {
    loss.push_back(o.final_loss);
    fid.push_back(o.final_fidelity);
    td.push_back(o.final_trace_distance);
    rel.push_back(o.final_relative_entropy);
  }
  return json{{"loss", loss},
              {"fidelity", fid},
              {"trace_distance", td},
              {"relative_entropy", rel}};
}

int argmin_loss(const std::vector<QubitRunOutcome>& outcomes) {
  int best = 0;
  for (int r = 1; r < static_cast<int>(outcomes.size()); ++r) {
    if (outcomes[r].final_loss < outcomes[best].final_loss) best = r;
  }
  return best;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

ExperimentConfig experiment_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") +
                                e.what());
  }
  require(j.is_object(), "config must be a JSON object");
  check_keys(j, {"experiment", "outdir", "restarts", "seed", "train",
                 "physics"},
             "config");
  require(j.contains("experiment") && j.at("experiment").is_string(),
          "config requires an \"experiment\" string");

  ExperimentConfig c;
  c.kind = kind_from_name(j.at("experiment").get<std::string>());
  c.source_text = text;
  if (j.contains("outdir")) {
    require(j.at("outdir").is_string(), "outdir must be a string");
    c.outdir = j.at("outdir").get<std::string>();
  }
  c.restarts = get_int(j, "restarts", 0);
  require(!j.contains("restarts") || c.restarts >= 1,
          "restarts must be >= 1");
  if (j.contains("seed")) {
    require(j.at("seed").is_number_integer() &&
                j.at("seed").get<std::int64_t>() >= 0,
            "seed must be a non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }

  if (j.contains("train")) {
    const json& t = j.at("train");
    require(t.is_object(), "train must be an object");
    check_keys(t, {"learning_rate", "max_steps", "epsilon_fd",
                   "convergence_tol", "use_adam"},
               "train");
    c.train.learning_rate =
        get_number(t, "learning_rate", c.train.learning_rate);
    c.train.max_steps = get_int(t, "max_steps", c.train.max_steps);
    c.train.epsilon_fd = get_number(t, "epsilon_fd", c.train.epsilon_fd);
    c.train.convergence_tol =
        get_number(t, "convergence_tol", c.train.convergence_tol);
    if (t.contains("use_adam")) {
      require(t.at("use_adam").is_boolean(), "use_adam must be a boolean");
      c.train.use_adam = t.at("use_adam").get<bool>();
    }
  }

  json p = j.contains("physics") ? j.at("physics") : json::object();
  require(p.is_object(), "physics must be an object");
  switch (c.kind) {
    case ExperimentKind::VqtHeisenberg: {
      check_keys(p, {"nx", "ny", "beta", "jh", "jv", "n_layers", "latent",
                     "dump_final_state"},
                 "physics");
      c.vqt.nx = get_int(p, "nx", c.vqt.nx);
      c.vqt.ny = get_int(p, "ny", c.vqt.ny);
      c.vqt.beta = get_number(p, "beta", c.vqt.beta);
      c.vqt.jh = get_number(p, "jh", c.vqt.jh);
      c.vqt.jv = get_number(p, "jv", c.vqt.jv);
      c.vqt.n_layers = get_int(p, "n_layers", c.vqt.n_layers);
      if (p.contains("latent")) {
        require(p.at("latent").is_string(), "latent must be a string");
        c.vqt.latent = p.at("latent").get<std::string>();
      }
      if (p.contains("dump_final_state")) {
        require(p.at("dump_final_state").is_boolean(),
                "dump_final_state must be a boolean");
        c.vqt.dump_final_state = p.at("dump_final_state").get<bool>();
      }
      break;
    }
    case ExperimentKind::QmhlAnsatzStudy: {
      check_keys(p, {"n_qubits", "beta", "n_hamiltonians", "n_layers",
                     "beta_sweep", "sweep_restarts"},
                 "physics");
      c.qmhl.n_qubits = get_int(p, "n_qubits", c.qmhl.n_qubits);
      c.qmhl.beta = get_number(p, "beta", c.qmhl.beta);
      c.qmhl.n_hamiltonians =
          get_int(p, "n_hamiltonians", c.qmhl.n_hamiltonians);
      c.qmhl.n_layers = get_int(p, "n_layers", c.qmhl.n_layers);
      if (p.contains("beta_sweep")) {
        require(p.at("beta_sweep").is_array(), "beta_sweep must be an array");
        c.qmhl.beta_sweep.clear();
        for (const json& b : p.at("beta_sweep")) {
          require(b.is_number(), "beta_sweep entries must be numbers");
          c.qmhl.beta_sweep.push_back(b.get<double>());
        }
      }
      c.qmhl.sweep_restarts =
          get_int(p, "sweep_restarts", c.qmhl.sweep_restarts);
      break;
    }
    case ExperimentKind::BosonCompress: {
      check_keys(p, {"n_sites", "n_keep", "omega", "chi", "ratios"},
                 "physics");
      c.boson.n_sites = get_int(p, "n_sites", c.boson.n_sites);
      c.boson.n_keep = get_int(p, "n_keep", c.boson.n_keep);
      c.boson.omega = get_number(p, "omega", c.boson.omega);
      c.boson.chi = get_number(p, "chi", c.boson.chi);
      if (p.contains("ratios")) {
        require(p.at("ratios").is_array(), "ratios must be an array");
        c.boson.ratios.clear();
        for (const json& r : p.at("ratios")) {
          require(r.is_number(), "ratios entries must be numbers");
          c.boson.ratios.push_back(r.get<double>());
        }
      }
      break;
    }
    case ExperimentKind::FermionDwave: {
      check_keys(p, {"nx", "ny", "beta", "t", "delta", "n_layers",
                     "snapshot_every"},
                 "physics");
      c.fermion.nx = get_int(p, "nx", c.fermion.nx);
      c.fermion.ny = get_int(p, "ny", c.fermion.ny);
      c.fermion.beta = get_number(p, "beta", c.fermion.beta);
      c.fermion.t = get_number(p, "t", c.fermion.t);
      c.fermion.delta = get_number(p, "delta", c.fermion.delta);
      c.fermion.n_layers = get_int(p, "n_layers", c.fermion.n_layers);
      c.fermion.snapshot_every =
          get_int(p, "snapshot_every", c.fermion.snapshot_every);
      break;
    }
  }
  validate_config(c);
  return c;
}

std::string experiment_config_to_json(const ExperimentConfig& config) {
  return config_echo(config).dump(2) + "\n";
}

std::string content_hash(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;  // FNV-1a offset basis
  for (unsigned char byte : text) {
    hash ^= byte;
    hash *= 0x100000001b3ULL;  // FNV prime
  }
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(hash));
  return buffer;
}

// ---------------------------------------------------------------------------
// VQT on the Heisenberg lattice
// ---------------------------------------------------------------------------

std::string run_vqt_heisenberg(const ExperimentConfig& config, int n_threads) {
  validate_config(config);
  RunContext ctx = begin_run(config);
  const VqtHeisenbergParams& p = config.vqt;
  const int n_qubits = p.nx * p.ny;
  const int restarts = effective_restarts(config);

  PauliSumHamiltonian h = heisenberg_2d(p.nx, p.ny, p.jh, p.jv);
  Objective objective = VqtObjective{h, p.beta};
  DensityMatrix target = thermal_state_oracle(h, p.beta);

  // Exact free-energy bound -ln Z / beta for the summary.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense_matrix(h));
  double e_min = es.eigenvalues().minCoeff();
  double z_shifted = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    z_shifted += std::exp(-p.beta * (es.eigenvalues()[i] - e_min));
  }
  double minus_log_z = p.beta * e_min - std::log(z_shifted);

  std::vector<QubitRunOutcome> outcomes(restarts);
  parallel_for(restarts, n_threads, [&](int r) {
    TrainConfig tc = config.train;
    tc.seed = config.seed + static_cast<std::uint64_t>(r);
    QhbmModel init = random_qubit_model(n_qubits, p.n_layers, p.latent,
                                        tc.seed);
    outcomes[r] = run_qubit_restart(init, objective, target,
                                    /*qmhl_direction=*/false, tc);
  });
  std::vector<TrainTrace> traces;
  traces.reserve(outcomes.size());
  for (const QubitRunOutcome& o : outcomes) traces.push_back(o.trace);
  throw_if_aborted(traces);

  BandTable bands = aggregate_bands(traces);
  write_text_file(ctx.outdir / "trace.csv", bands_to_csv(bands));

  int best = argmin_loss(outcomes);
  if (p.dump_final_state) {
    write_text_file(ctx.snapshots / "final_state.csv",
                    density_to_csv(visible_state(outcomes[best].model)));
    write_text_file(ctx.snapshots / "target_state.csv",
                    density_to_csv(target));
  }

  ctx.summary["restarts"] = restarts;
  ctx.summary["final"] = finals_json(outcomes);
  ctx.summary["best_restart"] = best;
  ctx.summary["free_energy_bound"] = minus_log_z / p.beta;
  ctx.summary["minus_log_partition"] = minus_log_z;
  ctx.summary["target_entropy"] = von_neumann_entropy(target);
  ctx.summary["bands"] = bands_to_json(bands);
  return finish_run(ctx);
}

// ---------------------------------------------------------------------------
// QMHL ansatz study
// ---------------------------------------------------------------------------

namespace {

struct StudyCell {
  double fidelity = 0.0;
  double trace_distance = 0.0;
  double loss = 0.0;
};

json table_stats(const std::vector<double>& values) {
  double sum = 0.0, lo = values[0], hi = values[0];
  for (double v : values) {
    sum += v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return json{{"mean", sum / static_cast<double>(values.size())},
              {"min", lo},
              {"max", hi}};
}

}  // namespace

std::string run_qmhl_ansatz_study(const ExperimentConfig& config,
                                  int n_threads) {
  validate_config(config);
  RunContext ctx = begin_run(config);
  const QmhlAnsatzStudyParams& p = config.qmhl;
  const int n_ham = p.n_hamiltonians;
  const int restarts = effective_restarts(config);
  const char* ansatz_names[2] = {"factorized", "general"};
  const char* latent_kinds[2] = {"bernoulli", "multinoulli"};

  // All seeds are drawn up front from one master stream so the work can be
  // farmed out in any order without changing the results.
  Rng master(config.seed);
  std::vector<std::uint64_t> h_seeds(n_ham);
  for (auto& s : h_seeds) s = master();
  std::vector<std::uint64_t> init_seeds(
      static_cast<std::size_t>(n_ham) * 2 * restarts);
  for (auto& s : init_seeds) s = master();

  std::vector<PauliSumHamiltonian> hams;
  std::vector<DensityMatrix> targets;
  hams.reserve(n_ham);
  targets.reserve(n_ham);
  for (int m = 0; m < n_ham; ++m) {
    hams.push_back(random_coupling_chain(p.n_qubits, h_seeds[m]));
    targets.push_back(thermal_state_oracle(hams.back(), p.beta));
  }

  // tasks indexed (m, ansatz, restart), restart fastest.
  const int n_tasks = n_ham * 2 * restarts;
  std::vector<QubitRunOutcome> outcomes(n_tasks);
  parallel_for(n_tasks, n_threads, [&](int task) {
    int r = task % restarts;
    int a = (task / restarts) % 2;
    int m = task / (2 * restarts);
    TrainConfig tc = config.train;
    tc.seed = init_seeds[static_cast<std::size_t>(task)];
    QhbmModel init =
        random_qubit_model(p.n_qubits, p.n_layers, latent_kinds[a], tc.seed);
    Objective objective = QmhlObjective{targets[m]};
    outcomes[task] = run_qubit_restart(init, objective, targets[m],
                                       /*qmhl_direction=*/true, tc);
    (void)r;
  });

  // Per (hamiltonian, ansatz): the restart with the lowest final loss.
  std::vector<std::vector<StudyCell>> cells(2);  // [ansatz][hamiltonian]
  std::vector<std::vector<TrainTrace>> ansatz_traces(2);
  for (int m = 0; m < n_ham; ++m) {
    for (int a = 0; a < 2; ++a) {
      int base = (m * 2 + a) * restarts;
      int best = base;
      for (int r = 0; r < restarts; ++r) {
        ansatz_traces[a].push_back(outcomes[base + r].trace);
        if (outcomes[base + r].trace.aborted) {
          throw std::runtime_error(
              "hamiltonian " + std::to_string(m) + " ansatz " +
              ansatz_names[a] + " restart " + std::to_string(r) +
              " aborted: " + outcomes[base + r].trace.abort_reason);
        }
        if (outcomes[base + r].final_loss < outcomes[best].final_loss) {
          best = base + r;
        }
      }
      cells[a].push_back(StudyCell{outcomes[best].final_fidelity,
                                   outcomes[best].final_trace_distance,
                                   outcomes[best].final_loss});
    }
  }

  // trace.csv: bands per ansatz across all (hamiltonian, restart) runs.
  std::string trace_csv = std::string("series,step,") + kBandColumns + "\n";
  for (int a = 0; a < 2; ++a) {
    BandTable bands = aggregate_bands(ansatz_traces[a]);
    append_band_rows(trace_csv, bands, std::string(ansatz_names[a]) + ",");
  }
  write_text_file(ctx.outdir / "trace.csv", trace_csv);

  // Tables in the study layout: one row per ansatz, mean/min/max columns.
  json tables;
  std::string tables_csv = "metric,ansatz,mean,min,max\n";
  for (const char* metric : {"fidelity", "trace_distance"}) {
    for (int a = 0; a < 2; ++a) {
      std::vector<double> values;
      for (const StudyCell& cell : cells[a]) {
        values.push_back(std::string(metric) == "fidelity"
                             ? cell.fidelity
                             : cell.trace_distance);
      }
      json stats = table_stats(values);
      tables[metric][ansatz_names[a]] = stats;
      tables_csv += std::string(metric) + ',' + ansatz_names[a] + ',' +
                    fmt17(stats["mean"].get<double>()) + ',' +
                    fmt17(stats["min"].get<double>()) + ',' +
                    fmt17(stats["max"].get<double>()) + '\n';
    }
  }
  write_text_file(ctx.snapshots / "tables.csv", tables_csv);

  // Optional beta sweep on the fixed-field chain.
  json sweep = json::array();
  if (!p.beta_sweep.empty()) {
    PauliSumHamiltonian h_sweep = heisenberg_1d_fields(4, -1.0, 0.3, 0.2);
    std::vector<std::uint64_t> sweep_seeds(p.beta_sweep.size() * 2 *
                                           static_cast<std::size_t>(p.sweep_restarts));
    for (auto& s : sweep_seeds) s = master();
    std::string sweep_csv =
        "beta,ansatz,fidelity_mean,fidelity_p025,fidelity_p975,"
        "trace_distance_mean,trace_distance_p025,trace_distance_p975\n";
    for (std::size_t bi = 0; bi < p.beta_sweep.size(); ++bi) {
      double beta = p.beta_sweep[bi];
      DensityMatrix target = thermal_state_oracle(h_sweep, beta);
      for (int a = 0; a < 2; ++a) {
        std::vector<QubitRunOutcome> runs(p.sweep_restarts);
        parallel_for(p.sweep_restarts, n_threads, [&](int r) {
          TrainConfig tc = config.train;
          tc.seed = sweep_seeds[(bi * 2 + static_cast<std::size_t>(a)) *
                                    static_cast<std::size_t>(p.sweep_restarts) +
                                static_cast<std::size_t>(r)];
          QhbmModel init =
              random_qubit_model(4, p.n_layers, latent_kinds[a], tc.seed);
          runs[r] = run_qubit_restart(init, Objective{QmhlObjective{target}},
                                      target, /*qmhl_direction=*/true, tc);
        });
        std::vector<double> fids, tds;
        for (const QubitRunOutcome& o : runs) {
          if (o.trace.aborted) {
            throw std::runtime_error("beta sweep aborted: " +
                                     o.trace.abort_reason);
          }
          fids.push_back(o.final_fidelity);
          tds.push_back(o.final_trace_distance);
        }
        std::sort(fids.begin(), fids.end());
        std::sort(tds.begin(), tds.end());
        double fid_mean = 0.0, td_mean = 0.0;
        for (double v : fids) fid_mean += v;
        for (double v : tds) td_mean += v;
        fid_mean /= static_cast<double>(fids.size());
        td_mean /= static_cast<double>(tds.size());
        sweep.push_back(json{{"beta", beta},
                             {"ansatz", ansatz_names[a]},
                             {"fidelity_mean", fid_mean},
                             {"fidelity_p025", percentile(fids, 2.5)},
                             {"fidelity_p975", percentile(fids, 97.5)},
                             {"trace_distance_mean", td_mean},
                             {"trace_distance_p025", percentile(tds, 2.5)},
                             {"trace_distance_p975", percentile(tds, 97.5)}});
        sweep_csv += fmt17(beta) + ',' + ansatz_names[a] + ',' +
                     fmt17(fid_mean) + ',' + fmt17(percentile(fids, 2.5)) +
                     ',' + fmt17(percentile(fids, 97.5)) + ',' +
                     fmt17(td_mean) + ',' + fmt17(percentile(tds, 2.5)) + ',' +
                     fmt17(percentile(tds, 97.5)) + '\n';
      }
    }
    write_text_file(ctx.snapshots / "sweep.csv", sweep_csv);
  }

  json per_model = json::array();
  for (int m = 0; m < n_ham; ++m) {
    per_model.push_back(
        json{{"hamiltonian_seed", h_seeds[static_cast<std::size_t>(m)]},
             {"factorized",
              json{{"fidelity", cells[0][static_cast<std::size_t>(m)].fidelity},
                   {"trace_distance",
                    cells[0][static_cast<std::size_t>(m)].trace_distance}}},
             {"general",
              json{{"fidelity", cells[1][static_cast<std::size_t>(m)].fidelity},
                   {"trace_distance",
                    cells[1][static_cast<std::size_t>(m)].trace_distance}}}});
  }
  ctx.summary["restarts"] = restarts;
  ctx.summary["tables"] = tables;
  ctx.summary["per_hamiltonian"] = per_model;
  if (!sweep.empty()) ctx.summary["beta_sweep"] = sweep;
  return finish_run(ctx);
}

// ---------------------------------------------------------------------------
// Boson compression study
// ---------------------------------------------------------------------------

std::string run_boson_compress(const ExperimentConfig& config, int n_threads) {
  validate_config(config);
  RunContext ctx = begin_run(config);
  const BosonCompressParams& p = config.boson;
  const int restarts = effective_restarts(config);

  BosonCovariance full = harmonic_chain_ground(p.n_sites, p.omega, p.chi);
  std::vector<int> keep(static_cast<std::size_t>(p.n_keep));
  for (int k = 0; k < p.n_keep; ++k) keep[static_cast<std::size_t>(k)] = k;
  BosonCovariance gamma_d = partial_trace_modes(full, keep);
  WilliamsonResult oracle = williamson_oracle(gamma_d);
  double oracle_entropy = boson_entropy_from_nus(oracle.nus);

  std::vector<BosonQmhlResult> results(restarts);
  parallel_for(restarts, n_threads, [&](int r) {
    TrainConfig tc = config.train;
    tc.seed = config.seed + static_cast<std::uint64_t>(r);
    results[r] = train_boson_qmhl(gamma_d, tc);
  });
  std::vector<TrainTrace> traces;
  std::vector<double> final_losses;
  for (const BosonQmhlResult& res : results) {
    traces.push_back(res.trace);
    final_losses.push_back(qmhl_boson_loss(res.latent, res.params, gamma_d));
  }
  throw_if_aborted(traces);
  int best = 0;
  for (int r = 1; r < restarts; ++r) {
    if (final_losses[r] < final_losses[best]) best = r;
  }
  const BosonQmhlResult& winner = results[best];

  write_text_file(ctx.outdir / "trace.csv",
                  bands_to_csv(aggregate_bands(traces)));
  write_text_file(ctx.snapshots / "reduced_target.csv",
                  covariance_to_csv(gamma_d));

  // Compression at each configured ratio: error + heat map + reconstruction.
  json compression = json::array();
  for (double ratio : p.ratios) {
    auto [reconstruction, error] =
        compress(winner.latent, winner.params, gamma_d, ratio);
    compression.push_back(json{{"ratio", ratio}, {"error", error}});
    char suffix[16];
    std::snprintf(suffix, sizeof(suffix), "%03d",
                  static_cast<int>(std::lround(ratio * 100.0)));
    write_text_file(ctx.snapshots / ("reconstruction_" + std::string(suffix) +
                                     ".csv"),
                    covariance_to_csv(reconstruction));
    Eigen::MatrixXd heat =
        (reconstruction.gamma - gamma_d.gamma).cwiseAbs();
    std::string heat_csv = "# kind=abs-diff-heatmap rows=" +
                           std::to_string(heat.rows()) +
                           " cols=" + std::to_string(heat.cols()) + "\n";
    for (Eigen::Index i = 0; i < heat.rows(); ++i) {
      for (Eigen::Index j = 0; j < heat.cols(); ++j) {
        heat_csv += fmt17(heat(i, j));
        heat_csv += (j + 1 < heat.cols()) ? ',' : '\n';
      }
    }
    write_text_file(ctx.snapshots / ("heatmap_" + std::string(suffix) +
                                     ".csv"),
                    heat_csv);
  }

  // Learned modular modes (columns of the realized symplectic).
  std::vector<Eigen::VectorXd> modes = modular_modes(winner.params);
  std::string modes_csv =
      "# kind=modular-modes rows=" + std::to_string(modes.size()) +
      " cols=" + std::to_string(2 * p.n_keep) + "\n";
  for (const Eigen::VectorXd& mode : modes) {
    for (Eigen::Index i = 0; i < mode.size(); ++i) {
      modes_csv += fmt17(mode[i]);
      modes_csv += (i + 1 < mode.size()) ? ',' : '\n';
    }
  }
  write_text_file(ctx.snapshots / "modular_modes.csv", modes_csv);

  Eigen::VectorXd trained_nus(winner.latent.n_modes());
  for (int j = 0; j < winner.latent.n_modes(); ++j) {
    trained_nus[j] = nu_from_omega(winner.latent.omegas[j]);
  }
  std::sort(trained_nus.begin(), trained_nus.end());

  ctx.summary["restarts"] = restarts;
  ctx.summary["best_restart"] = best;
  ctx.summary["final_loss"] = json(final_losses);
  ctx.summary["oracle"] = json{{"nus", std::vector<double>(oracle.nus.begin(),
                                                           oracle.nus.end())},
                               {"entropy", oracle_entropy}};
  ctx.summary["trained"] =
      json{{"nus", std::vector<double>(trained_nus.begin(),
                                       trained_nus.end())},
           {"entropy_gap", final_losses[static_cast<std::size_t>(best)] -
                               oracle_entropy}};
  ctx.summary["compression"] = compression;
  return finish_run(ctx);
}

// ---------------------------------------------------------------------------
// Fermionic d-wave VQT
// ---------------------------------------------------------------------------

std::string run_fermion_dwave(const ExperimentConfig& config, int n_threads) {
  validate_config(config);
  RunContext ctx = begin_run(config);
  const FermionDwaveParams& p = config.fermion;
  const int restarts = effective_restarts(config);

  MajoranaQuadraticH h = build_dwave(p.nx, p.ny, p.t, p.delta);
  const int n_fermions = h.n_majoranas / 2;
  const int n_layers = p.n_layers == 0
                           ? default_brick_wall_layers(h.n_majoranas)
                           : p.n_layers;
  FermionCovariance target_cov = thermal_covariance_oracle(h, p.beta);
  double log_z = fermion_log_partition(h, p.beta);
  const bool dense_ok = n_fermions <= 8;

  DensityMatrix dense_target;
  double target_entropy = std::numeric_limits<double>::quiet_NaN();
  if (dense_ok) {
    dense_target = dense_jw_oracle(h, p.beta, /*allow_large=*/true);
    target_entropy = von_neumann_entropy(dense_target);
  }

  // Per-step dense diagnostics (trace distance / fidelity) when available.
  FermionStepAnnotator dense_metrics;
  if (dense_ok) {
    dense_metrics = [&](int, const FermionLatent& latent,
                        const GivensNetwork& net, TrainStep& record) {
      DensityMatrix model = dense_model_state(latent, net, /*allow_large=*/true);
      record.trace_distance = trace_distance(model, dense_target);
      record.fidelity = fidelity(model, dense_target);
    };
  }

  std::vector<FermionVqtResult> results(restarts);
  parallel_for(restarts, n_threads, [&](int r) {
    TrainConfig tc = config.train;
    tc.seed = config.seed + static_cast<std::uint64_t>(r);
    results[r] = train_vqt_fermion(h, p.beta, n_layers, tc, dense_metrics);
  });
  std::vector<TrainTrace> traces;
  std::vector<double> final_losses;
  for (const FermionVqtResult& res : results) {
    traces.push_back(res.trace);
    final_losses.push_back(vqt_fermion_loss(res.latent, res.net, h, p.beta));
  }
  throw_if_aborted(traces);
  int best = 0;
  for (int r = 1; r < restarts; ++r) {
    if (final_losses[r] < final_losses[best]) best = r;
  }

  write_text_file(ctx.outdir / "trace.csv",
                  bands_to_csv(aggregate_bands(traces)));
  write_text_file(ctx.snapshots / "target.csv",
                  fermion_covariance_to_csv(target_cov));

  // Deterministic re-run of the winning restart to capture covariance
  // snapshots on the configured cadence.
  {
    TrainConfig tc = config.train;
    tc.seed = config.seed + static_cast<std::uint64_t>(best);
    FermionStepAnnotator snapshotter =
        [&](int step, const FermionLatent& latent, const GivensNetwork& net,
            TrainStep& record) {
          if (dense_metrics) dense_metrics(step, latent, net, record);
          // The record at step k holds the state after k-1 updates; index
          // snapshots by completed updates so step_0000 is the initial state.
          if ((step - 1) % p.snapshot_every == 0) {
            char name[32];
            std::snprintf(name, sizeof(name), "step_%04d.csv", step - 1);
            write_text_file(
                ctx.snapshots / name,
                fermion_covariance_to_csv(
                    fermion_visible_covariance(latent, net)));
          }
        };
    FermionVqtResult replay =
        train_vqt_fermion(h, p.beta, n_layers, tc, snapshotter);
    write_text_file(ctx.snapshots / "final.csv",
                    fermion_covariance_to_csv(
                        fermion_visible_covariance(replay.latent, replay.net)));
  }

  const FermionVqtResult& winner = results[static_cast<std::size_t>(best)];
  FermionCovariance final_cov =
      fermion_visible_covariance(winner.latent, winner.net);
  double cov_error =
      (final_cov.gamma - target_cov.gamma).cwiseAbs().maxCoeff();

  ctx.summary["restarts"] = restarts;
  ctx.summary["best_restart"] = best;
  ctx.summary["n_fermions"] = n_fermions;
  ctx.summary["n_layers"] = n_layers;
  ctx.summary["final_loss"] = json(final_losses);
  ctx.summary["log_partition"] = log_z;
  ctx.summary["free_energy_gap"] =
      final_losses[static_cast<std::size_t>(best)] + log_z;
  ctx.summary["covariance_max_error"] = cov_error;
  ctx.summary["model_entropy"] = fermion_entropy(winner.latent.lambdas);
  if (dense_ok) {
    DensityMatrix model =
        dense_model_state(winner.latent, winner.net, /*allow_large=*/true);
    ctx.summary["dense"] =
        json{{"fidelity", fidelity(model, dense_target)},
             {"trace_distance", trace_distance(model, dense_target)},
             {"target_entropy", target_entropy},
             {"entropy_error", std::abs(fermion_entropy(winner.latent.lambdas) -
                                        target_entropy)}};
  }
  return finish_run(ctx);
}

// ---------------------------------------------------------------------------
// Dispatch and density CSV
// ---------------------------------------------------------------------------

std::string run_experiment(const ExperimentConfig& config, int n_threads) {
  switch (config.kind) {
    case ExperimentKind::VqtHeisenberg:
      return run_vqt_heisenberg(config, n_threads);
    case ExperimentKind::QmhlAnsatzStudy:
      return run_qmhl_ansatz_study(config, n_threads);
    case ExperimentKind::BosonCompress:
      return run_boson_compress(config, n_threads);
    case ExperimentKind::FermionDwave:
      return run_fermion_dwave(config, n_threads);
  }
  throw std::logic_error("unreachable experiment kind");
}

std::string density_to_csv(const DensityMatrix& rho) {
  std::string csv = "# n_qubits=" + std::to_string(rho.n_qubits) +
                    " kind=density\n";
  for (Eigen::Index r = 0; r < rho.data.rows(); ++r) {
    for (Eigen::Index c = 0; c < rho.data.cols(); ++c) {
      csv += fmt17(rho.data(r, c).real()) + ',' + fmt17(rho.data(r, c).imag());
      csv += (c + 1 < rho.data.cols()) ? ',' : '\n';
    }
  }
  return csv;
}

DensityMatrix density_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int n_qubits = 0;
  if (!std::getline(in, line) ||
      std::sscanf(line.c_str(), "# n_qubits=%d kind=density", &n_qubits) != 1) {
    throw std::invalid_argument("expected header `# n_qubits=N kind=density`");
  }
  if (n_qubits < 1 || n_qubits > 30) {
    throw std::invalid_argument("density CSV has an invalid qubit count");
  }
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  Eigen::MatrixXcd data(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    if (!std::getline(in, line)) {
      throw std::invalid_argument("density CSV has too few rows");
    }
    std::istringstream row(line);
    std::string cell;
    for (Eigen::Index c = 0; c < dim; ++c) {
      double re = 0.0, im = 0.0;
      if (!std::getline(row, cell, ',')) {
        throw std::invalid_argument("density CSV has too few columns");
      }
      re = std::stod(cell);
      if (!std::getline(row, cell, ',')) {
        throw std::invalid_argument("density CSV has too few columns");
      }
      im = std::stod(cell);
      data(r, c) = std::complex<double>(re, im);
    }
  }
  return make_density(n_qubits, std::move(data));
}

}  // namespace qhbm
