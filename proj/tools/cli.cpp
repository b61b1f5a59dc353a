#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vrpca/data_matrix.hpp"
#include "vrpca/dataset_io.hpp"
#include "vrpca/deflation.hpp"
#include "vrpca/errors.hpp"
#include "vrpca/linalg.hpp"
#include "vrpca/metrics.hpp"
#include "vrpca/oracle.hpp"
#include "vrpca/params.hpp"
#include "vrpca/synth.hpp"

namespace vrpca::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kThresholds[] = {-3.0, -6.0, -9.0};

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

double millis_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// JSON has no NaN; absent metrics become null.
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json config_json(const SolverConfig& c) {
  return json{{"step_eta", c.step_eta},
              {"epoch_len_m", c.epoch_len_m},
              {"epochs_T", c.epochs_T},
              {"seed", c.seed},
              {"rank_k", c.rank_k},
              {"oja_step_c", c.oja_step_c},
              {"power_iters", c.power_iters},
              {"determinism", c.determinism},
              {"fast_epoch", c.fast_epoch}};
}

json oracle_json(const OracleResult& o) {
  json j{{"top_eigenvalues", o.eigenvalues},
         {"covariance_eigengap", o.eigengap()},
         {"opt_objective", o.opt_objective}};
  if (o.spectrum.size() >= 2 && o.spectrum[1] > 0.0) {
    j["eigenvalue_ratio_s1_s2"] = o.spectrum[0] / o.spectrum[1];
  }
  return j;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  body(out);
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

void write_manifest(const fs::path& path, const json& manifest) {
  write_file(path, [&](std::ostream& out) { out << manifest.dump(2) << '\n'; });
}

fs::path sidecar(const fs::path& path) { return fs::path(path.string() + ".manifest.json"); }

std::vector<std::string> command_echo(int argc, const char* const* argv) {
  return std::vector<std::string>(argv, argv + argc);
}

struct Dataset {
  DataMatrix X;
  fs::path path;
  std::string sha256;
  DatasetFormat format;
};

Dataset load_dataset(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("input file '" + path.string() + "' does not exist");
  const auto format = detect_format(path);
  return {read_dataset(path), path, file_sha256(path), format};
}

json dataset_json(const Dataset& ds) {
  return json{{"path", ds.path.string()},
              {"sha256", ds.sha256},
              {"format", std::string(to_string(ds.format))},
              {"d", ds.X.dim()},
              {"n", ds.X.count()},
              {"nnz", ds.X.nnz()}};
}

// Oracle for desk-scale inputs; nullopt when skipped or too large.
std::optional<OracleResult> maybe_oracle(const DataMatrix& X, std::size_t k, bool skip,
                                         std::ostream& err) {
  if (skip) return std::nullopt;
  if (X.dim() > kOracleMaxDim) {
    err << "note: d = " << X.dim() << " exceeds the oracle limit " << kOracleMaxDim
        << "; using the best-observed denominator\n";
    return std::nullopt;
  }
  return oracle_compute(X, k);
}

// Records ||X^T B||_F^2 per trace record; scored once the run is over.
class EnergyRecorder final : public IterateEvaluator {
 public:
  using EnergyFn = std::function<double(const Basis&)>;
  explicit EnergyRecorder(EnergyFn energy) : energy_(std::move(energy)) {}

  double log10_suboptimality(const Basis& B) const override {
    energies_.push_back(energy_(B));
    return kNaN;
  }
  std::optional<double> alignment_sq(const Basis&) const override { return std::nullopt; }
  double reference() const override { return 0.0; }
  const std::vector<double>& energies() const noexcept { return energies_; }

 private:
  EnergyFn energy_;
  mutable std::vector<double> energies_;
};

double max_energy(const std::vector<double>& energies) {
  double best = 0.0;
  for (double e : energies) best = std::max(best, e);
  return best;
}

void score_against(ConvergenceTrace& trace, const std::vector<double>& energies, double reference) {
  trace.metric_reference = reference;
  for (std::size_t j = 0; j < trace.records.size() && j < energies.size(); ++j) {
    trace.records[j].log10_suboptimality =
        reference > 0.0 ? log10_suboptimality(energies[j], reference) : kNaN;
  }
}

// n (w^T A w - sum_l s_l <v_l, w>^2): the captured energy of the deflated problem.
double deflated_energy(const DataMatrix& X, const Basis& B, std::span<const DeflationPair> removed) {
  double e = captured_energy(X, B);
  for (const auto& p : removed) {
    const double c = dot(p.vector, B.col(0));
    e -= static_cast<double>(X.count()) * p.eigenvalue * c * c;
  }
  return e;
}

// Level j of a deflation run scored against the oracle pair j with the
// oracle's first j pairs removed.
class LevelOracleEvaluator final : public IterateEvaluator {
 public:
  LevelOracleEvaluator(const DataMatrix& X, const OracleResult& oracle, std::size_t level)
      : X_(X), target_(oracle.eigenvectors.col(level)) {
    for (std::size_t l = 0; l < level; ++l) {
      const auto v = oracle.eigenvectors.col(l);
      removed_.push_back({oracle.eigenvalues[l], std::vector<double>(v.begin(), v.end())});
    }
    reference_ = static_cast<double>(X.count()) * oracle.eigenvalues[level];
  }

  double log10_suboptimality(const Basis& B) const override {
    return vrpca::log10_suboptimality(deflated_energy(X_, B, removed_), reference_);
  }
  std::optional<double> alignment_sq(const Basis& B) const override {
    const double c = dot(target_, B.col(0));
    return std::min(1.0, c * c);
  }
  double reference() const override { return reference_; }

 private:
  const DataMatrix& X_;
  std::span<const double> target_;
  std::vector<DeflationPair> removed_;
  double reference_ = 0.0;
};

void write_trace_file(const fs::path& path, const ConvergenceTrace& trace, bool with_wall) {
  write_file(path, [&](std::ostream& out) { write_trace_csv(trace, out, with_wall); });
}

json trace_summary(const ConvergenceTrace& trace) {
  json j;
  if (!trace.records.empty()) {
    const auto& last = trace.records.back();
    j["final_epoch"] = last.epoch;
    j["final_effective_passes"] = last.effective_passes;
    j["final_log10_subopt"] = number_or_null(last.log10_suboptimality);
    if (last.alignment_sq) j["final_alignment_sq"] = *last.alignment_sq;
    j["wall_ms"] = last.wall_millis;
  }
  j["metric_reference"] = trace.metric_reference;
  j["warnings"] = trace.warnings;
  return j;
}

fs::path with_suffix(const fs::path& path, const std::string& suffix) {
  fs::path out = path.parent_path() / (path.stem().string() + suffix);
  out += path.extension();
  return out;
}

double inverse_mean_norm(const DataMatrix& X) {
  const double r_bar = X.mean_squared_norm();
  if (!(r_bar > 0.0)) throw DomainError("data matrix is entirely zero");
  return 1.0 / r_bar;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    const auto* first = item.data();
    const auto* last = item.data() + item.size();
    while (first < last && *first == ' ') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !(v > 0.0)) {
      throw UsageError("--oja-grid: '" + item + "' is not a positive number");
    }
    grid.push_back(v);
  }
  if (grid.empty()) throw UsageError("--oja-grid is empty");
  return grid;
}

void apply_threads(std::optional<int> threads) {
  if (threads) {
    if (*threads < 1) throw UsageError("--threads must be >= 1");
    set_num_threads(*threads);
    return;
  }
  if (const char* env = std::getenv(kThreadsEnv)) {
    int value = 0;
    const std::string_view s(env);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec == std::errc() && ptr == s.data() + s.size() && value >= 1) set_num_threads(value);
  }
}

// ---------------------------------------------------------------- generate

struct GenerateFlags {
  std::size_t d = 100;
  std::size_t n = 1000;
  double lambda = 0.05;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> tail_seed;
  std::optional<std::uint64_t> matrix_seed;
  std::string out;
  std::optional<std::string> format;
};

DatasetFormat format_for(const fs::path& path, const std::optional<std::string>& name) {
  if (name) {
    try {
      return parse_dataset_format(*name);
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
  }
  const auto ext = path.extension().string();
  if (ext == ".csv") return DatasetFormat::dense_csv;
  if (ext == ".txt" || ext == ".svm") return DatasetFormat::sparse_text;
  return DatasetFormat::dense_binary;
}

int cmd_generate(const GenerateFlags& f, const std::vector<std::string>& command,
                 std::ostream& out, std::ostream& err) {
  const auto started = utc_now();
  auto spec = spectrum_spec(f.d, f.n, f.lambda, f.seed);
  if (f.tail_seed) spec.tail_seed = *f.tail_seed;
  if (f.matrix_seed) spec.matrix_seed = *f.matrix_seed;
  try {
    validate(spec);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }

  const fs::path path(f.out);
  const auto format = format_for(path, f.format);
  const auto t0 = Clock::now();
  const auto X = synth_generate(spec);
  const double gen_ms = millis_since(t0);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_dataset(X, path, format);
  const auto sha = file_sha256(path);

  json manifest{{"command", command}, {"subcommand", "generate"}};
  manifest["dataset"] = {{"path", path.string()},
                         {"sha256", sha},
                         {"format", std::string(to_string(format))},
                         {"d", X.dim()},
                         {"n", X.count()}};
  manifest["config"] = {{"dim_d", spec.dim_d},
                        {"count_n", spec.count_n},
                        {"singular_value_gap_lambda", spec.gap_lambda},
                        {"tail_seed", spec.tail_seed},
                        {"matrix_seed", spec.matrix_seed},
                        {"singular_values", prescribed_singular_values(spec)}};
  if (X.dim() <= kOracleMaxDim) {
    manifest["oracle"] = oracle_json(oracle_compute(X, std::min<std::size_t>(6, X.dim())));
  } else {
    err << "note: oracle summary skipped for d = " << X.dim() << '\n';
  }
  const auto manifest_path = sidecar(path);
  manifest["outputs"] = {path.string(), manifest_path.string()};
  manifest["timings_ms"] = {{"generate", gen_ms}};
  manifest["timestamps"] = {{"started", started}, {"finished", utc_now()}};
  write_manifest(manifest_path, manifest);

  out << path.string() << "  sha256=" << sha << '\n';
  return kOk;
}

// ---------------------------------------------------------------- solve

struct SolveFlags {
  std::string in;
  std::string solver = "vrpca";
  std::size_t k = 1;
  std::optional<double> eta;
  std::optional<std::size_t> m;
  std::optional<std::size_t> epochs;
  std::optional<double> oja_c;
  std::optional<std::size_t> power_iters;
  std::uint64_t seed = 0;
  std::string params = "heuristic";
  std::optional<double> delta;
  std::optional<double> epsilon;
  std::optional<double> lambda;
  bool deflate = false;
  std::optional<std::string> trace_out;
  bool no_oracle = false;
  bool fast_epoch = false;
  bool nondeterministic = false;
};

constexpr std::size_t kDefaultEpochs = 10;

int cmd_solve(const SolveFlags& f, const std::vector<std::string>& command, std::ostream& out,
              std::ostream& err) {
  const auto started = utc_now();
  const auto kind = parse_solver_kind(f.solver);
  if (f.params != "manual" && (f.eta || f.m)) {
    throw UsageError("--eta and --m are only accepted with --params manual");
  }

  const auto ds = load_dataset(f.in);
  const DataMatrix& X = ds.X;
  if (f.k > X.dim()) throw UsageError("--k exceeds the data dimension");

  const auto t_oracle = Clock::now();
  const auto oracle = maybe_oracle(X, f.k, f.no_oracle, err);
  const double oracle_ms = millis_since(t_oracle);

  SolverConfig cfg;
  cfg.seed = f.seed;
  cfg.rank_k = f.k;
  cfg.determinism = !f.nondeterministic;
  cfg.fast_epoch = f.fast_epoch;
  cfg.epochs_T = f.epochs.value_or(kDefaultEpochs);

  json params_json{{"mode", f.params}};
  if (f.params == "heuristic") {
    const auto hp = heuristic_params(X);
    cfg.step_eta = hp.eta;
    cfg.epoch_len_m = hp.m;
  } else if (f.params == "manual") {
    if (!f.eta || !f.m) throw UsageError("--params manual requires --eta and --m");
    if (!(*f.eta > 0.0)) throw UsageError("--eta must be > 0");
    cfg.step_eta = *f.eta;
    cfg.epoch_len_m = *f.m;
  } else {
    if (!f.delta || !f.epsilon) throw UsageError("--params theory requires --delta and --epsilon");
    double lambda = 0.0;
    if (f.lambda) {
      lambda = *f.lambda;
    } else if (oracle) {
      lambda = oracle->eigengap();
    } else {
      throw UsageError("--params theory needs --lambda when the oracle is skipped");
    }
    const double r = std::sqrt(X.max_squared_norm());
    TheoryParams tp;
    try {
      tp = theory_params(r, lambda, *f.delta, *f.epsilon);
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
    const auto cond = check_theory_conditions(r, lambda, *f.delta, tp.eta, tp.m);
    params_json["r"] = r;
    params_json["lambda"] = lambda;
    params_json["lambda_source"] = f.lambda ? "flag" : "oracle";
    params_json["delta"] = *f.delta;
    params_json["epsilon"] = *f.epsilon;
    params_json["noise_term"] = cond.noise_term;
    params_json["satisfied"] = tp.satisfied;
    if (!tp.satisfied) {
      err << "error: theory parameters are not satisfiable: eta = " << format_number(tp.eta)
          << ", m = " << tp.m << ", noise term " << format_number(cond.noise_term)
          << " exceeds the bound; try a smaller --delta or a larger --lambda\n";
      return kUsage;
    }
    cfg.step_eta = tp.eta;
    cfg.epoch_len_m = tp.m;
    if (!f.epochs) cfg.epochs_T = tp.T;
  }
  cfg.oja_step_c = f.oja_c.value_or(inverse_mean_norm(X));
  cfg.power_iters = f.power_iters.value_or(cfg.epochs_T);

  const bool with_wall = !cfg.determinism;
  json manifest{{"command", command}, {"subcommand", "solve"}};
  manifest["dataset"] = dataset_json(ds);
  manifest["solver"] = std::string(to_string(kind));
  manifest["params"] = params_json;
  manifest["config"] = config_json(cfg);
  manifest["deflate"] = f.deflate;
  manifest["metric"] = oracle ? "oracle" : "best_observed";
  if (oracle) manifest["oracle"] = oracle_json(*oracle);

  std::vector<ConvergenceTrace> traces;
  std::vector<fs::path> trace_paths;
  const auto t_solve = Clock::now();

  if (f.deflate) {
    std::vector<std::unique_ptr<IterateEvaluator>> evaluators;
    std::vector<const EnergyRecorder*> recorders;
    auto factory = [&](std::size_t level,
                       std::span<const DeflationPair> found) -> const IterateEvaluator* {
      if (oracle) {
        evaluators.push_back(std::make_unique<LevelOracleEvaluator>(X, *oracle, level));
      } else {
        std::vector<DeflationPair> removed(found.begin(), found.end());
        auto rec = std::make_unique<EnergyRecorder>(
            [&X, removed](const Basis& B) { return deflated_energy(X, B, removed); });
        recorders.push_back(rec.get());
        evaluators.push_back(std::move(rec));
      }
      return evaluators.back().get();
    };
    auto res = deflation_solve(X, cfg, f.k, kind, factory);
    traces = std::move(res.traces);
    for (std::size_t j = 0; j < recorders.size(); ++j) {
      score_against(traces[j], recorders[j]->energies(), max_energy(recorders[j]->energies()));
    }
    json pairs = json::array();
    for (const auto& p : res.pairs) pairs.push_back(p.eigenvalue);
    manifest["eigenvalues"] = pairs;
    for (const auto& w : res.warnings) err << "warning: " << w << '\n';
    out << "eigenvalues:";
    for (const auto& p : res.pairs) out << ' ' << format_number(p.eigenvalue);
    out << '\n';
  } else {
    const auto init = random_init(X.dim(), f.k, f.seed);
    SolveOptions options;
    std::unique_ptr<IterateEvaluator> evaluator;
    EnergyRecorder* recorder = nullptr;
    if (oracle) {
      evaluator = std::make_unique<OracleEvaluator>(X, *oracle);
    } else {
      auto rec = std::make_unique<EnergyRecorder>(
          [&X](const Basis& B) { return captured_energy(X, B); });
      recorder = rec.get();
      evaluator = std::move(rec);
    }
    options.evaluator = evaluator.get();
    auto res = solve(kind, X, cfg, init, options);
    if (recorder) score_against(res.trace, recorder->energies(), max_energy(recorder->energies()));
    traces.push_back(std::move(res.trace));
  }
  const double solve_ms = millis_since(t_solve);

  json trace_info = json::array();
  for (std::size_t j = 0; j < traces.size(); ++j) {
    json info = trace_summary(traces[j]);
    if (f.trace_out) {
      const fs::path path = traces.size() == 1 && !f.deflate
                                ? fs::path(*f.trace_out)
                                : with_suffix(*f.trace_out, "_v" + std::to_string(j + 1));
      write_trace_file(path, traces[j], with_wall);
      trace_paths.push_back(path);
      info["path"] = path.string();
    } else {
      if (traces.size() > 1) out << "# level " << j + 1 << '\n';
      write_trace_csv(traces[j], out, with_wall);
    }
    trace_info.push_back(info);
  }

  manifest["traces"] = trace_info;
  manifest["timings_ms"] = {{"oracle", oracle_ms}, {"solve", solve_ms}};
  manifest["timestamps"] = {{"started", started}, {"finished", utc_now()}};
  if (f.trace_out) {
    const auto manifest_path = sidecar(*f.trace_out);
    json outputs = json::array();
    for (const auto& p : trace_paths) outputs.push_back(p.string());
    outputs.push_back(manifest_path.string());
    manifest["outputs"] = outputs;
    write_manifest(manifest_path, manifest);
    const auto& last = traces.back().records.back();
    out << "final log10_subopt " << format_number(last.log10_suboptimality) << " after "
        << format_number(last.effective_passes) << " passes\n";
  }
  return kOk;
}

// ---------------------------------------------------------------- compare

struct CompareFlags {
  std::string in;
  double budget_passes = 20.0;
  std::string oja_grid = "1,10,100";
  double hybrid_oja = 1.0;
  std::size_t k = 1;
  std::uint64_t seed = 0;
  std::string out_prefix;
  bool no_oracle = false;
};

struct CompareEntry {
  SolverKind kind;
  std::string tag;
  std::string param_string;
  SolverConfig cfg;
};

std::string summary_cell(std::optional<double> v) { return v ? format_number(*v) : std::string(); }

int cmd_compare(const CompareFlags& f, const std::vector<std::string>& command, std::ostream& out,
                std::ostream& err) {
  const auto started = utc_now();
  if (!(f.budget_passes >= 1.0)) throw UsageError("--budget-passes must be >= 1");
  const auto grid = parse_grid(f.oja_grid);
  const auto ds = load_dataset(f.in);
  const DataMatrix& X = ds.X;
  if (f.k > X.dim()) throw UsageError("--k exceeds the data dimension");

  const auto t_oracle = Clock::now();
  const auto oracle = maybe_oracle(X, f.k, f.no_oracle, err);
  const double oracle_ms = millis_since(t_oracle);

  const auto hp = heuristic_params(X);
  const double inv_r_bar = inverse_mean_norm(X);
  const double epoch_passes = vrpca_epoch_passes(hp.m, X.count());
  const auto budget_whole = static_cast<std::size_t>(std::floor(f.budget_passes));

  SolverConfig base;
  base.rank_k = f.k;
  base.step_eta = hp.eta;
  base.epoch_len_m = hp.m;
  base.oja_step_c = f.hybrid_oja * inv_r_bar;

  std::vector<CompareEntry> entries;
  {
    SolverConfig c = base;
    c.epochs_T = static_cast<std::size_t>(std::floor(f.budget_passes / epoch_passes));
    if (c.epochs_T == 0) throw UsageError("--budget-passes is below one VR-PCA epoch");
    entries.push_back({SolverKind::vrpca, "vrpca",
                       "eta=" + format_number(c.step_eta) + ";m=" + std::to_string(c.epoch_len_m) +
                           ";T=" + std::to_string(c.epochs_T),
                       c});
  }
  {
    SolverConfig c = base;
    c.power_iters = budget_whole;
    entries.push_back({SolverKind::power, "power", "rounds=" + std::to_string(c.power_iters), c});
  }
  for (double g : grid) {
    SolverConfig c = base;
    c.epochs_T = budget_whole;
    c.oja_step_c = g * inv_r_bar;
    entries.push_back({SolverKind::oja, "oja_x" + format_number(g),
                       "c=" + format_number(g) + "/r_bar;passes=" + std::to_string(c.epochs_T), c});
  }
  {
    SolverConfig c = base;
    c.epochs_T = static_cast<std::size_t>(std::floor((f.budget_passes - 1.0) / epoch_passes));
    entries.push_back({SolverKind::hybrid, "hybrid",
                       "c=" + format_number(f.hybrid_oja) + "/r_bar;eta=" +
                           format_number(c.step_eta) + ";m=" + std::to_string(c.epoch_len_m) +
                           ";T=" + std::to_string(c.epochs_T),
                       c});
  }
  for (std::size_t e = 0; e < entries.size(); ++e) entries[e].cfg.seed = derive_seed(f.seed, e);

  const auto init = random_init(X.dim(), f.k, f.seed);
  std::unique_ptr<OracleEvaluator> shared_eval;
  if (oracle) shared_eval = std::make_unique<OracleEvaluator>(X, *oracle);

  const auto count = static_cast<std::ptrdiff_t>(entries.size());
  std::vector<std::optional<ConvergenceTrace>> traces(entries.size());
  std::vector<std::vector<double>> energies(entries.size());
  std::vector<std::exception_ptr> failures(entries.size());
  const auto t_solve = Clock::now();

#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t e = 0; e < count; ++e) {
    try {
      SolveOptions options;
      std::unique_ptr<EnergyRecorder> recorder;
      if (shared_eval) {
        options.evaluator = shared_eval.get();
      } else {
        recorder = std::make_unique<EnergyRecorder>(
            [&X](const Basis& B) { return captured_energy(X, B); });
        options.evaluator = recorder.get();
      }
      auto res = solve(entries[e].kind, X, entries[e].cfg, init, options);
      if (recorder) energies[e] = recorder->energies();
      traces[e] = std::move(res.trace);
    } catch (...) {
      failures[e] = std::current_exception();
    }
  }
  for (const auto& fail : failures) {
    if (fail) std::rethrow_exception(fail);
  }
  const double solve_ms = millis_since(t_solve);

  if (!oracle) {
    // One denominator for all solvers keeps the curves comparable.
    double reference = 0.0;
    for (const auto& e : energies) reference = std::max(reference, max_energy(e));
    for (std::size_t e = 0; e < entries.size(); ++e) score_against(*traces[e], energies[e], reference);
  }

  json manifest{{"command", command}, {"subcommand", "compare"}};
  manifest["dataset"] = dataset_json(ds);
  manifest["budget_passes"] = f.budget_passes;
  manifest["init_seed"] = f.seed;
  manifest["metric"] = oracle ? "oracle" : "best_observed";
  if (oracle) manifest["oracle"] = oracle_json(*oracle);

  json runs = json::array();
  json outputs = json::array();
  const fs::path summary_path = f.out_prefix + "_summary.csv";
  std::ostringstream summary;
  summary << "solver,param_string,final_log10_subopt,passes_to_m3,passes_to_m6,passes_to_m9\n";
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const auto& entry = entries[e];
    const auto& trace = *traces[e];
    const fs::path path = f.out_prefix + "_" + entry.tag + ".csv";
    write_trace_file(path, trace, false);
    outputs.push_back(path.string());

    summary << to_string(entry.kind) << ',' << entry.param_string << ','
            << format_number(trace.records.back().log10_suboptimality);
    for (double threshold : kThresholds) summary << ',' << summary_cell(passes_to_threshold(trace, threshold));
    summary << '\n';

    json run = trace_summary(trace);
    run["solver"] = std::string(to_string(entry.kind));
    run["param_string"] = entry.param_string;
    run["config"] = config_json(entry.cfg);
    run["path"] = path.string();
    runs.push_back(run);
  }
  write_file(summary_path, [&](std::ostream& o) { o << summary.str(); });
  outputs.push_back(summary_path.string());

  const fs::path manifest_path = f.out_prefix + "_manifest.json";
  outputs.push_back(manifest_path.string());
  manifest["runs"] = runs;
  manifest["outputs"] = outputs;
  manifest["timings_ms"] = {{"oracle", oracle_ms}, {"solve_all", solve_ms}};
  manifest["timestamps"] = {{"started", started}, {"finished", utc_now()}};
  write_manifest(manifest_path, manifest);

  out << summary.str();
  return kOk;
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw std::runtime_error("format_number: buffer too small");
  return std::string(buf, ptr);
}

void write_trace_csv(const ConvergenceTrace& trace, std::ostream& out, bool with_wall) {
  out << "epoch,effective_passes,log10_subopt,alignment_sq,wall_ms\n";
  for (const auto& r : trace.records) {
    out << r.epoch << ',' << format_number(r.effective_passes) << ',';
    if (std::isfinite(r.log10_suboptimality)) out << format_number(r.log10_suboptimality);
    out << ',';
    if (r.alignment_sq) out << format_number(*r.alignment_sq);
    out << ',';
    if (with_wall) out << format_number(r.wall_millis);
    out << '\n';
  }
}

std::optional<double> passes_to_threshold(const ConvergenceTrace& trace, double threshold) {
  for (const auto& r : trace.records) {
    if (r.log10_suboptimality <= threshold) return r.effective_passes;
  }
  return std::nullopt;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"VR-PCA and baseline solvers for leading principal components"};
  app.name("vrpca");
  app.require_subcommand(1);
  std::optional<int> threads;
  app.add_option("--threads", threads, "worker threads (default: $VRPCA_NUM_THREADS)");

  GenerateFlags gen;
  auto* generate = app.add_subcommand("generate", "write a controlled-spectrum synthetic dataset");
  generate->add_option("--d", gen.d, "dimension")->check(CLI::PositiveNumber);
  generate->add_option("--n", gen.n, "number of columns")->check(CLI::PositiveNumber);
  generate->add_option("--lambda", gen.lambda, "singular value gap, in (0, 0.5)");
  generate->add_option("--seed", gen.seed, "seed for the tail and the factors");
  generate->add_option("--tail-seed", gen.tail_seed, "override the tail seed");
  generate->add_option("--matrix-seed", gen.matrix_seed, "override the factor seed");
  generate->add_option("--out", gen.out, "output path")->required();
  generate->add_option("--format", gen.format, "vrpd | sparse | csv (default: from extension)");

  SolveFlags sol;
  auto* solve_cmd = app.add_subcommand("solve", "run one solver and write its convergence trace");
  solve_cmd->add_option("--in", sol.in, "dataset path")->required();
  solve_cmd->add_option("--solver", sol.solver, "vrpca | oja | power | hybrid")
      ->check(CLI::IsMember({"vrpca", "oja", "power", "hybrid"}));
  solve_cmd->add_option("--k", sol.k, "number of components")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--eta", sol.eta, "VR-PCA step size (manual params)");
  solve_cmd->add_option("--m", sol.m, "VR-PCA epoch length (manual params)")
      ->check(CLI::PositiveNumber);
  solve_cmd->add_option("--epochs", sol.epochs, "epochs, Oja passes, or power rounds (default 10)")
      ->check(CLI::PositiveNumber);
  solve_cmd->add_option("--oja-c", sol.oja_c, "Oja step constant c in c/t (default 1/r_bar)")
      ->check(CLI::NonNegativeNumber);
  solve_cmd->add_option("--power-iters", sol.power_iters, "power rounds (default: --epochs)")
      ->check(CLI::PositiveNumber);
  solve_cmd->add_option("--seed", sol.seed, "seed for the init and the sampling");
  solve_cmd->add_option("--params", sol.params, "heuristic | theory | manual")
      ->check(CLI::IsMember({"heuristic", "theory", "manual"}));
  solve_cmd->add_option("--delta", sol.delta, "failure probability (theory params)");
  solve_cmd->add_option("--epsilon", sol.epsilon, "target accuracy (theory params)");
  solve_cmd->add_option("--lambda", sol.lambda, "covariance eigengap (theory params)");
  solve_cmd->add_flag("--deflate", sol.deflate, "extract k vectors one at a time");
  solve_cmd->add_option("--trace-out", sol.trace_out, "trace CSV path (default: stdout)");
  solve_cmd->add_flag("--no-oracle", sol.no_oracle, "skip the eigendecomposition");
  solve_cmd->add_flag("--fast-epoch", sol.fast_epoch, "amortized sparse epochs (k = 1)");
  solve_cmd->add_flag("--nondeterministic", sol.nondeterministic,
                      "unordered parallel reductions; wall_ms is recorded");

  CompareFlags cmp;
  auto* compare = app.add_subcommand("compare", "run all solvers under one pass budget");
  compare->add_option("--in", cmp.in, "dataset path")->required();
  compare->add_option("--budget-passes", cmp.budget_passes, "effective data passes per solver");
  compare->add_option("--oja-grid", cmp.oja_grid, "Oja step constants in units of 1/r_bar");
  compare->add_option("--hybrid-oja-c", cmp.hybrid_oja, "hybrid warm-start c in units of 1/r_bar")
      ->check(CLI::NonNegativeNumber);
  compare->add_option("--k", cmp.k, "number of components")->check(CLI::PositiveNumber);
  compare->add_option("--seed", cmp.seed, "shared init seed; run seeds derive from it");
  compare->add_option("--out-prefix", cmp.out_prefix, "prefix for traces and summary")->required();
  compare->add_flag("--no-oracle", cmp.no_oracle, "skip the eigendecomposition");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  const auto command = command_echo(argc, argv);
  try {
    apply_threads(threads);
    if (*generate) return cmd_generate(gen, command, out, err);
    if (*solve_cmd) return cmd_solve(sol, command, out, err);
    return cmd_compare(cmp, command, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const RankDeficiencyError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const DegenerateIterateError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kUsage;
  } catch (const ShapeError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  }
}

}  // namespace vrpca::cli
