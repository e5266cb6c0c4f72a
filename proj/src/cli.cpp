#include "fdodmd/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "fdodmd/fourier.hpp"
#include "fdodmd/io.hpp"
#include "fdodmd/noise.hpp"

namespace fdodmd::cli {

namespace {

namespace fs = std::filesystem;

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
  throw std::invalid_argument("config " + path + ": " + what);
}

// Consumes the keys of one JSON object; whatever is left over at finish()
// is reported as unknown.
class Fields {
 public:
  Fields(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) config_error(path_, "expected an object");
  }

  bool has(const std::string& key) const {
    return obj_.contains(key) && !obj_.at(key).is_null();
  }

  const json* raw(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) return nullptr;
    return &obj_.at(key);
  }

  std::optional<double> number(const std::string& key) {
    const json* j = raw(key);
    if (!j) return std::nullopt;
    if (!j->is_number()) config_error(at(key), "expected a number");
    return j->get<double>();
  }

  std::optional<std::int64_t> integer(const std::string& key) {
    const json* j = raw(key);
    if (!j) return std::nullopt;
    if (!j->is_number_integer()) config_error(at(key), "expected an integer");
    return j->get<std::int64_t>();
  }

  std::optional<std::uint64_t> unsigned_integer(const std::string& key) {
    const json* j = raw(key);
    if (!j) return std::nullopt;
    if (!j->is_number_integer() || (!j->is_number_unsigned() && j->get<std::int64_t>() < 0)) {
      config_error(at(key), "expected a nonnegative integer");
    }
    return j->get<std::uint64_t>();
  }

  std::optional<bool> boolean(const std::string& key) {
    const json* j = raw(key);
    if (!j) return std::nullopt;
    if (!j->is_boolean()) config_error(at(key), "expected true or false");
    return j->get<bool>();
  }

  std::optional<std::string> string(const std::string& key) {
    const json* j = raw(key);
    if (!j) return std::nullopt;
    if (!j->is_string()) config_error(at(key), "expected a string");
    return j->get<std::string>();
  }

  template <class T>
  std::optional<std::vector<T>> array(const std::string& key) {
    const json* j = raw(key);
    if (!j) return std::nullopt;
    if (!j->is_array()) config_error(at(key), "expected an array");
    std::vector<T> out;
    for (const auto& e : *j) {
      if constexpr (std::is_integral_v<T>) {
        if (!e.is_number_integer()) config_error(at(key), "expected integers");
      } else {
        if (!e.is_number()) config_error(at(key), "expected numbers");
      }
      out.push_back(e.get<T>());
    }
    return out;
  }

  Fields object(const std::string& key) {
    seen_.insert(key);
    static const json empty = json::object();
    return Fields(has(key) ? obj_.at(key) : empty, at(key));
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.count(key)) config_error(at(key), "unknown or inapplicable field");
    }
  }

  std::string at(const std::string& key) const { return path_ + "/" + key; }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class T>
void assign(T& dst, std::optional<T> v) {
  if (v) dst = *v;
}

void assign_int(int& dst, std::optional<std::int64_t> v) {
  if (v) dst = static_cast<int>(*v);
}

void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) config_error(path, what);
}

std::vector<double> raw_levels(const ExperimentConfig& cfg, std::vector<double>* file_overlaps) {
  const auto& s = cfg.spectrum;
  if (s.source == "file") {
    const Spectrum spec = load_spectrum(s.path);
    if (file_overlaps) *file_overlaps = spec.overlaps();
    return spec.eigenvalues();
  }
  if (s.source == "ladder") return ladder_levels(s.levels, s.gap, s.width);
  if (s.source == "random") return random_levels(s.levels, s.gap, s.width, s.seed);
  std::vector<double> levels = s.eigenvalues;
  std::sort(levels.begin(), levels.end());
  return levels;
}

json rescale_json(const std::optional<RescaleParams>& p) {
  if (!p) return nullptr;
  return json{{"beta0", p->beta0},       {"beta1", p->beta1},
              {"alpha", p->alpha},       {"dt", p->dt},
              {"lower_bound", p->lower_bound}, {"upper_bound", p->upper_bound}};
}

std::size_t count_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("output " + path.string() + " was not written");
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

void check_rows(const fs::path& path, std::size_t rows) {
  const std::size_t lines = count_lines(path);
  if (lines != rows + 1) {
    throw std::runtime_error("output " + path.string() + " has " + std::to_string(lines) +
                             " lines, expected " + std::to_string(rows + 1));
  }
}

void write_report(const fs::path& path, const json& report) {
  const std::string text = report.dump(2) + "\n";
  write_file_atomic(path, text);
  if (read_file(path) != text) throw std::runtime_error("output " + path.string() + " differs");
}

fs::path out_path(const ExperimentConfig& cfg, const std::string& name) {
  return fs::path(cfg.output_dir) / name;
}

NoiseSpec noise_spec(const ExperimentConfig& cfg) {
  NoiseSpec spec;
  spec.seed = cfg.seed;
  if (cfg.noise_kind == "gaussian") {
    spec.kind = GaussianNoise{cfg.epsilon};
  } else {
    spec.kind = ShotNoise{cfg.shots};
  }
  return spec;
}

bool uses_propagator(const MethodConfig& m) { return m.name == "odmd" || m.name == "fdodmd"; }

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  ExperimentConfig cfg;
  Fields top(doc, "");

  {
    Fields f = top.object("spectrum");
    auto& s = cfg.spectrum;
    assign(s.source, f.string("source"));
    if (s.source == "file") {
      assign(s.path, f.string("path"));
    } else if (s.source == "ladder" || s.source == "random") {
      assign_int(s.levels, f.integer("levels"));
      assign(s.gap, f.number("gap"));
      assign(s.width, f.number("width"));
      if (s.source == "random") assign(s.seed, f.unsigned_integer("seed"));
    } else if (s.source == "list") {
      assign(s.eigenvalues, f.array<double>("eigenvalues"));
    } else {
      config_error("/spectrum/source", "expected file, ladder, random or list, got '" + s.source + "'");
    }
    assign(s.rescale, f.boolean("rescale"));
    assign(s.alpha, f.number("alpha"));
    f.finish();
  }

  if (cfg.spectrum.source == "file") {
    cfg.p0 = top.number("p0");
    if (cfg.p0) config_error("/p0", "file spectra carry their own overlaps");
  } else {
    assign(*cfg.p0, top.number("p0"));
  }
  assign(cfg.dt, top.number("dt"));
  assign_int(cfg.k_max, top.integer("k_max"));
  assign(cfg.theta, top.number("theta"));
  assign(cfg.real_only, top.boolean("real_only"));

  {
    Fields f = top.object("noise");
    assign(cfg.noise_kind, f.string("kind"));
    if (cfg.noise_kind == "gaussian") {
      assign(cfg.epsilon, f.number("epsilon"));
    } else if (cfg.noise_kind == "shot") {
      assign(cfg.shots, f.integer("shots"));
    } else {
      config_error("/noise/kind", "expected gaussian or shot, got '" + cfg.noise_kind + "'");
    }
    f.finish();
  }
  assign(cfg.seed, top.unsigned_integer("seed"));

  {
    Fields f = top.object("method");
    auto& m = cfg.method;
    assign(m.name, f.string("name"));
    if (m.name == "fdodmd") {
      assign(m.gammas, f.array<double>("gammas"));
      assign(m.include_raw, f.boolean("include_raw"));
    } else if (m.name == "zeropad") {
      assign_int(m.pad_factor, f.integer("pad_factor"));
    } else if (m.name != "odmd" && m.name != "dft") {
      config_error("/method/name", "expected odmd, fdodmd, dft or zeropad, got '" + m.name + "'");
    }
    f.finish();
  }
  if (uses_propagator(cfg.method)) {
    cfg.delta = top.number("delta");
    assign(cfg.magnitude_floor, top.number("magnitude_floor"));
  } else {
    require(!top.has("delta") && !top.has("magnitude_floor"), "/delta",
            "delta and magnitude_floor apply to odmd and fdodmd only");
    top.raw("delta");
    top.raw("magnitude_floor");
  }
  if (auto d = top.integer("delay")) cfg.delay = static_cast<int>(*d);
  assign(cfg.output_dir, top.string("output_dir"));

  {
    Fields f = top.object("estimate");
    assign(cfg.trajectory, f.string("trajectory"));
    if (auto k = f.integer("k_len")) cfg.k_len = static_cast<int>(*k);
    f.finish();
  }
  {
    Fields f = top.object("sweep");
    assign_int(cfg.k_step, f.integer("k_step"));
    assign(cfg.tolerance, f.number("tolerance"));
    assign_int(cfg.window, f.integer("window"));
    f.finish();
  }
  {
    Fields f = top.object("bound");
    if (auto k = f.array<int>("k_values")) cfg.bound_k = *k;
    assign_int(cfg.trials, f.integer("trials"));
    assign_int(cfg.n_tau, f.integer("n_tau"));
    assign(cfg.taus, f.array<double>("taus"));
    f.finish();
  }
  {
    Fields f = top.object("allocate");
    assign(cfg.total_shots, f.array<std::int64_t>("total_shots"));
    f.finish();
  }
  top.finish();
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

ExperimentConfig resolve(ExperimentConfig cfg) {
  const auto& s = cfg.spectrum;
  if (s.source == "file") {
    require(!s.path.empty(), "/spectrum/path", "missing");
    require(fs::exists(s.path), "/spectrum/path", "file '" + s.path + "' does not exist");
  } else if (s.source == "list") {
    require(!s.eigenvalues.empty(), "/spectrum/eigenvalues", "must not be empty");
  } else {
    require(s.levels >= 2, "/spectrum/levels", "must be >= 2");
    require(s.gap > 0.0 && s.gap <= s.width, "/spectrum/gap", "need 0 < gap <= width");
  }
  require(s.alpha > 0.0, "/spectrum/alpha", "must be positive");
  if (cfg.p0) require(*cfg.p0 > 0.0 && *cfg.p0 <= 1.0, "/p0", "must lie in (0, 1]");
  require(cfg.dt > 0.0, "/dt", "must be positive");
  require(cfg.k_max >= 1, "/k_max", "must be >= 1");
  require(cfg.theta >= 0.0, "/theta", "must be >= 0");
  if (cfg.noise_kind == "gaussian") {
    require(cfg.epsilon >= 0.0 && std::isfinite(cfg.epsilon), "/noise/epsilon", "must be >= 0");
  } else {
    require(cfg.shots >= 1, "/noise/shots", "must be >= 1");
  }

  const auto& m = cfg.method;
  if (m.name == "fdodmd") {
    require(!m.gammas.empty() || m.include_raw, "/method/gammas",
            "empty stack: give gammas or include the raw data");
    for (double g : m.gammas) require(g > 0.0, "/method/gammas", "every gamma must be positive");
  }
  if (m.name == "zeropad") require(m.pad_factor >= 0, "/method/pad_factor", "must be >= 0");
  if (uses_propagator(m)) {
    if (!cfg.delta) {
      require(cfg.noise_kind == "gaussian" && cfg.epsilon > 0.0 && cfg.epsilon < 1.0, "/delta",
              "required unless the noise is Gaussian with 0 < epsilon < 1 (then delta = epsilon)");
      cfg.delta = cfg.epsilon;
    }
    require(*cfg.delta >= 0.0 && *cfg.delta < 1.0, "/delta", "must lie in [0, 1)");
    require(cfg.magnitude_floor >= 0.0, "/magnitude_floor", "must be >= 0");
  }
  if (cfg.delay) require(*cfg.delay >= 1, "/delay", "must be >= 1");
  require(!cfg.output_dir.empty(), "/output_dir", "must not be empty");
  if (cfg.trajectory.empty()) cfg.trajectory = (fs::path(cfg.output_dir) / "noisy.csv").string();
  if (cfg.k_len) require(*cfg.k_len >= 0, "/estimate/k_len", "must be >= 0");
  require(cfg.k_step >= 1, "/sweep/k_step", "must be >= 1");
  require(cfg.tolerance > 0.0, "/sweep/tolerance", "must be positive");
  require(cfg.window >= 1, "/sweep/window", "must be >= 1");
  require(!cfg.bound_k.empty(), "/bound/k_values", "must not be empty");
  // The upper limit k_max + 1 is checked by the bound command, so the
  // defaults do not get in the way of short simulations.
  for (int k : cfg.bound_k) {
    require(k >= 1, "/bound/k_values", "each K must be >= 1");
  }
  require(cfg.trials >= 2, "/bound/trials", "must be >= 2 (the spread is undefined otherwise)");
  require(cfg.n_tau >= 2, "/bound/n_tau", "must be >= 2");
  for (double t : cfg.taus) require(t >= 0.0, "/bound/taus", "thresholds must be >= 0");
  for (auto n : cfg.total_shots) require(n >= 0, "/allocate/total_shots", "must be >= 0");
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  const auto& s = cfg.spectrum;
  json spectrum = {{"source", s.source}};
  if (s.source == "file") {
    spectrum["path"] = s.path;
  } else if (s.source == "list") {
    spectrum["eigenvalues"] = s.eigenvalues;
  } else {
    spectrum["levels"] = s.levels;
    spectrum["gap"] = s.gap;
    spectrum["width"] = s.width;
    if (s.source == "random") spectrum["seed"] = s.seed;
  }
  spectrum["rescale"] = s.rescale;
  spectrum["alpha"] = s.alpha;

  json doc;
  doc["spectrum"] = spectrum;
  if (cfg.p0) doc["p0"] = *cfg.p0;
  doc["dt"] = cfg.dt;
  doc["k_max"] = cfg.k_max;
  doc["theta"] = cfg.theta;
  doc["real_only"] = cfg.real_only;
  doc["noise"] = cfg.noise_kind == "gaussian" ? json{{"kind", "gaussian"}, {"epsilon", cfg.epsilon}}
                                             : json{{"kind", "shot"}, {"shots", cfg.shots}};
  doc["seed"] = cfg.seed;
  json method = {{"name", cfg.method.name}};
  if (cfg.method.name == "fdodmd") {
    method["gammas"] = cfg.method.gammas;
    method["include_raw"] = cfg.method.include_raw;
  } else if (cfg.method.name == "zeropad") {
    method["pad_factor"] = cfg.method.pad_factor;
  }
  doc["method"] = method;
  if (uses_propagator(cfg.method)) {
    doc["delta"] = cfg.delta ? json(*cfg.delta) : json(nullptr);
    doc["magnitude_floor"] = cfg.magnitude_floor;
  }
  doc["delay"] = cfg.delay ? json(*cfg.delay) : json(nullptr);
  doc["output_dir"] = cfg.output_dir;
  doc["estimate"] = {{"trajectory", cfg.trajectory},
                     {"k_len", cfg.k_len ? json(*cfg.k_len) : json(nullptr)}};
  doc["sweep"] = {{"k_step", cfg.k_step}, {"tolerance", cfg.tolerance}, {"window", cfg.window}};
  doc["bound"] = {{"k_values", cfg.bound_k},
                  {"trials", cfg.trials},
                  {"n_tau", cfg.n_tau},
                  {"taus", cfg.taus}};
  doc["allocate"] = {{"total_shots", cfg.total_shots}};
  return doc;
}

Problem build_problem(const ExperimentConfig& cfg) {
  std::vector<double> overlaps;
  std::vector<double> raw = raw_levels(cfg, &overlaps);
  if (cfg.spectrum.source != "file") {
    overlaps = make_reference_overlaps(static_cast<int>(raw.size()), cfg.p0.value_or(0.2));
  }
  std::optional<RescaleParams> params;
  std::vector<double> eigs = raw;
  if (cfg.spectrum.rescale) {
    auto r = rescale_spectrum(raw, cfg.dt, cfg.spectrum.alpha);
    params = r.params;
    eigs = std::move(r.eigenvalues);
  }
  const double target = raw.front();
  return Problem{std::move(raw), Spectrum(std::move(eigs), std::move(overlaps)), params, target};
}

Trajectory noiseless_signal(const ExperimentConfig& cfg, const Problem& problem) {
  return depolarized_signal(problem.spectrum, cfg.theta, cfg.dt,
                            static_cast<std::size_t>(cfg.k_max) + 1, cfg.real_only);
}

Trajectory noisy_signal(const ExperimentConfig& cfg, const Trajectory& clean) {
  return apply_noise(clean, noise_spec(cfg));
}

EstimatorSpec estimator_spec(const ExperimentConfig& cfg) {
  EstimatorSpec spec;
  const auto& m = cfg.method;
  if (m.name == "odmd") {
    spec.method = OdmdMethod{};
  } else if (m.name == "fdodmd") {
    spec.method = FdodmdMethod{m.gammas, m.include_raw};
  } else if (m.name == "dft") {
    spec.method = DftPeakMethod{};
  } else {
    spec.method = ZeroPadMethod{m.pad_factor};
  }
  spec.odmd.delta = cfg.delta.value_or(0.0);
  spec.odmd.magnitude_floor = cfg.magnitude_floor;
  spec.odmd.delay = cfg.delay;
  return spec;
}

int largest_k(std::size_t n_samples, std::optional<int> delay) {
  // K = 0 would give a zero default delay, which no Hankel pair accepts.
  int best = -1;
  for (int k = 1;; ++k) {
    if (samples_needed(k, delay.value_or(default_delay(k))) > n_samples) break;
    best = k;
  }
  return best;
}

json cmd_simulate(const ExperimentConfig& cfg) {
  const Problem problem = build_problem(cfg);
  const Trajectory clean = noiseless_signal(cfg, problem);
  const Trajectory noisy = noisy_signal(cfg, clean);
  const auto clean_path = out_path(cfg, "noiseless.csv");
  const auto noisy_path = out_path(cfg, "noisy.csv");
  write_trajectory_csv(clean_path, clean);
  write_trajectory_csv(noisy_path, noisy);
  check_rows(clean_path, clean.size());
  check_rows(noisy_path, noisy.size());

  json report;
  report["command"] = "simulate";
  report["config"] = to_json(cfg);
  report["samples"] = clean.size();
  report["ground_energy"] = problem.target_energy;
  report["ground_energy_scaled"] = problem.spectrum.ground_energy();
  report["rescale"] = rescale_json(problem.rescale);
  report["files"] = {{"noiseless", clean_path.string()}, {"noisy", noisy_path.string()}};
  write_report(out_path(cfg, "simulate.json"), report);
  return report;
}

json cmd_estimate(const ExperimentConfig& cfg) {
  if (!fs::exists(cfg.trajectory)) {
    throw std::invalid_argument("trajectory file '" + cfg.trajectory + "' does not exist");
  }
  const Trajectory data = read_trajectory_csv(cfg.trajectory);
  if (std::abs(data.dt() - cfg.dt) > 1e-12 * cfg.dt) {
    throw std::invalid_argument("trajectory dt " + format_double(data.dt()) +
                                " does not match config dt " + format_double(cfg.dt));
  }
  const Problem problem = build_problem(cfg);
  const int k_len = cfg.k_len.value_or(largest_k(data.size(), cfg.delay));
  if (k_len < 0) throw std::invalid_argument("trajectory too short for any K");
  const int d_delay = cfg.delay.value_or(default_delay(k_len));
  const EstimatorSpec spec = estimator_spec(cfg);

  json result;
  result["method"] = spec.tag();
  result["k_len"] = k_len;
  result["d_delay"] = d_delay;
  double energy = 0.0;
  if (uses_propagator(cfg.method)) {
    const GseEstimate est =
        cfg.method.name == "odmd"
            ? odmd_estimate(data, k_len, spec.odmd)
            : fdodmd_estimate(data, cfg.method.gammas, cfg.method.include_raw, k_len, spec.odmd);
    energy = est.energy;
    result["energy"] = est.energy;
    result["theta"] = est.theta;
    result["rank_kept"] = est.rank_kept;
    result["delta"] = *cfg.delta;
    result["gammas"] = cfg.method.name == "fdodmd" ? cfg.method.gammas : std::vector<double>{};
    result["include_raw"] = cfg.method.name == "fdodmd" ? cfg.method.include_raw : true;
    result["all_energies"] = est.all_energies;
  } else {
    const std::size_t need = samples_needed(k_len, d_delay);
    if (data.size() < need) throw std::invalid_argument("trajectory too short for this K");
    const Trajectory window = data.head(need);
    const PeakEstimate est = cfg.method.name == "dft"
                                 ? dft_peak_estimate(window)
                                 : zero_padded_peak_estimate(window, cfg.method.pad_factor);
    energy = est.energy;
    result["energy"] = est.energy;
    result["peak_bin"] = est.peak_bin;
    result["padded_length"] = est.padded_length;
    result["sign_ambiguous"] = est.sign_ambiguous;
  }
  if (problem.rescale) result["energy_unscaled"] = unscale_energy(energy, *problem.rescale);
  if (!std::isfinite(energy)) throw std::runtime_error("estimator returned a non-finite energy");

  json report;
  report["command"] = "estimate";
  report["config"] = to_json(cfg);
  report["trajectory"] = cfg.trajectory;
  report["result"] = result;
  write_report(out_path(cfg, "estimate.json"), report);
  return report;
}

json cmd_sweep(const ExperimentConfig& cfg) {
  const Problem problem = build_problem(cfg);
  const Trajectory noisy = noisy_signal(cfg, noiseless_signal(cfg, problem));
  const std::vector<int> grid = default_k_grid(noisy.size(), cfg.k_step);
  if (grid.empty()) throw std::invalid_argument("k_max too small for the first sweep point");
  SweepOptions options;
  options.rescale = problem.rescale;
  const EstimatorSpec spec = estimator_spec(cfg);
  const ConvergenceCurve curve =
      convergence_sweep(noisy, spec, problem.target_energy, grid, options);
  const auto csv_path = out_path(cfg, "curve.csv");
  write_curve_csv(csv_path, curve, cfg.tolerance);
  check_rows(csv_path, curve.points.size());

  const auto stable = steps_to_stable_accuracy(curve, cfg.tolerance, cfg.window);
  std::size_t divergent = 0;
  for (const auto& p : curve.points) divergent += p.status != PointStatus::ok;
  json report;
  report["command"] = "sweep";
  report["config"] = to_json(cfg);
  report["method"] = curve.method;
  report["target_energy"] = curve.target_energy;
  report["tolerance"] = cfg.tolerance;
  report["window"] = cfg.window;
  report["steps_to_stable_accuracy"] = stable ? json(*stable) : json(nullptr);
  report["points"] = curve.points.size();
  report["non_ok_points"] = divergent;
  report["files"] = {{"curve", csv_path.string()}};
  write_report(out_path(cfg, "sweep.json"), report);
  return report;
}

json cmd_bound(const ExperimentConfig& cfg) {
  if (cfg.noise_kind != "gaussian" || !(cfg.epsilon > 0.0)) {
    throw std::invalid_argument("bound: needs Gaussian noise with epsilon > 0");
  }
  for (int k : cfg.bound_k) {
    if (k > cfg.k_max + 1) {
      throw std::invalid_argument("config /bound/k_values: K=" + std::to_string(k) +
                                  " exceeds k_max + 1 = " + std::to_string(cfg.k_max + 1));
    }
  }
  const Problem problem = build_problem(cfg);
  const Trajectory clean = noiseless_signal(cfg, problem);
  const auto rows =
      bound_report(clean, cfg.bound_k, cfg.taus, cfg.epsilon, cfg.trials, cfg.seed, cfg.n_tau);
  const auto csv_path = out_path(cfg, "bound.csv");
  write_bound_csv(csv_path, rows);
  check_rows(csv_path, rows.size());

  std::size_t above = 0;
  for (const auto& r : rows) above += !within_bound(r);
  json report;
  report["command"] = "bound";
  report["config"] = to_json(cfg);
  report["rows"] = rows.size();
  report["rows_above_bound"] = above;
  report["noise_floor"] = 2.0 * cfg.epsilon * cfg.epsilon;
  report["files"] = {{"bound", csv_path.string()}};
  write_report(out_path(cfg, "bound.json"), report);
  return report;
}

json cmd_allocate(const ExperimentConfig& cfg) {
  const Problem problem = build_problem(cfg);
  const std::vector<double> signal = noiseless_signal(cfg, problem).real_samples();
  json runs = json::array();
  for (std::int64_t total : cfg.total_shots) {
    const ShotAllocation alloc = optimal_shot_allocation(signal, total);
    std::vector<std::int64_t> uniform(signal.size(), total / cfg.k_max);
    uniform[0] = 0;
    const auto path = out_path(cfg, "allocation_" + std::to_string(total) + ".csv");
    write_allocation_csv(path, signal, alloc, uniform);
    check_rows(path, signal.size());
    std::int64_t max_dev = 0;
    for (std::size_t k = 1; k < signal.size(); ++k) {
      max_dev = std::max(max_dev, std::abs(alloc.counts[k] - uniform[k]));
    }
    runs.push_back({{"total_shots", total},
                    {"assigned", alloc.assigned()},
                    {"count_k0", alloc.counts[0]},
                    {"uniform_per_step", total / cfg.k_max},
                    {"max_deviation_from_uniform", max_dev},
                    {"objective_optimal", allocation_objective(signal, alloc.counts)},
                    {"objective_uniform", allocation_objective(signal, uniform)},
                    {"file", path.string()}});
  }
  json report;
  report["command"] = "allocate";
  report["config"] = to_json(cfg);
  report["runs"] = runs;
  write_report(out_path(cfg, "allocate.json"), report);
  return report;
}

}  // namespace fdodmd::cli
