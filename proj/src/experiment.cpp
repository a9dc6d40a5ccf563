#include "reglsl/experiment.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "reglsl/error.hpp"
#include "reglsl/io.hpp"
#include "reglsl/numerics.hpp"

namespace reglsl {

namespace pt = boost::property_tree;
namespace fs = std::filesystem;
using json = nlohmann::json;

std::string_view to_string(SourceLayout layout) {
  return layout == SourceLayout::origin ? "origin" : "boundary_pairs";
}

SourceLayout parse_source_layout(std::string_view text) {
  if (text == "origin") return SourceLayout::origin;
  if (text == "boundary_pairs") return SourceLayout::boundary_pairs;
  throw ConfigError("unknown source layout '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// config parsing

namespace {

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> out;
  std::string word;
  for (const char c : text) {
    if (c == ' ' || c == '\t' || c == ',') {
      if (!word.empty()) out.push_back(std::move(word));
      word.clear();
    } else {
      word.push_back(c);
    }
  }
  if (!word.empty()) out.push_back(std::move(word));
  return out;
}

double to_double(const std::string& word, const std::string& where) {
  double value = 0.0;
  const char* end = word.data() + word.size();
  const auto [ptr, ec] = std::from_chars(word.data(), end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
    throw ParseError(where + ": '" + word + "' is not a finite number");
  }
  return value;
}

std::vector<double> to_doubles(const std::string& text, const std::string& where) {
  std::vector<double> out;
  for (const auto& w : split_words(text)) out.push_back(to_double(w, where));
  return out;
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ' ';
    out += format_double(values[i]);
  }
  return out;
}

/// Reads keys of one section and complains about leftovers.
class Section {
 public:
  Section(const pt::ptree& tree, std::string name, std::string origin)
      : name_(std::move(name)), origin_(std::move(origin)) {
    if (const auto child = tree.get_child_optional(name_)) node_ = &*child;
  }

  bool present() const { return node_ != nullptr; }

  std::optional<std::string> get(const std::string& key) {
    used_.insert(key);
    if (node_ == nullptr) return std::nullopt;
    const auto v = node_->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return *v;
  }

  std::string require(const std::string& key) {
    auto v = get(key);
    if (!v) throw ConfigError(where(key) + " is required");
    return *v;
  }

  double number(const std::string& key, double fallback) {
    const auto v = get(key);
    return v ? to_double(trimmed(*v), where(key)) : fallback;
  }

  std::vector<double> numbers(const std::string& key) {
    const auto v = get(key);
    return v ? to_doubles(*v, where(key)) : std::vector<double>{};
  }

  std::string where(const std::string& key) const {
    return origin_ + ": [" + name_ + "] " + key;
  }

  void finish() const {
    if (node_ == nullptr) return;
    for (const auto& [key, value] : *node_) {
      if (!used_.count(key)) throw ConfigError(origin_ + ": unknown key [" + name_ + "] " + key);
    }
  }

  /// Enumerated value; an unknown name is a config error at this key.
  template <class Parse>
  auto choice(const std::string& key, const std::string& text, Parse parse) const {
    try {
      return parse(trimmed(text));
    } catch (const ParseError& e) {
      throw ConfigError(where(key) + ": " + e.what());
    }
  }

  static std::string trimmed(const std::string& s) {
    const auto words = split_words(s);
    return words.size() == 1 ? words.front() : s;
  }

 private:
  const pt::ptree* node_ = nullptr;
  std::string name_;
  std::string origin_;
  std::set<std::string> used_;
};

std::string bump_section(std::size_t i) { return "bump" + std::to_string(i + 1); }

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(origin + ": line " + std::to_string(e.line()) + ": " + e.message());
  }

  ExperimentConfig c;
  std::set<std::string> known{"experiment", "grid", "acquisition", "inversion", "sweep", "noise"};

  Section exp(tree, "experiment", origin);
  c.name = Section::trimmed(exp.require("name"));
  c.kind = exp.choice("kind", exp.require("kind"), parse_equation_kind);
  if (const auto s = exp.get("seed")) {
    const std::string w = Section::trimmed(*s);
    const auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), c.seed);
    if (ec != std::errc{} || ptr != w.data() + w.size()) {
      throw ParseError(exp.where("seed") + ": '" + w + "' is not an unsigned integer");
    }
  }
  exp.finish();

  Section grid(tree, "grid", origin);
  c.grid.dimension = static_cast<int>(grid.number("dimension", 1));
  c.grid.lo = grid.number("lo", c.grid.dimension == 1 ? 0.0 : -1.0);
  c.grid.hi = grid.number("hi", 1.0);
  const auto nodes = grid.get("nodes");
  const auto spacing = grid.get("spacing");
  if (nodes && spacing) throw ConfigError(grid.where("nodes") + " and spacing are exclusive");
  if (nodes) {
    c.grid.nodes = static_cast<int>(to_double(Section::trimmed(*nodes), grid.where("nodes")));
  } else if (spacing) {
    c.grid = GridSpec::from_spacing(c.grid.dimension, c.grid.lo, c.grid.hi,
                                    to_double(Section::trimmed(*spacing), grid.where("spacing")));
  } else {
    throw ConfigError(grid.where("nodes") + " or spacing is required");
  }
  grid.finish();

  Section acq(tree, "acquisition", origin);
  c.lambdas = to_doubles(acq.require("lambdas"), acq.where("lambdas"));
  c.sources = parse_source_layout(Section::trimmed(acq.require("sources")));
  acq.finish();

  for (std::size_t i = 0;; ++i) {
    const std::string name = bump_section(i);
    Section bump(tree, name, origin);
    if (!bump.present()) break;
    known.insert(name);
    GaussianBump b;
    b.amplitude = to_double(Section::trimmed(bump.require("amplitude")), bump.where("amplitude"));
    b.center = to_doubles(bump.require("center"), bump.where("center"));
    b.deviation = to_doubles(bump.require("deviation"), bump.where("deviation"));
    bump.finish();
    c.bumps.push_back(std::move(b));
  }

  Section inv(tree, "inversion", origin);
  if (const auto m = inv.get("modes")) {
    c.modes.clear();
    for (const auto& w : split_words(*m)) {
      c.modes.push_back(inv.choice("modes", w, parse_inversion_mode));
    }
  }
  c.gramian_threshold = inv.number("gramian_threshold", c.gramian_threshold);
  if (const auto m = inv.get("gramian_mode")) {
    c.gramian_mode = inv.choice("gramian_mode", *m, parse_threshold_mode);
  }
  c.pinv_threshold = inv.number("pinv", c.pinv_threshold);
  for (const auto mode : {InversionMode::born, InversionMode::lsl, InversionMode::reg_lsl}) {
    const std::string key = "pinv_" + std::string(to_string(mode));
    if (const auto v = inv.get(key)) {
      c.mode_pinv[mode] = to_double(Section::trimmed(*v), inv.where(key));
    }
  }
  inv.finish();

  Section sweep(tree, "sweep", origin);
  c.sweep_alphas = sweep.numbers("alphas");
  c.sweep_pinv = sweep.numbers("pinv");
  sweep.finish();

  Section noise(tree, "noise", origin);
  c.noise_percents = noise.numbers("percents");
  c.noise_pinv = noise.numbers("pinv");
  c.noise_alpha = noise.number("alpha", c.noise_alpha);
  noise.finish();

  for (const auto& [section, body] : tree) {
    if (!known.count(section)) throw ConfigError(origin + ": unknown section [" + section + "]");
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.string());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "[experiment]\n"
      << "name = " << c.name << '\n'
      << "kind = " << to_string(c.kind) << '\n'
      << "seed = " << c.seed << "\n\n";
  out << "[grid]\n"
      << "dimension = " << c.grid.dimension << '\n'
      << "lo = " << format_double(c.grid.lo) << '\n'
      << "hi = " << format_double(c.grid.hi) << '\n'
      << "nodes = " << c.grid.nodes << "\n\n";
  out << "[acquisition]\n"
      << "lambdas = " << join(c.lambdas) << '\n'
      << "sources = " << to_string(c.sources) << "\n\n";
  for (std::size_t i = 0; i < c.bumps.size(); ++i) {
    const auto& b = c.bumps[i];
    out << '[' << bump_section(i) << "]\n"
        << "amplitude = " << format_double(b.amplitude) << '\n'
        << "center = " << join(b.center) << '\n'
        << "deviation = " << join(b.deviation) << "\n\n";
  }
  out << "[inversion]\nmodes =";
  for (const auto m : c.modes) out << ' ' << to_string(m);
  out << '\n'
      << "gramian_threshold = " << format_double(c.gramian_threshold) << '\n'
      << "gramian_mode = " << to_string(c.gramian_mode) << '\n'
      << "pinv = " << format_double(c.pinv_threshold) << '\n';
  for (const auto& [mode, value] : c.mode_pinv) {
    out << "pinv_" << to_string(mode) << " = " << format_double(value) << '\n';
  }
  if (!c.sweep_alphas.empty() || !c.sweep_pinv.empty()) {
    out << "\n[sweep]\n"
        << "alphas = " << join(c.sweep_alphas) << '\n'
        << "pinv = " << join(c.sweep_pinv) << '\n';
  }
  out << "\n[noise]\n";
  if (!c.noise_percents.empty()) out << "percents = " << join(c.noise_percents) << '\n';
  if (!c.noise_pinv.empty()) out << "pinv = " << join(c.noise_pinv) << '\n';
  out << "alpha = " << format_double(c.noise_alpha) << '\n';
  return out.str();
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 14695981039346656037ull;
  for (const unsigned char ch : serialize_config(config)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// config semantics

void ExperimentConfig::validate() const {
  grid.validate();
  const auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (lambdas.empty()) throw ConfigError("lambda list is empty");
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    if (!positive(lambdas[j]) || (j > 0 && !(lambdas[j] > lambdas[j - 1]))) {
      throw ConfigError("lambdas must be positive and strictly increasing");
    }
  }
  if ((sources == SourceLayout::origin) != (grid.dimension == 1)) {
    throw ConfigError("source layout '" + std::string(to_string(sources)) +
                      "' does not fit a " + std::to_string(grid.dimension) + "D grid");
  }
  for (std::size_t i = 0; i < bumps.size(); ++i) {
    const auto& b = bumps[i];
    const auto d = static_cast<std::size_t>(grid.dimension);
    if (b.center.size() != d || b.deviation.size() != d) {
      throw ConfigError("bump " + std::to_string(i + 1) + " needs " + std::to_string(d) +
                        " center and deviation components");
    }
    for (const double s : b.deviation) {
      if (!positive(s)) throw ConfigError("Gaussian deviations must be positive");
    }
  }
  if (modes.empty()) throw ConfigError("mode list is empty");
  if (!positive(gramian_threshold) || !positive(pinv_threshold) || !positive(noise_alpha)) {
    throw ConfigError("thresholds must be positive");
  }
  for (const auto& [mode, v] : mode_pinv) {
    if (!positive(v)) throw ConfigError("thresholds must be positive");
  }
  for (const double v : sweep_alphas) {
    if (!positive(v)) throw ConfigError("sweep alphas must be positive");
  }
  for (const double v : sweep_pinv) {
    if (!positive(v)) throw ConfigError("sweep thresholds must be positive");
  }
  if (!sweep_pinv.empty() && sweep_pinv.size() != 1 && sweep_pinv.size() != sweep_alphas.size()) {
    throw ConfigError("sweep pinv list must have one entry or one per alpha");
  }
  for (const double v : noise_percents) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ConfigError("noise percents must be nonnegative");
    }
  }
  for (const double v : noise_pinv) {
    if (!positive(v)) throw ConfigError("noise thresholds must be positive");
  }
  if (!noise_pinv.empty() && noise_pinv.size() != 1 &&
      noise_pinv.size() != noise_percents.size()) {
    throw ConfigError("noise pinv list must have one entry or one per level");
  }
}

double ExperimentConfig::pinv_for(InversionMode mode) const {
  const auto it = mode_pinv.find(mode);
  return it == mode_pinv.end() ? pinv_threshold : it->second;
}

InversionSettings ExperimentConfig::settings_for(InversionMode mode) const {
  if (mode == InversionMode::lsl) return plain_lsl_settings(pinv_for(mode));
  return {pinv_for(mode), gramian_threshold, gramian_mode};
}

SourceSet ExperimentConfig::source_set() const {
  return sources == SourceLayout::origin ? SourceSet::origin(grid) : SourceSet::boundary_pairs(grid);
}

CoefficientField ExperimentConfig::truth() const {
  CoefficientField field = CoefficientField::background(grid, kind);
  const Matrix xy = node_coordinates(grid);
  for (const auto& b : bumps) {
    for (Eigen::Index i = 0; i < xy.rows(); ++i) {
      double q = 0.0;
      for (Eigen::Index d = 0; d < xy.cols(); ++d) {
        const auto k = static_cast<std::size_t>(d);
        const double z = (xy(i, d) - b.center[k]) / b.deviation[k];
        q += z * z;
      }
      field.values[i] += b.amplitude * std::exp(-0.5 * q);
    }
  }
  return field;
}

// ---------------------------------------------------------------------------
// manifest

const StageRecord* RunManifest::find(const std::string& stage) const {
  for (const auto& s : stages) {
    if (s.name == stage) return &s;
  }
  return nullptr;
}

std::vector<std::string> RunManifest::outputs() const {
  std::vector<std::string> out;
  for (const auto& s : stages) out.insert(out.end(), s.outputs.begin(), s.outputs.end());
  return out;
}

void write_manifest(const fs::path& path, const RunManifest& m) {
  json j;
  j["command"] = m.command;
  j["config_hash"] = m.config_hash;
  j["config_name"] = m.config_name;
  j["seed"] = m.seed;
  j["stages"] = json::array();
  for (const auto& s : m.stages) {
    j["stages"].push_back({{"name", s.name},
                           {"seconds", s.seconds},
                           {"outputs", s.outputs},
                           {"diagnostics", s.diagnostics}});
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

RunManifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  try {
    const json j = json::parse(in);
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.config_name = j.at("config_name").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& s : j.at("stages")) {
      StageRecord r;
      r.name = s.at("name").get<std::string>();
      r.seconds = s.at("seconds").get<double>();
      r.outputs = s.at("outputs").get<std::vector<std::string>>();
      r.diagnostics = s.at("diagnostics").get<std::map<std::string, std::string>>();
      m.stages.push_back(std::move(r));
    }
    return m;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// commands

namespace {

using Clock = std::chrono::steady_clock;

class Session {
 public:
  Session(std::string command, const ExperimentConfig& config, const RunOptions& options)
      : config_(config), dir_(options.out_dir) {
    if (options.seed) config_.seed = *options.seed;
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
    manifest_.command = std::move(command);
    manifest_.config_hash = config_hash(config_);
    manifest_.config_name = config_.name;
    manifest_.seed = config_.seed;
    const fs::path previous = dir_ / "manifest.json";
    if (options.resume && fs::exists(previous)) {
      RunManifest old = read_manifest(previous);
      if (old.config_hash == manifest_.config_hash) previous_ = std::move(old);
    }
  }

  const ExperimentConfig& config() const { return config_; }
  fs::path path(const std::string& name) const { return dir_ / name; }

  /// Completed record of `stage` from a previous run with the same config.
  const StageRecord* reusable(const std::string& stage) const {
    if (!previous_) return nullptr;
    const StageRecord* r = previous_->find(stage);
    if (r == nullptr) return nullptr;
    for (const auto& o : r->outputs) {
      if (!fs::exists(dir_ / o)) return nullptr;
    }
    return r;
  }

  /// Runs `body` unless a previous run already completed the stage.
  template <class Body>
  const StageRecord& stage(const std::string& name, Body&& body) {
    if (const StageRecord* r = reusable(name)) {
      manifest_.stages.push_back(*r);
    } else {
      StageRecord rec;
      rec.name = name;
      const auto start = Clock::now();
      body(rec);
      rec.seconds = std::chrono::duration<double>(Clock::now() - start).count();
      manifest_.stages.push_back(std::move(rec));
    }
    write_manifest(dir_ / "manifest.json", manifest_);
    return manifest_.stages.back();
  }

  RunManifest finish() {
    write_manifest(dir_ / "manifest.json", manifest_);
    return manifest_;
  }

 private:
  ExperimentConfig config_;
  fs::path dir_;
  RunManifest manifest_;
  std::optional<RunManifest> previous_;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

struct Datasets {
  TransferDataset data;
  TransferDataset background;
};

/// Stage "simulate": config copy, both datasets and the true field.
Datasets simulate_stage(Session& s) {
  const ExperimentConfig& c = s.config();
  const auto& rec = s.stage("simulate", [&](StageRecord& r) {
    write_text(s.path("config.cfg"), serialize_config(c));
    const SourceSet sources = c.source_set();
    const CoefficientField truth = c.truth();
    const TransferDataset data = generate_dataset(c.grid, truth, c.lambdas, sources);
    const TransferDataset background =
        generate_dataset(c.grid, CoefficientField::background(c.grid, c.kind), c.lambdas, sources);
    write_dataset(s.path("data.txt"), data);
    write_dataset(s.path("background.txt"), background);
    write_field_csv(s.path("truth.csv"), c.grid, truth.contrast());
    r.outputs = {"config.cfg", "data.txt", "background.txt", "truth.csv"};
    r.diagnostics["points"] = std::to_string(data.points());
    r.diagnostics["block"] = std::to_string(data.block_size());
    r.diagnostics["grid_nodes"] = std::to_string(c.grid.size());
  });
  (void)rec;
  return {read_dataset(s.path("data.txt")), read_dataset(s.path("background.txt"))};
}

Datasets input_datasets(Session& s, const RunOptions& options) {
  if (options.data_path || options.background_path) {
    if (!options.data_path || !options.background_path) {
      throw ConfigError("invert: --data and --background must be given together");
    }
    return {read_dataset(*options.data_path), read_dataset(*options.background_path)};
  }
  return simulate_stage(s);
}

void check_dataset(const ExperimentConfig& c, const TransferDataset& d, const std::string& what) {
  if (d.kind != c.kind || !(d.grid == c.grid) || d.lambdas != c.lambdas ||
      d.block_size() != c.source_set().count()) {
    throw DimensionError(what + " dataset does not match the config acquisition setup");
  }
}

/// Runs one inversion and fills the stage record; failures of the numerical
/// pipeline are recorded as the stage status instead of aborting the command.
void invert_into(StageRecord& r, const Session& s, const Inverter& inverter,
                 const TransferDataset& data, const TransferDataset& background, InversionMode mode,
                 const InversionSettings& settings, const std::string& file) {
  const ExperimentConfig& c = s.config();
  auto& d = r.diagnostics;
  d["mode"] = to_string(mode);
  d["pinv_threshold"] = format_double(settings.pinv_threshold);
  d["gramian_threshold"] = format_double(settings.gramian_threshold);
  d["gramian_mode"] = to_string(settings.gramian_mode);
  try {
    const InversionRun run = inverter.run(data, background, mode, settings);
    write_field_csv(s.path(file), c.grid, run.result.estimate);
    r.outputs.push_back(file);
    const auto& diag = run.diagnostics;
    d["status"] = "ok";
    d["rows"] = std::to_string(run.result.rows);
    d["residual"] = format_double(run.result.residual);
    d["order"] = std::to_string(diag.order);
    d["full_order"] = std::to_string(diag.full_order);
    if (mode != InversionMode::born) {
      d["mass_eig_min"] = format_double(diag.health.mass_min);
      d["mass_eig_max"] = format_double(diag.health.mass_max);
      d["mass_nonpositive"] = std::to_string(diag.health.nonpositive_mass);
      d["gramian_cut"] = format_double(diag.gramian_cut);
      d["projector_defect"] = format_double(diag.projector_defect);
    }
    d["breakdown"] = "false";
    const Vector truth = c.truth().contrast();
    d["relative_error"] =
        truth.norm() > 0.0 ? format_double(relative_l2_error(c.grid, run.result.estimate, truth))
                           : "nan";
  } catch (const BreakdownError& e) {
    d["status"] = std::string("breakdown: ") + e.what();
    d["breakdown"] = "true";
    d["relative_error"] = "nan";
  } catch (const EmptyModelError& e) {
    d["status"] = std::string("empty_model: ") + e.what();
    d["relative_error"] = "nan";
  }
}

std::string field(const StageRecord& r, const std::string& key) {
  const auto it = r.diagnostics.find(key);
  return it == r.diagnostics.end() ? "" : it->second;
}

std::string csv_quote(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (const char ch : text) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

/// Summary table built from stage diagnostics, one row per stage.
void write_summary(Session& s, const std::string& file, const std::vector<std::string>& lead,
                   const std::vector<StageRecord>& rows, const std::vector<std::string>& keys) {
  s.stage("summary", [&](StageRecord& r) {
    std::ostringstream out;
    for (std::size_t i = 0; i < lead.size(); ++i) out << (i ? "," : "") << lead[i];
    for (const auto& k : keys) out << ',' << k;
    out << '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < lead.size(); ++i) out << (i ? "," : "") << field(row, lead[i]);
      for (const auto& k : keys) out << ',' << csv_quote(field(row, k));
      out << '\n';
    }
    write_text(s.path(file), out.str());
    r.outputs = {file};
  });
}

const std::vector<std::string> kSummaryKeys{"order", "rows", "residual", "relative_error",
                                            "status"};

}  // namespace

RunManifest cmd_simulate(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  Session s("simulate", config, options);
  simulate_stage(s);
  return s.finish();
}

RunManifest cmd_invert(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  Session s("invert", config, options);
  const auto [data, background] = input_datasets(s, options);
  const ExperimentConfig& c = s.config();
  check_dataset(c, data, "measured");
  check_dataset(c, background, "background");

  const Inverter inverter(c.grid, c.kind, c.lambdas, c.source_set());
  std::vector<StageRecord> rows;
  for (const auto mode : c.modes) {
    const std::string name(to_string(mode));
    rows.push_back(s.stage("invert_" + name, [&](StageRecord& r) {
      invert_into(r, s, inverter, data, background, mode, c.settings_for(mode),
                  "recon_" + name + ".csv");
    }));
  }
  write_summary(s, "summary.csv", {"mode", "pinv_threshold", "gramian_threshold"}, rows,
                kSummaryKeys);
  return s.finish();
}

RunManifest cmd_sweep(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  if (config.sweep_alphas.empty()) throw ConfigError("sweep: alpha list is empty");
  Session s("sweep", config, options);
  const auto [data, background] = input_datasets(s, options);
  const ExperimentConfig& c = s.config();
  check_dataset(c, data, "measured");
  check_dataset(c, background, "background");

  const Inverter inverter(c.grid, c.kind, c.lambdas, c.source_set());
  std::vector<StageRecord> rows;
  for (std::size_t i = 0; i < c.sweep_alphas.size(); ++i) {
    const double pinv = c.sweep_pinv.empty()      ? c.pinv_for(InversionMode::reg_lsl)
                        : c.sweep_pinv.size() == 1 ? c.sweep_pinv.front()
                                                   : c.sweep_pinv[i];
    const InversionSettings settings{pinv, c.sweep_alphas[i], c.gramian_mode};
    const std::string tag = "alpha_" + std::to_string(i + 1);
    rows.push_back(s.stage("sweep_" + tag, [&](StageRecord& r) {
      invert_into(r, s, inverter, data, background, InversionMode::reg_lsl, settings,
                  "recon_" + tag + ".csv");
    }));
  }
  write_summary(s, "sweep.csv", {"gramian_threshold", "pinv_threshold"}, rows, kSummaryKeys);
  return s.finish();
}

RunManifest cmd_noise(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  if (config.noise_percents.empty()) throw ConfigError("noise: percent list is empty");
  Session s("noise", config, options);
  const auto [clean, background] = input_datasets(s, options);
  const ExperimentConfig& c = s.config();
  check_dataset(c, clean, "measured");
  check_dataset(c, background, "background");

  const Inverter inverter(c.grid, c.kind, c.lambdas, c.source_set());
  std::vector<StageRecord> rows;
  for (std::size_t i = 0; i < c.noise_percents.size(); ++i) {
    const double percent = c.noise_percents[i];
    const double pinv = c.noise_pinv.empty()      ? c.pinv_for(InversionMode::reg_lsl)
                        : c.noise_pinv.size() == 1 ? c.noise_pinv.front()
                                                   : c.noise_pinv[i];
    const InversionSettings settings{pinv, c.noise_alpha, c.gramian_mode};
    const std::string tag = "level_" + std::to_string(i + 1);
    rows.push_back(s.stage("noise_" + tag, [&](StageRecord& r) {
      // One draw per run, scaled per level.
      const TransferDataset noisy = add_noise(clean, background, percent, c.seed);
      write_dataset(s.path("data_" + tag + ".txt"), noisy);
      r.outputs.push_back("data_" + tag + ".txt");
      r.diagnostics["noise_percent"] = format_double(percent);
      invert_into(r, s, inverter, noisy, background, InversionMode::reg_lsl, settings,
                  "recon_" + tag + ".csv");
    }));
  }
  write_summary(s, "noise.csv", {"noise_percent", "pinv_threshold", "gramian_threshold"}, rows,
                {"order", "mass_nonpositive", "rows", "residual", "relative_error", "status"});
  return s.finish();
}

}  // namespace reglsl
