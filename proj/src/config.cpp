#include "isac/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace isac {

using nlohmann::json;

SceneConfig PipelineConfig::default_scene() {
  SceneConfig s;
  s.noise_power = 1.0;
  s.sweep_period_s = 0.2;
  return s;
}

CfarConfig PipelineConfig::effective_cfar() const {
  CfarConfig c = cfar;
  c.min_range_bin = std::max(c.min_range_bin, static_cast<int>(std::ceil(cfar_min_range_m / waveform.range_bin_m())));
  return c;
}

void PipelineConfig::validate() const {
  if (sweeps < 1) throw ConfigError("sweeps must be >= 1");
  waveform.validate();
  if (n_range < 1 || n_range > waveform.fft_size) throw ConfigError("n_range must lie in [1, waveform.fft_size]");
  codebook.validate();
  scene.validate();
  // The sensor only looks forward; a target crossing y = 0 mid-run would
  // leave the field of view and break the truth bookkeeping.
  const double duration = scene.sweep_period_s * (sweeps - 1);
  for (std::size_t i = 0; i < scene.targets.size(); ++i) {
    const auto& t = scene.targets[i];
    if (!(t.pos.y() + t.vel.y() * duration > 0.0)) {
      throw ConfigError("scene.targets[" + std::to_string(i) + "] reaches y <= 0 before the last sweep");
    }
  }
  MtiFilter{mti_taps};
  cfar.validate();
  if (!(cfar_min_range_m >= 0.0)) throw ConfigError("cfar.min_range_m must be >= 0");
  if (2 * (cfar.n_train + cfar.n_guard) + 1 > n_range) throw ConfigError("cfar window exceeds n_range");
  dbscan.validate();
  tracker.validate();
  metrics.validate();
}

namespace {

// Reads the keys of one JSON object and rejects anything it did not ask for.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where() + key + ": " + e.what());
    }
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown configuration key '" + child(key) + "'");
    }
  }

 private:
  std::string where() const { return path_.empty() ? std::string() : path_ + "."; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Eigen::Vector2d read_pair(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(path + " must be a two-element array");
  try {
    return {j[0].get<double>(), j[1].get<double>()};
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void read_waveform(Section s, WaveformConfig& w) {
  s.get("n_rb", w.n_rb);
  s.get("scs_hz", w.scs_hz);
  s.get("n_symbols", w.n_symbols);
  s.get("fft_size", w.fft_size);
  s.get("cp_len", w.cp_len);
  s.get("carrier_hz", w.carrier_hz);
  s.get("seed", w.seed);
  s.finish();
}

void read_codebook(Section s, BeamCodebook& cb) {
  int n_tx = cb.n_tx();
  int n_rx = cb.n_rx();
  double span = 90.0;
  s.get("n_tx", n_tx);
  s.get("n_rx", n_rx);
  s.get("span_deg", span);
  cb = BeamCodebook::uniform(n_tx, n_rx, span);
  s.get("tx_angles_deg", cb.tx_angles_deg);
  s.get("rx_angles_deg", cb.rx_angles_deg);
  s.get("n_elements", cb.n_elements);
  s.get("element_spacing_wavelengths", cb.element_spacing_wavelengths);
  s.finish();
}

void read_scene(Section s, const std::string& path, SceneConfig& scene, bool& leakage_set) {
  s.get("noise_power", scene.noise_power);
  s.get("sweep_period_s", scene.sweep_period_s);
  s.get("leakage_range_m", scene.leakage_range_m);
  s.get("seed", scene.seed);
  leakage_set = s.has("leakage_amplitude");
  s.get("leakage_amplitude", scene.leakage_amplitude);
  if (s.has("targets")) {
    const json& arr = s.raw("targets");
    if (!arr.is_array()) throw ConfigError(path + ".targets must be an array");
    scene.targets.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string tp = path + ".targets[" + std::to_string(i) + "]";
      Section t(arr[i], tp);
      TargetTruth truth;
      if (t.has("pos")) truth.pos = read_pair(t.raw("pos"), tp + ".pos");
      if (t.has("vel")) truth.vel = read_pair(t.raw("vel"), tp + ".vel");
      t.get("reflectivity", truth.reflectivity);
      t.finish();
      scene.targets.push_back(truth);
    }
  }
  s.finish();
}

void read_cfar(Section s, PipelineConfig& cfg) {
  s.get("n_train", cfg.cfar.n_train);
  s.get("n_guard", cfg.cfar.n_guard);
  s.get("pfa", cfg.cfar.pfa);
  s.get("min_range_m", cfg.cfar_min_range_m);
  s.finish();
}

void read_dbscan(Section s, DbscanConfig& d) {
  s.get("eps", d.eps);
  s.get("min_pts", d.min_pts);
  if (s.has("scale")) {
    std::vector<double> v;
    s.get("scale", v);
    if (v.size() != 3) throw ConfigError("dbscan.scale must have three entries");
    d.scale = Eigen::Vector3d(v[0], v[1], v[2]);
  }
  s.finish();
}

void read_tracker(Section s, TrackerConfig& t) {
  s.get("q_accel", t.q_accel);
  s.get("r_range_var", t.r_range_var);
  s.get("r_angle_var", t.r_angle_var);
  s.get("gate_m", t.gate_m);
  s.get("confirm_m", t.confirm_m);
  s.get("confirm_n", t.confirm_n);
  s.get("max_misses", t.max_misses);
  s.get("p0_pos_var", t.p0_pos_var);
  s.get("p0_vel_var", t.p0_vel_var);
  if (s.has("measurement_space")) {
    std::string space;
    s.get("measurement_space", space);
    if (space == "polar") {
      t.space = MeasurementSpace::Polar;
    } else if (space == "cartesian") {
      t.space = MeasurementSpace::Cartesian;
    } else {
      throw ConfigError("tracker.measurement_space must be 'polar' or 'cartesian'");
    }
  }
  s.finish();
}

void read_metrics(Section s, MetricsConfig& m) {
  s.get("match_radius_m", m.match_radius_m);
  s.get("velocity_settle_sweeps", m.velocity_settle_sweeps);
  s.finish();
}

}  // namespace

PipelineConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end(), nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
  }

  PipelineConfig cfg;
  Section top(root, "");
  top.get("seed", cfg.seed);
  top.get("sweeps", cfg.sweeps);
  top.get("n_range", cfg.n_range);
  cfg.waveform.seed = cfg.seed;
  cfg.scene.seed = cfg.seed;

  bool leakage_set = false;
  if (top.has("waveform")) read_waveform(Section(top.raw("waveform"), "waveform"), cfg.waveform);
  if (top.has("codebook")) read_codebook(Section(top.raw("codebook"), "codebook"), cfg.codebook);
  if (top.has("scene")) read_scene(Section(top.raw("scene"), "scene"), "scene", cfg.scene, leakage_set);
  if (top.has("mti")) {
    Section mti(top.raw("mti"), "mti");
    mti.get("taps", cfg.mti_taps);
    mti.finish();
  }
  if (top.has("cfar")) read_cfar(Section(top.raw("cfar"), "cfar"), cfg);
  if (top.has("dbscan")) read_dbscan(Section(top.raw("dbscan"), "dbscan"), cfg.dbscan);
  if (top.has("tracker")) read_tracker(Section(top.raw("tracker"), "tracker"), cfg.tracker);
  if (top.has("metrics")) read_metrics(Section(top.raw("metrics"), "metrics"), cfg.metrics);
  top.finish();

  if (!leakage_set) cfg.scene.leakage_amplitude = default_leakage_amplitude(cfg.scene.targets);
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string dump_config(const PipelineConfig& cfg) {
  nlohmann::ordered_json j;
  j["seed"] = cfg.seed;
  j["sweeps"] = cfg.sweeps;
  j["n_range"] = cfg.n_range;
  const auto& w = cfg.waveform;
  j["waveform"] = {{"n_rb", w.n_rb},       {"scs_hz", w.scs_hz},         {"n_symbols", w.n_symbols},
                   {"fft_size", w.fft_size}, {"cp_len", w.cp_len},       {"carrier_hz", w.carrier_hz},
                   {"seed", w.seed}};
  const auto& cb = cfg.codebook;
  j["codebook"] = {{"tx_angles_deg", cb.tx_angles_deg},
                   {"rx_angles_deg", cb.rx_angles_deg},
                   {"n_elements", cb.n_elements},
                   {"element_spacing_wavelengths", cb.element_spacing_wavelengths}};
  const auto& s = cfg.scene;
  auto targets = nlohmann::ordered_json::array();
  for (const auto& t : s.targets) {
    targets.push_back({{"pos", {t.pos.x(), t.pos.y()}}, {"vel", {t.vel.x(), t.vel.y()}}, {"reflectivity", t.reflectivity}});
  }
  j["scene"] = {{"noise_power", s.noise_power},
                {"sweep_period_s", s.sweep_period_s},
                {"leakage_amplitude", s.leakage_amplitude},
                {"leakage_range_m", s.leakage_range_m},
                {"seed", s.seed},
                {"targets", targets}};
  j["mti"] = {{"taps", cfg.mti_taps}};
  j["cfar"] = {{"n_train", cfg.cfar.n_train},
               {"n_guard", cfg.cfar.n_guard},
               {"pfa", cfg.cfar.pfa},
               {"min_range_m", cfg.cfar_min_range_m}};
  j["dbscan"] = {{"eps", cfg.dbscan.eps},
                 {"min_pts", cfg.dbscan.min_pts},
                 {"scale", {cfg.dbscan.scale.x(), cfg.dbscan.scale.y(), cfg.dbscan.scale.z()}}};
  const auto& t = cfg.tracker;
  j["tracker"] = {{"q_accel", t.q_accel},
                  {"r_range_var", t.r_range_var},
                  {"r_angle_var", t.r_angle_var},
                  {"gate_m", t.gate_m},
                  {"confirm_m", t.confirm_m},
                  {"confirm_n", t.confirm_n},
                  {"max_misses", t.max_misses},
                  {"p0_pos_var", t.p0_pos_var},
                  {"p0_vel_var", t.p0_vel_var},
                  {"measurement_space", t.space == MeasurementSpace::Polar ? "polar" : "cartesian"}};
  j["metrics"] = {{"match_radius_m", cfg.metrics.match_radius_m},
                  {"velocity_settle_sweeps", cfg.metrics.velocity_settle_sweeps}};
  return j.dump(2) + "\n";
}

}  // namespace isac
