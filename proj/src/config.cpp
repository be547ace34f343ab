// Copyright 2026 The eprmux Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "eprmux/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "eprmux/errors.hpp"

namespace eprmux {

namespace {

using Json = nlohmann::ordered_json;

// A JSON object whose keys are consumed as they are read; leftovers are
// reported as unknown.
class Section {
 public:
  Section(const Json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail("must be an object");
  }

  bool has(const std::string& key) const { return node_.contains(key) && !node_.at(key).is_null(); }

  const Json* raw(const std::string& key) {
    seen_.insert(key);
    if (!node_.contains(key)) return nullptr;
    return &node_.at(key);
  }

  double number(const std::string& key, double fallback) {
    const Json* v = raw(key);
    if (!v || v->is_null()) return fallback;
    if (!v->is_number()) fail_key(key, "must be a number");
    const double d = v->get<double>();
    if (!std::isfinite(d)) fail_key(key, "must be finite");
    return d;
  }

  double number_in(const std::string& key, double fallback, double lo, double hi) {
    const double d = number(key, fallback);
    if (d < lo || d > hi) {
      std::ostringstream msg;
      msg << "must lie in [" << lo << ", " << hi << "]";
      fail_key(key, msg.str());
    }
    return d;
  }

  double positive(const std::string& key, double fallback) {
    const double d = number(key, fallback);
    if (!(d > 0.0)) fail_key(key, "must be positive");
    return d;
  }

  int integer(const std::string& key, int fallback, int lo, int hi) {
    const Json* v = raw(key);
    if (!v || v->is_null()) return fallback;
    if (!v->is_number_integer()) fail_key(key, "must be an integer");
    const auto i = v->get<long long>();
    if (i < lo || i > hi) {
      fail_key(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return static_cast<int>(i);
  }

  std::uint64_t unsigned64(const std::string& key, std::uint64_t fallback) {
    const Json* v = raw(key);
    if (!v || v->is_null()) return fallback;
    if (!v->is_number_unsigned()) fail_key(key, "must be a non-negative integer");
    return v->get<std::uint64_t>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    const Json* v = raw(key);
    if (!v || v->is_null()) return fallback;
    if (!v->is_string()) fail_key(key, "must be a string");
    return v->get<std::string>();
  }

  Section child(const std::string& key) {
    const Json* v = raw(key);
    static const Json empty = Json::object();
    if (!v || v->is_null()) return Section(empty, path_ + "." + key);
    return Section(*v, path_ + "." + key);
  }

  void finish() const {
    for (const auto& item : node_.items()) {
      if (!seen_.count(item.key())) fail("unknown key \"" + item.key() + "\"");
    }
  }

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(path_ + ": " + what); }
  [[noreturn]] void fail_key(const std::string& key, const std::string& what) const {
    throw ConfigError(path_ + "." + key + ": " + what);
  }

 private:
  const Json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

FilterCavity parse_cavity(Section s, bool allow_type) {
  if (allow_type) {
    const std::string type = s.text("type", "cavity");
    if (type != "cavity") s.fail_key("type", "must be \"cavity\" here");
  }
  FilterCavity f;
  f.detuning = s.number("detuning", 0.0);
  f.loss = s.number_in("loss", 0.0, 0.0, 0.999999);
  const bool by_width = s.has("linewidth");
  const bool by_geometry = s.has("round_trip_length") || s.has("finesse");
  if (by_width == by_geometry) {
    s.fail("give either linewidth or round_trip_length + finesse");
  }
  if (by_width) {
    f.linewidth = s.positive("linewidth", 0.0);
  } else {
    const double length = s.positive("round_trip_length", 0.0);
    const double finesse = s.positive("finesse", 0.0);
    f.linewidth = linewidth_from_finesse(length, finesse);
  }
  s.finish();
  return f;
}

HomodyneChannel parse_channel(Section s, const HomodyneChannel& defaults, double& path_loss) {
  HomodyneChannel c = defaults;
  c.lo_shift = s.number("lo_shift", defaults.lo_shift);
  c.lo_phase = s.number("lo_phase", defaults.lo_phase);
  c.demod_freq = s.positive("demod_freq", defaults.demod_freq);
  if (const Json* v = s.raw("demod_phase"); v && !v->is_null()) {
    if (v->is_string()) {
      if (v->get<std::string>() != "auto") s.fail_key("demod_phase", "must be a number or \"auto\"");
      c.demod_phase.reset();
    } else if (v->is_number()) {
      c.demod_phase = v->get<double>();
    } else {
      s.fail_key("demod_phase", "must be a number or \"auto\"");
    }
  }
  c.efficiency = s.number_in("efficiency", defaults.efficiency, 0.0, 1.0);
  path_loss = s.number_in("path_loss", 0.0, 0.0, 1.0);
  s.finish();
  return c;
}

Json cavity_json(const FilterCavity& f) {
  Json j;
  j["type"] = "cavity";
  j["detuning"] = f.detuning;
  j["linewidth"] = f.linewidth;
  j["loss"] = f.loss;
  return j;
}

Json channel_json(const HomodyneChannel& c, double path_loss) {
  Json j;
  j["lo_shift"] = c.lo_shift;
  j["lo_phase"] = c.lo_phase;
  j["demod_freq"] = c.demod_freq;
  if (c.demod_phase) {
    j["demod_phase"] = *c.demod_phase;
  } else {
    j["demod_phase"] = "auto";
  }
  j["efficiency"] = c.efficiency;
  j["path_loss"] = path_loss;
  return j;
}

}  // namespace

ChainScenario fit_template() {
  ChainScenario s;
  s.source.bandwidth = 25e6;
  s.source.convention = BandwidthConvention::hwhm;
  s.fbs.reset();
  return s;
}

ScenarioConfig parse_config(const Json& document) {
  Section root(document, "config");
  const std::string schema = root.text("schema", kConfigSchemaId);
  if (schema != kConfigSchemaId) {
    root.fail_key("schema", std::string("must be \"") + kConfigSchemaId + "\"");
  }
  ScenarioConfig cfg;
  ChainScenario& s = cfg.scenario;
  cfg.seed = root.unsigned64("seed", 1);

  {
    Section src = root.child("source");
    OpaSource& o = s.source;
    o.bandwidth = src.positive("bandwidth", o.bandwidth);
    const std::string conv = src.text("convention", to_string(o.convention));
    if (conv != "fwhm" && conv != "hwhm") src.fail_key("convention", "must be \"fwhm\" or \"hwhm\"");
    o.convention = bandwidth_convention_from_string(conv);
    o.efficiency = src.number_in("efficiency", 1.0, 0.0, 1.0);
    o.added_noise = src.number_in("added_noise", 0.0, 0.0, 1e300);
    o.noise_cutoff = src.number_in("noise_cutoff", o.noise_cutoff, 0.0, 1e300);
    const bool by_pump = src.has("pump_parameter");
    const bool by_db = src.has("squeezing_db");
    if (by_pump && by_db) src.fail("give pump_parameter or squeezing_db, not both");
    cfg.squeezing_reference_frequency =
        src.number_in("squeezing_reference_frequency", 5e6, 0.0, 1e300);
    if (by_db) {
      const double db = src.number_in("squeezing_db", 0.0, 0.0, 1e300);
      cfg.squeezing_db = db;
      src.finish();
      o.pump_parameter = db == 0.0 ? 0.0
                                   : pump_for_squeezing(o, variance_from_db(db),
                                                        cfg.squeezing_reference_frequency);
    } else {
      o.pump_parameter = src.number_in("pump_parameter", 0.0, 0.0, 1e300);
      src.finish();
    }
  }

  {
    Section sp = root.child("splitter");
    const std::string type = sp.text("type", "ideal");
    if (type == "ideal") {
      sp.finish();
      s.fbs.reset();
    } else if (type == "cavity") {
      s.fbs = parse_cavity(sp, false);
    } else {
      sp.fail_key("type", "must be \"ideal\" or \"cavity\"");
    }
  }
  if (root.has("bob_filter")) {
    s.bob_filter = parse_cavity(root.child("bob_filter"), true);
  } else {
    root.raw("bob_filter");
  }

  {
    Section sb = root.child("sidebands");
    s.f1 = sb.positive("f1", s.f1);
    s.f2 = sb.positive("f2", s.f2);
    s.rbw = sb.positive("rbw", s.rbw);
    sb.finish();
  }
  s.alice = parse_channel(root.child("alice"), s.alice, s.alice_loss);
  s.bob = parse_channel(root.child("bob"), s.bob, s.bob_loss);

  {
    Section mc = root.child("montecarlo");
    MonteCarloOptions& m = cfg.montecarlo;
    cfg.trials = mc.integer("trials", 1, 1, 100000);
    m.sample_rate = mc.positive("sample_rate", m.sample_rate);
    m.duration = mc.positive("duration", m.duration);
    m.dsp.lpf_bandwidth = mc.positive("lpf_bandwidth", m.dsp.lpf_bandwidth);
    m.dsp.lpf_order = mc.integer("lpf_order", m.dsp.lpf_order, 1, 16);
    m.dsp.decimation = mc.integer("decimation", m.dsp.decimation, 1, 1000000);
    m.dsp.settle_periods = mc.number_in("settle_periods", m.dsp.settle_periods, 0.0, 1e6);
    m.blocks = mc.integer("blocks", m.blocks, 2, 1000000);
    m.electronic_noise = mc.number_in("electronic_noise", 0.0, 0.0, 1e300);
    m.band_factor = mc.positive("band_factor", m.band_factor);
    m.threads = mc.integer("threads", 1, 1, 256);
    mc.finish();
  }

  if (const Json* out = root.raw("output"); out && !out->is_null()) {
    if (!out->is_string()) root.fail_key("output", "must be a string");
    cfg.output = out->get<std::string>();
  }
  root.finish();

  // Cross-field checks. Bad values are config errors; a pump at threshold
  // or colliding labels are physics errors and propagate.
  try {
    s.validate();
    cfg.montecarlo.dsp.demod_freq = s.alice.demod_freq;
    cfg.montecarlo.validate();
    run_chain(s);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  Json doc;
  try {
    doc = Json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_config(doc);
}

Json config_to_json(const ScenarioConfig& cfg) {
  const ChainScenario& s = cfg.scenario;
  Json j;
  j["schema"] = kConfigSchemaId;
  j["seed"] = cfg.seed;
  Json src;
  src["pump_parameter"] = s.source.pump_parameter;
  src["bandwidth"] = s.source.bandwidth;
  src["convention"] = to_string(s.source.convention);
  src["efficiency"] = s.source.efficiency;
  src["added_noise"] = s.source.added_noise;
  src["noise_cutoff"] = s.source.noise_cutoff;
  j["source"] = src;
  if (s.fbs) {
    j["splitter"] = cavity_json(*s.fbs);
  } else {
    j["splitter"] = Json{{"type", "ideal"}};
  }
  j["bob_filter"] = s.bob_filter ? cavity_json(*s.bob_filter) : Json(nullptr);
  j["sidebands"] = Json{{"f1", s.f1}, {"f2", s.f2}, {"rbw", s.rbw}};
  j["alice"] = channel_json(s.alice, s.alice_loss);
  j["bob"] = channel_json(s.bob, s.bob_loss);
  const MonteCarloOptions& m = cfg.montecarlo;
  Json mc;
  mc["trials"] = cfg.trials;
  mc["sample_rate"] = m.sample_rate;
  mc["duration"] = m.duration;
  mc["lpf_bandwidth"] = m.dsp.lpf_bandwidth;
  mc["lpf_order"] = m.dsp.lpf_order;
  mc["decimation"] = m.dsp.decimation;
  mc["settle_periods"] = m.dsp.settle_periods;
  mc["blocks"] = m.blocks;
  mc["electronic_noise"] = m.electronic_noise;
  mc["band_factor"] = m.band_factor;
  mc["threads"] = m.threads;
  j["montecarlo"] = mc;
  j["output"] = cfg.output ? Json(*cfg.output) : Json(nullptr);
  return j;
}

}  // namespace eprmux
