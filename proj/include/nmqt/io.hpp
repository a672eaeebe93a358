// Copyright 2026 The nmqt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Experiment configuration (YAML), study runner and CSV persistence.
//
// Requires yaml-cpp at link time; the rest of the library does not.

#pragma once

#include <nmqt/channel_map.hpp>
#include <nmqt/channels.hpp>
#include <nmqt/error.hpp>
#include <nmqt/metrics.hpp>
#include <nmqt/teleport.hpp>

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace nmqt {

inline constexpr const char* kArtifactVersion = "nmqt 1.0.0";
inline constexpr double kDefaultResourceSqueezing = 0.346;
inline constexpr double kDefaultCatResourceSqueezing = 0.4;
inline constexpr double kDefaultGamma0 = 0.8;
inline constexpr double kDefaultKappa0 = 4.0;

enum class Study { Entanglement, Fidelity, BlpSurface, Wigner, CompareInputs, Psd };

inline const std::vector<std::pair<std::string, Study>>& study_names() {
  static const std::vector<std::pair<std::string, Study>> names = {
      {"entanglement", Study::Entanglement}, {"fidelity", Study::Fidelity},
      {"blp_surface", Study::BlpSurface},    {"wigner", Study::Wigner},
      {"compare_inputs", Study::CompareInputs}, {"psd", Study::Psd}};
  return names;
}

inline std::string to_string(Study s) {
  for (const auto& [n, v] : study_names())
    if (v == s) return n;
  return "unknown";
}

inline std::optional<Study> study_from_string(const std::string& name) {
  for (const auto& [n, v] : study_names())
    if (n == name) return v;
  return std::nullopt;
}

inline std::string valid_study_list() {
  std::string s;
  for (const auto& [n, v] : study_names()) s += (s.empty() ? "" : ", ") + n;
  return s;
}

struct ExperimentConfig {
  Study study = Study::Fidelity;
  std::string channel_model = "lorentzian";
  ChannelSpec channel;
  /// Also evaluate the Markovian reference of a non-Markovian channel.
  bool reference = true;
  TeleportConfig teleport;
  bool auto_half_width = true;

  std::vector<double> blp_gamma0;
  std::vector<double> blp_kappa0;

  std::vector<double> wigner_times{0.0, 10.0};
  double wigner_min = -4.0;
  double wigner_max = 4.0;
  int wigner_points = 41;

  cplx compare_alpha = 1.0;
  double compare_r_s = 1.0;
  double compare_r = kDefaultCatResourceSqueezing;

  double psd_min = 0.0;
  double psd_max = 20.0;
  int psd_points = 401;

  std::string output_path;
  std::map<std::string, std::string> metadata;
  /// FNV-1a hash of the source text.
  std::string config_hash;
};

namespace detail {

inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Collects every problem found while reading a YAML tree.
class ConfigReader {
 public:
  std::vector<std::string> errors;

  void check_keys(const YAML::Node& n, const std::string& path, const std::vector<std::string>& allowed) {
    if (!n.IsMap()) return;
    for (const auto& kv : n) {
      const std::string k = kv.first.as<std::string>();
      bool ok = false;
      for (const auto& a : allowed) ok = ok || a == k;
      if (!ok) errors.push_back(join(path, k) + ": unknown key");
    }
  }

  bool section(const YAML::Node& parent, const std::string& key, const std::string& path, YAML::Node& out) {
    const YAML::Node n = parent[key];
    if (!n) return false;
    if (!n.IsMap()) {
      errors.push_back(join(path, key) + ": expected a mapping");
      return false;
    }
    out = n;
    return true;
  }

  template <class T>
  bool read(const YAML::Node& parent, const std::string& key, const std::string& path, T& out) {
    const YAML::Node n = parent[key];
    if (!n) return false;
    try {
      out = n.as<T>();
      return true;
    } catch (const YAML::Exception&) {
      errors.push_back(join(path, key) + ": expected " + type_name<T>());
      return false;
    }
  }

  /// A list of reals, or {from, to, count} for an inclusive uniform range.
  bool read_values(const YAML::Node& parent, const std::string& key, const std::string& path, std::vector<double>& out) {
    const YAML::Node n = parent[key];
    if (!n) return false;
    const std::string p = join(path, key);
    if (n.IsMap()) {
      double a = 0.0, b = 0.0;
      int count = 0;
      const bool ok = read(n, "from", p, a) & read(n, "to", p, b) & read(n, "count", p, count);
      check_keys(n, p, {"from", "to", "count"});
      if (!ok) {
        errors.push_back(p + ": range needs from, to and count");
        return false;
      }
      if (count < 1) {
        errors.push_back(p + ".count: must be >= 1");
        return false;
      }
      out.assign(count, a);
      for (int i = 1; i < count; ++i) out[i] = a + (b - a) * i / (count - 1);
      return true;
    }
    if (n.IsScalar()) {
      double v = 0.0;
      if (!read(parent, key, path, v)) return false;
      out = {v};
      return true;
    }
    return read(parent, key, path, out);
  }

  static std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

 private:
  template <class T>
  static std::string type_name() {
    if constexpr (std::is_same_v<T, double>) return "a number";
    else if constexpr (std::is_same_v<T, int>) return "an integer";
    else if constexpr (std::is_same_v<T, bool>) return "true or false";
    else if constexpr (std::is_same_v<T, std::string>) return "a string";
    else if constexpr (std::is_same_v<T, std::vector<double>>) return "a list of numbers";
    else return "a value of another type";
  }
};

}  // namespace detail

/// Parses and validates a configuration held in memory; `origin` names it in messages.
inline ExperimentConfig parse_config_text(const std::string& text, const std::string& origin = "<config>") {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    fail(ErrorKind::Parse, origin + ": " + e.what());
  }
  if (!root.IsMap()) fail(ErrorKind::Parse, origin + ": top level must be a mapping");

  detail::ConfigReader rd;
  ExperimentConfig cfg;
  cfg.config_hash = detail::fnv1a_hex(text);
  rd.check_keys(root, "", {"study", "output", "metadata", "channel", "reference", "resource", "input", "quadrature",
                           "time", "blp", "wigner", "compare_inputs", "psd"});

  std::string study;
  if (!rd.read(root, "study", "", study)) {
    if (!root["study"]) rd.errors.push_back("study: required (one of " + valid_study_list() + ")");
  } else if (auto s = study_from_string(study)) {
    cfg.study = *s;
  } else {
    rd.errors.push_back("study: unknown study '" + study + "'; valid studies: " + valid_study_list());
  }
  rd.read(root, "output", "", cfg.output_path);
  rd.read(root, "reference", "", cfg.reference);
  if (const YAML::Node m = root["metadata"]) {
    if (!m.IsMap()) {
      rd.errors.push_back("metadata: expected a mapping");
    } else {
      for (const auto& kv : m) {
        try {
          cfg.metadata[kv.first.as<std::string>()] = kv.second.as<std::string>();
        } catch (const YAML::Exception&) {
          rd.errors.push_back("metadata." + kv.first.as<std::string>() + ": expected a scalar");
        }
      }
    }
  }

  // Channel.
  YAML::Node ch;
  int mode_dim = 10;
  int anc_dim = kDefaultAncillaDim;
  double omega_b = kDefaultOmegaB;
  double gamma0 = kDefaultGamma0, kappa0 = kDefaultKappa0;
  std::vector<double> kappas;
  std::vector<AncillaSpec> terms;
  bool channel_ok = true;
  if (rd.section(root, "channel", "", ch)) {
    rd.check_keys(ch, "channel", {"model", "mode_dim", "omega_b", "gamma0", "kappa0", "ancilla_dim", "terms", "kappas"});
    rd.read(ch, "model", "channel", cfg.channel_model);
    rd.read(ch, "mode_dim", "channel", mode_dim);
    rd.read(ch, "omega_b", "channel", omega_b);
    rd.read(ch, "gamma0", "channel", gamma0);
    rd.read(ch, "kappa0", "channel", kappa0);
    rd.read(ch, "ancilla_dim", "channel", anc_dim);
    rd.read_values(ch, "kappas", "channel", kappas);
    if (const YAML::Node t = ch["terms"]) {
      if (!t.IsSequence()) {
        rd.errors.push_back("channel.terms: expected a list");
      } else {
        for (std::size_t k = 0; k < t.size(); ++k) {
          const std::string p = "channel.terms[" + std::to_string(k) + "]";
          AncillaSpec a;
          a.dim = anc_dim;
          rd.check_keys(t[k], p, {"omega", "gamma", "kappa", "dim"});
          if (!rd.read(t[k], "omega", p, a.omega)) rd.errors.push_back(p + ".omega: required");
          if (!rd.read(t[k], "gamma", p, a.gamma)) rd.errors.push_back(p + ".gamma: required");
          if (!rd.read(t[k], "kappa", p, a.kappa)) rd.errors.push_back(p + ".kappa: required");
          rd.read(t[k], "dim", p, a.dim);
          if (!(a.gamma > 0.0)) rd.errors.push_back(p + ".gamma: must be > 0");
          if (!(a.kappa >= 0.0)) rd.errors.push_back(p + ".kappa: must be >= 0");
          if (a.dim < 2) rd.errors.push_back(p + ".dim: must be >= 2");
          terms.push_back(a);
        }
      }
    }
  }
  const std::size_t before = rd.errors.size();
  if (mode_dim < 2) rd.errors.push_back("channel.mode_dim: must be >= 2");
  if (anc_dim < 2) rd.errors.push_back("channel.ancilla_dim: must be >= 2");
  if (!(omega_b > 0.0)) rd.errors.push_back("channel.omega_b: must be > 0");
  if (cfg.channel_model == "lorentzian") {
    if (!(gamma0 > 0.0)) rd.errors.push_back("channel.gamma0: must be > 0");
    if (!(kappa0 >= 0.0)) rd.errors.push_back("channel.kappa0: must be >= 0");
  } else if (cfg.channel_model == "two_lorentzian") {
    if (terms.size() != 2) rd.errors.push_back("channel.terms: two_lorentzian needs exactly two terms");
  } else if (cfg.channel_model == "markovian") {
    if (kappas.empty()) kappas = {kappa0};
    for (std::size_t k = 0; k < kappas.size(); ++k)
      if (!(kappas[k] >= 0.0)) rd.errors.push_back("channel.kappas[" + std::to_string(k) + "]: must be >= 0");
  } else {
    rd.errors.push_back("channel.model: unknown model '" + cfg.channel_model +
                        "'; valid models: lorentzian, two_lorentzian, markovian");
  }
  channel_ok = rd.errors.size() == before;
  if (channel_ok) {
    try {
      if (cfg.channel_model == "lorentzian") {
        // Resonant ancilla: omega0 = omega_b.
        cfg.channel = lorentzian_channel(gamma0, kappa0, omega_b, mode_dim, anc_dim);
      } else if (cfg.channel_model == "two_lorentzian") {
        cfg.channel = two_lorentzian_channel({terms[0].omega, terms[0].gamma, terms[0].kappa},
                                             {terms[1].omega, terms[1].gamma, terms[1].kappa}, omega_b, mode_dim,
                                             terms[0].dim, terms[1].dim);
      } else {
        cfg.channel = markovian_reference(kappas, mode_dim, omega_b);
      }
      for (const auto& e : validation_errors(cfg.channel)) rd.errors.push_back(e);
    } catch (const Error& e) {
      rd.errors.push_back(std::string("channel: ") + e.what());
      channel_ok = false;
    }
  }

  // Input state.
  std::string kind = cfg.study == Study::Wigner ? "odd_cat" : "coherent";
  double alpha_re = 1.0, alpha_im = 0.0, r_s = 1.0, theta = 0.0;
  YAML::Node in;
  if (rd.section(root, "input", "", in)) {
    rd.check_keys(in, "input", {"kind", "alpha", "alpha_im", "r_s", "theta"});
    rd.read(in, "kind", "input", kind);
    rd.read(in, "alpha", "input", alpha_re);
    rd.read(in, "alpha_im", "input", alpha_im);
    rd.read(in, "r_s", "input", r_s);
    rd.read(in, "theta", "input", theta);
  }
  const cplx alpha(alpha_re, alpha_im);
  bool cat_input = false;
  if (kind == "coherent") {
    cfg.teleport.input = InputState::coherent(alpha);
  } else if (kind == "squeezed") {
    if (!(r_s >= 0.0)) rd.errors.push_back("input.r_s: must be >= 0");
    cfg.teleport.input = InputState::squeezed(alpha, r_s, theta);
  } else if (kind == "cat" || kind == "even_cat" || kind == "odd_cat") {
    if (kind == "even_cat") theta = 0.0;
    if (kind == "odd_cat") theta = kPi;
    cfg.teleport.input = InputState::cat(alpha, theta);
    cat_input = true;
  } else {
    rd.errors.push_back("input.kind: unknown kind '" + kind + "'; valid kinds: coherent, squeezed, cat, even_cat, odd_cat");
  }

  // Resource.
  cfg.teleport.r = cat_input ? kDefaultCatResourceSqueezing : kDefaultResourceSqueezing;
  cfg.teleport.dim_r = mode_dim;
  YAML::Node res;
  if (rd.section(root, "resource", "", res)) {
    rd.check_keys(res, "resource", {"r", "dim_r"});
    rd.read(res, "r", "resource", cfg.teleport.r);
    rd.read(res, "dim_r", "resource", cfg.teleport.dim_r);
  }
  if (!(cfg.teleport.r >= 0.0)) rd.errors.push_back("resource.r: must be >= 0");
  if (cfg.teleport.dim_r < 2) rd.errors.push_back("resource.dim_r: must be >= 2");

  // Quadrature.
  double half_width = 0.0;
  int points = 61;
  YAML::Node q;
  if (rd.section(root, "quadrature", "", q)) {
    rd.check_keys(q, "quadrature", {"half_width", "points"});
    std::string hw;
    if (q["half_width"] && rd.read(q, "half_width", "quadrature", hw) && hw != "auto") {
      if (rd.read(q, "half_width", "quadrature", half_width)) cfg.auto_half_width = false;
    }
    rd.read(q, "points", "quadrature", points);
  }
  try {
    cfg.teleport.grid = cfg.auto_half_width ? QuadratureGrid::for_input(cfg.teleport.input, points)
                                            : QuadratureGrid(half_width, points);
  } catch (const Error& e) {
    rd.errors.push_back(std::string("quadrature: ") + e.what());
  }

  // Time grid.
  double t0 = 0.0, t_end = 100.0;
  int n_steps = 1000;
  YAML::Node tm;
  if (rd.section(root, "time", "", tm)) {
    rd.check_keys(tm, "time", {"t0", "t_end", "n_steps"});
    rd.read(tm, "t0", "time", t0);
    rd.read(tm, "t_end", "time", t_end);
    rd.read(tm, "n_steps", "time", n_steps);
  }
  try {
    cfg.teleport.times = TimeGrid(t0, t_end, n_steps);
  } catch (const Error& e) {
    rd.errors.push_back(std::string("time: ") + e.what());
  }

  // Study sections.
  YAML::Node sec;
  if (rd.section(root, "blp", "", sec)) {
    rd.check_keys(sec, "blp", {"gamma0", "kappa0"});
    rd.read_values(sec, "gamma0", "blp", cfg.blp_gamma0);
    rd.read_values(sec, "kappa0", "blp", cfg.blp_kappa0);
  }
  if (rd.section(root, "wigner", "", sec)) {
    rd.check_keys(sec, "wigner", {"times", "x_min", "x_max", "points"});
    rd.read_values(sec, "times", "wigner", cfg.wigner_times);
    rd.read(sec, "x_min", "wigner", cfg.wigner_min);
    rd.read(sec, "x_max", "wigner", cfg.wigner_max);
    rd.read(sec, "points", "wigner", cfg.wigner_points);
  }
  if (rd.section(root, "compare_inputs", "", sec)) {
    rd.check_keys(sec, "compare_inputs", {"alpha", "r_s", "r"});
    double a = 1.0;
    if (rd.read(sec, "alpha", "compare_inputs", a)) cfg.compare_alpha = a;
    rd.read(sec, "r_s", "compare_inputs", cfg.compare_r_s);
    rd.read(sec, "r", "compare_inputs", cfg.compare_r);
  }
  if (rd.section(root, "psd", "", sec)) {
    rd.check_keys(sec, "psd", {"omega_min", "omega_max", "points"});
    rd.read(sec, "omega_min", "psd", cfg.psd_min);
    rd.read(sec, "omega_max", "psd", cfg.psd_max);
    rd.read(sec, "points", "psd", cfg.psd_points);
  }

  // Study-specific requirements.
  if (channel_ok) cfg.teleport.channel = cfg.channel;
  switch (cfg.study) {
    case Study::BlpSurface:
      if (cfg.blp_gamma0.empty()) rd.errors.push_back("blp.gamma0: required for blp_surface");
      if (cfg.blp_kappa0.empty()) rd.errors.push_back("blp.kappa0: required for blp_surface");
      for (std::size_t i = 0; i < cfg.blp_gamma0.size(); ++i)
        if (!(cfg.blp_gamma0[i] > 0.0)) rd.errors.push_back("blp.gamma0[" + std::to_string(i) + "]: must be > 0");
      for (std::size_t i = 0; i < cfg.blp_kappa0.size(); ++i)
        if (!(cfg.blp_kappa0[i] >= 0.0)) rd.errors.push_back("blp.kappa0[" + std::to_string(i) + "]: must be >= 0");
      if (cfg.channel_model != "lorentzian") rd.errors.push_back("channel.model: blp_surface sweeps a lorentzian channel");
      break;
    case Study::Wigner:
      if (cfg.wigner_times.empty()) rd.errors.push_back("wigner.times: required for the wigner study");
      for (std::size_t i = 0; i < cfg.wigner_times.size(); ++i)
        if (!(cfg.wigner_times[i] >= t0 && cfg.wigner_times[i] <= t_end))
          rd.errors.push_back("wigner.times[" + std::to_string(i) + "]: outside the time grid");
      if (cfg.wigner_points < 2) rd.errors.push_back("wigner.points: must be >= 2");
      if (!(cfg.wigner_max > cfg.wigner_min)) rd.errors.push_back("wigner.x_max: must exceed x_min");
      break;
    case Study::CompareInputs:
      if (!(cfg.compare_r_s >= 0.0)) rd.errors.push_back("compare_inputs.r_s: must be >= 0");
      if (!(cfg.compare_r >= 0.0)) rd.errors.push_back("compare_inputs.r: must be >= 0");
      break;
    case Study::Psd:
      if (cfg.channel_model == "markovian") rd.errors.push_back("channel.model: psd needs a non-Markovian channel");
      if (cfg.psd_points < 2) rd.errors.push_back("psd.points: must be >= 2");
      if (!(cfg.psd_max > cfg.psd_min)) rd.errors.push_back("psd.omega_max: must exceed omega_min");
      break;
    default:
      break;
  }

  // Truncation adequacy, checked before any heavy computation.
  if (channel_ok && rd.errors.empty()) {
    auto check_input = [&](const InputState& s, const std::string& what) {
      for (int d : {cfg.teleport.dim_r, cfg.channel.mode_dim}) {
        try {
          (void)s.state(d);
        } catch (const Error& e) {
          rd.errors.push_back(what + ": " + e.what());
          return;
        }
      }
    };
    if (cfg.study == Study::Fidelity || cfg.study == Study::Wigner) check_input(cfg.teleport.input, "input");
    if (cfg.study == Study::CompareInputs) {
      check_input(InputState::coherent(cfg.compare_alpha), "compare_inputs.coherent");
      check_input(InputState::squeezed(cfg.compare_alpha, cfg.compare_r_s), "compare_inputs.squeezed");
      check_input(InputState::cat(cfg.compare_alpha, 0.0), "compare_inputs.even_cat");
      check_input(InputState::cat(cfg.compare_alpha, kPi), "compare_inputs.odd_cat");
    }
  }

  if (!rd.errors.empty()) {
    std::string msg = origin + ": " + std::to_string(rd.errors.size()) + " validation error(s)";
    for (const auto& e : rd.errors) msg += "\n  " + e;
    fail(ErrorKind::Validation, msg);
  }
  return cfg;
}

inline ExperimentConfig parse_config(const std::string& path) {
  if (!std::filesystem::exists(path)) fail(ErrorKind::MissingFile, "config file not found: " + path);
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::Io, "cannot open config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str(), path);
}

// ---------------------------------------------------------------------------
// Result tables

class ResultTable {
 public:
  ResultTable() = default;
  explicit ResultTable(std::vector<std::string> columns) : columns_(std::move(columns)) {
    require(!columns_.empty(), ErrorKind::Shape, "result table needs at least one column");
  }

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<double>>& rows() const { return rows_; }
  const std::vector<std::pair<std::string, std::string>>& provenance() const { return provenance_; }

  void add_row(std::vector<double> row) {
    require(row.size() == columns_.size(), ErrorKind::Shape,
            "row has " + std::to_string(row.size()) + " values for " + std::to_string(columns_.size()) + " columns");
    rows_.push_back(std::move(row));
  }

  void annotate(const std::string& key, const std::string& value) { provenance_.emplace_back(key, value); }

  std::size_t column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i)
      if (columns_[i] == name) return i;
    fail(ErrorKind::Index, "no column named '" + name + "'");
  }

  std::vector<double> column(const std::string& name) const {
    const std::size_t c = column_index(name);
    std::vector<double> v;
    v.reserve(rows_.size());
    for (const auto& r : rows_) v.push_back(r[c]);
    return v;
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> rows_;
  std::vector<std::pair<std::string, std::string>> provenance_;
};

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string to_csv(const ResultTable& t) {
  std::string out;
  for (const auto& [k, v] : t.provenance()) {
    std::string val = v;
    for (char& c : val)
      if (c == '\n' || c == '\r') c = ' ';
    out += "# " + k + ": " + val + "\n";
  }
  for (std::size_t i = 0; i < t.columns().size(); ++i) out += (i ? "," : "") + t.columns()[i];
  out += "\n";
  for (const auto& r : t.rows()) {
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + format_number(r[i]);
    out += "\n";
  }
  return out;
}

inline void write_csv(const ResultTable& t, const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
    if (ec) fail(ErrorKind::Io, "cannot create directory " + p.parent_path().string() + ": " + ec.message());
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorKind::Io, "cannot open " + path + " for writing");
  const std::string s = to_csv(t);
  f.write(s.data(), static_cast<std::streamsize>(s.size()));
  f.close();
  if (!f) fail(ErrorKind::Io, "write to " + path + " failed");
}

inline ResultTable read_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::MissingFile, "cannot open " + path);
  std::vector<std::pair<std::string, std::string>> prov;
  std::string line;
  std::optional<ResultTable> t;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(": ");
      if (colon != std::string::npos && line.size() > 2) prov.emplace_back(line.substr(2, colon - 2), line.substr(colon + 2));
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!t) {
      t.emplace(cells);
      continue;
    }
    std::vector<double> row;
    for (const auto& c : cells) {
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (end == c.c_str() || *end != '\0') fail(ErrorKind::Parse, path + ":" + std::to_string(lineno) + ": bad number '" + c + "'");
      row.push_back(v);
    }
    t->add_row(std::move(row));
  }
  if (!t) fail(ErrorKind::Parse, path + ": no header row");
  for (const auto& [k, v] : prov) t->annotate(k, v);
  return *t;
}

// ---------------------------------------------------------------------------
// Studies

namespace detail {

inline std::string describe_channel(const ChannelSpec& s) {
  std::ostringstream o;
  o << (s.markovian_reference ? "markovian" : "non-markovian") << "; mode_dim=" << s.mode_dim
    << "; omega_b=" << format_number(s.omega_b);
  if (s.markovian_reference) {
    o << "; kappas=[";
    for (std::size_t k = 0; k < s.kappas.size(); ++k) o << (k ? "," : "") << format_number(s.kappas[k]);
    o << "]";
  }
  for (std::size_t k = 0; k < s.ancillas.size(); ++k) {
    const auto& a = s.ancillas[k];
    o << "; ancilla" << k << "={omega=" << format_number(a.omega) << ",gamma=" << format_number(a.gamma)
      << ",kappa=" << format_number(a.kappa) << ",dim=" << a.dim << "}";
  }
  return o.str();
}

inline std::string describe_input(const InputState& in) {
  std::ostringstream o;
  o << in.label() << "; alpha=" << format_number(in.alpha().real()) << (in.alpha().imag() < 0 ? "" : "+")
    << format_number(in.alpha().imag()) << "i";
  if (const auto* s = std::get_if<SqueezedInput>(&in.kind()))
    o << "; r_s=" << format_number(s->r_s) << "; theta=" << format_number(s->theta);
  if (const auto* c = std::get_if<CatInput>(&in.kind())) o << "; theta_c=" << format_number(c->theta);
  return o.str();
}

inline std::string describe_grid(const TimeGrid& g) {
  return "t0=" + format_number(g.t0()) + "; t_end=" + format_number(g.t_end()) + "; n_steps=" + std::to_string(g.n_steps());
}

inline std::string describe_quadrature(const QuadratureGrid& q) {
  return "trapezoid; half_width=" + format_number(q.half_width()) + "; points=" + std::to_string(q.points()) +
         "; gate=refine to " + std::to_string(q.refined().points()) + " points, tol 1e-3";
}

inline void base_provenance(ResultTable& t, const ExperimentConfig& cfg) {
  t.annotate("artifact", kArtifactVersion);
  t.annotate("study", to_string(cfg.study));
  t.annotate("config_hash", "fnv1a64:" + cfg.config_hash);
  t.annotate("units", "frequencies and rates as configured, divided by omega_b internally; time in units of 1/omega_b");
  t.annotate("conventions", "x=(a+a^dag)/2; p=(a-a^dag)/(2i); beta=x_-+ip_+; column-stacking vectorization");
  t.annotate("channel", describe_channel(cfg.channel));
  for (const auto& [k, v] : cfg.metadata) t.annotate("meta." + k, v);
}

inline std::string describe_pairs(const std::vector<StatePair>& pairs) {
  std::string s;
  for (const auto& p : pairs) s += (s.empty() ? "" : ", ") + p.label;
  return s;
}

}  // namespace detail

/// Runs one study. Rows are appended to `out` as they become available, so a
/// caller that catches an error still holds the partial table.
inline void run_study(const ExperimentConfig& cfg, ResultTable& out) {
  const bool with_ref = cfg.reference && !cfg.channel.markovian_reference;
  const ChannelSpec ref = with_ref ? markovian_reference_of(cfg.channel) : cfg.channel;
  const TimeGrid& grid = cfg.teleport.times;
  const auto times = grid.times();

  auto wrap = [&](const std::string& what, auto&& body) {
    try {
      body();
    } catch (const Error& e) {
      fail(e.kind(), "study " + to_string(cfg.study) + " (" + what + "): " + e.what());
    }
  };

  switch (cfg.study) {
    case Study::Entanglement: {
      std::vector<std::string> cols{"t", "log_negativity"};
      if (with_ref) cols.push_back("log_negativity_markov");
      cols.insert(cols.end(), {"trace_distance_fock01", "blp_fock01"});
      out = ResultTable(cols);
      detail::base_provenance(out, cfg);
      if (with_ref) out.annotate("reference_channel", detail::describe_channel(ref));
      out.annotate("time_grid", detail::describe_grid(grid));
      out.annotate("resource", "tmsv; r=" + format_number(cfg.teleport.r) + "; dim_r=" + std::to_string(cfg.teleport.dim_r));
      out.annotate("blp_pair", "fock01 = (|0><0|, |1><1|)");
      MetricSeries en, enm;
      BlpResult blp;
      wrap("entanglement", [&] { en = entanglement_series(cfg.channel, cfg.teleport.r, cfg.teleport.dim_r, grid); });
      if (with_ref) wrap("markovian reference", [&] { enm = entanglement_series(ref, cfg.teleport.r, cfg.teleport.dim_r, grid); });
      wrap("trace distance", [&] { blp = blp_series(cfg.channel, default_blp_candidates(cfg.channel.mode_dim)[0], grid); });
      for (const auto& w : blp.warnings) out.annotate("warning", w);
      for (std::size_t i = 0; i < times.size(); ++i) {
        std::vector<double> row{times[i], en[i]};
        if (with_ref) row.push_back(enm[i]);
        row.push_back(blp.distance[i]);
        row.push_back(blp.backflow[i]);
        out.add_row(std::move(row));
      }
      break;
    }
    case Study::Fidelity: {
      std::vector<std::string> cols{"t", "fidelity", "relative_fidelity", "log_negativity"};
      if (with_ref) cols.insert(cols.end(), {"fidelity_markov", "relative_fidelity_markov", "log_negativity_markov"});
      out = ResultTable(cols);
      detail::base_provenance(out, cfg);
      if (with_ref) out.annotate("reference_channel", detail::describe_channel(ref));
      out.annotate("time_grid", detail::describe_grid(grid));
      out.annotate("resource", "tmsv; r=" + format_number(cfg.teleport.r) + "; dim_r=" + std::to_string(cfg.teleport.dim_r));
      out.annotate("input", detail::describe_input(cfg.teleport.input));
      out.annotate("quadrature", detail::describe_quadrature(cfg.teleport.grid));
      TeleportResult a, b;
      wrap("teleportation", [&] { a = run_teleportation(cfg.teleport); });
      if (with_ref) {
        TeleportConfig tc = cfg.teleport;
        tc.channel = ref;
        wrap("markovian reference", [&] { b = run_teleportation(tc); });
      }
      for (std::size_t i = 0; i < times.size(); ++i) {
        std::vector<double> row{times[i], a.fidelity[i], a.relative[i], a.log_negativity[i]};
        if (with_ref) row.insert(row.end(), {b.fidelity[i], b.relative[i], b.log_negativity[i]});
        out.add_row(std::move(row));
      }
      break;
    }
    case Study::BlpSurface: {
      const auto pairs = default_blp_candidates(cfg.channel.mode_dim);
      std::vector<std::string> cols{"gamma0", "kappa0", "blp", "best_pair"};
      for (const auto& p : pairs) cols.push_back("blp_" + p.label);
      out = ResultTable(cols);
      detail::base_provenance(out, cfg);
      out.annotate("time_grid", detail::describe_grid(grid));
      out.annotate("candidate_pairs", detail::describe_pairs(pairs));
      const AncillaSpec& anc = cfg.channel.ancillas.front();
      for (double k0 : cfg.blp_kappa0)
        for (double g0 : cfg.blp_gamma0) {
          ChannelSpec s = cfg.channel;
          s.ancillas = {{anc.omega, g0, k0, anc.dim}};
          BlpMax m;
          wrap("gamma0=" + format_number(g0) + ", kappa0=" + format_number(k0), [&] { m = blp_max_detail(s, pairs, grid); });
          std::vector<double> row{g0, k0, m.value, static_cast<double>(m.best)};
          row.insert(row.end(), m.per_candidate.begin(), m.per_candidate.end());
          out.add_row(std::move(row));
        }
      break;
    }
    case Study::Wigner: {
      out = ResultTable({"channel", "t", "x", "p", "wigner", "d", "h", "w", "f", "angle_deg"});
      detail::base_provenance(out, cfg);
      if (with_ref) out.annotate("reference_channel", detail::describe_channel(ref));
      out.annotate("channel_column", with_ref ? "0 = configured channel, 1 = markovian reference" : "0 = configured channel");
      out.annotate("state", "outcome-averaged teleported state; W=(2/pi)tr[rho D(beta) Parity D(beta)^dag], beta=x+ip");
      out.annotate("ellipse", "d=|<a>|; h,w = sqrt of covariance eigenvalues (major, minor); f=(h-w)/w; angle of major axis");
      out.annotate("resource", "tmsv; r=" + format_number(cfg.teleport.r) + "; dim_r=" + std::to_string(cfg.teleport.dim_r));
      out.annotate("input", detail::describe_input(cfg.teleport.input));
      out.annotate("quadrature", detail::describe_quadrature(cfg.teleport.grid));
      double tmax = cfg.wigner_times.front();
      for (double t : cfg.wigner_times) tmax = std::max(tmax, t);
      TeleportConfig tc = cfg.teleport;
      const double dt = grid.degenerate() ? 0.1 : grid.dt();
      tc.times = tmax > grid.t0() ? TimeGrid(grid.t0(), tmax, std::max(1, static_cast<int>(std::lround((tmax - grid.t0()) / dt))))
                                  : TimeGrid(grid.t0(), grid.t0(), 1);
      tc.snapshot_times = cfg.wigner_times;
      out.annotate("time_grid", detail::describe_grid(tc.times));
      const auto xs = linspace(cfg.wigner_min, cfg.wigner_max, cfg.wigner_points);
      for (int c = 0; c < (with_ref ? 2 : 1); ++c) {
        if (c == 1) tc.channel = ref;
        TeleportResult r;
        wrap(c ? "markovian reference" : "teleportation", [&] { r = run_teleportation(tc); });
        for (const auto& snap : r.snapshots) {
          const RMatrix w = wigner(snap.rho_out, xs, xs);
          const EllipseDiagnostics e = ellipse(snap.rho_out);
          for (std::size_t i = 0; i < xs.size(); ++i)
            for (std::size_t j = 0; j < xs.size(); ++j)
              out.add_row({static_cast<double>(c), snap.time, xs[i], xs[j], w(i, j), e.amplitude, e.major, e.minor,
                           e.flattening, e.angle_deg});
        }
      }
      break;
    }
    case Study::CompareInputs: {
      const std::vector<InputState> inputs{
          InputState::coherent(cfg.compare_alpha), InputState::squeezed(cfg.compare_alpha, cfg.compare_r_s),
          InputState::cat(cfg.compare_alpha, 0.0), InputState::cat(cfg.compare_alpha, kPi)};
      std::vector<std::string> cols{"t"};
      for (const auto& in : inputs) cols.push_back("relative_fidelity_" + in.label());
      for (const auto& in : inputs) cols.push_back("fidelity_" + in.label());
      out = ResultTable(cols);
      detail::base_provenance(out, cfg);
      out.annotate("time_grid", detail::describe_grid(grid));
      out.annotate("resource", "tmsv; r=" + format_number(cfg.compare_r) + "; dim_r=" + std::to_string(cfg.teleport.dim_r));
      std::vector<TeleportResult> res(inputs.size());
      for (std::size_t k = 0; k < inputs.size(); ++k) {
        TeleportConfig tc = cfg.teleport;
        tc.input = inputs[k];
        tc.r = cfg.compare_r;
        tc.grid = cfg.auto_half_width ? QuadratureGrid::for_input(inputs[k], cfg.teleport.grid.points()) : cfg.teleport.grid;
        out.annotate("input." + inputs[k].label(), detail::describe_input(inputs[k]) + "; " + detail::describe_quadrature(tc.grid));
        wrap(inputs[k].label(), [&] { res[k] = run_teleportation(tc); });
      }
      for (std::size_t i = 0; i < times.size(); ++i) {
        std::vector<double> row{times[i]};
        for (const auto& r : res) row.push_back(r.relative[i]);
        for (const auto& r : res) row.push_back(r.fidelity[i]);
        out.add_row(std::move(row));
      }
      break;
    }
    case Study::Psd: {
      std::vector<std::string> cols{"omega", "psd"};
      for (std::size_t k = 0; k < cfg.channel.ancillas.size(); ++k) cols.push_back("psd_" + std::to_string(k + 1));
      out = ResultTable(cols);
      detail::base_provenance(out, cfg);
      out.annotate("psd", "sum_k (gamma_k^2/4)/(gamma_k^2/4 + (omega-omega_k)^2); omega in the channel's physical unit");
      const auto w = linspace(cfg.psd_min, cfg.psd_max, cfg.psd_points);
      const auto total = psd(cfg.channel, w);
      std::vector<std::vector<double>> parts;
      for (const auto& a : cfg.channel.ancillas) {
        ChannelSpec one = cfg.channel;
        one.ancillas = {a};
        parts.push_back(psd(one, w));
      }
      for (std::size_t i = 0; i < w.size(); ++i) {
        std::vector<double> row{w[i], total[i]};
        for (const auto& p : parts) row.push_back(p[i]);
        out.add_row(std::move(row));
      }
      break;
    }
  }
}

inline ResultTable run_study(const ExperimentConfig& cfg) {
  ResultTable t;
  run_study(cfg, t);
  return t;
}

}  // namespace nmqt
