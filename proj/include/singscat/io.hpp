#ifndef SINGSCAT_IO_HPP
#define SINGSCAT_IO_HPP

// JSON/CSV serialization. Numbers are written with 17 significant digits so
// that files round-trip exactly and reruns are byte-identical.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "singscat/domain.hpp"
#include "singscat/errors.hpp"
#include "singscat/limit_lab.hpp"
#include "singscat/perturbation.hpp"
#include "singscat/radial_solver.hpp"

namespace singscat::io {

using json = nlohmann::ordered_json;

inline constexpr const char* tool_version = "0.1.0";
inline constexpr int schema_version = 1;

inline std::string format_number(double x) {
  if (std::isnan(x)) return "null";
  if (std::isinf(x)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline void write(std::string& out, const json& j, int indent, int depth) {
  auto pad = [&](int d) { out.append(static_cast<std::size_t>(indent * d), ' '); };
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      std::size_t i = 0;
      for (auto it = j.begin(); it != j.end(); ++it, ++i) {
        pad(depth + 1);
        out += json(it.key()).dump();
        out += ": ";
        write(out, it.value(), indent, depth + 1);
        if (i + 1 < j.size()) out += ",";
        out += "\n";
      }
      pad(depth);
      out += "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        pad(depth + 1);
        write(out, j[i], indent, depth + 1);
        if (i + 1 < j.size()) out += ",";
        out += "\n";
      }
      pad(depth);
      out += "]";
      return;
    }
    case json::value_t::number_float: out += format_number(j.get<double>()); return;
    default: out += j.dump(); return;
  }
}

}  // namespace detail

/// Pretty JSON text with 17-digit floats and a trailing newline.
inline std::string dump(const json& j) {
  std::string out;
  detail::write(out, j, 2, 0);
  out += "\n";
  return out;
}

inline json complex_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

// ---- parsing -------------------------------------------------------------

inline double number_field(const json& j, const char* key, std::optional<double> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw DomainError(std::string("missing field \"") + key + "\"");
  }
  const auto& v = j.at(key);
  if (!v.is_number()) throw DomainError(std::string("field \"") + key + "\" must be a number");
  return v.get<double>();
}

inline std::vector<double> number_array(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) throw DomainError(std::string("field \"") + key + "\" must be an array");
  std::vector<double> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number()) throw DomainError(std::string("field \"") + key + "\" must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

inline json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw DomainError("malformed JSON in " + what + ": " + e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write " + path);
  out << text;
}

/// PotentialSpec from {"terms":[{"re","im","s","tau"}], "beta", "table":{"r","v_re","v_im","interp"}}.
inline PotentialSpec parse_potential(const json& j) {
  if (!j.is_object()) throw DomainError("potential must be a JSON object");
  PotentialSpec pot;
  if (j.contains("terms")) {
    if (!j.at("terms").is_array()) throw DomainError("field \"terms\" must be an array");
    for (const auto& t : j.at("terms")) {
      if (!t.is_object()) throw DomainError("each term must be an object");
      PowerTerm term;
      term.strength = {number_field(t, "re"), number_field(t, "im", 0.0)};
      term.exponent = number_field(t, "s");
      if (t.contains("tau") && !t.at("tau").is_null()) term.damping_scale = number_field(t, "tau");
      pot.terms.push_back(term);
    }
  }
  pot.coulomb_strength = number_field(j, "beta", 0.0);
  if (j.contains("table") && !j.at("table").is_null()) {
    const auto& t = j.at("table");
    auto r = number_array(t, "r");
    auto re = number_array(t, "v_re");
    std::vector<double> im = t.contains("v_im") ? number_array(t, "v_im") : std::vector<double>(re.size(), 0.0);
    if (re.size() != im.size()) throw DomainError("table: v_re and v_im lengths differ");
    std::vector<cplx> v;
    for (std::size_t i = 0; i < re.size(); ++i) v.push_back({re[i], im[i]});
    Interpolation interp = Interpolation::cubic;
    if (t.contains("interp")) {
      std::string s = t.at("interp").is_string() ? t.at("interp").get<std::string>() : "";
      if (s == "linear") interp = Interpolation::linear;
      else if (s != "cubic") throw DomainError("table.interp must be \"cubic\" or \"linear\"");
    }
    pot.table = TabulatedPotential(std::move(r), std::move(v), interp);
  }
  auto viol = validate(pot);
  if (!viol.empty()) throw DomainError("invalid potential: " + viol.front().field + ": " + viol.front().rule);
  return pot;
}

inline json potential_json(const PotentialSpec& pot) {
  json terms = json::array();
  for (const auto& t : pot.terms) {
    json o{{"re", t.strength.real()}, {"im", t.strength.imag()}, {"s", t.exponent}};
    if (t.damping_scale) o["tau"] = *t.damping_scale;
    terms.push_back(o);
  }
  json j{{"terms", terms}, {"beta", pot.coulomb_strength}};
  if (pot.table) {
    json r = json::array(), vr = json::array(), vi = json::array();
    for (double x : pot.table->radii()) r.push_back(x);
    for (const auto& v : pot.table->values()) {
      vr.push_back(v.real());
      vi.push_back(v.imag());
    }
    j["table"] = json{{"r", r},
                      {"v_re", vr},
                      {"v_im", vi},
                      {"interp", pot.table->interpolation() == Interpolation::linear ? "linear" : "cubic"}};
  }
  return j;
}

inline Branch parse_branch(const std::string& s) {
  if (s == "absorb") return Branch::absorb;
  if (s == "create") return Branch::create;
  throw DomainError("branch must be \"absorb\" or \"create\"");
}

inline BoundaryMode parse_boundary_mode(const std::string& s) {
  for (auto m : {BoundaryMode::square_well_interior, BoundaryMode::full_absorption, BoundaryMode::partial_absorption_s2,
                 BoundaryMode::creation})
    if (s == to_string(m)) return m;
  throw DomainError("unknown boundary mode \"" + s + "\"");
}

// ---- reports -------------------------------------------------------------

inline json warnings_json(const std::vector<Warning>& ws) {
  json a = json::array();
  for (const auto& w : ws) a.push_back(json{{"code", w.code}, {"message", w.message}});
  return a;
}

inline json provenance_json(const Provenance& p) {
  return json{{"r0", p.r0},
              {"omega", p.omega},
              {"boundary_mode", to_string(p.boundary_mode)},
              {"match_radius", p.match_radius},
              {"extrapolation_residual", p.extrapolation_residual},
              {"steps", p.steps},
              {"switches", p.switches},
              {"renormalizations", p.renormalizations},
              {"warnings", warnings_json(p.warnings)}};
}

inline json observables_json(const ScatteringObservables& o) {
  return json{{"scattering_length", complex_json(o.scattering_length)},
              {"phase_shift", complex_json(o.phase_shift)},
              {"s_matrix", complex_json(o.s_matrix)},
              {"s_matrix_modulus", o.s_matrix_modulus},
              {"branch", to_string(o.branch)},
              {"provenance", provenance_json(o.provenance)}};
}

inline json limit_report_json(const LimitReport& r) {
  json samples = json::array();
  for (const auto& s : r.samples) {
    json o{{"step_index", s.step_index}, {"r0", s.r0}, {"omega", s.omega}, {"observable", complex_json(s.observable)}};
    if (s.failure) o["failure"] = *s.failure;
    samples.push_back(o);
  }
  json ex = json::array();
  for (const auto& z : r.extrapolants) ex.push_back(complex_json(z));
  return json{{"mode", r.ordered ? "ordered" : "r0_sequence"},
              {"verdict", to_string(r.verdict)},
              {"extrapolated", complex_json(r.extrapolated)},
              {"spread", r.spread},
              {"fitted_rate", r.fitted_rate},
              {"extrapolants", ex},
              {"samples", samples}};
}

inline std::string limit_report_csv(const LimitReport& r) {
  std::string out = "r0,omega,re_obs,im_obs,step_index\n";
  for (const auto& s : r.samples) {
    out += format_number(s.r0) + "," + format_number(s.omega) + "," + format_number(s.observable.real()) + "," +
           format_number(s.observable.imag()) + "," + std::to_string(s.step_index) + "\n";
  }
  return out;
}

inline json resonance_json(const ResonanceResult& r) {
  return json{{"level_index", r.level_index},
              {"energy", complex_json(r.energy)},
              {"unperturbed_energy", r.unperturbed_energy},
              {"measured_shift", complex_json(r.measured_shift)},
              {"predicted_shift", complex_json(r.predicted_shift)},
              {"relative_error", r.relative_error},
              {"omega_n", r.omega_n},
              {"momentum", r.momentum},
              {"regime_parameter", r.regime_parameter},
              {"regime_warning", r.has_warning("perturbative_regime")},
              {"warnings", warnings_json(r.warnings)}};
}

// ---- manifests -----------------------------------------------------------

struct RunManifest {
  std::string command;
  json inputs = json::object();
  std::vector<std::string> outputs;
  std::string timestamp;

  json to_json() const {
    json outs = json::array();
    for (const auto& o : outputs) outs.push_back(o);
    return json{{"command", command},
                {"inputs", inputs},
                {"outputs", outs},
                {"versions", json{{"tool", tool_version}, {"schema", schema_version}}},
                {"timestamp", timestamp}};
  }

  static RunManifest from_json(const json& j) {
    RunManifest m;
    if (!j.is_object() || !j.contains("command") || !j.at("command").is_string() || !j.contains("inputs"))
      throw DomainError("manifest needs \"command\" and \"inputs\"");
    m.command = j.at("command").get<std::string>();
    m.inputs = j.at("inputs");
    if (j.contains("outputs"))
      for (const auto& o : j.at("outputs")) m.outputs.push_back(o.get<std::string>());
    if (j.contains("timestamp") && j.at("timestamp").is_string()) m.timestamp = j.at("timestamp").get<std::string>();
    if (j.contains("versions") && j.at("versions").contains("schema") &&
        j.at("versions").at("schema").get<int>() != schema_version)
      throw DomainError("manifest schema version mismatch");
    return m;
  }
};

}  // namespace singscat::io

#endif
