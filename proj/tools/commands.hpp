#ifndef SINGSCAT_TOOLS_COMMANDS_HPP
#define SINGSCAT_TOOLS_COMMANDS_HPP

// Command bodies shared by the CLI front end and replay. Every command is a
// pure function of its canonical input map, so a manifest that records the map
// is enough to regenerate the outputs.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "singscat/closed_form.hpp"
#include "singscat/io.hpp"
#include "singscat/limit_lab.hpp"
#include "singscat/perturbation.hpp"
#include "singscat/radial_solver.hpp"

namespace singscat::cli {

using io::json;

struct CommandOutput {
  std::string text;                                        // printed to stdout
  std::vector<std::pair<std::string, std::string>> files;  // file name, contents
};

namespace detail {

inline double num(const json& in, const char* key) { return io::number_field(in, key); }

inline std::optional<double> opt_num(const json& in, const char* key) {
  if (!in.contains(key) || in.at(key).is_null()) return std::nullopt;
  return io::number_field(in, key);
}

inline bool flag(const json& in, const char* key) {
  if (!in.contains(key)) return false;
  if (!in.at(key).is_boolean()) throw DomainError(std::string("field \"") + key + "\" must be a boolean");
  return in.at(key).get<bool>();
}

inline std::string str(const json& in, const char* key, const std::string& fallback) {
  if (!in.contains(key)) return fallback;
  if (!in.at(key).is_string()) throw DomainError(std::string("field \"") + key + "\" must be a string");
  return in.at(key).get<std::string>();
}

inline int integer(const json& in, const char* key, std::optional<int> fallback = std::nullopt) {
  if (!in.contains(key)) {
    if (fallback) return *fallback;
    throw DomainError(std::string("missing field \"") + key + "\"");
  }
  const auto& v = in.at(key);
  if (!v.is_number_integer()) throw DomainError(std::string("field \"") + key + "\" must be an integer");
  return v.get<int>();
}

inline void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  std::set<std::string> ok(known.begin(), known.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) throw DomainError("unknown field \"" + it.key() + "\" in " + where);
}

inline double relative_deviation(cplx a, cplx ref) {
  double d = std::abs(a - ref);
  return std::abs(ref) > 0.0 ? d / std::abs(ref) : d;
}

inline GeometricSequence sequence(const json& j, const char* what) {
  if (!j.is_object()) throw DomainError(std::string(what) + " must be an object");
  reject_unknown(j, {"start", "ratio", "count"}, what);
  return {io::number_field(j, "start"), io::number_field(j, "ratio"), integer(j, "count")};
}

}  // namespace detail

inline CommandOutput cmd_length(const json& in) {
  const double alpha = detail::num(in, "alpha");
  const double s = detail::num(in, "s");
  const Branch branch = io::parse_branch(detail::str(in, "branch", "absorb"));
  const bool repulsive = detail::flag(in, "repulsive");
  if (!(alpha > 0.0)) throw DomainError("alpha must be positive");

  cplx closed = repulsive ? cplx{scattering_length_repulsive(alpha, s), 0.0} : scattering_length_singular(alpha, s, branch);
  json out{{"command", "length"}, {"alpha", alpha}, {"s", s}, {"branch", to_string(branch)}, {"repulsive", repulsive}};

  if (!detail::flag(in, "numeric")) {
    out["scattering_length"] = io::complex_json(closed);
    out["provenance"] = json{{"method", "closed_form"}};
    return {io::dump(out), {{"length.json", io::dump(out)}}};
  }

  RadialProblem prob;
  prob.potential.terms.push_back({repulsive ? -alpha : alpha, s, std::nullopt});
  SolverConfig cfg;
  cfg.branch = branch;
  const double omega = detail::opt_num(in, "omega").value_or(0.0);
  auto r0 = detail::opt_num(in, "r0");
  if (omega == 0.0 || repulsive) {
    cfg.boundary_mode = branch == Branch::absorb || repulsive ? BoundaryMode::full_absorption : BoundaryMode::creation;
    cfg.r0 = r0 ? *r0 : r0_for_z_modulus(2e4, alpha, s);
  } else {
    cfg.boundary_mode = BoundaryMode::square_well_interior;
    cfg.omega = branch_sign(branch) * std::abs(omega);
    cfg.r0 = r0 ? *r0 : r0_for_im_z(20.0, alpha, std::abs(omega), s);
  }
  auto obs = solve(prob, cfg);
  json prov = io::provenance_json(obs.provenance);
  prov["method"] = "numeric";
  out["scattering_length"] = io::complex_json(obs.scattering_length);
  out["closed_form"] = io::complex_json(closed);
  out["relative_deviation"] = detail::relative_deviation(obs.scattering_length, closed);
  out["provenance"] = prov;
  return {io::dump(out), {{"length.json", io::dump(out)}}};
}

inline CommandOutput cmd_phase_s2(const json& in) {
  const double alpha2 = detail::num(in, "alpha2");
  const Branch branch = io::parse_branch(detail::str(in, "branch", "absorb"));
  const double energy = detail::opt_num(in, "energy").value_or(1.0);
  if (!(energy > 0.0)) throw DomainError("energy must be positive");
  auto ph = inverse_square_phase(alpha2, branch);

  json out{{"command", "phase-s2"},
           {"alpha2", alpha2},
           {"branch", to_string(branch)},
           {"phase_shift", io::complex_json(ph.phase)},
           {"s_matrix_modulus", ph.s_modulus},
           {"jump", io::complex_json(ph.jump)}};
  json prov{{"method", "closed_form"}};
  if (detail::flag(in, "numeric")) {
    json runs = json::array();
    double worst = 0.0;
    for (double e : {energy, 10.0 * energy}) {
      RadialProblem prob;
      prob.energy = e;
      prob.potential.terms.push_back({alpha2, 2.0, std::nullopt});
      SolverConfig cfg;
      cfg.boundary_mode = BoundaryMode::partial_absorption_s2;
      cfg.branch = branch;
      cfg.r0 = 1e-4 / std::sqrt(e);
      auto obs = solve(prob, cfg);
      worst = std::max(worst, std::abs(obs.s_matrix_modulus - ph.s_modulus));
      runs.push_back(json{{"energy", e},
                          {"s_matrix_modulus", obs.s_matrix_modulus},
                          {"phase_shift", io::complex_json(obs.phase_shift)},
                          {"provenance", io::provenance_json(obs.provenance)}});
    }
    prov = json{{"method", "numeric"}, {"runs", runs}, {"max_abs_deviation", worst}, {"energy_independent", worst < 1e-6}};
  }
  out["provenance"] = prov;
  return {io::dump(out), {{"phase_s2.json", io::dump(out)}}};
}

inline CommandOutput cmd_spectrum(const json& in) {
  const double alpha2 = detail::num(in, "alpha2");
  const int nr_max = detail::integer(in, "nr_max");
  const Branch branch = io::parse_branch(detail::str(in, "branch", "absorb"));
  if (nr_max < 0) throw DomainError("nr-max must be non-negative");
  std::string csv = "n_r,re_E,im_E,width\n";
  for (int n = 0; n <= nr_max; ++n) {
    auto line = coulomb_inverse_square_spectrum(n, alpha2, branch);
    csv += std::to_string(n) + "," + io::format_number(line.energy.real()) + "," +
           io::format_number(line.energy.imag()) + "," + io::format_number(line.width()) + "\n";
  }
  return {csv, {{"spectrum.csv", csv}}};
}

/// Limit-study config file:
/// {"potential":{...}, "l":0, "energy":0, "mass_convention":"two_m_one",
///  "mode":"ordered"|"r0_sequence", "im_z_target":20,
///  "omega":{"start","ratio","count"}, "r0":{"start","ratio","count"}, "fixed_omega":w,
///  "tolerance":1e-6, "extrapolation_points":4,
///  "solver":{"boundary_mode","branch","r0","rel_tol","abs_tol","max_steps","match_radius","interior_depth_scale"}}
inline std::pair<RadialProblem, LimitSchedule> parse_limit_config(const json& c) {
  if (!c.is_object()) throw DomainError("limit config must be a JSON object");
  detail::reject_unknown(c,
                         {"potential", "l", "energy", "mass_convention", "mode", "im_z_target", "omega", "r0",
                          "fixed_omega", "tolerance", "extrapolation_points", "solver"},
                         "limit config");
  if (!c.contains("potential")) throw DomainError("limit config needs \"potential\"");
  RadialProblem prob;
  prob.potential = io::parse_potential(c.at("potential"));
  prob.l = detail::integer(c, "l", 0);
  prob.energy = io::number_field(c, "energy", 0.0);
  std::string mc = detail::str(c, "mass_convention", "two_m_one");
  if (mc == "m_one") prob.mass_convention = MassConvention::m_one;
  else if (mc != "two_m_one") throw DomainError("mass_convention must be \"two_m_one\" or \"m_one\"");

  LimitSchedule sched;
  std::string mode = detail::str(c, "mode", "ordered");
  if (mode != "ordered" && mode != "r0_sequence") throw DomainError("mode must be \"ordered\" or \"r0_sequence\"");
  sched.im_z_target = io::number_field(c, "im_z_target", 20.0);
  if (c.contains("omega")) sched.omega_sequence = detail::sequence(c.at("omega"), "omega");
  if (mode == "r0_sequence") {
    if (!c.contains("r0")) throw DomainError("r0_sequence mode needs \"r0\"");
    sched.r0_sequence = detail::sequence(c.at("r0"), "r0");
    sched.fixed_omega = detail::opt_num(c, "fixed_omega");
  }
  sched.tolerance = io::number_field(c, "tolerance", 1e-6);
  sched.extrapolation_points = detail::integer(c, "extrapolation_points", 4);

  SolverConfig& b = sched.base;
  b.boundary_mode = BoundaryMode::square_well_interior;
  if (c.contains("solver")) {
    const auto& sv = c.at("solver");
    if (!sv.is_object()) throw DomainError("solver must be an object");
    detail::reject_unknown(sv,
                           {"boundary_mode", "branch", "r0", "rel_tol", "abs_tol", "max_steps", "match_radius",
                            "interior_depth_scale"},
                           "solver");
    b.boundary_mode = io::parse_boundary_mode(detail::str(sv, "boundary_mode", "square_well_interior"));
    b.branch = io::parse_branch(detail::str(sv, "branch", "absorb"));
    b.r0 = io::number_field(sv, "r0", b.r0);
    b.rel_tol = io::number_field(sv, "rel_tol", b.rel_tol);
    b.abs_tol = io::number_field(sv, "abs_tol", b.abs_tol);
    b.max_steps = static_cast<long>(io::number_field(sv, "max_steps", static_cast<double>(b.max_steps)));
    b.match_radius = io::number_field(sv, "match_radius", 0.0);
    b.interior_depth_scale = io::number_field(sv, "interior_depth_scale", 1.0);
  }
  if (!(b.rel_tol > 0.0) || !(b.abs_tol > 0.0) || b.max_steps < 1) throw DomainError("solver tolerances must be positive");
  return {prob, sched};
}

inline CommandOutput cmd_sweep(const json& in, int jobs) {
  if (!in.contains("config")) throw DomainError("sweep needs a config");
  auto [prob, sched] = parse_limit_config(in.at("config"));
  auto rep = run_limit(prob, sched, jobs);
  json report = io::limit_report_json(rep);
  std::string text = io::dump(report);
  return {text, {{"sweep_samples.csv", io::limit_report_csv(rep)}, {"sweep_report.json", text}}};
}

inline CommandOutput cmd_perturb(const json& in) {
  if (!in.contains("potential")) throw DomainError("perturb needs a potential");
  PotentialSpec pot = io::parse_potential(in.at("potential"));
  int level = detail::integer(in, "level");
  int l = detail::integer(in, "l", 0);
  if (l < 0) throw DomainError("l must be non-negative");
  LevelSearchConfig cfg;
  cfg.branch = io::parse_branch(detail::str(in, "branch", "absorb"));
  auto res = compare_with_theory(pot, l, level, cfg);
  std::string text = io::dump(io::resonance_json(res));
  return {text, {{"resonance.json", text}}};
}

inline CommandOutput cmd_hhbar(const json& in) {
  const double c6 = detail::num(in, "c6");
  const double mass = detail::opt_num(in, "mass").value_or(1.0);
  cplx a = hhbar_scattering_length(mass, c6);
  json out{{"command", "hhbar"}, {"c6", c6}, {"mass", mass}, {"scattering_length", io::complex_json(a)}};
  if (in.contains("n") && !in.at("n").empty()) {
    json table = json::array();
    for (double n : io::number_array(in, "n")) {
      if (!(n > 0.0)) throw DomainError("principal quantum numbers must be positive");
      double c6n = c6 * n * n * n * n;
      cplx an = hhbar_scattering_length(mass, c6n);
      table.push_back(json{{"n", n}, {"c6", c6n}, {"scattering_length", io::complex_json(an)}, {"modulus_over_n", std::abs(an) / n}});
    }
    out["n_scaling"] = table;
  }
  return {io::dump(out), {{"hhbar.json", io::dump(out)}}};
}

inline CommandOutput execute(const std::string& command, const json& inputs, int jobs = 1) {
  if (command == "length") return cmd_length(inputs);
  if (command == "phase-s2") return cmd_phase_s2(inputs);
  if (command == "spectrum") return cmd_spectrum(inputs);
  if (command == "sweep") return cmd_sweep(inputs, jobs);
  if (command == "perturb") return cmd_perturb(inputs);
  if (command == "hhbar") return cmd_hhbar(inputs);
  throw DomainError("unknown command \"" + command + "\"");
}

inline std::string utc_timestamp() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Writes the outputs and manifest.json into dir. Output paths in the manifest
/// are relative to the manifest itself.
inline io::RunManifest write_outputs(const std::string& command, const json& inputs, const CommandOutput& out,
                                     const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DomainError("cannot create " + dir.string() + ": " + ec.message());
  io::RunManifest m;
  m.command = command;
  m.inputs = inputs;
  m.timestamp = utc_timestamp();
  for (const auto& [name, text] : out.files) {
    io::write_file((dir / name).string(), text);
    m.outputs.push_back(name);
  }
  io::write_file((dir / "manifest.json").string(), io::dump(m.to_json()));
  return m;
}

struct ReplayResult {
  std::vector<std::string> identical;
  std::vector<std::string> differing;
  bool ok() const { return differing.empty(); }
};

/// Re-runs a manifest and compares each regenerated output with the recorded file.
inline ReplayResult replay(const std::filesystem::path& manifest_path, int jobs = 1,
                           const std::optional<std::filesystem::path>& out_dir = std::nullopt) {
  auto m = io::RunManifest::from_json(io::parse_json_text(io::read_file(manifest_path.string()), manifest_path.string()));
  auto out = execute(m.command, m.inputs, jobs);
  if (out_dir) write_outputs(m.command, m.inputs, out, *out_dir);
  ReplayResult r;
  const auto base = manifest_path.parent_path();
  for (const auto& name : m.outputs) {
    auto it = std::find_if(out.files.begin(), out.files.end(), [&](const auto& f) { return f.first == name; });
    std::string recorded;
    try {
      recorded = io::read_file((base / name).string());
    } catch (const DomainError&) {
      r.differing.push_back(name);
      continue;
    }
    if (it != out.files.end() && it->second == recorded) r.identical.push_back(name);
    else r.differing.push_back(name);
  }
  return r;
}

}  // namespace singscat::cli

#endif
