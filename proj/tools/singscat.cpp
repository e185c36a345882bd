#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"

namespace fs = std::filesystem;
using singscat::io::json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_domain = 2;
constexpr int exit_numeric = 3;

int default_jobs() {
  const char* env = std::getenv("SINGSCAT_JOBS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1 || v > 1024) throw singscat::DomainError("SINGSCAT_JOBS must be a positive integer");
  return static_cast<int>(v);
}

json embed_file(const std::string& path) {
  return singscat::io::parse_json_text(singscat::io::read_file(path), path);
}

template <class T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scattering on singular potentials: closed forms, radial solver, limit studies."};
  app.require_subcommand(1);
  app.set_version_flag("--version", singscat::io::tool_version);

  std::string command;
  json inputs = json::object();
  std::optional<std::string> out_dir;
  int jobs = 1;

  double alpha = 0, s = 0, alpha2 = 0, energy = 1.0, c6 = 0, mass = 1.0;
  std::optional<double> r0, omega;
  std::string branch = "absorb", config_path, potential_path, manifest_path;
  bool numeric = false, repulsive = false;
  int nr_max = 0, level = 0, l = 0;
  std::vector<double> n_values;

  auto* length = app.add_subcommand("length", "S-wave scattering length of -alpha/r^s");
  length->add_option("--alpha", alpha, "coupling strength")->required();
  length->add_option("--s", s, "power of the singular term")->required();
  length->add_option("--branch", branch, "absorb or create")->check(CLI::IsMember({"absorb", "create"}));
  length->add_flag("--numeric", numeric, "solve the radial equation instead of the closed form");
  length->add_option("--r0", r0, "inner cut-off radius for --numeric");
  length->add_option("--omega", omega, "regulator i*omega on the coupling (square-well interior)");
  length->add_flag("--repulsive", repulsive, "use +alpha/r^s");
  length->add_option("--out-dir", out_dir, "write length.json and manifest.json here");

  auto* phase = app.add_subcommand("phase-s2", "phase shift for -(alpha2 +- i0)/r^2");
  phase->add_option("--alpha2", alpha2, "coupling, must be at least 1/4")->required();
  phase->add_option("--branch", branch, "absorb or create")->check(CLI::IsMember({"absorb", "create"}));
  phase->add_option("--energy", energy, "energy for --numeric (second run at 10x)");
  phase->add_flag("--numeric", numeric, "check energy independence with the solver");
  phase->add_option("--out-dir", out_dir, "write phase_s2.json and manifest.json here");

  auto* spectrum = app.add_subcommand("spectrum", "levels of Coulomb plus -(alpha2 +- i0)/r^2 as CSV");
  spectrum->add_option("--alpha2", alpha2, "inverse-square coupling")->required();
  spectrum->add_option("--nr-max", nr_max, "largest radial quantum number")->required();
  spectrum->add_option("--branch", branch, "absorb or create")->check(CLI::IsMember({"absorb", "create"}));
  spectrum->add_option("--out-dir", out_dir, "write spectrum.csv and manifest.json here");

  auto* sweep = app.add_subcommand("sweep", "limit study from a JSON schedule");
  sweep->add_option("--config", config_path, "limit config JSON")->required();
  sweep->add_option("--jobs", jobs, "worker threads (default: SINGSCAT_JOBS or 1)")->check(CLI::Range(1, 1024));
  sweep->add_option("--out-dir", out_dir, "output directory (default: .)");

  auto* perturb = app.add_subcommand("perturb", "level shift and width from a weak singular core");
  perturb->add_option("--potential", potential_path, "potential JSON")->required();
  perturb->add_option("--level", level, "level index, 0 = deepest")->required();
  perturb->add_option("--l", l, "angular momentum");
  perturb->add_option("--branch", branch, "branch for a real singular strength")
      ->check(CLI::IsMember({"absorb", "create"}));
  perturb->add_option("--out-dir", out_dir, "output directory (default: .)");

  auto* hhbar = app.add_subcommand("hhbar", "hydrogen-antihydrogen S-wave scattering length");
  hhbar->add_option("--c6", c6, "van der Waals constant C6")->required();
  hhbar->add_option("--mass", mass, "reduced mass");
  hhbar->add_option("--n", n_values, "principal quantum numbers for the C6 ~ n^4 table");
  hhbar->add_option("--out-dir", out_dir, "write hhbar.json and manifest.json here");

  auto* replay = app.add_subcommand("replay", "re-run a manifest and compare outputs");
  replay->add_option("--manifest", manifest_path, "manifest.json")->required();
  replay->add_option("--jobs", jobs, "worker threads")->check(CLI::Range(1, 1024));
  replay->add_option("--out-dir", out_dir, "also write regenerated outputs here");

  try {
    jobs = default_jobs();
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_domain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_domain;
  }

  try {
    auto* sub = app.get_subcommands().front();
    command = sub->get_name();
    if (sub == length) {
      inputs = json{{"alpha", alpha}, {"s", s},           {"branch", branch},        {"numeric", numeric},
                    {"r0", optional_json(r0)}, {"omega", optional_json(omega)}, {"repulsive", repulsive}};
    } else if (sub == phase) {
      inputs = json{{"alpha2", alpha2}, {"branch", branch}, {"energy", energy}, {"numeric", numeric}};
    } else if (sub == spectrum) {
      inputs = json{{"alpha2", alpha2}, {"nr_max", nr_max}, {"branch", branch}};
    } else if (sub == sweep) {
      inputs = json{{"config", embed_file(config_path)}};
      if (!out_dir) out_dir = ".";
    } else if (sub == perturb) {
      inputs = json{{"potential", embed_file(potential_path)}, {"level", level}, {"l", l}, {"branch", branch}};
      if (!out_dir) out_dir = ".";
    } else if (sub == hhbar) {
      inputs = json{{"c6", c6}, {"mass", mass}, {"n", n_values}};
    } else if (sub == replay) {
      auto r = singscat::cli::replay(manifest_path, jobs,
                                     out_dir ? std::optional<fs::path>(*out_dir) : std::nullopt);
      for (const auto& f : r.identical) std::cout << "identical " << f << "\n";
      for (const auto& f : r.differing) std::cout << "differs " << f << "\n";
      return r.ok() ? exit_ok : exit_numeric;
    }

    auto out = singscat::cli::execute(command, inputs, jobs);
    std::cout << out.text;
    if (out_dir) singscat::cli::write_outputs(command, inputs, out, *out_dir);
    return exit_ok;
  } catch (const singscat::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_domain;
  } catch (const singscat::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    for (const auto& line : e.trace()) std::cerr << "  " << line << "\n";
    return exit_numeric;
  } catch (const singscat::ConsistencyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_numeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_domain;
  }
}
