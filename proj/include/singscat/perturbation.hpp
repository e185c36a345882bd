#ifndef SINGSCAT_PERTURBATION_HPP
#define SINGSCAT_PERTURBATION_HPP

// Complex quasi-bound levels of regular + singular potentials and their
// comparison with the near-threshold shift formula.

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "singscat/closed_form.hpp"
#include "singscat/domain.hpp"
#include "singscat/errors.hpp"
#include "singscat/radial_solver.hpp"

namespace singscat {

struct LevelSearchConfig {
  double r0 = 0.0;             // inner radius; 0 picks one from z_target
  double z_target = 1e4;       // |z(r0)| of the singular term when r0 is automatic
  double match_radius = 0.0;   // 0: outer turning point of the unperturbed level
  double outer_extent = 30.0;  // outer start at match_radius + outer_extent / Re kappa
  double tolerance = 1e-11;    // relative step size at which the secant stops
  int max_iterations = 60;
  double trust_radius = 0.0;  // 0: 0.25 |E_guess|
  int scan_points = 400;
  Branch branch = Branch::absorb;  // for singular terms with real strength
  SolverConfig solver;
};

struct LevelResult {
  cplx energy;
  cplx residual;
  int iterations = 0;
  std::vector<std::string> trace;
};

struct ResonanceResult {
  cplx energy;
  double unperturbed_energy = 0.0;
  cplx predicted_shift;
  cplx measured_shift;
  double omega_n = 0.0;
  double momentum = 0.0;          // p averaged over the inner quarter of the allowed region
  double regime_parameter = 0.0;  // p alpha_s^(1/(s-2))
  double relative_error = 0.0;    // |measured - predicted| / |measured|
  int level_index = 0;
  std::vector<Warning> warnings;

  bool has_warning(const std::string& code) const {
    for (const auto& w : warnings)
      if (w.code == code) return true;
    return false;
  }
};

namespace detail {

struct LevelGeometry {
  double r0;
  double r_match;
};

inline RadialProblem zero_energy_problem(const PotentialSpec& potential, int l) {
  RadialProblem prob;
  prob.l = l;
  prob.potential = potential;
  return prob;
}

inline std::optional<std::size_t> singular_index(const PotentialSpec& pot) {
  auto i = pot.dominant_index();
  if (i && pot.terms[*i].exponent > 2.0) return i;
  return std::nullopt;
}

inline double choose_r0(const PotentialSpec& pot, const LevelSearchConfig& cfg) {
  if (cfg.r0 > 0.0) return cfg.r0;
  double r0 = 1e-3;
  if (auto i = singular_index(pot)) r0 = std::min(r0, r0_for_z_modulus(cfg.z_target, pot.terms[*i].strength, pot.terms[*i].exponent));
  return r0;
}

// Inner log-derivative at r0 for complex E.
inline cplx inner_start(const RadialProblem& prob, double r0, cplx e, Branch branch) {
  if (auto i = singular_index(prob.potential)) {
    cplx p = std::sqrt(e - prob.effective_potential(r0));
    Branch b = branch;
    double im = prob.potential.terms[*i].strength.imag();
    if (im > 0.0) b = Branch::absorb;
    if (im < 0.0) b = Branch::create;
    return b == Branch::absorb ? cplx{0.0, -1.0} * p : cplx{0.0, 1.0} * p;
  }
  if (prob.l > 0) return (prob.l + 1.0) / r0;
  cplx u = prob.scale() * prob.potential.value(r0);
  cplx p = std::sqrt(e - u);
  cplx x = p * r0;
  if (std::abs(x) < 1e-6) return 1.0 / r0 - p * p * r0 / 3.0;
  return p * stable_cot(x);
}

struct MatchValues {
  LogDerivativeState in, out;
};

inline MatchValues match_values(const RadialProblem& prob, const LevelGeometry& g, cplx e, const LevelSearchConfig& cfg) {
  cplx kappa = std::sqrt(-e);
  if (kappa.real() <= 0.0) throw DomainError("level search needs Re sqrt(-E) > 0 (bound-state side)");
  SolverConfig sc = cfg.solver;
  sc.omega = 0.0;
  double rin[] = {g.r_match};
  auto in = propagate_to_energy(inner_start(prob, g.r0, e, cfg.branch), g.r0, rin, sc, prob, e).front();
  double r_out = g.r_match + cfg.outer_extent / kappa.real();
  cplx seed = -kappa + prob.scale() * prob.potential.coulomb_strength / (2.0 * kappa * r_out);
  auto out = propagate_to_energy(seed, r_out, rin, sc, prob, e).front();
  return {in, out};
}

inline cplx analytic_mismatch(const MatchValues& m) { return m.in.y - m.out.y; }

// Pole-free real mismatch: Wronskian of the normalized pairs (phi, phi'/scale).
inline double normalized_mismatch(const MatchValues& m, double scale) {
  auto norm = [&](const LogDerivativeState& s) {
    cplx phi = s.representation == Representation::linear_pair ? s.phi : cplx{1.0};
    cplx dphi = s.representation == Representation::linear_pair ? s.dphi : s.y;
    double n = std::sqrt(std::norm(phi) + std::norm(dphi) / (scale * scale));
    return std::pair<double, double>{phi.real() / n, dphi.real() / (n * scale)};
  };
  auto [a, da] = norm(m.in);
  auto [b, db] = norm(m.out);
  return a * db - da * b;
}

inline LevelGeometry geometry(const PotentialSpec& potential, int l, double e_ref, const LevelSearchConfig& cfg) {
  LevelGeometry g{};
  g.r0 = choose_r0(potential, cfg);
  if (cfg.match_radius > 0.0) {
    g.r_match = cfg.match_radius;
  } else {
    PotentialSpec pot = potential.without_singular();
    if (l > 0) pot.terms.push_back({-static_cast<double>(l) * (l + 1), 2.0, std::nullopt});
    g.r_match = classically_allowed_region(pot, e_ref).outer;
  }
  if (!(g.r_match > g.r0)) throw DomainError("match radius must exceed r0");
  return g;
}

}  // namespace detail

/// Complex root of y_in(r_m) - y_out(r_m) by secant iteration from E_guess.
inline LevelResult find_level(const PotentialSpec& potential, int l, cplx e_guess, const LevelSearchConfig& config = {}) {
  if (l < 0) throw DomainError("partial wave must be non-negative");
  if (!(e_guess.real() < 0.0)) throw DomainError("level search needs Re E_guess < 0");
  auto prob = detail::zero_energy_problem(potential, l);
  auto v = validate(prob.potential);
  if (!v.empty()) throw DomainError("invalid potential: " + v.front().field + ": " + v.front().rule);
  detail::LevelGeometry g;
  try {
    g = detail::geometry(potential, l, e_guess.real(), config);
  } catch (const DomainError& e) {
    throw SearchError(std::string("no matching radius for E_guess: ") + e.what());
  }
  const double trust = config.trust_radius > 0.0 ? config.trust_radius : 0.25 * std::abs(e_guess);

  LevelResult res;
  auto mismatch = [&](cplx e) { return detail::analytic_mismatch(detail::match_values(prob, g, e, config)); };
  cplx e0 = e_guess, e1 = e_guess * (1.0 + 1e-4) + cplx{0.0, -1e-6 * std::abs(e_guess)};
  cplx d0 = mismatch(e0), d1 = mismatch(e1);
  for (int it = 1; it <= config.max_iterations; ++it) {
    std::ostringstream os;
    os.precision(17);
    os << "iter " << it << " E=" << e1 << " D=" << d1;
    res.trace.push_back(os.str());
    if (d1 == d0) break;
    cplx e2 = e1 - d1 * (e1 - e0) / (d1 - d0);
    if (!std::isfinite(std::abs(e2))) break;
    if (std::abs(e2 - e_guess) > trust) {
      res.trace.push_back("step left trust region");
      throw SearchError("level search left its trust region around E_guess", res.trace);
    }
    if (e2.real() >= 0.0) throw SearchError("level search crossed into the continuum", res.trace);
    e0 = e1;
    d0 = d1;
    e1 = e2;
    d1 = mismatch(e1);
    res.iterations = it;
    if (std::abs(e1 - e0) <= config.tolerance * std::abs(e1)) {
      res.energy = e1;
      res.residual = d1;
      return res;
    }
  }
  throw SearchError("level search did not converge", res.trace);
}

/// Real bound levels of a potential without singular core, deepest first.
inline std::vector<double> real_levels(const PotentialSpec& potential, int l, const LevelSearchConfig& config = {}) {
  if (detail::singular_index(potential)) throw DomainError("real level scan needs a potential without singular core");
  PotentialSpec eff = potential;
  if (l > 0) eff.terms.push_back({-static_cast<double>(l) * (l + 1), 2.0, std::nullopt});
  double u_min = 0.0;
  for (int i = 0; i <= 4000; ++i) {
    double r = 1e-4 * std::pow(1e8, i / 4000.0);
    u_min = std::min(u_min, eff.value(r).real());
  }
  for (double b : eff.breakpoints())
    for (double d : {-1e-9, 1e-9}) u_min = std::min(u_min, eff.value(b * (1.0 + d)).real());
  if (!(u_min < 0.0)) return {};
  auto prob = detail::zero_energy_problem(potential, l);

  auto w_at = [&](double e) {
    auto g = detail::geometry(potential, l, e, config);
    double scale = std::sqrt(-u_min);
    return detail::normalized_mismatch(detail::match_values(prob, g, e, config), scale);
  };

  const int n = std::max(20, config.scan_points);
  const double e_lo = u_min * (1.0 - 1e-6), e_hi = u_min * 1e-6;
  std::vector<double> es, ws;
  for (int i = 0; i <= n; ++i) {
    double e = e_lo + (e_hi - e_lo) * i / n;
    try {
      double w = w_at(e);
      es.push_back(e);
      ws.push_back(w);
    } catch (const DomainError&) {
    }
  }
  std::vector<double> levels;
  for (std::size_t i = 1; i < es.size(); ++i) {
    if ((ws[i - 1] > 0.0) == (ws[i] > 0.0)) continue;
    double a = es[i - 1], b = es[i], wa = ws[i - 1];
    for (int it = 0; it < 200 && b - a > 1e-15 * std::abs(a); ++it) {
      double m = 0.5 * (a + b), wm = w_at(m);
      if ((wm > 0.0) == (wa > 0.0)) {
        a = m;
        wa = wm;
      } else {
        b = m;
      }
    }
    double root = 0.5 * (a + b);
    // A sign flip from a node of the inner solution leaves |W| of order one.
    if (std::abs(w_at(root)) < 1e-6) levels.push_back(root);
  }
  return levels;
}

/// Measured complex shift of a level caused by the singular term versus -delta_s * omega_n.
inline ResonanceResult compare_with_theory(const PotentialSpec& potential, int l, int level_index,
                                           const LevelSearchConfig& config = {}) {
  if (level_index < 0) throw DomainError("level index must be non-negative");
  PotentialSpec regular = potential.without_singular();
  auto levels = real_levels(regular, l, config);
  if (level_index >= static_cast<int>(levels.size()))
    throw DomainError("level index " + std::to_string(level_index) + " out of range: " + std::to_string(levels.size()) +
                      " bound levels");
  ResonanceResult out;
  out.level_index = level_index;
  out.unperturbed_energy = levels[static_cast<std::size_t>(level_index)];
  const double e0 = out.unperturbed_energy;

  PotentialSpec eff = regular;
  if (l > 0) eff.terms.push_back({-static_cast<double>(l) * (l + 1), 2.0, std::nullopt});
  out.omega_n = semiclassical_frequency(eff, e0);
  auto tp = classically_allowed_region(eff, e0);
  {
    const int m = 256;
    double lo = tp.inner, hi = tp.inner + 0.25 * (tp.outer - tp.inner), sum = 0.0;
    for (int i = 0; i < m; ++i) {
      double r = lo + (hi - lo) * (i + 0.5) / m;
      sum += std::sqrt(std::max(0.0, e0 - eff.value(r).real()));
    }
    out.momentum = sum / m;
  }

  auto si = detail::singular_index(potential);
  if (!si || potential.terms[*si].strength == cplx{}) {
    out.energy = e0;
    out.measured_shift = 0.0;
    out.predicted_shift = 0.0;
    return out;
  }
  const PowerTerm& sing = potential.terms[*si];
  double alpha_s = sing.strength.real();
  double s = sing.exponent;
  Branch branch = sing.strength.imag() > 0.0 ? Branch::absorb : (sing.strength.imag() < 0.0 ? Branch::create : config.branch);

  LevelSearchConfig cfg = config;
  if (cfg.match_radius <= 0.0) cfg.match_radius = tp.outer;
  if (cfg.trust_radius <= 0.0) cfg.trust_radius = 0.5 * std::abs(e0);
  cfg.branch = branch;
  auto found = find_level(potential, l, e0, cfg);
  out.energy = found.energy;
  out.measured_shift = found.energy - e0;

  out.regime_parameter = out.momentum * std::pow(std::abs(alpha_s), 1.0 / (s - 2.0));
  if (out.regime_parameter > 0.1)
    out.warnings.push_back({"perturbative_regime", "p*alpha_s^(1/(s-2)) = " + std::to_string(out.regime_parameter) + " > 0.1"});
  try {
    auto delta = perturbative_phase_constant_background(out.momentum, alpha_s, s, l, regular.alpha2().real(), branch);
    for (auto& w : delta.warnings) out.warnings.push_back(w);
    out.predicted_shift = -delta.value * out.omega_n;
  } catch (const DomainError& e) {
    out.warnings.push_back({"no_prediction", e.what()});
    out.predicted_shift = cplx{std::nan(""), std::nan("")};
  }
  out.relative_error = std::abs(out.measured_shift - out.predicted_shift) / std::abs(out.measured_shift);
  return out;
}

}  // namespace singscat

#endif
