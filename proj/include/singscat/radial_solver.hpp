#ifndef SINGSCAT_RADIAL_SOLVER_HPP
#define SINGSCAT_RADIAL_SOLVER_HPP

// Numerical radial solver for complex singular potentials.
//
// The solution is started at a small cut-off radius r0 from one of several
// boundary conditions and carried outward as a log-derivative y = Phi'/Phi
// (Riccati form y' = U_eff - E - y^2). Close to nodes of Phi the solver falls
// back to the linear pair (Phi, Phi') and returns to Riccati form once the
// log-derivative is moderate again.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "singscat/domain.hpp"
#include "singscat/errors.hpp"
#include "singscat/ode.hpp"
#include "singscat/specfun.hpp"

namespace singscat {

enum class BoundaryMode { square_well_interior, full_absorption, partial_absorption_s2, creation };

inline const char* to_string(BoundaryMode m) {
  switch (m) {
    case BoundaryMode::square_well_interior: return "square_well_interior";
    case BoundaryMode::full_absorption: return "full_absorption";
    case BoundaryMode::partial_absorption_s2: return "partial_absorption_s2";
    case BoundaryMode::creation: return "creation";
  }
  return "?";
}

struct SolverConfig {
  double r0 = 1e-2;
  double omega = 0.0;  // added to Im alpha of the most singular term
  BoundaryMode boundary_mode = BoundaryMode::full_absorption;
  double match_radius = 0.0;  // 0 selects a default from the potential scale
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  long max_steps = 5'000'000;
  Branch branch = Branch::absorb;     // side of the cut for omega = 0 and the s = 2 boundary
  double interior_depth_scale = 1.0;  // multiplies the frozen interior well depth
  double step_factor = 0.05;          // step bound h <= step_factor / |p_eff(r)|
};

enum class Representation { riccati, linear_pair };

struct LogDerivativeState {
  double r = 0.0;
  cplx y;  // Phi'/Phi
  Representation representation = Representation::riccati;
  cplx phi{1.0, 0.0};  // valid in linear_pair representation, normalized
  cplx dphi;
  int renormalizations = 0;
  int switches = 0;
  long steps = 0;
};

struct Provenance {
  double r0 = 0.0;
  double omega = 0.0;
  BoundaryMode boundary_mode = BoundaryMode::full_absorption;
  double match_radius = 0.0;
  double extrapolation_residual = 0.0;
  long steps = 0;
  int switches = 0;
  int renormalizations = 0;
  std::vector<Warning> warnings;
};

struct ScatteringObservables {
  cplx scattering_length;
  cplx phase_shift;
  cplx s_matrix{1.0, 0.0};
  double s_matrix_modulus = 1.0;
  Branch branch = Branch::absorb;
  Provenance provenance;
};

/// Problem with i*omega added to the strength of its most singular term.
inline RadialProblem with_omega(const RadialProblem& problem, double omega) {
  if (omega == 0.0) return problem;
  RadialProblem out = problem;
  auto i = out.potential.dominant_index();
  if (!i) throw DomainError("omega needs a power-law term to act on");
  out.potential.terms[*i].strength += cplx{0.0, omega};
  return out;
}

inline Branch run_branch(const SolverConfig& config) {
  if (config.boundary_mode == BoundaryMode::creation) return Branch::create;
  if (config.boundary_mode == BoundaryMode::full_absorption) return Branch::absorb;
  if (config.omega > 0.0) return Branch::absorb;
  if (config.omega < 0.0) return Branch::create;
  return config.branch;
}

/// Im z(r0) = (2/(s-2)) Im sqrt(alpha + i omega) r0^(-(s-2)/2) for the most singular term.
inline double im_z0(double r0, cplx alpha, double omega, double s) {
  if (!(s > 2.0)) throw DomainError("Im z(r0) is defined for s > 2");
  return 2.0 / (s - 2.0) * std::sqrt(alpha + cplx{0.0, omega}).imag() * std::pow(r0, -(s - 2.0) / 2.0);
}

inline double im_z0(const SolverConfig& config, const RadialProblem& problem) {
  auto i = problem.potential.dominant_index();
  if (!i) throw DomainError("no singular term");
  const auto& t = problem.potential.terms[*i];
  return im_z0(config.r0, problem.scale() * t.strength, problem.scale() * config.omega, t.exponent);
}

/// Largest r0 with Im z(r0) >= target.
inline double r0_for_im_z(double target, cplx alpha, double omega, double s) {
  double im_root = std::sqrt(alpha + cplx{0.0, omega}).imag();
  if (!(im_root > 0.0)) throw DomainError("Im z target unattainable: Im sqrt(alpha + i omega) <= 0");
  return std::pow(2.0 * im_root / ((s - 2.0) * target), 2.0 / (s - 2.0));
}

/// Largest r0 with |z(r0)| = (2/(s-2)) sqrt|alpha| r0^(-(s-2)/2) >= target.
inline double r0_for_z_modulus(double target, cplx alpha, double s) {
  if (!(s > 2.0)) throw DomainError("|z(r0)| is defined for s > 2");
  if (alpha == cplx{}) throw DomainError("|z(r0)| needs a non-zero coupling");
  return std::pow(2.0 * std::sqrt(std::abs(alpha)) / ((s - 2.0) * target), 2.0 / (s - 2.0));
}

namespace detail {

// cot(x) evaluated through exp(+-2ix) on the decaying side.
inline cplx stable_cot(cplx x) {
  const cplx i{0.0, 1.0};
  if (x.imag() >= 0.0) {
    cplx e = std::exp(2.0 * i * x);
    return i * (e + 1.0) / (e - 1.0);
  }
  cplx e = std::exp(-2.0 * i * x);
  return i * (1.0 + e) / (1.0 - e);
}

}  // namespace detail

struct InteriorValue {
  cplx y;
  double r0;
  std::vector<Warning> warnings;
};

/// Log-derivative at r0 of the solution inside a square well whose depth is
/// the full potential frozen at r0: y = p cot(p r0).
inline InteriorValue interior_log_derivative(const SolverConfig& config, const RadialProblem& problem) {
  if (!(config.r0 > 0.0)) throw DomainError("cut-off radius must be positive");
  RadialProblem prob = with_omega(problem, config.omega);
  InteriorValue out{{}, config.r0, {}};
  for (int attempt = 0; attempt < 8; ++attempt) {
    double r0 = out.r0;
    cplx u = prob.centrifugal() / (r0 * r0) + prob.scale() * config.interior_depth_scale * prob.potential.value(r0);
    cplx p = std::sqrt(prob.k2() - u);
    cplx x = p * r0;
    if (std::abs(x) < 1e-6) {
      out.y = 1.0 / r0 - p * p * r0 / 3.0;
      return out;
    }
    cplx e = std::exp(cplx{0.0, 2.0} * (x.imag() >= 0.0 ? x : -x));
    if (std::abs(e - 1.0) > 1e-10) {
      out.y = p * detail::stable_cot(x);
      return out;
    }
    out.r0 = r0 * (1.0 + 1e-9);
    out.warnings.push_back({"cot_pole", "p*r0 at a cot pole; r0 perturbed"});
  }
  throw DomainError("interior log-derivative stuck at a cot pole");
}

namespace detail {

inline cplx s2_index(const RadialProblem& prob, Branch branch) {
  double lh = prob.l + 0.5;
  cplx nu2 = cplx{lh * lh, 0.0} - prob.effective_alpha2();
  if (nu2.imag() == 0.0) {
    if (nu2.real() >= 0.0) return std::sqrt(nu2.real());
    double m = std::sqrt(-nu2.real());
    return {0.0, branch == Branch::absorb ? -m : m};
  }
  return std::sqrt(nu2);
}

}  // namespace detail

/// Absorbing / creating boundary log-derivative at r0.
/// s > 2: y = -+ i p_eff(r0). s = 2: y = (1/2 + nu)/r0 with the branch-selected index.
inline cplx absorption_boundary(const SolverConfig& config, const RadialProblem& problem) {
  if (config.boundary_mode == BoundaryMode::square_well_interior)
    throw DomainError("absorption_boundary called with square_well_interior mode");
  if (!(config.r0 > 0.0)) throw DomainError("cut-off radius must be positive");
  RadialProblem prob = with_omega(problem, config.omega);
  double s = prob.potential.dominant_exponent();
  if (s < 2.0) throw DomainError("absorbing boundary needs a singular term with s >= 2");
  Branch branch = run_branch(config);
  if (s == 2.0) return (0.5 + detail::s2_index(prob, branch)) / config.r0;
  if (config.boundary_mode == BoundaryMode::partial_absorption_s2)
    throw DomainError("partial_absorption_s2 requires the most singular term to be 1/r^2");
  cplx p = effective_momentum(config.r0, prob);
  return branch == Branch::absorb ? cplx{0.0, -1.0} * p : cplx{0.0, 1.0} * p;
}

namespace detail {

class Propagator {
public:
  Propagator(const RadialProblem& prob, const SolverConfig& cfg, cplx k2) : prob_(prob), cfg_(cfg), k2_(k2) {}

  double local_scale(double r) const { return std::sqrt(std::abs(k2_ - prob_.effective_potential(r))) + 1.0 / r; }

  double step_cap(double r) const {
    double p = std::sqrt(std::abs(k2_ - prob_.effective_potential(r)));
    return p > 0.0 ? cfg_.step_factor / p : std::numeric_limits<double>::infinity();
  }

  /// Integrate from `start` through each radius in `targets` (monotone).
  std::vector<LogDerivativeState> run(double r_start, cplx y0, std::span<const double> targets) {
    std::vector<LogDerivativeState> out;
    LogDerivativeState st;
    st.r = r_start;
    st.y = y0;
    double h = std::min(step_cap(r_start), 1e-3 * r_start);
    if (!std::isfinite(h) || h <= 0.0) h = 1e-3 * r_start;
    ode::Counters counters;
    auto bps = prob_.potential.breakpoints();
    for (double target : targets) {
      std::vector<double> stops;
      for (double b : bps)
        if ((b - st.r) * (target - b) > 0.0) stops.push_back(b);
      std::sort(stops.begin(), stops.end(), [&](double a, double b) { return std::abs(a - st.r) < std::abs(b - st.r); });
      stops.push_back(target);
      for (double s : stops) advance(st, s, h, counters);
      st.steps = counters.accepted + counters.rejected;
      out.push_back(st);
    }
    return out;
  }

private:
  static constexpr double enter_pair = 30.0;
  static constexpr double leave_pair = 3.0;
  static constexpr double renorm_limit = 1e150;

  void advance(LogDerivativeState& st, double r_end, double& h, ode::Counters& counters) {
    ode::StepControl ctl{cfg_.rel_tol, cfg_.abs_tol, cfg_.max_steps};
    auto cap = [&](double r) { return step_cap(r); };
    while (st.r != r_end) {
      if (st.representation == Representation::riccati) {
        ode::State<1> y{st.y};
        ode::DormandPrince<1> dp(ctl);
        auto rhs = [&](double r, const ode::State<1>& v) -> ode::State<1> {
          return {prob_.effective_potential(r) - k2_ - v[0] * v[0]};
        };
        auto stop = [&](double r, const ode::State<1>& v) { return std::abs(v[0]) > enter_pair * local_scale(r); };
        auto res = dp.advance(rhs, st.r, y, r_end, h, cap, stop, counters);
        st.y = y[0];
        if (res == ode::Outcome::stopped) {
          // Enter the linear pair normalized so that max(|phi|, |phi'|/scale) = 1.
          double sc = local_scale(st.r);
          if (std::abs(st.y) > sc) {
            st.phi = sc / st.y;
            st.dphi = sc;
          } else {
            st.phi = 1.0;
            st.dphi = st.y;
          }
          st.representation = Representation::linear_pair;
          ++st.switches;
        }
      } else {
        ode::State<2> v{st.phi, st.dphi};
        ode::DormandPrince<2> dp(ctl);
        auto rhs = [&](double r, const ode::State<2>& w) -> ode::State<2> {
          return {w[1], (prob_.effective_potential(r) - k2_) * w[0]};
        };
        bool leave = false;
        auto stop = [&](double r, const ode::State<2>& w) {
          double sc = local_scale(r);
          if (std::abs(w[0]) + std::abs(w[1]) / sc > renorm_limit) return true;
          if (std::abs(w[1]) < leave_pair * sc * std::abs(w[0])) {
            leave = true;
            return true;
          }
          return false;
        };
        auto res = dp.advance(rhs, st.r, v, r_end, h, cap, stop, counters);
        double sc = local_scale(st.r);
        double norm = std::max(std::abs(v[0]), std::abs(v[1]) / sc);
        if (norm > 0.0) {
          st.phi = v[0] / norm;
          st.dphi = v[1] / norm;
          if (norm > 1e100 || norm < 1e-100) ++st.renormalizations;
        }
        if (st.phi != cplx{}) st.y = st.dphi / st.phi;
        else st.y = cplx{std::numeric_limits<double>::infinity(), 0.0};
        if (res == ode::Outcome::stopped && leave) {
          st.representation = Representation::riccati;
          ++st.switches;
        }
      }
    }
  }

  const RadialProblem& prob_;
  SolverConfig cfg_;
  cplx k2_;
};

}  // namespace detail

/// Carry y0 from r_start through the given radii (all on one side of r_start,
/// monotone). Works outward and inward.
inline std::vector<LogDerivativeState> propagate_to(cplx y0, double r_start, std::span<const double> radii,
                                                    const SolverConfig& config, const RadialProblem& problem) {
  if (!std::isfinite(y0.real()) || !std::isfinite(y0.imag())) throw DomainError("initial log-derivative not finite");
  if (!(r_start > 0.0)) throw DomainError("start radius must be positive");
  RadialProblem prob = with_omega(problem, config.omega);
  detail::Propagator prop(prob, config, prob.k2());
  return prop.run(r_start, y0, radii);
}

/// As propagate_to, at a complex energy (in 2M = 1 units, E = k^2).
inline std::vector<LogDerivativeState> propagate_to_energy(cplx y0, double r_start, std::span<const double> radii,
                                                           const SolverConfig& config, const RadialProblem& problem,
                                                           cplx k2) {
  if (!std::isfinite(y0.real()) || !std::isfinite(y0.imag())) throw DomainError("initial log-derivative not finite");
  if (!(r_start > 0.0)) throw DomainError("start radius must be positive");
  RadialProblem prob = with_omega(problem, config.omega);
  detail::Propagator prop(prob, config, k2);
  return prop.run(r_start, y0, radii);
}

/// Carry y0 from config.r0 to config.match_radius.
inline LogDerivativeState propagate(cplx y0, const SolverConfig& config, const RadialProblem& problem) {
  if (!(config.r0 < config.match_radius)) throw DomainError("r0 must be below the match radius");
  double target[] = {config.match_radius};
  return propagate_to(y0, config.r0, target, config, problem).front();
}

/// Zero-energy scattering length a(R) = R - 1/y(R). With several states at
/// R, 2R, 4R, ... the power-law tail corrections R^-(s-3), R^-(s-2), ... are
/// removed by Richardson extrapolation.
inline cplx extract_scattering_length(std::span<const LogDerivativeState> states, const RadialProblem& problem,
                                      double abs_tol = 1e-12, double* residual = nullptr) {
  if (states.empty()) throw DomainError("no states to extract from");
  if (problem.energy != 0.0 || problem.l != 0) throw DomainError("scattering length extraction needs E = 0 and l = 0");
  std::vector<cplx> a;
  for (const auto& st : states) {
    if (std::abs(st.y) < 10.0 * abs_tol) throw DomainError("ill-conditioned extraction: y(R) ~ 0");
    a.push_back(st.r - 1.0 / st.y);
  }
  auto tail = problem.potential.tail_exponent();
  if (tail && *tail <= 3.0) throw DomainError("scattering length undefined for s ≤ 3");
  if (residual) *residual = a.size() > 1 ? std::abs(a.back() - a[a.size() - 2]) : 0.0;
  if (!tail || a.size() == 1) return a.back();
  // Richardson table for radii in ratio 2 with error orders tail-3, tail-2, ...
  std::vector<cplx> col = a;
  for (std::size_t j = 1; j < a.size(); ++j) {
    double order = *tail - 3.0 + static_cast<double>(j - 1);
    double f = std::pow(2.0, order) - 1.0;
    std::vector<cplx> next;
    for (std::size_t i = 1; i < col.size(); ++i) next.push_back(col[i] + (col[i] - col[i - 1]) / f);
    if (residual) *residual = std::abs(next.back() - col.back());
    col = std::move(next);
  }
  return col.back();
}

inline cplx extract_scattering_length(const LogDerivativeState& state, const RadialProblem& problem,
                                      double abs_tol = 1e-12) {
  return extract_scattering_length(std::span<const LogDerivativeState>(&state, 1), problem, abs_tol);
}

/// Match y(R) to incoming/outgoing waves of the long-range 1/r^2 channel and
/// return the phase shift relative to free waves of partial wave l.
inline ScatteringObservables extract_phase_and_smatrix(const LogDerivativeState& state, const RadialProblem& problem,
                                                       double tail_tol = 1e-10) {
  if (!(problem.energy > 0.0)) throw DomainError("phase extraction needs E > 0");
  if (problem.potential.coulomb_strength != 0.0) throw DomainError("Coulomb tail: phase extraction at E > 0 unsupported");
  const double k = problem.momentum();
  const double R = state.r;
  double tail = std::abs(problem.scale() * problem.potential.short_range_value(R)) / problem.k2();
  if (tail > tail_tol) throw DomainError("potential not negligible at the match radius; increase R");
  double lh = problem.l + 0.5;
  cplx nu = std::sqrt(cplx{lh * lh, 0.0} - problem.effective_alpha2());
  auto hm = riccati_hankel_asymptotic(nu, k * R, -1);
  auto hp = riccati_hankel_asymptotic(nu, k * R, +1);
  cplx num = k * hm.derivative - state.y * hm.value;
  cplx den = k * hp.derivative - state.y * hp.value;
  if (std::abs(den) < 1e-14 * (std::abs(num) + 1e-300)) throw DomainError("matching matrix singular; increase R");
  cplx s_lambda = num / den;
  cplx lambda = nu - 0.5;
  cplx s = s_lambda * std::exp(cplx{0.0, pi} * (static_cast<double>(problem.l) - lambda));
  ScatteringObservables out;
  out.s_matrix = s;
  out.s_matrix_modulus = std::abs(s);
  out.phase_shift = std::log(s) / cplx{0.0, 2.0};
  out.scattering_length = -std::tan(out.phase_shift) / std::pow(k, 2.0 * problem.l + 1.0);
  out.branch = out.s_matrix_modulus <= 1.0 ? Branch::absorb : Branch::create;
  return out;
}

namespace detail {

inline double length_scale(const RadialProblem& prob) {
  double L = 1.0;
  for (const auto& t : prob.potential.terms)
    if (t.exponent > 2.0 && t.strength != cplx{})
      L = std::max(L, std::pow(prob.scale() * std::abs(t.strength), 1.0 / (t.exponent - 2.0)));
  if (prob.potential.table) L = std::max(L, prob.potential.table->back());
  return L;
}

}  // namespace detail

/// Boundary value at r0 for the configured mode.
inline InteriorValue boundary_value(const SolverConfig& config, const RadialProblem& problem) {
  if (config.boundary_mode == BoundaryMode::square_well_interior) return interior_log_derivative(config, problem);
  return {absorption_boundary(config, problem), config.r0, {}};
}

/// End-to-end observable: boundary at r0, propagation, extraction.
/// E = 0 yields the scattering length; E > 0 yields phase shift and S-matrix.
inline ScatteringObservables solve(const RadialProblem& problem, const SolverConfig& config) {
  require_valid(problem);
  if (!(config.r0 > 0.0)) throw DomainError("cut-off radius must be positive");
  auto start = boundary_value(config, problem);
  SolverConfig cfg = config;
  cfg.r0 = start.r0;

  ScatteringObservables out;
  Provenance prov;
  prov.r0 = cfg.r0;
  prov.omega = cfg.omega;
  prov.boundary_mode = cfg.boundary_mode;
  prov.warnings = start.warnings;

  if (problem.energy == 0.0) {
    if (problem.l != 0) throw DomainError("zero-energy extraction is implemented for l = 0");
    if (problem.potential.coulomb_strength != 0.0) throw DomainError("Coulomb tail: scattering length undefined");
    auto tail = problem.potential.tail_exponent();
    if (tail && *tail <= 3.0) throw DomainError("scattering length undefined for s ≤ 3");
    double R = cfg.match_radius > 0.0 ? cfg.match_radius : 50.0 * detail::length_scale(problem);
    R = std::max(R, 10.0 * cfg.r0);
    std::vector<double> radii{R, 2 * R, 4 * R, 8 * R};
    auto states = propagate_to(start.y, cfg.r0, radii, cfg, problem);
    double residual = 0.0;
    out.scattering_length = extract_scattering_length(states, problem, cfg.abs_tol, &residual);
    out.branch = run_branch(cfg);
    prov.match_radius = R;
    prov.extrapolation_residual = residual;
    const auto& last = states.back();
    prov.steps = last.steps;
    prov.switches = last.switches;
    prov.renormalizations = last.renormalizations;
  } else {
    const double k = problem.momentum();
    double lh = problem.l + 0.5;
    double nu_abs = std::abs(std::sqrt(cplx{lh * lh, 0.0} - problem.effective_alpha2()));
    double R = cfg.match_radius > 0.0 ? cfg.match_radius : std::max(50.0 * detail::length_scale(problem), 10.0 / k);
    R = std::max({R, 10.0 * cfg.r0, (30.0 + 2.0 * nu_abs * nu_abs) / k});
    if (problem.potential.coulomb_strength != 0.0) throw DomainError("Coulomb tail: phase extraction at E > 0 unsupported");
    auto negligible = [&](double r) {
      return std::abs(problem.scale() * problem.potential.short_range_value(r)) / problem.k2() <= cfg.rel_tol;
    };
    int guard = 0;
    while (!negligible(R)) {
      R *= 1.5;
      if (++guard > 120) throw DomainError("potential not negligible at any feasible match radius");
    }
    auto states = propagate_to(start.y, cfg.r0, std::span<const double>(&R, 1), cfg, problem);
    out = extract_phase_and_smatrix(states.front(), problem, cfg.rel_tol);
    out.branch = run_branch(cfg);
    prov.match_radius = R;
    prov.steps = states.front().steps;
    prov.switches = states.front().switches;
    prov.renormalizations = states.front().renormalizations;
  }
  out.provenance = std::move(prov);
  return out;
}

}  // namespace singscat

#endif
