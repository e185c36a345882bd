#ifndef SINGSCAT_LIMIT_LAB_HPP
#define SINGSCAT_LIMIT_LAB_HPP

// Regularization-limit experiments: r0 -> 0 at fixed omega, then omega -> 0.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "singscat/domain.hpp"
#include "singscat/errors.hpp"
#include "singscat/radial_solver.hpp"

namespace singscat {

struct GeometricSequence {
  double start = 1.0;
  double ratio = 0.5;
  int count = 8;

  std::vector<double> values() const {
    if (!(start > 0.0) || !std::isfinite(start)) throw DomainError("sequence start must be positive");
    if (!(ratio > 0.0 && ratio < 1.0)) throw DomainError("sequence ratio must lie in (0, 1)");
    if (count < 1) throw DomainError("sequence count must be positive");
    std::vector<double> v;
    for (int i = 0; i < count; ++i) v.push_back(start * std::pow(ratio, i));
    return v;
  }
};

enum class Verdict { converged, oscillatory, diverged };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::converged: return "converged";
    case Verdict::oscillatory: return "oscillatory";
    case Verdict::diverged: return "diverged";
  }
  return "?";
}

/// Ordered mode (default): omega runs over omega_sequence and r0 is chosen
/// from im_z_target at each step. With r0_sequence set, omega is held at
/// omega_sequence.start (or 0 when fixed_omega says so) and r0 runs instead.
struct LimitSchedule {
  double im_z_target = 20.0;
  GeometricSequence omega_sequence{0.5, 0.5, 10};
  std::optional<GeometricSequence> r0_sequence;
  std::optional<double> fixed_omega;
  SolverConfig base;
  double tolerance = 1e-6;  // relative spread of the last three (extrapolated) values
  int extrapolation_points = 4;
};

struct LimitSample {
  int step_index = 0;
  double r0 = 0.0;
  double omega = 0.0;
  cplx observable;
  std::optional<std::string> failure;
};

struct LimitReport {
  std::vector<LimitSample> samples;
  std::vector<cplx> extrapolants;  // omega -> 0 estimates, ordered mode only
  cplx extrapolated;
  double fitted_rate = 0.0;
  double spread = 0.0;
  Verdict verdict = Verdict::diverged;
  bool ordered = true;
};

namespace detail {

inline cplx observable_of(const ScatteringObservables& o, const RadialProblem& problem) {
  return problem.energy == 0.0 ? o.scattering_length : o.s_matrix;
}

// Polynomial extrapolation to x = 0 through the given points (Neville).
inline cplx extrapolate_to_zero(const std::vector<double>& x, const std::vector<cplx>& y) {
  std::vector<cplx> p = y;
  const std::size_t n = x.size();
  for (std::size_t m = 1; m < n; ++m)
    for (std::size_t i = 0; i + m < n; ++i) p[i] = (x[i + m] * p[i] - x[i] * p[i + 1]) / (x[i + m] - x[i]);
  return p[0];
}

inline int sign_changes(const std::vector<double>& v) {
  int changes = 0, last = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    double d = v[i] - v[i - 1];
    int sg = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
    if (sg != 0 && last != 0 && sg != last) ++changes;
    if (sg != 0) last = sg;
  }
  return changes;
}

inline bool oscillates(const std::vector<cplx>& seq) {
  if (seq.size() < 4) return false;
  std::vector<cplx> tail(seq.begin() + static_cast<long>(seq.size() / 2), seq.end());
  std::vector<double> re, im, arg;
  for (const auto& z : tail) {
    re.push_back(z.real());
    im.push_back(z.imag());
    arg.push_back(std::arg(z));
  }
  return sign_changes(re) >= 2 || sign_changes(im) >= 2 || sign_changes(arg) >= 2;
}

inline double relative_spread(const std::vector<cplx>& v) {
  double spread = 0.0, scale = 0.0;
  for (const auto& a : v) scale = std::max(scale, std::abs(a));
  for (const auto& a : v)
    for (const auto& b : v) spread = std::max(spread, std::abs(a - b));
  return scale > 0.0 ? spread / scale : spread;
}

// Runs f(i) for i in [0, n) on up to `jobs` threads.
template <class F>
void parallel_for(int n, int jobs, F&& f) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) f(i);
    });
  for (auto& th : pool) th.join();
}

inline double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double den = n * sxx - sx * sx;
  if (den == 0.0) throw DomainError("degenerate fit abscissae");
  return (n * sxy - sx * sy) / den;
}

}  // namespace detail

/// One solve per schedule step, then the verdict.
inline LimitReport run_limit(const RadialProblem& problem, const LimitSchedule& schedule, int jobs = 1) {
  require_valid(problem);
  if (!(schedule.im_z_target >= 1.0)) throw DomainError("im_z_target must be at least 1");
  if (!(schedule.tolerance > 0.0)) throw DomainError("tolerance must be positive");
  auto dom = problem.potential.dominant_index();
  if (!dom) throw DomainError("limit schedule needs a singular power term");
  const PowerTerm& lead = problem.potential.terms[*dom];
  const double s = lead.exponent;
  const cplx alpha = problem.scale() * lead.strength;

  LimitReport rep;
  rep.ordered = !schedule.r0_sequence.has_value();
  std::vector<double> omegas, radii;
  if (rep.ordered) {
    omegas = schedule.omega_sequence.values();
    for (double w : omegas) radii.push_back(s > 2.0 ? r0_for_im_z(schedule.im_z_target, alpha, problem.scale() * w, s)
                                                    : schedule.base.r0);
  } else {
    radii = schedule.r0_sequence->values();
    double w = schedule.fixed_omega.value_or(schedule.omega_sequence.start);
    omegas.assign(radii.size(), w);
  }
  const int n = static_cast<int>(radii.size());
  rep.samples.resize(static_cast<std::size_t>(n));
  detail::parallel_for(n, jobs, [&](int i) {
    auto& smp = rep.samples[static_cast<std::size_t>(i)];
    smp.step_index = i;
    smp.r0 = radii[static_cast<std::size_t>(i)];
    smp.omega = omegas[static_cast<std::size_t>(i)];
    SolverConfig cfg = schedule.base;
    cfg.r0 = smp.r0;
    cfg.omega = smp.omega;
    try {
      smp.observable = detail::observable_of(solve(problem, cfg), problem);
    } catch (const std::exception& e) {
      smp.failure = e.what();
      smp.observable = cplx{std::nan(""), std::nan("")};
    }
  });

  std::vector<cplx> seq;
  std::vector<double> xs;
  for (const auto& smp : rep.samples)
    if (!smp.failure) {
      seq.push_back(smp.observable);
      xs.push_back(rep.ordered ? smp.omega : smp.r0);
    }
  if (seq.size() < 3) {
    rep.verdict = Verdict::diverged;
    rep.extrapolated = seq.empty() ? cplx{std::nan(""), std::nan("")} : seq.back();
    return rep;
  }

  std::vector<cplx> judged = seq;
  if (rep.ordered) {
    std::size_t m = static_cast<std::size_t>(std::max(2, schedule.extrapolation_points));
    if (seq.size() >= m + 2) {
      for (std::size_t i = m - 1; i < seq.size(); ++i) {
        std::vector<double> x(xs.begin() + static_cast<long>(i + 1 - m), xs.begin() + static_cast<long>(i + 1));
        std::vector<cplx> y(seq.begin() + static_cast<long>(i + 1 - m), seq.begin() + static_cast<long>(i + 1));
        rep.extrapolants.push_back(detail::extrapolate_to_zero(x, y));
      }
      judged = rep.extrapolants;
    }
  }
  rep.extrapolated = judged.back();
  std::vector<cplx> last3(judged.end() - 3, judged.end());
  rep.spread = detail::relative_spread(last3);

  // Rate: slope of log|o - o_inf| against log of the limiting parameter.
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    double d = std::abs(seq[i] - rep.extrapolated);
    if (d > 0.0 && std::isfinite(d)) {
      lx.push_back(std::log(xs[i]));
      ly.push_back(std::log(d));
    }
  }
  if (lx.size() >= 2) rep.fitted_rate = detail::least_squares_slope(lx, ly);

  bool finite = std::all_of(judged.begin(), judged.end(), [](cplx z) { return std::isfinite(std::abs(z)); });
  if (finite && rep.spread < schedule.tolerance) rep.verdict = Verdict::converged;
  else if (detail::oscillates(seq)) rep.verdict = Verdict::oscillatory;
  else rep.verdict = Verdict::diverged;
  return rep;
}

struct S2RateFit {
  double slope = 0.0;
  double expected = 0.0;  // omega / sqrt(alpha - 1/4)
  double exact_exponent = 0.0;  // Re(nu_+ - nu_-)
  double epsilon = 0.0;
  double epsilon_radius = 0.0;  // r0 below which |S~| < epsilon |S~(1)|, = epsilon^(sqrt(alpha-1/4)/omega)
  std::vector<double> r0;
  std::vector<cplx> s_tilde;
};

/// Rate at which S~ = D/C of the 1/r^2 channel vanishes as r0 -> 0 for the
/// potential -(alpha + i omega)/r^2 at E = 0 with a square-well interior.
inline S2RateFit fit_s2_rate(double alpha, double omega, std::vector<double> r0_sequence, double epsilon = 1e-2) {
  if (!(alpha > 0.25)) throw DomainError("subcritical coupling: alpha must exceed 1/4");
  if (!(omega >= 0.0)) throw DomainError("omega must be non-negative");
  if (r0_sequence.size() < 3) throw DomainError("r0 sequence too short: need at least three radii");
  auto [lo, hi] = std::minmax_element(r0_sequence.begin(), r0_sequence.end());
  if (!(*lo > 0.0)) throw DomainError("r0 values must be positive");
  if (std::log10(*hi / *lo) < 3.0 - 1e-9) throw DomainError("r0 sequence too short: must span at least three decades");

  RadialProblem prob;
  prob.potential.terms.push_back({cplx{alpha, omega}, 2.0, std::nullopt});
  cplx nu_p = std::sqrt(cplx{0.25, 0.0} - prob.effective_alpha2());
  cplx nu_m = -nu_p;
  const double R = 10.0 * *hi;

  S2RateFit fit;
  fit.r0 = r0_sequence;
  std::vector<double> lx, ly;
  for (double r0 : r0_sequence) {
    SolverConfig cfg;
    cfg.r0 = r0;
    cfg.boundary_mode = BoundaryMode::square_well_interior;
    auto y0 = interior_log_derivative(cfg, prob);
    double radii[] = {R};
    auto st = propagate_to(y0.y, y0.r0, radii, cfg, prob).front();
    cplx g = R * st.y - 0.5;
    cplx s_tilde = std::pow(R, nu_p - nu_m) * (nu_p - g) / (g - nu_m);
    fit.s_tilde.push_back(s_tilde);
    lx.push_back(std::log(r0));
    ly.push_back(std::log(std::abs(s_tilde)));
  }
  double b = std::sqrt(alpha - 0.25);
  fit.slope = detail::least_squares_slope(lx, ly);
  fit.expected = omega / b;
  fit.exact_exponent = (nu_p - nu_m).real();
  fit.epsilon = epsilon;
  fit.epsilon_radius = omega > 0.0 ? std::pow(epsilon, b / omega) : 0.0;
  return fit;
}

struct ThresholdEntry {
  double s2 = 0.0;
  double omega = 0.0;
  Verdict verdict = Verdict::diverged;
  bool expected_convergent = false;
  LimitReport report;
};

struct ThresholdConfig {
  double z_start = 30.0;  // |z(r0)| of the leading term at the largest r0
  double z_stop = 2e4;
  int points = 12;
  BoundaryMode boundary_mode = BoundaryMode::square_well_interior;
  double tolerance = 1e-6;
  int jobs = 1;
};

/// -alpha1/r^s1 - i omega/r^s2: for each s2, an r0 -> 0 sequence at fixed omega.
/// Expected: converged iff s2 > s1/2 + 1, or s2 = s1/2 + 1 with omega >= 30 sqrt(alpha1).
inline std::vector<ThresholdEntry> threshold_study(double s1, double alpha1, const std::vector<double>& s2_values,
                                                   double omega, const ThresholdConfig& tc = {}) {
  if (!(s1 > 2.0)) throw DomainError("threshold study needs s1 > 2");
  if (!(alpha1 > 0.0)) throw DomainError("alpha1 must be positive");
  if (!(omega > 0.0)) throw DomainError("omega must be positive");
  if (tc.points < 3 || !(tc.z_stop > tc.z_start)) throw DomainError("bad threshold r0 range");
  double r_hi = r0_for_z_modulus(tc.z_start, alpha1, s1);
  double r_lo = r0_for_z_modulus(tc.z_stop, alpha1, s1);
  GeometricSequence r0s{r_hi, std::pow(r_lo / r_hi, 1.0 / (tc.points - 1)), tc.points};
  const double marginal = s1 / 2.0 + 1.0;

  std::vector<ThresholdEntry> out;
  for (double s2 : s2_values) {
    if (!(s2 > 0.0 && s2 <= s1)) throw DomainError("s2 must lie in (0, s1]");
    RadialProblem prob;
    prob.potential.terms.push_back({alpha1, s1, std::nullopt});
    LimitSchedule sched;
    sched.r0_sequence = r0s;
    sched.fixed_omega = 0.0;
    sched.base.boundary_mode = tc.boundary_mode;
    sched.tolerance = tc.tolerance;
    if (s2 == s1) {
      sched.fixed_omega = omega;
    } else {
      // Damped far out so the long-range tail stays the s1 term.
      prob.potential.terms.push_back({cplx{0.0, omega}, s2, 1.0});
    }
    ThresholdEntry e;
    e.s2 = s2;
    e.omega = omega;
    e.report = run_limit(prob, sched, tc.jobs);
    e.verdict = e.report.verdict;
    e.expected_convergent = s2 > marginal + 1e-12 || (std::abs(s2 - marginal) <= 1e-12 && omega >= 30.0 * std::sqrt(alpha1));
    out.push_back(std::move(e));
  }
  return out;
}

struct SensitivityReport {
  std::vector<double> depth_scales;
  std::vector<cplx> values;
  double max_relative_spread = 0.0;
};

/// Re-solves with the interior well depth scaled by each variant.
inline SensitivityReport sensitivity_scan(const RadialProblem& problem, const SolverConfig& config,
                                          const std::vector<double>& depth_scales) {
  if (depth_scales.size() < 2) throw DomainError("sensitivity scan needs at least two interior variants");
  if (config.boundary_mode != BoundaryMode::square_well_interior)
    throw DomainError("sensitivity scan perturbs the interior well: use square_well_interior");
  SensitivityReport rep;
  rep.depth_scales = depth_scales;
  for (double f : depth_scales) {
    SolverConfig cfg = config;
    cfg.interior_depth_scale = f;
    rep.values.push_back(detail::observable_of(solve(problem, cfg), problem));
  }
  double ref = 0.0;
  for (const auto& v : rep.values) ref = std::max(ref, std::abs(v));
  double spread = 0.0;
  for (const auto& a : rep.values)
    for (const auto& b : rep.values) spread = std::max(spread, std::abs(a - b));
  rep.max_relative_spread = ref > 0.0 ? spread / ref : spread;
  return rep;
}

}  // namespace singscat

#endif
