#ifndef SINGSCAT_CLOSED_FORM_HPP
#define SINGSCAT_CLOSED_FORM_HPP

// Analytic observables of the regularized attractive singular potential
// -(alpha +- i0)/r^s and of its near-threshold perturbation theory.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "singscat/domain.hpp"
#include "singscat/errors.hpp"
#include "singscat/specfun.hpp"

namespace singscat {

// Thresholds on the perturbative smallness parameter p * alpha^(1/(s-2)).
inline constexpr double perturbative_warn_threshold = 0.3;
inline constexpr double perturbative_error_threshold = 1.0;

namespace detail {

inline void require_length_domain(double alpha, double s) {
  if (!(s > 3.0)) throw DomainError("scattering length undefined for s ≤ 3");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("coupling alpha must be positive");
}

// (sqrt(alpha)/(s-2))^(2/(s-2)) * Gamma((s-3)/(s-2)) / Gamma((s-1)/(s-2)) without the alpha factor.
inline double length_prefactor(double s) {
  double q = 2.0 / (s - 2.0);
  return std::pow(s - 2.0, -q) * gamma((s - 3.0) / (s - 2.0)) / gamma((s - 1.0) / (s - 2.0));
}

inline Checked<double> smallness(double x, const char* what) {
  Checked<double> out{x, {}};
  if (!(x <= perturbative_error_threshold))
    throw DomainError(std::string(what) + " = " + std::to_string(x) + " exceeds 1: outside the perturbative regime");
  if (x > perturbative_warn_threshold)
    out.warnings.push_back({"perturbative_regime", std::string(what) + " = " + std::to_string(x) + " > 0.3"});
  return out;
}

inline double half_s_scale(double alpha, double s) {
  return std::pow(alpha, 1.0 / (s - 2.0)) / (2.0 * std::pow(s - 2.0, 2.0 / (s - 2.0)));
}

inline double require_mu(int l, double alpha2) {
  if (l < 0) throw DomainError("partial wave must be non-negative");
  double lh = l + 0.5;
  double mu2 = lh * lh - alpha2;
  if (!(mu2 > 0.0)) throw DomainError("supercritical alpha2: index mu has non-positive real part");
  return std::sqrt(mu2);
}

// sin(pi mu) X^(2mu) exp(-i pi nu) Gamma(1-mu) Gamma(1-nu) / (Gamma(1+mu) Gamma(1+nu)), absorb branch.
inline cplx singular_amplitude(double x, int l, double mu, double s) {
  double nu = 2.0 * mu / (s - 2.0);
  if (is_nonpositive_integer(cplx{1.0 - nu, 0.0}))
    throw DomainError("index nu is a positive integer: Gamma(1 - nu) pole (logarithmic case)");
  cplx nu_part = std::exp(cplx{0.0, -pi * nu}) * gamma(1.0 - nu) / gamma(1.0 + nu);
  double mu_part;
  if (std::abs(mu - (l + 0.5)) < 1e-8) {
    // 2 mu = 2l + 1: sin(pi mu) = (-1)^l.
    double sign = (l % 2 == 0) ? 1.0 : -1.0;
    mu_part = sign * std::pow(x, 2.0 * l + 1.0) * gamma(0.5 - l) / gamma(1.5 + l);
  } else {
    // sin(pi mu) Gamma(1 - mu) = pi / Gamma(mu) keeps integer mu finite.
    mu_part = pi / gamma(mu) * std::pow(x, 2.0 * mu) / gamma(1.0 + mu);
  }
  return mu_part * nu_part;
}

inline cplx on_branch(cplx absorb_value, Branch b) { return b == Branch::absorb ? absorb_value : std::conj(absorb_value); }

}  // namespace detail

/// S-wave scattering length of -(alpha +- i0)/r^s.
inline cplx scattering_length_singular(double alpha, double s, Branch branch) {
  detail::require_length_domain(alpha, s);
  double mag = std::pow(alpha, 1.0 / (s - 2.0)) * detail::length_prefactor(s);
  return std::polar(mag, -branch_sign(branch) * pi / (s - 2.0));
}

/// Scattering length as an analytic function of complex alpha, cut along the
/// positive real axis; the branch picks the side the cut is approached from.
inline cplx scattering_length_continued(cplx alpha, double s, Branch branch) {
  if (!(s > 3.0)) throw DomainError("scattering length undefined for s ≤ 3");
  cplx rotation = std::polar(1.0, -branch_sign(branch) * pi / (s - 2.0));
  return rotation * branched_power(alpha, 1.0 / (s - 2.0), branch) * detail::length_prefactor(s);
}

/// Scattering length of the repulsive potential +alpha/r^s.
inline double scattering_length_repulsive(double alpha, double s) {
  detail::require_length_domain(alpha, s);
  return std::pow(alpha, 1.0 / (s - 2.0)) * detail::length_prefactor(s);
}

/// a_absorb - a_create.
inline cplx scattering_length_jump(double alpha, double s) {
  double rep = scattering_length_repulsive(alpha, s);
  return {0.0, -2.0 * std::sin(pi / (s - 2.0)) * rep};
}

struct InverseSquarePhase {
  cplx phase;
  double s_modulus;
  cplx jump;
};

/// Phase shift of -(alpha +- i0)/r^2 above the critical coupling 1/4.
/// Real part in the -pi/4 convention; the solver's Hankel matching yields +pi/4 with the same |S|.
inline InverseSquarePhase inverse_square_phase(double alpha, Branch branch) {
  if (!(alpha >= 0.25)) throw DomainError("subcritical coupling: alpha must exceed 1/4");
  double root = std::sqrt(alpha - 0.25);
  double sg = branch_sign(branch);
  return {cplx{-pi / 4.0, sg * pi / 2.0 * root}, std::exp(-sg * pi * root), cplx{0.0, pi * root}};
}

struct SpectrumLine {
  int n_r = 0;
  cplx energy;
  double width() const { return -2.0 * energy.imag() + 0.0; }
};

/// Complex levels of an attractive Coulomb field plus -(alpha +- i0)/r^2, in the
/// E = -1/(2 n^2) convention.
inline SpectrumLine coulomb_inverse_square_spectrum(int n_r, double alpha, Branch branch) {
  if (n_r < 0) throw DomainError("radial quantum number must be non-negative");
  if (!(alpha >= 0.25)) throw DomainError("subcritical coupling: alpha must exceed 1/4");
  double n = n_r;
  double den = n * n + n + alpha;
  double re = -0.5 * (n + 0.5) / den;
  double im = -branch_sign(branch) * 0.5 * std::sqrt(alpha - 0.25) / den + 0.0;  // no signed zero at 1/4
  return {n_r, cplx{re, im}};
}

/// Ground-state estimate from the square well of depth alpha/r0^s and width r0.
inline double ground_state_estimate(double alpha, double s, double r0) {
  if (!(r0 > 0.0)) throw DomainError("cut-off radius must be positive");
  if (!(s > 2.0)) throw DomainError("ground state estimate needs s > 2");
  return -alpha / std::pow(r0, s) + pi * pi / (r0 * r0);
}

/// Phase added by a weak singular core to a locally constant background U = -p^2.
inline Checked<cplx> perturbative_phase_constant_background(double p, double alpha, double s, int l, double alpha2,
                                                            Branch branch) {
  if (!(alpha > 0.0) || !(s > 2.0)) throw DomainError("need alpha > 0 and s > 2");
  if (!(p >= 0.0)) throw DomainError("momentum must be non-negative");
  double mu = detail::require_mu(l, alpha2);
  auto check = detail::smallness(p * std::pow(alpha, 1.0 / (s - 2.0)), "p*alpha^(1/(s-2))");
  double x = p * detail::half_s_scale(alpha, s);
  cplx delta = -detail::singular_amplitude(x, l, mu, s);
  return {detail::on_branch(delta, branch), check.warnings};
}

/// Same for an attractive Coulomb background -beta/r, matched at zero energy.
inline Checked<cplx> perturbative_phase_coulomb_background(double beta, double alpha, double s, int l, double alpha2,
                                                           Branch branch = Branch::absorb) {
  if (!(alpha > 0.0) || !(s > 2.0)) throw DomainError("need alpha > 0 and s > 2");
  if (!(beta >= 0.0)) throw DomainError("coulomb strength must be non-negative");
  double eta = 2.0 * detail::require_mu(l, alpha2);
  if (std::abs(eta - std::round(eta)) < 1e-12) throw DomainError("index eta is an integer: formula requires non-integer eta");
  auto check = detail::smallness(beta * std::pow(alpha, 1.0 / (s - 2.0)), "beta*alpha^(1/(s-2))");
  double y = 8.0 * beta * detail::half_s_scale(alpha, s);
  double g = gamma(1.0 - eta) / gamma(1.0 + eta);
  cplx delta = -std::sin(pi * eta) * std::pow(y, eta) * std::exp(cplx{0.0, -pi * eta}) * g * g;
  return {detail::on_branch(delta, branch), check.warnings};
}

struct LowEnergyAmplitude {
  cplx phase;   // delta_l at momentum k
  cplx volume;  // a_l, with delta_l = -a_l k^(2 mu)
};

/// Low-energy phase and scattering volume of the pure singular potential.
inline Checked<LowEnergyAmplitude> pure_singular_low_energy(double k, double alpha, double s, int l, double alpha2,
                                                            Branch branch) {
  if (!(alpha > 0.0) || !(s > 2.0)) throw DomainError("need alpha > 0 and s > 2");
  if (!(k >= 0.0)) throw DomainError("momentum must be non-negative");
  double mu = detail::require_mu(l, alpha2);
  auto check = detail::smallness(k * std::pow(alpha, 1.0 / (s - 2.0)), "k*alpha^(1/(s-2))");
  cplx volume = detail::on_branch(detail::singular_amplitude(detail::half_s_scale(alpha, s), l, mu, s), branch);
  cplx phase = -volume * std::pow(k, 2.0 * mu);
  return {{phase, volume}, check.warnings};
}

struct LevelShift {
  double shift;
  double width;
};

/// delta E = -delta_s * omega_n; width = 2 Im(delta_s) omega_n.
inline LevelShift level_shift_and_width(cplx delta_s, double omega_n, Branch branch = Branch::absorb) {
  LevelShift out{-delta_s.real() * omega_n, 2.0 * delta_s.imag() * omega_n};
  if (branch == Branch::absorb && out.width < 0.0)
    throw ConsistencyError("negative width for an absorbing singular core");
  return out;
}

struct TurningPoints {
  double inner;
  double outer;
};

/// Classically allowed interval {r : E > Re U(r)}; exactly one is supported.
inline TurningPoints classically_allowed_region(const PotentialSpec& potential, double energy) {
  auto f = [&](double r) { return energy - potential.value(r).real(); };
  constexpr double r_lo = 1e-10, r_hi = 1e6;
  std::vector<double> grid;
  const int n = 4000;
  for (int i = 0; i <= n; ++i) grid.push_back(r_lo * std::pow(r_hi / r_lo, static_cast<double>(i) / n));
  for (double b : potential.breakpoints())
    for (double d : {-1e-9, 1e-9}) grid.push_back(b * (1.0 + d));
  std::sort(grid.begin(), grid.end());

  auto refine = [&](double a, double b) {
    bool fa = f(a) > 0.0;
    for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
      double m = 0.5 * (a + b);
      if ((f(m) > 0.0) == fa) a = m;
      else b = m;
    }
    return 0.5 * (a + b);
  };

  std::vector<TurningPoints> regions;
  bool inside = f(grid.front()) > 0.0;
  double start = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    bool now = f(grid[i]) > 0.0;
    if (now == inside) continue;
    double tp = refine(grid[i - 1], grid[i]);
    if (now) start = tp;
    else regions.push_back({start, tp});
    inside = now;
  }
  if (inside) throw DomainError("classically allowed region is unbounded");
  if (regions.empty()) throw DomainError("no classically allowed region at this energy");
  if (regions.size() > 1) throw DomainError("multiple classically allowed regions (multiple wells) are unsupported");
  return regions.front();
}

/// omega_n = ( integral over the allowed region of (E_n - U)^(-1/2) dr )^(-1).
inline double semiclassical_frequency(const PotentialSpec& potential, double energy) {
  auto tp = classically_allowed_region(potential, energy);
  auto integrand = [&](double r) {
    double d = energy - potential.value(r).real();
    return d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
  };
  std::vector<double> cuts{tp.inner};
  const double guard = 1e-8 * (tp.outer - tp.inner);
  for (double b : potential.breakpoints())
    if (b > tp.inner + guard && b < tp.outer - guard) cuts.push_back(b);
  cuts.push_back(tp.outer);
  boost::math::quadrature::tanh_sinh<double> integrator;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    total += integrator.integrate(integrand, cuts[i], cuts[i + 1], 1e-10);
  return 1.0 / total;
}

/// Hydrogen-antihydrogen S-wave scattering length for a fully absorbing core.
inline cplx hhbar_scattering_length(double mass, double c6) {
  if (!(mass > 0.0)) throw DomainError("mass must be positive");
  if (!(c6 > 0.0)) throw DomainError("C6 must be positive");
  double mag = std::pow(mass * c6, 0.25) * gamma(0.75) / (2.0 * std::sqrt(2.0) * gamma(1.25));
  return {mag, -mag};
}

/// S = (1 - i k a) / (1 + i k a).
inline cplx zero_energy_smatrix(double k, cplx a) {
  if (!(k >= 0.0)) throw DomainError("momentum must be non-negative");
  const cplx ika = cplx{0.0, k} * a;
  if (std::abs(1.0 + ika) < 1e-300) throw DomainError("S-matrix pole: 1 + i k a = 0");
  return (1.0 - ika) / (1.0 + ika);
}

/// Radius where |d(1/p)/dr| = 1 for -alpha/r^s at zero energy.
inline double wkb_breakdown_radius(double alpha, double s) {
  if (!(s > 2.0) || !(alpha > 0.0)) throw DomainError("breakdown radius needs alpha > 0, s > 2");
  return std::pow(2.0 * std::sqrt(alpha) / s, 2.0 / (s - 2.0));
}

struct WkbCheck {
  double validity;          // |d(1/p)/dr|
  cplx amplitude;           // p^(-1/2)
  cplx phase_factor;        // exp(i integral_r^ref p dr)
  cplx wavefunction;        // amplitude * phase_factor
  double breakdown_radius;  // 0 when there is no singular term
  double reference_radius;
};

/// Semiclassical incoming-wave solution and its local validity measure.
/// The reference radius defaults to the breakdown radius of the dominant term.
inline WkbCheck wkb_wavefunction_check(double r, const RadialProblem& problem, double reference_radius = 0.0) {
  if (!(r > 0.0)) throw DomainError("WKB check undefined at r <= 0 (singular point)");
  cplx p = effective_momentum(r, problem);
  cplx dp = -problem.effective_potential_derivative(r) / (2.0 * p);
  double validity = std::abs(dp) / std::norm(p);

  double r_star = 0.0;
  if (auto i = problem.potential.dominant_index()) {
    const auto& t = problem.potential.terms[*i];
    if (t.exponent > 2.0) r_star = wkb_breakdown_radius(problem.scale() * std::abs(t.strength), t.exponent);
  }
  double ref = reference_radius > 0.0 ? reference_radius : (r_star > 0.0 ? r_star : r);

  using boost::math::quadrature::gauss_kronrod;
  double lo = std::min(r, ref), hi = std::max(r, ref);
  double re = 0.0, im = 0.0;
  if (hi > lo) {
    re = gauss_kronrod<double, 31>::integrate([&](double x) { return effective_momentum(x, problem).real(); }, lo, hi, 20,
                                              1e-12);
    im = gauss_kronrod<double, 31>::integrate([&](double x) { return effective_momentum(x, problem).imag(); }, lo, hi, 20,
                                              1e-12);
  }
  cplx integral = (ref >= r ? 1.0 : -1.0) * cplx{re, im};
  cplx amplitude = 1.0 / std::sqrt(p);
  cplx phase = std::exp(cplx{0.0, 1.0} * integral);
  return {validity, amplitude, phase, amplitude * phase, r_star, ref};
}

}  // namespace singscat

#endif
