#ifndef SINGSCAT_DOMAIN_HPP
#define SINGSCAT_DOMAIN_HPP

// Shared value types for radial scattering problems.
//
// Units: hbar = 1 and, by default, 2M = 1, so the radial equation reads
//
//     -Phi'' + [ l(l+1)/r^2 + U(r) ] Phi = E Phi,      E = k^2.
//
// A singular term is written U = -alpha/r^s; a positive imaginary part of
// alpha is absorptive.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "singscat/errors.hpp"

namespace singscat {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846264338327950288;

enum class Branch { absorb, create };

inline Branch conjugate(Branch b) { return b == Branch::absorb ? Branch::create : Branch::absorb; }
inline double branch_sign(Branch b) { return b == Branch::absorb ? 1.0 : -1.0; }
inline const char* to_string(Branch b) { return b == Branch::absorb ? "absorb" : "create"; }

enum class MassConvention { two_m_one, m_one };
enum class Interpolation { cubic, linear };

/// One piece -alpha/r^s, optionally multiplied by exp(-r/tau).
struct PowerTerm {
  cplx strength{0.0, 0.0};
  double exponent = 0.0;
  std::optional<double> damping_scale;

  cplx value(double r) const {
    cplx v = -strength * std::pow(r, -exponent);
    if (damping_scale) v *= std::exp(-r / *damping_scale);
    return v;
  }

  cplx derivative(double r) const {
    double rate = exponent / r + (damping_scale ? 1.0 / *damping_scale : 0.0);
    cplx v = strength * std::pow(r, -exponent) * rate;
    if (damping_scale) v *= std::exp(-r / *damping_scale);
    return v;
  }

  bool damped() const { return damping_scale.has_value(); }
};

/// User-supplied potential values on a radial grid. Zero outside the grid.
class TabulatedPotential {
public:
  TabulatedPotential() = default;

  TabulatedPotential(std::vector<double> radii, std::vector<cplx> values,
                     Interpolation interp = Interpolation::cubic)
      : radii_(std::move(radii)), values_(std::move(values)), interp_(interp) {
    if (violations().empty() && interp_ == Interpolation::cubic) build_spline();
  }

  const std::vector<double>& radii() const { return radii_; }
  const std::vector<cplx>& values() const { return values_; }
  Interpolation interpolation() const { return interp_; }

  double front() const { return radii_.front(); }
  double back() const { return radii_.back(); }
  bool contains(double r) const { return !radii_.empty() && r >= radii_.front() && r <= radii_.back(); }

  std::vector<std::string> violations() const {
    std::vector<std::string> out;
    if (radii_.size() < 2) out.emplace_back("at least two grid points");
    if (radii_.size() != values_.size()) out.emplace_back("radii and values have equal length");
    for (std::size_t i = 0; i < radii_.size(); ++i) {
      if (!std::isfinite(radii_[i]) || radii_[i] <= 0.0) {
        out.emplace_back("radii finite and positive");
        break;
      }
      if (i > 0 && !(radii_[i] > radii_[i - 1])) {
        out.emplace_back("radii strictly increasing");
        break;
      }
    }
    for (const auto& v : values_)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        out.emplace_back("values finite");
        break;
      }
    return out;
  }

  cplx value(double r) const {
    if (!contains(r)) return {0.0, 0.0};
    std::size_t i = segment(r);
    double h = radii_[i + 1] - radii_[i];
    double t = (r - radii_[i]) / h;
    if (interp_ == Interpolation::linear) return values_[i] * (1.0 - t) + values_[i + 1] * t;
    double a = 1.0 - t;
    return a * values_[i] + t * values_[i + 1] +
           ((a * a * a - a) * m_[i] + (t * t * t - t) * m_[i + 1]) * (h * h / 6.0);
  }

  cplx derivative(double r) const {
    if (!contains(r)) return {0.0, 0.0};
    std::size_t i = segment(r);
    double h = radii_[i + 1] - radii_[i];
    cplx slope = (values_[i + 1] - values_[i]) / h;
    if (interp_ == Interpolation::linear) return slope;
    double t = (r - radii_[i]) / h;
    double a = 1.0 - t;
    return slope + (-(3.0 * a * a - 1.0) * m_[i] + (3.0 * t * t - 1.0) * m_[i + 1]) * (h / 6.0);
  }

private:
  std::size_t segment(double r) const {
    auto it = std::upper_bound(radii_.begin(), radii_.end(), r);
    std::size_t i = static_cast<std::size_t>(std::distance(radii_.begin(), it));
    return std::clamp<std::size_t>(i == 0 ? 0 : i - 1, 0, radii_.size() - 2);
  }

  // Natural cubic spline second derivatives (Thomas algorithm).
  void build_spline() {
    const std::size_t n = radii_.size();
    m_.assign(n, cplx{});
    if (n < 3) return;
    std::vector<double> c(n, 0.0);
    std::vector<cplx> d(n, cplx{});
    for (std::size_t i = 1; i + 1 < n; ++i) {
      double hl = radii_[i] - radii_[i - 1];
      double hr = radii_[i + 1] - radii_[i];
      double diag = 2.0 * (hl + hr);
      cplx rhs = 6.0 * ((values_[i + 1] - values_[i]) / hr - (values_[i] - values_[i - 1]) / hl);
      double denom = diag - hl * c[i - 1];
      c[i] = hr / denom;
      d[i] = (rhs - hl * d[i - 1]) / denom;
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
      m_[i] = d[i] - c[i] * m_[i + 1];
      if (i == 1) break;
    }
  }

  std::vector<double> radii_;
  std::vector<cplx> values_;
  Interpolation interp_ = Interpolation::cubic;
  std::vector<cplx> m_;
};

struct PotentialSpec {
  std::vector<PowerTerm> terms;
  double coulomb_strength = 0.0;  // beta in -beta/r
  std::optional<TabulatedPotential> table;

  cplx value(double r) const {
    cplx v{0.0, 0.0};
    for (const auto& t : terms) v += t.value(r);
    if (coulomb_strength != 0.0) v -= coulomb_strength / r;
    if (table) v += table->value(r);
    return v;
  }

  cplx derivative(double r) const {
    cplx v{0.0, 0.0};
    for (const auto& t : terms) v += t.derivative(r);
    if (coulomb_strength != 0.0) v += coulomb_strength / (r * r);
    if (table) v += table->derivative(r);
    return v;
  }

  /// Everything except undamped 1/r^2 pieces, which are long-ranged and
  /// absorbed into the effective angular momentum at matching.
  cplx short_range_value(double r) const {
    cplx v = value(r);
    for (const auto& t : terms)
      if (t.exponent == 2.0 && !t.damped()) v -= t.value(r);
    return v;
  }

  /// Coefficient of the undamped -alpha_2/r^2 term.
  cplx alpha2() const {
    cplx a{0.0, 0.0};
    for (const auto& t : terms)
      if (t.exponent == 2.0 && !t.damped()) a += t.strength;
    return a;
  }

  /// Index of the most singular power term, if any.
  std::optional<std::size_t> dominant_index() const {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      if (terms[i].strength == cplx{}) continue;
      if (!best || terms[i].exponent > terms[*best].exponent) best = i;
    }
    return best;
  }

  double dominant_exponent() const {
    auto i = dominant_index();
    return i ? terms[*i].exponent : 0.0;
  }

  /// Slowest power-law falloff at large r among undamped terms (Coulomb counts as 1).
  std::optional<double> tail_exponent() const {
    std::optional<double> e;
    for (const auto& t : terms)
      if (!t.damped() && t.strength != cplx{}) e = e ? std::min(*e, t.exponent) : t.exponent;
    if (coulomb_strength != 0.0) e = e ? std::min(*e, 1.0) : 1.0;
    return e;
  }

  /// Radii where the potential is not smooth.
  std::vector<double> breakpoints() const {
    if (!table) return {};
    return {table->front(), table->back()};
  }

  /// Copy with the power terms more singular than 1/r^2 removed.
  PotentialSpec without_singular() const {
    PotentialSpec out = *this;
    out.terms.clear();
    for (const auto& t : terms)
      if (t.exponent <= 2.0) out.terms.push_back(t);
    return out;
  }
};

struct RadialProblem {
  int l = 0;
  double energy = 0.0;
  PotentialSpec potential;
  MassConvention mass_convention = MassConvention::two_m_one;

  /// Factor mapping physical energies/potentials onto the 2M = 1 equation.
  double scale() const { return mass_convention == MassConvention::m_one ? 2.0 : 1.0; }
  double k2() const { return scale() * energy; }
  double momentum() const { return std::sqrt(std::max(0.0, k2())); }
  double centrifugal() const { return static_cast<double>(l) * (l + 1); }

  cplx effective_potential(double r) const { return centrifugal() / (r * r) + scale() * potential.value(r); }
  cplx effective_potential_derivative(double r) const {
    return -2.0 * centrifugal() / (r * r * r) + scale() * potential.derivative(r);
  }
  cplx effective_alpha2() const { return scale() * potential.alpha2(); }
};

/// Index bundle of the singular channel. For alpha_2 = 0, l = 0:
/// mu = 1/2, nu = hankel_order = 1/(s-2), eta = 1.
struct ChannelIndices {
  cplx mu;
  cplx nu;
  cplx eta;
  cplx hankel_order;
};

inline ChannelIndices channel_indices(int l, cplx alpha2, double s) {
  if (!(s > 2.0)) throw DomainError("channel indices need a singular exponent s > 2");
  double lh = l + 0.5;
  cplx mu = std::sqrt(cplx{lh * lh, 0.0} - alpha2);  // principal root, Re mu >= 0
  double two_l1 = 2.0 * l + 1.0;
  cplx hankel = std::sqrt(cplx{two_l1 * two_l1, 0.0} - 4.0 * alpha2) / (s - 2.0);
  return {mu, 2.0 * mu / (s - 2.0), 2.0 * mu, hankel};
}

struct Violation {
  std::string field;
  std::string rule;
};

inline std::vector<Violation> validate(const PotentialSpec& pot) {
  std::vector<Violation> out;
  int n2 = 0;
  for (std::size_t i = 0; i < pot.terms.size(); ++i) {
    const auto& t = pot.terms[i];
    std::string field = "terms[" + std::to_string(i) + "]";
    if (!std::isfinite(t.exponent) || t.exponent < 0.0) out.push_back({field + ".s", "exponent non-negative"});
    if (!std::isfinite(t.strength.real()) || !std::isfinite(t.strength.imag()))
      out.push_back({field + ".strength", "strength finite"});
    if (t.damping_scale && !(*t.damping_scale > 0.0 && std::isfinite(*t.damping_scale)))
      out.push_back({field + ".tau", "damping scale strictly positive"});
    if (t.exponent == 2.0) ++n2;
  }
  if (n2 > 1) out.push_back({"terms", "at most one alpha2 slot"});
  if (!std::isfinite(pot.coulomb_strength) || pot.coulomb_strength < 0.0)
    out.push_back({"beta", "coulomb strength non-negative"});
  if (pot.table)
    for (auto& rule : pot.table->violations()) out.push_back({"table", rule});
  return out;
}

inline std::vector<Violation> validate(const RadialProblem& problem) {
  std::vector<Violation> out = validate(problem.potential);
  for (auto& v : out) v.field = "potential." + v.field;
  if (problem.l < 0) out.push_back({"l", "partial wave non-negative"});
  if (!std::isfinite(problem.energy)) out.push_back({"energy", "energy finite"});
  else if (problem.energy < 0.0) out.push_back({"energy", "energy non-negative"});
  return out;
}

inline void require_valid(const RadialProblem& problem) {
  auto v = validate(problem);
  if (!v.empty()) throw DomainError("invalid problem: " + v.front().field + ": " + v.front().rule);
}

/// Local momentum sqrt(E - l(l+1)/r^2 - U(r)), principal branch (Im >= 0).
inline cplx effective_momentum(double r, const RadialProblem& problem) {
  if (!(r > 0.0)) throw DomainError("effective momentum undefined at r <= 0 (singular point)");
  cplx radicand = problem.k2() - problem.effective_potential(r);
  if (radicand.imag() == 0.0) radicand.imag(0.0);  // drop -0 so real radicands land on Im >= 0
  return std::sqrt(radicand);
}

}  // namespace singscat

#endif
