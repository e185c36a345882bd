#ifndef SINGSCAT_SPECFUN_HPP
#define SINGSCAT_SPECFUN_HPP

#include <array>
#include <cmath>
#include <complex>

#include "singscat/domain.hpp"
#include "singscat/errors.hpp"

namespace singscat {

namespace detail {

// Lanczos approximation, g = 7, nine terms; ~15 significant digits for Re z >= 1/2.
inline constexpr double lanczos_g = 7.0;
inline constexpr std::array<double, 9> lanczos_coef = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

inline cplx gamma_right(cplx z) {
  z -= 1.0;
  cplx x = lanczos_coef[0];
  for (std::size_t i = 1; i < lanczos_coef.size(); ++i) x += lanczos_coef[i] / (z + static_cast<double>(i));
  cplx t = z + lanczos_g + 0.5;
  return std::sqrt(2.0 * pi) * std::exp((z + 0.5) * std::log(t) - t) * x;
}

}  // namespace detail

inline bool is_nonpositive_integer(cplx z) {
  return z.imag() == 0.0 && z.real() <= 0.0 && std::floor(z.real()) == z.real();
}

/// Gamma function of a complex argument.
inline cplx gamma(cplx z) {
  if (is_nonpositive_integer(z)) throw DomainError("gamma: pole at non-positive integer");
  if (z.real() < 0.5) return pi / (std::sin(pi * z) * detail::gamma_right(1.0 - z));
  return detail::gamma_right(z);
}

inline double gamma(double x) { return gamma(cplx{x, 0.0}).real(); }

/// alpha^q on the branch selected by approaching the positive real axis from
/// above (absorb: arg in [0, 2pi)) or below (create: arg in (-2pi, 0]).
inline cplx branched_power(cplx base, double exponent, Branch branch) {
  if (base == cplx{}) {
    if (exponent <= 0.0) throw DomainError("branched_power: zero base with non-positive exponent");
    return {0.0, 0.0};
  }
  double arg = std::atan2(base.imag(), base.real());
  if (branch == Branch::absorb && arg < 0.0) arg += 2.0 * pi;
  if (branch == Branch::create && arg > 0.0) arg -= 2.0 * pi;
  return std::polar(std::pow(std::abs(base), exponent), exponent * arg);
}

/// Riccati-Hankel function of complex order nu = lambda + 1/2 and its x-derivative,
/// normalized to exp(+-i(x - lambda pi/2)) at large x. Asymptotic series; valid
/// for x well above |nu|^2.
struct RiccatiHankel {
  cplx value;
  cplx derivative;
};

inline RiccatiHankel riccati_hankel_asymptotic(cplx nu, double x, int sign) {
  const cplx i_s{0.0, static_cast<double>(sign)};
  const cplx lambda = nu - 0.5;
  const cplx four_nu2 = 4.0 * nu * nu;
  cplx sum{1.0, 0.0}, dsum{0.0, 0.0};
  cplx term{1.0, 0.0};  // (+-i)^k a_k(nu) / x^k
  double last = 1.0;
  for (int k = 1; k < 200; ++k) {
    double odd = 2.0 * k - 1.0;
    term *= i_s * (four_nu2 - odd * odd) / (8.0 * k * x);
    double mag = std::abs(term);
    if (mag > last) break;  // asymptotic series starts to diverge
    sum += term;
    dsum += -static_cast<double>(k) / x * term;
    last = mag;
    if (mag < 1e-18) break;
  }
  cplx phase = std::exp(i_s * (x - lambda * (pi / 2.0)));
  return {phase * sum, phase * (i_s * sum + dsum)};
}

}  // namespace singscat

#endif
