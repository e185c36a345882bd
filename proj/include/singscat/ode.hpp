#ifndef SINGSCAT_ODE_HPP
#define SINGSCAT_ODE_HPP

// Dormand-Prince 5(4) embedded pair with PI step control for small complex
// systems. Integrates in either direction.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

#include "singscat/errors.hpp"

namespace singscat::ode {

using cplx = std::complex<double>;

template <std::size_t N>
using State = std::array<cplx, N>;

struct StepControl {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  long max_steps = 5'000'000;
};

struct Counters {
  long accepted = 0;
  long rejected = 0;
};

enum class Outcome { reached_end, stopped };

template <std::size_t N>
class DormandPrince {
public:
  explicit DormandPrince(StepControl ctl) : ctl_(ctl) {}

  /// Advance (r, y) towards r_end. `h` is the step magnitude suggestion and is
  /// updated in place. `cap(r)` bounds the step magnitude; `stop(r, y)` is
  /// queried after every accepted step and interrupts integration when true.
  template <class Rhs, class Cap, class Stop>
  Outcome advance(Rhs&& f, double& r, State<N>& y, double r_end, double& h, Cap&& cap, Stop&& stop,
                  Counters& counters) {
    const double dir = r_end >= r ? 1.0 : -1.0;
    if (r == r_end) return Outcome::reached_end;
    State<N> k1 = f(r, y);
    State<N> k2, k3, k4, k5, k6, k7, ytmp, ynew;

    while (dir * (r_end - r) > 0.0) {
      if (counters.accepted + counters.rejected >= ctl_.max_steps) {
        std::ostringstream os;
        os << "r=" << r << " h=" << h << " |y0|=" << std::abs(y[0]);
        throw ConvergenceError("ODE step budget exhausted", {os.str()});
      }
      double hmax = std::min(std::abs(cap(r)), std::abs(r_end - r));
      double hmag = std::min(std::abs(h), hmax);
      bool last = hmag >= std::abs(r_end - r);
      if (last) hmag = std::abs(r_end - r);
      double hs = dir * hmag;

      for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + hs * (a21 * k1[i]);
      k2 = f(r + c2 * hs, ytmp);
      for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
      k3 = f(r + c3 * hs, ytmp);
      for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      k4 = f(r + c4 * hs, ytmp);
      for (std::size_t i = 0; i < N; ++i)
        ytmp[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      k5 = f(r + c5 * hs, ytmp);
      for (std::size_t i = 0; i < N; ++i)
        ytmp[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
      k6 = f(r + hs, ytmp);
      for (std::size_t i = 0; i < N; ++i)
        ynew[i] = y[i] + hs * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
      const double r_new = last ? r_end : r + hs;
      k7 = f(r_new, ynew);

      double err = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        cplx e = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        double sc = ctl_.abs_tol + ctl_.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
        err = std::max(err, std::abs(e) / sc);
      }
      if (!std::isfinite(err)) err = 1e10;

      if (err <= 1.0) {
        ++counters.accepted;
        double fac = err == 0.0 ? 5.0 : 0.9 * std::pow(err, -alpha_pi) * std::pow(err_prev_, beta_pi);
        fac = std::clamp(fac, 0.2, 5.0);
        if (rejected_last_) fac = std::min(fac, 1.0);
        err_prev_ = std::max(err, 1e-4);
        rejected_last_ = false;
        r = r_new;
        y = ynew;
        k1 = k7;
        h = hmag * fac;
        if (stop(r, y)) return Outcome::stopped;
      } else {
        ++counters.rejected;
        rejected_last_ = true;
        h = hmag * std::max(0.2, 0.9 * std::pow(err, -0.2));
        if (h < 1e-15 * std::max(1.0, std::abs(r))) {
          std::ostringstream os;
          os << "r=" << r << " h=" << h;
          throw ConvergenceError("ODE step size underflow", {os.str()});
        }
      }
    }
    return Outcome::reached_end;
  }

private:
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                          a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double beta_pi = 0.04, alpha_pi = 0.2 - 0.75 * beta_pi;

  StepControl ctl_;
  double err_prev_ = 1e-4;
  bool rejected_last_ = false;
};

}  // namespace singscat::ode

#endif
