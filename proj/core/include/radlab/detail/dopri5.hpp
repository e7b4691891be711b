#pragma once

// Dormand-Prince 5(4) step with FSAL and the 4th-order continuous extension.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace radlab::detail {

template <std::size_t Dim>
using Vec = std::array<double, Dim>;

struct StepTolerance {
  double rel = 1e-10;
  double abs = 1e-12;
};

template <std::size_t Dim>
struct Dopri5Step {
  double t0 = 0.0;
  double h = 0.0;
  Vec<Dim> y0{};
  Vec<Dim> y1{};
  Vec<Dim> f1{};  // f(t0 + h, y1), reused as the next step's first stage
  double error = 0.0;  // scaled RMS error; accept when <= 1
  std::array<Vec<Dim>, 5> cont{};

  /// Dense output at t in [t0, t0 + h].
  Vec<Dim> at(double t) const {
    const double s = (t - t0) / h;
    const double s1 = 1.0 - s;
    Vec<Dim> y{};
    for (std::size_t i = 0; i < Dim; ++i)
      y[i] = cont[0][i] + s * (cont[1][i] + s1 * (cont[2][i] + s * (cont[3][i] + s1 * cont[4][i])));
    return y;
  }
};

/// One attempted step from (t, y) with first stage f0 = rhs(t, y).
/// Returns false if any stage evaluation is non-finite.
template <std::size_t Dim, class Rhs>
bool dopri5_attempt(const Rhs& rhs, double t, const Vec<Dim>& y, const Vec<Dim>& f0, double h,
                    const StepTolerance& tol, Dopri5Step<Dim>& out) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                   a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                   d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                   d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

  Vec<Dim> tmp{};
  const auto& k1 = f0;
  for (std::size_t i = 0; i < Dim; ++i) tmp[i] = y[i] + h * a21 * k1[i];
  const Vec<Dim> k2 = rhs(t + c2 * h, tmp);
  for (std::size_t i = 0; i < Dim; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
  const Vec<Dim> k3 = rhs(t + c3 * h, tmp);
  for (std::size_t i = 0; i < Dim; ++i)
    tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
  const Vec<Dim> k4 = rhs(t + c4 * h, tmp);
  for (std::size_t i = 0; i < Dim; ++i)
    tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
  const Vec<Dim> k5 = rhs(t + c5 * h, tmp);
  for (std::size_t i = 0; i < Dim; ++i)
    tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
  const Vec<Dim> k6 = rhs(t + h, tmp);
  Vec<Dim> y1{};
  for (std::size_t i = 0; i < Dim; ++i)
    y1[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
  const Vec<Dim> k7 = rhs(t + h, y1);

  double acc = 0.0;
  bool finite = true;
  for (std::size_t i = 0; i < Dim; ++i) {
    const double err =
        h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    const double sc = tol.abs + tol.rel * std::max(std::abs(y[i]), std::abs(y1[i]));
    acc += (err / sc) * (err / sc);
    finite = finite && std::isfinite(y1[i]) && std::isfinite(k7[i]) && std::isfinite(err);
  }

  out.t0 = t;
  out.h = h;
  out.y0 = y;
  out.y1 = y1;
  out.f1 = k7;
  out.error = std::sqrt(acc / Dim);
  for (std::size_t i = 0; i < Dim; ++i) {
    const double diff = y1[i] - y[i];
    const double bspl = h * k1[i] - diff;
    out.cont[0][i] = y[i];
    out.cont[1][i] = diff;
    out.cont[2][i] = bspl;
    out.cont[3][i] = diff - h * k7[i] - bspl;
    out.cont[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] +
                          d7 * k7[i]);
  }
  return finite;
}

/// Step-size factor from a scaled error estimate.
inline double dopri5_step_factor(double error) {
  if (error == 0.0) return 5.0;
  return std::clamp(0.9 * std::pow(error, -0.2), 0.2, 5.0);
}

/// Hairer-style initial step guess.
template <std::size_t Dim>
double initial_step(const Vec<Dim>& y, const Vec<Dim>& f, const StepTolerance& tol,
                    double span) {
  double d0 = 0.0, d1 = 0.0;
  for (std::size_t i = 0; i < Dim; ++i) {
    const double sc = tol.abs + tol.rel * std::abs(y[i]);
    d0 += (y[i] / sc) * (y[i] / sc);
    d1 += (f[i] / sc) * (f[i] / sc);
  }
  d0 = std::sqrt(d0 / Dim);
  d1 = std::sqrt(d1 / Dim);
  double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  return std::min(h, span);
}

}  // namespace radlab::detail
