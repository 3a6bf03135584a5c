#pragma once

#include <array>
#include <cmath>
#include <functional>

#include "core/errors.hpp"

namespace ewsim {

/// Adaptive implicit-midpoint integrator for linear systems
///   y' = A(t) y + b(t).
/// A-stable, so stiff oscillatory modes (detuning precession at rad/s scales)
/// do not limit the step size; accuracy follows the smooth quasi-steady
/// solution. Local error is estimated by step doubling and held below
/// atol + rtol * |y| component-wise.
template <int N>
struct LinearImplicitMidpoint {
  using Vec = std::array<double, N>;
  using Mat = std::array<std::array<double, N>, N>;

  double rtol = 1e-9;
  double atol = 1e-12;
  double max_step = 0;  // 0 = unbounded
  long max_steps = 4000000;

  std::function<void(double, const Vec&)> on_step;

  static Vec solve(Mat m, Vec rhs) {
    // Gaussian elimination with partial pivoting on the small dense system.
    std::array<int, N> perm;
    for (int i = 0; i < N; ++i) perm[i] = i;
    for (int col = 0; col < N; ++col) {
      int best = col;
      for (int r = col + 1; r < N; ++r) {
        if (std::abs(m[r][col]) > std::abs(m[best][col])) best = r;
      }
      std::swap(m[col], m[best]);
      std::swap(rhs[col], rhs[best]);
      if (m[col][col] == 0.0) throw NumericError("singular linear system");
      for (int r = col + 1; r < N; ++r) {
        const double f = m[r][col] / m[col][col];
        if (f == 0.0) continue;
        for (int c = col; c < N; ++c) m[r][c] -= f * m[col][c];
        rhs[r] -= f * rhs[col];
      }
    }
    Vec x{};
    for (int r = N - 1; r >= 0; --r) {
      double acc = rhs[r];
      for (int c = r + 1; c < N; ++c) acc -= m[r][c] * x[c];
      x[r] = acc / m[r][r];
    }
    return x;
  }

  // One implicit-midpoint step: (I - h/2 A_m) y1 = (I + h/2 A_m) y0 + h b_m.
  static Vec step(const std::function<Mat(double)>& a_of,
                  const std::function<Vec(double)>& b_of, double t, double h,
                  const Vec& y) {
    const Mat am = a_of(t + 0.5 * h);
    const Vec bm = b_of(t + 0.5 * h);
    Mat lhs{};
    Vec rhs{};
    for (int r = 0; r < N; ++r) {
      double acc = y[r] + h * bm[r];
      for (int c = 0; c < N; ++c) {
        lhs[r][c] = (r == c ? 1.0 : 0.0) - 0.5 * h * am[r][c];
        acc += 0.5 * h * am[r][c] * y[c];
      }
      rhs[r] = acc;
    }
    return solve(lhs, rhs);
  }

  Vec integrate(const std::function<Mat(double)>& a_of,
                const std::function<Vec(double)>& b_of, double t0, double t1,
                Vec y) const {
    const double span = t1 - t0;
    double t = t0;
    double h = max_step > 0 ? std::min(max_step, span / 100) : span / 100;
    long steps = 0;

    while (t < t1) {
      if (++steps > max_steps) {
        throw NumericError("implicit midpoint exceeded max step count at t=" +
                           std::to_string(t));
      }
      if (t + h > t1) h = t1 - t;

      const Vec full = step(a_of, b_of, t, h, y);
      Vec half = step(a_of, b_of, t, 0.5 * h, y);
      half = step(a_of, b_of, t + 0.5 * h, 0.5 * h, half);

      double q = 0;
      for (int i = 0; i < N; ++i) {
        const double scale =
            atol + rtol * std::max(std::abs(y[i]), std::abs(half[i]));
        q = std::max(q, std::abs(full[i] - half[i]) / 3.0 / scale);
      }
      if (!std::isfinite(q)) q = 1e6;

      if (q <= 1.0) {
        t += h;
        y = half;
        if (on_step) on_step(t, y);
      }
      double factor = 0.9 * std::pow(std::max(q, 1e-8), -1.0 / 3.0);
      factor = std::min(4.0, std::max(0.2, factor));
      h *= factor;
      if (max_step > 0) h = std::min(h, max_step);
      if (!(h > 0) || h < 1e-18 * std::abs(span)) {
        throw NumericError("implicit midpoint step size collapsed at t=" +
                           std::to_string(t));
      }
    }
    return y;
  }
};

}  // namespace ewsim
