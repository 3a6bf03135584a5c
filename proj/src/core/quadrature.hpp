#pragma once

#include <cmath>
#include <vector>

#include "core/errors.hpp"

namespace ewsim {

namespace detail {

// 15-point Kronrod / 7-point Gauss pair on [-1, 1] (QUADPACK dqk15 nodes).
// Kronrod nodes are interior, so integrands need never be evaluated at the
// interval endpoints (open-endpoint behaviour).
inline constexpr double kGK15Nodes[8] = {
    0.991455371120813,  0.949107912342759, 0.864864423359769,
    0.741531185599394,  0.586087235467691, 0.405845151377397,
    0.207784955007898,  0.0};
inline constexpr double kGK15WeightsK[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr double kGK15WeightsG[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

template <class F>
void gk15_panel(F&& f, double a, double b, double& kronrod, double& err) {
  const double h = 0.5 * (b - a);
  const double c = 0.5 * (a + b);
  double resk = kGK15WeightsK[7] * f(c);
  double resg = kGK15WeightsG[3] * f(c);
  for (int i = 0; i < 7; ++i) {
    const double dx = h * kGK15Nodes[i];
    const double v = f(c - dx) + f(c + dx);
    resk += kGK15WeightsK[i] * v;
    if (i % 2 == 1) resg += kGK15WeightsG[i / 2] * v;
  }
  kronrod = resk * h;
  err = std::abs((resk - resg) * h);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod integration of f over [a, b].
/// Subdivides the worst panel until the summed error estimate satisfies
/// |err| <= max(abs_tol, rel_tol * |integral|).
template <class F>
double integrate_adaptive(F&& f, double a, double b, double rel_tol = 1e-6,
                          double abs_tol = 0.0, int max_panels = 2000) {
  struct Panel {
    double a, b, val, err;
  };
  std::vector<Panel> panels;
  double v, e;
  detail::gk15_panel(f, a, b, v, e);
  panels.push_back({a, b, v, e});

  for (;;) {
    double total = 0, err = 0;
    int worst = 0;
    for (int i = 0; i < static_cast<int>(panels.size()); ++i) {
      total += panels[i].val;
      err += panels[i].err;
      if (panels[i].err > panels[worst].err) worst = i;
    }
    if (err <= std::max(abs_tol, rel_tol * std::abs(total))) return total;
    if (static_cast<int>(panels.size()) >= max_panels) {
      throw NumericError("adaptive quadrature failed to converge (error " +
                         std::to_string(err) + " after " +
                         std::to_string(panels.size()) + " panels)");
    }
    Panel p = panels[worst];
    const double mid = 0.5 * (p.a + p.b);
    Panel left{p.a, mid, 0, 0}, right{mid, p.b, 0, 0};
    detail::gk15_panel(f, left.a, left.b, left.val, left.err);
    detail::gk15_panel(f, right.a, right.b, right.val, right.err);
    panels[worst] = left;
    panels.push_back(right);
  }
}

}  // namespace ewsim
