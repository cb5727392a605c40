#pragma once

#include "cclock/delay.hpp"

namespace cclock {

struct SolverDiagnostics {
  int iterations = 0;
  double residual = 0.0;
};

struct ThresholdSolution {
  double value;
  SolverDiagnostics diagnostics;
};

/// Security threshold p_c: root of (1-p) E R_p - 1 on [0.01, 0.999].
ThresholdSolution p_critical(const DelaySpec& delay, double tol = 1e-12);

/// Series F(z) = sum_{r>=1} prod_{i=1}^{r} ((1-p)/z + p P(xi > i)).
double tilt_series(double p, const DelaySpec& delay, double z, double eps = 1e-15);

/// Closed bracket [(1-p)/p, min(1, (1-p)/(p P(xi=1)))] containing z_*.
struct Bracket {
  double lo, hi;
};
Bracket z_star_bracket(double p, const DelaySpec& delay);

/// Tilt z_*: F(z_*) = p/(1-p). Throws PreconditionError when p <= p_c.
ThresholdSolution z_star(double p, const DelaySpec& delay, double tol = 1e-12);

/// E z^{-J_p} by the direct series. Cross-checks the tilted-renewal form.
double j_transform(double p, const DelaySpec& delay, double z);

/// E z^{-J_p} as E (p_hat/p)^{-R_{p_hat}} with p_hat = pz/(1-p+pz).
double j_transform_tilted(double p, const DelaySpec& delay, double z);

/// Cycle-count decay rate gamma = (1-j_0)/(1-j_0 z_*).
double gamma_rate(double p, const DelaySpec& delay, double tol = 1e-12);

struct ThresholdReport {
  double p;
  DelaySpec delay;
  double p_c;
  double z_star;
  double j0;
  double gamma;
  int solver_iters;           // p_c plus z_* bisection steps
  double p_c_residual;        // (1-p_c) E R_{p_c} - 1
  double z_star_residual;     // F(z_*) - p/(1-p)
  double transform_residual;  // z_* E z_*^{-J} - 1
};

/// Solves p_c, z_*, j_0 and gamma for one (p, delay) pair.
ThresholdReport solve_thresholds(double p, const DelaySpec& delay, double tol = 1e-12);

/// Rebuilds gamma from the report's j0 and a (possibly perturbed) z_*.
double gamma_from(double j0, double z_star);

}  // namespace cclock
