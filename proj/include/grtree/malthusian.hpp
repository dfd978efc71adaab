#pragma once

#include <cstdint>
#include <vector>

#include "grtree/attach_model.hpp"

namespace grtree {

// Value of the offspring-mean series at lambda together with a rigorous error
// radius: the true series lies within [value - tail_bound, value + tail_bound].
struct RhoHatResult {
  double value = 0.0;
  double tail_bound = 0.0;
  std::uint64_t terms = 0;
};

struct MalthusianSolution {
  double lambda_star = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  // Search-domain floor: rho_hat is only evaluated for lambda above this.
  double domain_lower = 0.0;
  // Diagnostics from the final series evaluation at lambda_star.
  std::uint64_t truncation_depth = 0;
  double tail_bound = 0.0;
};

struct DegreePmf {
  std::vector<double> p;  // p[k-1] is the mass at degree k
  double residual = 0.0;  // 1 - sum p, computed as the running survival product
};

// Evaluates sum_{k>=1} prod_{i=1..k} f(i)/(lambda+f(i)) by direct summation
// plus a two-sided tail enclosure:
//   bounded kinds      geometric bounds from suffix inf/sup of f
//   affine kind        the remainder telescopes exactly to P_T*(T+1+beta)/(lambda/scale-1)
//   sublinear kind     upper: exact envelope sum for scale*i^a <= (lambda/2)i + B,
//                      lower: geometric from f(T+1)
// The returned value is the enclosure midpoint, tail_bound its radius (plus
// rounding slop); summation stops once tail_bound <= tol. Throws ConfigError
// when lambda is not above limsup_bound, std::domain_error for non-total f,
// SeriesError (with the partial sum) at the hard cap of 1e7 terms.
RhoHatResult rho_hat(const AttachmentFunction& f, double lambda, double tol = 1e-12);

// Solves rho_hat(lambda) = 1 by bracketing and bisection. The bracket search
// starts at max(f_star, limsup_bound*(1+1e-9)) + tol, doubles upward while
// rho_hat > 1 and halves toward the domain floor while rho_hat < 1. Throws
// ConfigError("Malthusian condition violated...") when rho_hat never exceeds 1
// inside the admissible domain. Bisection runs to bracket width tol/4 so
// downstream quantities inherit comfortably better than tol accuracy.
MalthusianSolution solve_malthusian(const AttachmentFunction& f, double tol = 1e-9);

// Numeric confirmation of the standing growth assumption: limsup_bound < lambda_star - tol.
bool check_assumption_limsup(const AttachmentFunction& f, const MalthusianSolution& sol,
                             double tol = 1e-9);

// Limit degree distribution p_k = [lambda/(lambda+f(k))] * prod_{i<k} f(i)/(lambda+f(i)).
DegreePmf degree_pmf(const AttachmentFunction& f, double lambda_star, std::uint32_t k_max);

}  // namespace grtree
