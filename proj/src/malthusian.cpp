#include "grtree/malthusian.hpp"

#include <cmath>
#include <limits>

#include "grtree/errors.hpp"

namespace grtree {

namespace {

constexpr std::uint64_t kTermCap = 10'000'000;
constexpr std::uint64_t kMinTerms = 16;

struct TailEnclosure {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
};

// Sum over j >= 1 of prod_{i=k+1..k+j} g(i)/(lambda+g(i)) for the linear
// envelope g(i) = L*i + B. With b = B/L and r = lambda/L the product is a
// ratio of Gamma factors and the sum telescopes exactly to (k+1+b)/(r-1).
double linear_envelope_tail(double L, double B, double lambda, std::uint64_t k) {
  double r = lambda / L;
  if (r <= 1.0) return std::numeric_limits<double>::infinity();
  double b = B / L;
  return (static_cast<double>(k) + 1.0 + b) / (r - 1.0);
}

double geometric_tail(double f_value, double lambda) {
  double q = f_value / (lambda + f_value);
  return q / (1.0 - q);  // = f_value / lambda
}

// Two-sided bounds on the remaining factor-product sum past index k. Every
// factor x/(lambda+x) is increasing in x, so envelopes of f give envelopes of
// the tail; each device below is an exact sum for its envelope.
TailEnclosure tail_enclosure(const AttachmentFunction& f, double lambda, std::uint64_t k) {
  TailEnclosure t;
  t.lo = geometric_tail(f.suffix_inf(k), lambda);
  switch (f.kind()) {
    case AttachKind::uniform:
    case AttachKind::constant:
    case AttachKind::custom_table:
      t.hi = geometric_tail(f.suffix_sup(k), lambda);
      break;
    case AttachKind::affine: {
      // f(i) = scale*(i + beta) exactly, so the telescoped sum is the tail.
      double v = linear_envelope_tail(f.scale(), f.scale() * f.beta(), lambda, k);
      t.lo = v;
      t.hi = v;
      break;
    }
    case AttachKind::sublinear: {
      // scale*i^a <= (lambda/2)*i + B for all i >= 1 with the crossover
      // intercept B = scale*(2*scale/lambda)^(a/(1-a)).
      double a = f.alpha(), s = f.scale();
      double B = s * std::pow(2.0 * s / lambda, a / (1.0 - a));
      t.hi = linear_envelope_tail(lambda / 2.0, B, lambda, k);
      break;
    }
  }
  return t;
}

// Decides whether the series exceeds 1 without resolving its value. Partial
// sums are rigorous lower bounds and partial + enclosed tail a rigorous upper
// bound, so away from the root the comparison settles after a few terms even
// where the full series is astronomically large (lambda near the domain
// floor) and no absolute tolerance could be met.
bool series_exceeds_one(const AttachmentFunction& f, double lambda, double tol) {
  double sum = 0.0, comp = 0.0;
  double prod = 1.0;
  std::uint64_t k = 0;
  while (true) {
    ++k;
    double fk = f.evaluate(k);
    prod *= fk / (lambda + fk);
    double y = prod - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    if (sum > 1.0) return true;
    if (k >= kMinTerms) {
      TailEnclosure tail = tail_enclosure(f, lambda, k);
      if (sum + prod * tail.hi < 1.0) return false;
      double mid = prod * 0.5 * (tail.lo + tail.hi);
      double radius = prod * 0.5 * (tail.hi - tail.lo) +
                      8.0 * std::numeric_limits<double>::epsilon() * (sum + prod * tail.hi + 1.0);
      if (radius <= tol && std::isfinite(mid)) return sum + mid > 1.0;
    }
    if (prod == 0.0) return false;  // series terminated with sum <= 1
    if (k >= kTermCap)
      throw SeriesError("series tail bound did not close within the term cap", sum, k);
  }
}

}  // namespace

RhoHatResult rho_hat(const AttachmentFunction& f, double lambda, double tol) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be positive and finite");
  if (!(tol > 0.0)) throw ConfigError("tol must be positive");
  if (!f.total())
    throw std::domain_error("series needs f(i) for every i; reject-extension table is not total");
  if (lambda <= f.limsup_bound() * (1.0 + 1e-9))
    throw ConfigError("lambda must exceed limsup_bound; series diverges at or below it");

  double sum = 0.0, comp = 0.0;  // Kahan-compensated partial sum
  double prod = 1.0;
  std::uint64_t k = 0;
  while (true) {
    ++k;
    double fk = f.evaluate(k);
    prod *= fk / (lambda + fk);
    double y = prod - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    if (k >= kMinTerms) {
      TailEnclosure tail = tail_enclosure(f, lambda, k);
      double mid = prod * 0.5 * (tail.lo + tail.hi);
      double radius = prod * 0.5 * (tail.hi - tail.lo) +
                      8.0 * std::numeric_limits<double>::epsilon() * (sum + prod * tail.hi + 1.0);
      if (radius <= tol && std::isfinite(mid)) {
        return {sum + mid, radius, k};
      }
    }
    if (prod == 0.0) return {sum, tol * 1e-6, k};
    if (k >= kTermCap)
      throw SeriesError("series tail bound did not close within the term cap", sum, k);
  }
}

MalthusianSolution solve_malthusian(const AttachmentFunction& f, double tol) {
  if (!(tol > 0.0)) throw ConfigError("tol must be positive");
  double rho_tol = std::min(1e-12, tol * 1e-3);
  double domain_lower = f.limsup_bound() * (1.0 + 1e-9);
  double lambda0 = std::max(f.f_star(), domain_lower) + tol;

  auto gt_one = [&](double lambda) { return series_exceeds_one(f, lambda, rho_tol); };

  double lo = 0.0, hi = 0.0;
  if (gt_one(lambda0)) {
    lo = lambda0;
    hi = lambda0;
    for (int i = 0; i < 200; ++i) {
      hi = domain_lower + 2.0 * (hi - domain_lower);
      if (!gt_one(hi)) break;
      lo = hi;
      if (i == 199) throw ConfigError("failed to bracket the Malthusian root from above");
    }
  } else {
    // Walk toward the domain floor looking for rho > 1; if the gap closes
    // first, the mean-offspring series never reaches 1 on the admissible
    // domain and no Malthusian parameter exists for the declared model.
    hi = lambda0;
    lo = lambda0;
    bool found = false;
    while (lo - domain_lower > tol * 1e-3) {
      lo = domain_lower + 0.5 * (lo - domain_lower);
      if (gt_one(lo)) {
        found = true;
        break;
      }
      hi = lo;
    }
    if (!found)
      throw ConfigError(
          "Malthusian condition violated: rho_hat stays below 1 on the admissible domain");
  }

  // Keep the bracket a factor below tol so midpoint error is ~tol/8.
  while (hi - lo > tol * 0.25) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (gt_one(mid)) lo = mid;
    else hi = mid;
  }

  MalthusianSolution sol;
  sol.lambda_star = 0.5 * (lo + hi);
  sol.bracket_lo = lo;
  sol.bracket_hi = hi;
  sol.domain_lower = domain_lower;
  RhoHatResult final_eval = rho_hat(f, sol.lambda_star, rho_tol);
  sol.truncation_depth = final_eval.terms;
  sol.tail_bound = final_eval.tail_bound;
  return sol;
}

bool check_assumption_limsup(const AttachmentFunction& f, const MalthusianSolution& sol,
                             double tol) {
  return f.limsup_bound() < sol.lambda_star - tol;
}

DegreePmf degree_pmf(const AttachmentFunction& f, double lambda_star, std::uint32_t k_max) {
  if (k_max == 0) throw ConfigError("k_max must be >= 1");
  if (!(lambda_star > 0.0)) throw ConfigError("lambda_star must be positive");
  DegreePmf out;
  out.p.reserve(k_max);
  double survival = 1.0;  // prod_{i<=k} f(i)/(lambda+f(i)), exactly 1 - sum_{j<=k} p_j
  for (std::uint32_t k = 1; k <= k_max; ++k) {
    double fk = f.evaluate(k);
    out.p.push_back(survival * lambda_star / (lambda_star + fk));
    survival *= fk / (lambda_star + fk);
  }
  out.residual = survival;
  return out;
}

}  // namespace grtree
