#include "bba/nd/special.hpp"

#include <cmath>
#include <limits>

#include "bba/error.hpp"

namespace bba::nd {

namespace {

constexpr int kMaxIter = 10000;
constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;

// Lower series: P(a,x) = x^a e^-x / Gamma(a) * sum x^n / (a (a+1) ... (a+n)).
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int n = 0; n < kMaxIter; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) break;
  }
  const double log_prefix = a * std::log(x) - x - std::lgamma(a);
  return sum * std::exp(log_prefix);
}

// Upper continued fraction (modified Lentz): Q(a,x).
double gamma_q_cf(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  const double log_prefix = a * std::log(x) - x - std::lgamma(a);
  return std::exp(log_prefix) * h;
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  if (a <= 0.0) throw ContractViolation("gamma_p: a must be > 0");
  if (x < 0.0) throw ContractViolation("gamma_p: x must be >= 0");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double regularized_gamma_q(double a, double x) {
  if (a <= 0.0) throw ContractViolation("gamma_q: a must be > 0");
  if (x < 0.0) throw ContractViolation("gamma_q: x must be >= 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi_square_survival(double stat, double dof) {
  if (dof <= 0.0) throw ContractViolation("chi_square_survival: dof must be > 0");
  if (stat <= 0.0) return 1.0;
  return regularized_gamma_q(dof / 2.0, stat / 2.0);
}

}  // namespace bba::nd
