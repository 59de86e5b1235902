#pragma once

namespace bba::nd {

/// Regularized lower incomplete gamma P(a, x), series/continued-fraction
/// evaluation, absolute error well under 1e-10 over the tested dof range.
double regularized_gamma_p(double a, double x);

/// Upper complement Q(a, x) = 1 - P(a, x).
double regularized_gamma_q(double a, double x);

/// Survival function of the chi-square distribution:
/// P(X > stat) with `dof` degrees of freedom = Q(dof/2, stat/2).
double chi_square_survival(double stat, double dof);

}  // namespace bba::nd
