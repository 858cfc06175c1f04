#pragma once

#include <vector>

namespace kbrel {

struct CorrelationResult {
    double rho = 0.0;
    double p_value = 1.0;  // two-tailed
    int n = 0;
    bool significant = false;  // p < 0.05
};

// Regularized incomplete beta function I_x(a, b), continued-fraction
// evaluation (Lentz). Needed for the Student-t tail behind the Pearson
// p-value.
double incomplete_beta(double a, double b, double x);

// Two-tailed p for a t statistic with nu degrees of freedom:
// p = I_{nu/(nu+t^2)}(nu/2, 1/2).
double student_t_two_tailed_p(double t, double nu);

// Pearson product-moment correlation with the t-test p-value
// t = rho * sqrt((n-2)/(1-rho^2)), n-2 degrees of freedom.
CorrelationResult pearson(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace kbrel
