#pragma once

#include <span>

namespace mvfill {

double mean(std::span<const double> values);
// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
double sample_std(std::span<const double> values);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation
// accurate to ~1e-14 for the parameter ranges used here.
double incomplete_beta(double x, double a, double b);

// Two-sided tail probability P(|T| >= |t|) of Student's t with `df` degrees
// of freedom.
double student_t_two_sided_p(double t, double df);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  double mean_difference = 0.0;
  int df = 0;
  bool significant = false;
  // All differences were equal. Such a result is significant (p = 0) unless
  // the common difference is zero.
  bool zero_variance = false;
};

// Two-sided paired t-test on a - b at the given significance level.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b,
                          double alpha = 0.05);

}  // namespace mvfill
