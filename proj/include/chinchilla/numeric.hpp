#pragma once

#include <span>
#include <vector>

namespace chinchilla {

// n values 10^lo_exp ... 10^hi_exp, equally spaced in the exponent (numpy's
// logspace). The midpoint of an odd-length symmetric grid is exactly 1.
std::vector<double> logspace(double lo_exp, double hi_exp, int n);

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r_squared = 0.0;
};

// Ordinary least squares y = intercept + slope*x. Throws InputError when the
// sizes differ, fewer than two points are given, or every x is identical.
LinearFit ols(std::span<const double> xs, std::span<const double> ys);

// Linear-interpolation quantile (numpy's default); q in [0, 1].
double quantile(std::vector<double> values, double q);

// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double sample_sd(std::span<const double> values);

}  // namespace chinchilla
