#include "chinchilla/numeric.hpp"

#include <algorithm>
#include <cmath>

#include "chinchilla/errors.hpp"

namespace chinchilla {

std::vector<double> logspace(double lo_exp, double hi_exp, int n) {
  if (n <= 0) throw InputError("logspace needs at least one point");
  std::vector<double> out(static_cast<std::size_t>(n));
  if (n == 1) {
    out[0] = std::pow(10.0, lo_exp);
    return out;
  }
  const double span = hi_exp - lo_exp;
  for (int i = 0; i < n; ++i) {
    const double exponent = lo_exp + span * i / static_cast<double>(n - 1);
    out[static_cast<std::size_t>(i)] = std::pow(10.0, exponent);
  }
  return out;
}

LinearFit ols(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw InputError("ols: x and y sizes differ");
  if (xs.size() < 2) throw InputError("ols: need at least two points");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw InputError("ols: degenerate grid (all x identical)");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InputError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

double sample_sd(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

}  // namespace chinchilla
