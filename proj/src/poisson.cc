// Poisson tail probabilities through the regularized incomplete gamma
// function, evaluated in log space.
//
// With a = k + 1 and x = lambda:
//   P(X <= k) = Q(a, x)   (upper regularized gamma)
//   P(X >  k) = P(a, x)   (lower regularized gamma)
// The prefactors x^a e^-x / Gamma(a) are Poisson probabilities, computed with
// the saddle-point form (Stirling remainder plus deviance) so they keep full
// relative precision for large k and lambda.

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "cubelens/deviation.h"

namespace cubelens {

namespace {

constexpr double kLogSqrt2Pi = 0.918938533204672741780329736406;
constexpr double kEpsilon = 1e-16;
constexpr double kTiny = 1e-300;

// log(k!) - [(k + 1/2) log k - k + log sqrt(2 pi)]
double StirlingRemainder(double n) {
  if (n <= 15.0) {
    return std::lgamma(n + 1.0) - (n + 0.5) * std::log(n) + n - kLogSqrt2Pi;
  }
  constexpr double s0 = 1.0 / 12.0;
  constexpr double s1 = 1.0 / 360.0;
  constexpr double s2 = 1.0 / 1260.0;
  constexpr double s3 = 1.0 / 1680.0;
  constexpr double s4 = 1.0 / 1188.0;
  const double nn = n * n;
  return (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / n;
}

// x log(x / m) + m - x without cancellation when x is close to m.
double Deviance(double x, double m) {
  if (std::fabs(x - m) < 0.1 * (x + m)) {
    double v = (x - m) / (x + m);
    double s = (x - m) * v;
    double ej = 2.0 * x * v;
    const double v2 = v * v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v2;
      const double next = s + ej / (2 * j + 1);
      if (next == s) return next;
      s = next;
    }
    return s;
  }
  return x * std::log(x / m) + m - x;
}

void CheckLambda(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("Poisson intensity must be finite and non-negative, got " +
                                std::to_string(lambda));
  }
}

std::size_t IterationBudget(double a) {
  return 1000 + static_cast<std::size_t>(50.0 * std::sqrt(a));
}

// log P(a, x) by the power series; converges fastest for x < a + 1.
double LogLowerSeries(std::uint64_t k, double x) {
  const double a = static_cast<double>(k) + 1.0;
  double term = 1.0;
  double sum = 1.0;
  const std::size_t budget = IterationBudget(a);
  for (std::size_t n = 1; n < budget; ++n) {
    term *= x / (a + static_cast<double>(n));
    sum += term;
    if (term < sum * kEpsilon) break;
  }
  return LogPoissonPmf(k + 1, x) + std::log(sum);
}

// log Q(a, x) by the continued fraction (modified Lentz); for x >= a + 1.
double LogUpperFraction(std::uint64_t k, double x) {
  const double a = static_cast<double>(k) + 1.0;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  const std::size_t budget = IterationBudget(a);
  for (std::size_t i = 1; i < budget; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEpsilon) break;
  }
  return std::log(x) + LogPoissonPmf(k, x) + std::log(h);
}

bool UseSeries(std::uint64_t k, double lambda) {
  return lambda < static_cast<double>(k) + 2.0;
}

}  // namespace

double LogPoissonPmf(std::uint64_t k, double lambda) {
  CheckLambda(lambda);
  if (lambda == 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  if (k == 0) return -lambda;
  const double x = static_cast<double>(k);
  return -StirlingRemainder(x) - Deviance(x, lambda) - 0.5 * std::log(2.0 * std::numbers::pi * x);
}

double LogPoissonCdf(std::uint64_t k, double lambda) {
  CheckLambda(lambda);
  if (lambda == 0.0) return 0.0;
  if (k == 0) return -lambda;
  if (UseSeries(k, lambda)) return std::log1p(-std::exp(LogLowerSeries(k, lambda)));
  return LogUpperFraction(k, lambda);
}

double LogPoissonSurvival(std::uint64_t k, double lambda) {
  CheckLambda(lambda);
  if (lambda == 0.0) return -std::numeric_limits<double>::infinity();
  if (UseSeries(k, lambda)) return LogLowerSeries(k, lambda);
  return std::log1p(-std::exp(LogUpperFraction(k, lambda)));
}

double PoissonCdf(std::uint64_t k, double lambda) { return std::exp(LogPoissonCdf(k, lambda)); }

}  // namespace cubelens
