#include "gd/weibull.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "gd/errors.hpp"

namespace gd {

double WeibullModel::survival(double x) const {
  if (x <= 0.0) return 1.0;
  return std::exp(-std::pow(x / scale, shape));
}

double WeibullModel::logPdf(double x) const {
  const double z = x / scale;
  return std::log(shape / scale) + (shape - 1.0) * std::log(z) -
         std::pow(z, shape);
}

double WeibullModel::logLikelihood(std::span<const double> samples) const {
  double sum = 0.0;
  for (double x : samples) sum += logPdf(x);
  return sum;
}

namespace {

constexpr double kShapeTolerance = 1e-8;
constexpr int kMaxIterations = 200;

struct Score {
  double value;       // profile score g(k)
  double derivative;  // g'(k) > 0
};

// Samples are pre-divided by their maximum, so every log is <= 0 and
// y^k never overflows.
Score profileScore(const std::vector<double>& logs, double meanLog, double k) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (double l : logs) {
    const double w = std::exp(k * l);
    s0 += w;
    s1 += w * l;
    s2 += w * l * l;
  }
  const double m1 = s1 / s0;
  return {m1 - 1.0 / k - meanLog, (s2 / s0 - m1 * m1) + 1.0 / (k * k)};
}

}  // namespace

WeibullModel fitWeibull(std::span<const double> samples) {
  if (samples.empty()) throw InvalidInput("fitWeibull needs samples");
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (double x : samples) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw InvalidInput("Weibull samples must be positive and finite");
    }
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  if (samples.size() == 1 || (hi - lo) <= 1e-12 * hi) {
    double mean = 0.0;
    for (double x : samples) mean += x;
    return {kDegenerateShape, mean / static_cast<double>(samples.size())};
  }

  std::vector<double> logs;
  logs.reserve(samples.size());
  double meanLog = 0.0;
  for (double x : samples) {
    logs.push_back(std::log(x / hi));
    meanLog += logs.back();
  }
  meanLog /= static_cast<double>(samples.size());

  double k = 1.0;
  double bracketLo = 0.0;
  double bracketHi = std::numeric_limits<double>::infinity();
  for (int it = 0; it < kMaxIterations; ++it) {
    const Score s = profileScore(logs, meanLog, k);
    if (s.value == 0.0) break;
    if (s.value < 0.0) {
      bracketLo = k;
    } else {
      bracketHi = k;
    }
    double next = k - s.value / s.derivative;
    if (!(next > bracketLo && next < bracketHi)) {
      next = std::isfinite(bracketHi) ? 0.5 * (bracketLo + bracketHi) : 2.0 * k;
    }
    const double step = std::abs(next - k);
    k = next;
    if (step < kShapeTolerance) break;
  }

  double s0 = 0.0;
  for (double l : logs) s0 += std::exp(k * l);
  const double scale =
      hi * std::pow(s0 / static_cast<double>(samples.size()), 1.0 / k);
  return {k, scale};
}

}  // namespace gd
