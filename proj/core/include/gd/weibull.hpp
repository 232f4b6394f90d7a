#pragma once

#include <span>

namespace gd {

/// Two-parameter Weibull with survival S(x) = exp(-(x/scale)^shape).
struct WeibullModel {
  double shape = 1.0;
  double scale = 1.0;

  double survival(double x) const;
  double logPdf(double x) const;
  double logLikelihood(std::span<const double> samples) const;

  bool operator==(const WeibullModel&) const = default;
};

/// Shape used when all samples coincide (or there is only one).
inline constexpr double kDegenerateShape = 20.0;

/// Maximum-likelihood fit. Shape is the root of the profile score
/// equation, found by safeguarded Newton from shape 1 (tolerance 1e-8,
/// at most 200 steps); scale is then (mean x^shape)^(1/shape).
/// Degenerate samples give {kDegenerateShape, common value}.
/// Throws InvalidInput on empty input or any sample <= 0 / non-finite.
WeibullModel fitWeibull(std::span<const double> samples);

}  // namespace gd
