#pragma once

namespace robustlr::calib {

// Absolute constants that the asymptotic analysis leaves unspecified.
// Values below were measured once with `robustlr calibrate --seed 20240901`
// on the reference parameter grid and then frozen here; tests and the
// acceptance suite use these frozen values, never re-measured ones.

/// Disagreement bound for the medium-eta coupling: mean <= 2 + K eps sqrt(d).
inline constexpr double kIntermEtaK = 1.6;

/// Disagreement bound for the small-eta coupling:
/// mean <= K (E/sigma + sqrt(d) E / B).
inline constexpr double kSmallEtaK = 0.7;

/// Error-rate constants for the estimator guarantees, error <= const * rate.
inline constexpr double kA1RateConstant = 10.0;
inline constexpr double kA2RateConstant = 10.0;

/// Branch-selection constants of the unified estimator (C << C' << C'').
inline constexpr double kMetaC = 3.0;
inline constexpr double kMetaCPrime = 5.0;
inline constexpr double kMetaCDoublePrime = 50.0;

/// Default trim margin: the per-coordinate corruption rate of y*x products is
/// at most 2 eta; trimming uses 2 eta * (1 + kTrimMargin) per side.
inline constexpr double kTrimMargin = 0.5;

/// Iterations of the residual-trimming loop in estimator A1.
inline constexpr int kA1TrimIterations = 20;

}  // namespace robustlr::calib
