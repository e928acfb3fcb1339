#pragma once

#include <string_view>

#include "belief/core_model.hpp"
#include "belief/rng.hpp"

namespace belief::sim {

/// How a latent Normal(mu, sigma) is kept on the scale: rejection to [lo, hi]
/// (truncated) or clamping to the nearest bound (censored, with point masses).
enum class BoundaryModel { Truncated, Censored };

std::string_view to_string(BoundaryModel m);
BoundaryModel boundary_model_from_string(std::string_view s);

struct Moments {
    double mean = 0.0;
    double sd = 0.0;
};

/// Closed-form moments of Normal(mu, sigma) restricted to [lo, hi].
Moments truncated_normal_moments(double mu, double sigma, double lo, double hi);

/// Closed-form moments of clamp(Normal(mu, sigma), lo, hi).
Moments censored_normal_moments(double mu, double sigma, double lo, double hi);

Moments boundary_moments(BoundaryModel model, double mu, double sigma, double lo, double hi);

constexpr int kMaxRejectionAttempts = 10000;

/// Rejection sampler; after kMaxRejectionAttempts misses it clamps the last draw.
double sample_truncated_normal(double mu, double sigma, double lo, double hi, Rng& rng);

double sample_censored_normal(double mu, double sigma, double lo, double hi, Rng& rng);

double sample_boundary_normal(BoundaryModel model, double mu, double sigma, double lo, double hi, Rng& rng);

struct CalibratedNormal {
    double mu = 0.0;
    double sigma = 0.0;
    BoundaryModel model = BoundaryModel::Truncated;
    double mean_residual = 0.0;  // achieved mean - target mean
    double sd_residual = 0.0;
};

struct CalibrationTolerance {
    double mean = 0.02;
    double sd = 0.03;
    double exact = 1e-6;  // residual below which a family counts as an exact match
};

/// Solves for latent (mu, sigma) whose restricted moments hit (target_mean,
/// target_sd) in the given family. Never throws; the residuals say how close
/// it got.
CalibratedNormal fit_boundary_normal(BoundaryModel model, double target_mean, double target_sd,
                                     const ScaleBounds& bounds);

/// Truncated family first; the censored family is used when the truncated one
/// cannot reach the target exactly. Throws CalibrationError when the better of
/// the two misses the tolerance.
CalibratedNormal calibrate_moments(double target_mean, double target_sd, const ScaleBounds& bounds,
                                   const CalibrationTolerance& tolerance = {});

}  // namespace belief::sim
