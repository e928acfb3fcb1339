#include "belief/simulation/truncated_normal.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <unsupported/Eigen/LevenbergMarquardt>
#include <unsupported/Eigen/NumericalDiff>

#include "belief/errors.hpp"
#include "belief/stats/normal.hpp"

namespace belief::sim {

using stats::normal_cdf;
using stats::normal_pdf;
using stats::normal_sf;

std::string_view to_string(BoundaryModel m) { return m == BoundaryModel::Truncated ? "truncated" : "censored"; }

BoundaryModel boundary_model_from_string(std::string_view s) {
    if (s == "truncated") return BoundaryModel::Truncated;
    if (s == "censored") return BoundaryModel::Censored;
    throw std::invalid_argument("unknown boundary model \"" + std::string(s) + "\"");
}

namespace {

// P(alpha < Z < beta), taking the difference on the side where it is not lost
// to cancellation.
double mass_between(double alpha, double beta) {
    if (alpha > 0.0) return normal_sf(alpha) - normal_sf(beta);
    return normal_cdf(beta) - normal_cdf(alpha);
}

}  // namespace

Moments truncated_normal_moments(double mu, double sigma, double lo, double hi) {
    if (sigma <= 0.0) return {std::clamp(mu, lo, hi), 0.0};
    const double alpha = (lo - mu) / sigma;
    const double beta = (hi - mu) / sigma;
    const double z = mass_between(alpha, beta);
    if (!(z > 1e-280)) return {mu < lo ? lo : hi, 0.0};

    const double pa = normal_pdf(alpha);
    const double pb = normal_pdf(beta);
    const double r = (pa - pb) / z;
    const double var = sigma * sigma * (1.0 + (alpha * pa - beta * pb) / z - r * r);
    return {std::clamp(mu + sigma * r, lo, hi), std::sqrt(std::max(var, 0.0))};
}

Moments censored_normal_moments(double mu, double sigma, double lo, double hi) {
    if (sigma <= 0.0) return {std::clamp(mu, lo, hi), 0.0};
    const double alpha = (lo - mu) / sigma;
    const double beta = (hi - mu) / sigma;
    const double below = normal_cdf(alpha);
    const double above = normal_sf(beta);
    const double z = mass_between(alpha, beta);
    const double pa = normal_pdf(alpha);
    const double pb = normal_pdf(beta);

    const double inner1 = mu * z + sigma * (pa - pb);
    const double inner2 = (mu * mu + sigma * sigma) * z + 2.0 * mu * sigma * (pa - pb) +
                          sigma * sigma * (alpha * pa - beta * pb);
    const double m1 = lo * below + hi * above + inner1;
    const double m2 = lo * lo * below + hi * hi * above + inner2;
    return {m1, std::sqrt(std::max(m2 - m1 * m1, 0.0))};
}

Moments boundary_moments(BoundaryModel model, double mu, double sigma, double lo, double hi) {
    return model == BoundaryModel::Truncated ? truncated_normal_moments(mu, sigma, lo, hi)
                                             : censored_normal_moments(mu, sigma, lo, hi);
}

double sample_truncated_normal(double mu, double sigma, double lo, double hi, Rng& rng) {
    if (sigma <= 0.0) return std::clamp(mu, lo, hi);
    std::normal_distribution<double> normal(mu, sigma);
    double x = mu;
    for (int attempt = 0; attempt < kMaxRejectionAttempts; ++attempt) {
        x = normal(rng);
        if (x >= lo && x <= hi) return x;
    }
    return std::clamp(x, lo, hi);
}

double sample_censored_normal(double mu, double sigma, double lo, double hi, Rng& rng) {
    if (sigma <= 0.0) return std::clamp(mu, lo, hi);
    std::normal_distribution<double> normal(mu, sigma);
    return std::clamp(normal(rng), lo, hi);
}

double sample_boundary_normal(BoundaryModel model, double mu, double sigma, double lo, double hi, Rng& rng) {
    return model == BoundaryModel::Truncated ? sample_truncated_normal(mu, sigma, lo, hi, rng)
                                             : sample_censored_normal(mu, sigma, lo, hi, rng);
}

namespace {

// Residual of the restricted moments against the target, in (mu, log sigma).
// The parameters are boxed so a runaway step cannot push the tails into
// underflow.
struct MomentResidual : Eigen::DenseFunctor<double> {
    MomentResidual(BoundaryModel model, double mean, double sd, double lo, double hi)
        : Eigen::DenseFunctor<double>(2, 2), model(model), mean(mean), sd(sd), lo(lo), hi(hi) {}

    void unpack(const InputType& x, double& mu, double& sigma) const {
        const double w = hi - lo;
        mu = std::clamp(x(0), lo - 2.0 * w, hi + 2.0 * w);
        sigma = std::exp(std::clamp(x(1), std::log(1e-4 * w), std::log(50.0 * w)));
    }

    int operator()(const InputType& x, ValueType& f) const {
        double mu, sigma;
        unpack(x, mu, sigma);
        const Moments m = boundary_moments(model, mu, sigma, lo, hi);
        f(0) = m.mean - mean;
        f(1) = m.sd - sd;
        return 0;
    }

    BoundaryModel model;
    double mean, sd, lo, hi;
};

}  // namespace

CalibratedNormal fit_boundary_normal(BoundaryModel model, double target_mean, double target_sd,
                                     const ScaleBounds& bounds) {
    CalibratedNormal best;
    best.model = model;
    if (target_sd <= 0.0) {
        best.mu = std::clamp(target_mean, bounds.a, bounds.b);
        best.sigma = 0.0;
        best.mean_residual = best.mu - target_mean;
        best.sd_residual = -target_sd;
        return best;
    }

    MomentResidual residual(model, target_mean, target_sd, bounds.a, bounds.b);
    Eigen::NumericalDiff<MomentResidual, Eigen::Central> numeric(residual);
    const double mid = 0.5 * (bounds.a + bounds.b);
    const Eigen::Vector2d starts[] = {
        {target_mean, std::log(target_sd)},
        {target_mean + 2.0 * (target_mean - mid), std::log(2.0 * target_sd)},
        {target_mean, std::log(4.0 * target_sd)},
    };

    double best_norm = std::numeric_limits<double>::infinity();
    for (const auto& start : starts) {
        Eigen::VectorXd x = start;
        Eigen::LevenbergMarquardt<decltype(numeric)> lm(numeric);
        lm.setXtol(1e-14);
        lm.setFtol(1e-14);
        lm.setMaxfev(4000);
        lm.minimize(x);

        Eigen::VectorXd f(2);
        residual(x, f);
        const double norm = f.cwiseAbs().maxCoeff();
        if (norm < best_norm) {
            best_norm = norm;
            residual.unpack(x, best.mu, best.sigma);
            best.mean_residual = f(0);
            best.sd_residual = f(1);
        }
        if (best_norm < 1e-10) break;
    }
    return best;
}

CalibratedNormal calibrate_moments(double target_mean, double target_sd, const ScaleBounds& bounds,
                                   const CalibrationTolerance& tolerance) {
    if (!bounds.valid()) throw ConfigurationError("scale bounds must satisfy a < b");
    if (target_sd < 0.0) throw ConfigurationError("target sd must be non-negative");

    auto worst = [](const CalibratedNormal& c) { return std::max(std::abs(c.mean_residual), std::abs(c.sd_residual)); };

    CalibratedNormal fit = fit_boundary_normal(BoundaryModel::Truncated, target_mean, target_sd, bounds);
    if (worst(fit) > tolerance.exact) {
        CalibratedNormal censored = fit_boundary_normal(BoundaryModel::Censored, target_mean, target_sd, bounds);
        if (worst(censored) < worst(fit)) fit = censored;
    }
    if (std::abs(fit.mean_residual) > tolerance.mean || std::abs(fit.sd_residual) > tolerance.sd) {
        throw CalibrationError("cannot reach mean " + std::to_string(target_mean) + ", sd " +
                                   std::to_string(target_sd) + " on the scale (residual mean " +
                                   std::to_string(fit.mean_residual) + ", sd " + std::to_string(fit.sd_residual) + ")",
                               worst(fit));
    }
    return fit;
}

}  // namespace belief::sim
