#pragma once

#include <Eigen/Dense>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace belief::stats {

struct LmmObservation {
    std::string participant_id;
    double response = 0.0;
    std::map<std::string, double> covariates;
};

struct LmmFit {
    std::vector<std::string> names;  // "(intercept)" first
    Eigen::VectorXd beta;
    Eigen::VectorXd std_errors;
    Eigen::VectorXd z_scores;
    Eigen::VectorXd p_values;  // two-sided, normal reference
    double sigma2_participant = 0.0;
    double sigma2_residual = 0.0;
    double theta = 0.0;  // sigma2_participant / sigma2_residual
    double log_likelihood = 0.0;  // restricted (REML) log-likelihood
    std::size_t n_observations = 0;
    std::size_t n_participants = 0;

    // Index of a coefficient by name; throws std::out_of_range.
    Eigen::Index index_of(const std::string& name) const;
};

/// y = X beta + b[cluster] + e, b ~ N(0, theta * s2), e ~ N(0, s2).
///
/// The REML criterion is profiled over beta and s2, leaving a 1-D problem in
/// theta. Per-cluster sufficient statistics make each evaluation O(K p^2):
/// with H = I + theta Z Z', the block for a cluster of size n has
/// H^-1 = I - w 11', w = theta / (1 + n theta).
class RandomInterceptModel {
public:
    RandomInterceptModel(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                         const Eigen::Ref<const Eigen::VectorXi>& cluster);

    /// Profiled restricted log-likelihood at variance ratio theta >= 0.
    double reml_loglik(double theta) const;

    /// Maximizes reml_loglik over theta in [0, kThetaMax] and returns the GLS
    /// coefficients and variance components at the optimum.
    LmmFit fit() const;

    Eigen::Index n_clusters() const { return cluster_sizes_.size(); }

    static constexpr double kThetaMax = 1e6;
    static constexpr double kMinResidualVariance = 1e-12;

private:
    struct Profile {
        Eigen::VectorXd beta;
        Eigen::MatrixXd xtvx;  // X' H^-1 X
        double rss = 0.0;      // r' H^-1 r
        double log_det_h = 0.0;
        double log_det_xtvx = 0.0;
    };
    Profile profile(double theta) const;

    Eigen::Index n_ = 0;
    Eigen::Index p_ = 0;
    Eigen::MatrixXd xtx_;
    Eigen::VectorXd xty_;
    double yty_ = 0.0;
    Eigen::VectorXd cluster_sizes_;
    Eigen::MatrixXd cluster_x_sums_;  // K x p
    Eigen::VectorXd cluster_y_sums_;
};

/// Matrix-form fit. `cluster` holds 0-based participant indices.
/// Throws DesignError for a rank-deficient X and DomainError for < 2 clusters.
LmmFit fit_random_intercept_lmm(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                                const Eigen::Ref<const Eigen::VectorXi>& cluster, std::vector<std::string> names);

/// Builds X = [1, covariates...] from the observations; participants are
/// indexed in order of first appearance.
LmmFit fit_random_intercept_lmm(std::span<const LmmObservation> observations,
                                std::span<const std::string> fixed_effect_names);

}  // namespace belief::stats
