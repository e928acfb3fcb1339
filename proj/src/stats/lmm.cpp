#include "belief/stats/lmm.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <unordered_map>

#include "belief/errors.hpp"
#include "belief/stats/normal.hpp"

namespace belief::stats {

Eigen::Index LmmFit::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return static_cast<Eigen::Index>(i);
    }
    throw std::out_of_range("no coefficient named " + name);
}

RandomInterceptModel::RandomInterceptModel(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                           const Eigen::Ref<const Eigen::VectorXd>& y,
                                           const Eigen::Ref<const Eigen::VectorXi>& cluster)
    : n_(X.rows()), p_(X.cols()) {
    if (y.size() != n_ || cluster.size() != n_) throw std::invalid_argument("X, y and cluster differ in length");
    if (p_ == 0) throw DesignError("design matrix has no columns");
    if (n_ <= p_) throw DesignError("need more observations than fixed effects");
    if (!X.allFinite() || !y.allFinite()) throw std::invalid_argument("non-finite values in model data");

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < p_) throw DesignError("design matrix is rank deficient");

    const Eigen::Index k = cluster.size() ? cluster.maxCoeff() + 1 : 0;
    if (cluster.size() && cluster.minCoeff() < 0) throw std::invalid_argument("negative cluster index");
    cluster_sizes_ = Eigen::VectorXd::Zero(k);
    cluster_x_sums_ = Eigen::MatrixXd::Zero(k, p_);
    cluster_y_sums_ = Eigen::VectorXd::Zero(k);
    for (Eigen::Index i = 0; i < n_; ++i) {
        const Eigen::Index c = cluster(i);
        cluster_sizes_(c) += 1.0;
        cluster_x_sums_.row(c) += X.row(i);
        cluster_y_sums_(c) += y(i);
    }
    if ((cluster_sizes_.array() > 0.0).count() < 2) throw DomainError("need at least two participants");

    xtx_ = X.transpose() * X;
    xty_ = X.transpose() * y;
    yty_ = y.squaredNorm();
}

RandomInterceptModel::Profile RandomInterceptModel::profile(double theta) const {
    const Eigen::ArrayXd w = theta / (1.0 + cluster_sizes_.array() * theta);
    Profile pr;
    pr.xtvx = xtx_ - cluster_x_sums_.transpose() * w.matrix().asDiagonal() * cluster_x_sums_;
    const Eigen::VectorXd xtvy = xty_ - cluster_x_sums_.transpose() * (w * cluster_y_sums_.array()).matrix();
    const double ytvy = yty_ - (w * cluster_y_sums_.array().square()).sum();

    Eigen::LLT<Eigen::MatrixXd> llt(pr.xtvx);
    pr.beta = llt.solve(xtvy);
    pr.rss = std::max(ytvy - xtvy.dot(pr.beta), 0.0);
    pr.log_det_h = (1.0 + cluster_sizes_.array() * theta).log().sum();
    pr.log_det_xtvx = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return pr;
}

double RandomInterceptModel::reml_loglik(double theta) const {
    const Profile pr = profile(theta);
    const double dof = static_cast<double>(n_ - p_);
    const double sigma2 = std::max(pr.rss / dof, std::numeric_limits<double>::min());
    return -0.5 * (dof * (1.0 + std::log(2.0 * std::numbers::pi * sigma2)) + pr.log_det_h + pr.log_det_xtvx);
}

LmmFit RandomInterceptModel::fit() const {
    const double dof = static_cast<double>(n_ - p_);
    double theta = 0.0;

    const Profile ols = profile(0.0);
    const bool exact_fit = ols.rss <= 1e-24 * std::max(yty_, 1.0);
    if (!exact_fit) {
        // Coarse grid in log10(theta), then Brent inside the best bracket.
        std::vector<double> grid;
        for (double u = -8.0; u <= std::log10(kThetaMax) + 1e-12; u += 0.25) grid.push_back(u);
        std::size_t best = 0;
        double best_value = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double v = reml_loglik(std::pow(10.0, grid[i]));
            if (v > best_value) {
                best_value = v;
                best = i;
            }
        }
        const int bits = std::numeric_limits<double>::digits / 2;
        if (best == 0) {
            auto neg = [this](double t) { return -reml_loglik(t); };
            auto [t, nv] = boost::math::tools::brent_find_minima(neg, 0.0, std::pow(10.0, grid[1]), bits);
            theta = t;
            best_value = -nv;
            if (reml_loglik(0.0) >= best_value) theta = 0.0;
        } else {
            const double lo = grid[best - 1];
            const double hi = grid[std::min(best + 1, grid.size() - 1)];
            auto neg = [this](double u) { return -reml_loglik(std::pow(10.0, u)); };
            auto [u, nv] = boost::math::tools::brent_find_minima(neg, lo, hi, bits);
            theta = -nv >= best_value ? std::pow(10.0, u) : std::pow(10.0, grid[best]);
        }
        theta = std::clamp(theta, 0.0, kThetaMax);
    }

    const Profile pr = profile(theta);
    LmmFit fit;
    fit.theta = theta;
    fit.beta = pr.beta;
    fit.sigma2_residual = std::max(pr.rss / dof, kMinResidualVariance);
    fit.sigma2_participant = theta * fit.sigma2_residual;
    fit.log_likelihood = reml_loglik(theta);

    const Eigen::MatrixXd cov = fit.sigma2_residual * pr.xtvx.llt().solve(Eigen::MatrixXd::Identity(p_, p_));
    fit.std_errors = cov.diagonal().cwiseSqrt();
    fit.z_scores = fit.beta.cwiseQuotient(fit.std_errors);
    fit.p_values.resize(p_);
    for (Eigen::Index i = 0; i < p_; ++i) fit.p_values(i) = std::min(1.0, 2.0 * normal_sf(std::abs(fit.z_scores(i))));
    fit.n_observations = static_cast<std::size_t>(n_);
    fit.n_participants = static_cast<std::size_t>((cluster_sizes_.array() > 0.0).count());
    return fit;
}

LmmFit fit_random_intercept_lmm(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                                const Eigen::Ref<const Eigen::VectorXi>& cluster, std::vector<std::string> names) {
    if (static_cast<Eigen::Index>(names.size()) != X.cols()) throw std::invalid_argument("one name per column required");
    LmmFit fit = RandomInterceptModel(X, y, cluster).fit();
    fit.names = std::move(names);
    return fit;
}

LmmFit fit_random_intercept_lmm(std::span<const LmmObservation> observations,
                                std::span<const std::string> fixed_effect_names) {
    const auto n = static_cast<Eigen::Index>(observations.size());
    const auto p = static_cast<Eigen::Index>(fixed_effect_names.size()) + 1;
    Eigen::MatrixXd X(n, p);
    Eigen::VectorXd y(n);
    Eigen::VectorXi cluster(n);
    std::unordered_map<std::string, int> index;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& obs = observations[static_cast<std::size_t>(i)];
        X(i, 0) = 1.0;
        for (Eigen::Index c = 1; c < p; ++c) {
            const auto& name = fixed_effect_names[static_cast<std::size_t>(c - 1)];
            auto it = obs.covariates.find(name);
            if (it == obs.covariates.end()) {
                throw std::invalid_argument("observation for " + obs.participant_id + " lacks covariate " + name);
            }
            X(i, c) = it->second;
        }
        y(i) = obs.response;
        auto [it, inserted] = index.try_emplace(obs.participant_id, static_cast<int>(index.size()));
        cluster(i) = it->second;
    }
    if (index.size() < 2) throw DomainError("need at least two participants");
    std::vector<std::string> names{"(intercept)"};
    names.insert(names.end(), fixed_effect_names.begin(), fixed_effect_names.end());
    return fit_random_intercept_lmm(X, y, cluster, std::move(names));
}

}  // namespace belief::stats
