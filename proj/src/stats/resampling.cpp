#include "belief/stats/resampling.hpp"

#include <cmath>

#include "belief/errors.hpp"
#include "belief/rng.hpp"

namespace belief::stats {

namespace {

double sd_difference(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return sample_sd(a) - sample_sd(b); }

}  // namespace

TestResult permutation_variance_test(const Eigen::Ref<const Eigen::VectorXd>& judgements,
                                     const Eigen::Ref<const Eigen::VectorXd>& beliefs, bool paired_by_participant,
                                     std::size_t reps, std::uint64_t seed) {
    if (reps < kMinPermutationReps) throw ConfigurationError("permutation test needs at least 100 replicates");
    if (paired_by_participant && judgements.size() != beliefs.size()) {
        throw std::invalid_argument("paired permutation test needs equal-length samples");
    }
    if (judgements.size() < 2 || beliefs.size() < 2) throw DomainError("need at least two values per sample");

    const Eigen::VectorXd j = judgements;
    const Eigen::VectorXd b = beliefs;
    const double observed = sd_difference(j, b);
    const double tol = 1e-12 * (1.0 + std::abs(observed));

    std::size_t at_least = 0;
    Eigen::VectorXd pj, pb;
    if (paired_by_participant) {
        pj.resize(j.size());
        pb.resize(b.size());
        for (std::size_t r = 0; r < reps; ++r) {
            Rng rng = substream(seed, {r});
            for (Eigen::Index i = 0; i < j.size(); ++i) {
                const bool swap = rng.coin();
                pj(i) = swap ? b(i) : j(i);
                pb(i) = swap ? j(i) : b(i);
            }
            if (sd_difference(pj, pb) >= observed - tol) ++at_least;
        }
    } else {
        Eigen::VectorXd pool(j.size() + b.size());
        pool << j, b;
        for (std::size_t r = 0; r < reps; ++r) {
            Rng rng = substream(seed, {r});
            Eigen::VectorXd shuffled = pool;
            for (Eigen::Index i = shuffled.size(); i > 1; --i) {
                std::swap(shuffled(i - 1), shuffled(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(i)))));
            }
            pj = shuffled.head(j.size());
            pb = shuffled.tail(b.size());
            if (sd_difference(pj, pb) >= observed - tol) ++at_least;
        }
    }

    TestResult result;
    result.method = paired_by_participant ? "permutation_variance_test_paired" : "permutation_variance_test_pooled";
    result.statistic = observed;
    result.p_value = static_cast<double>(at_least + 1) / static_cast<double>(reps + 1);
    result.sidedness = Sidedness::OneSidedGreater;
    result.n = {static_cast<std::size_t>(j.size()), static_cast<std::size_t>(b.size())};
    return result;
}

BootstrapCurve bootstrap_rmse_curve(const BootstrapPopulation& population, const BootstrapOptions& options) {
    const Eigen::Index rows = population.judgements.rows();
    const Eigen::Index items = population.judgements.cols();
    if (rows == 0 || items == 0) throw DomainError("bootstrap population is empty");
    if (population.beliefs.rows() != rows || population.beliefs.cols() != items) {
        throw std::invalid_argument("judgement and belief tables differ in shape");
    }
    if (options.n_max == 0 || options.reps == 0) throw ConfigurationError("n_max and reps must be positive");

    std::vector<Eigen::Index> pool;
    if (options.pool.group) {
        if (static_cast<Eigen::Index>(population.groups.size()) != rows) {
            throw std::invalid_argument("group-restricted bootstrap needs one group label per participant");
        }
        for (Eigen::Index i = 0; i < rows; ++i) {
            if (population.groups[static_cast<std::size_t>(i)] == *options.pool.group) pool.push_back(i);
        }
        if (pool.empty()) throw DomainError("group " + *options.pool.group + " absent from the bootstrap population");
    } else {
        pool.resize(static_cast<std::size_t>(rows));
        for (Eigen::Index i = 0; i < rows; ++i) pool[static_cast<std::size_t>(i)] = i;
    }

    // Work relative to the first participant so a constant column gives exact zeros.
    const Eigen::RowVectorXd origin = population.judgements.row(0);
    const Eigen::MatrixXd judgements = population.judgements.rowwise() - origin;
    const Eigen::MatrixXd beliefs = population.beliefs.rowwise() - origin;
    const Eigen::RowVectorXd judgement_target = judgements.colwise().mean();
    const Eigen::RowVectorXd belief_target =
        options.target == BootstrapTarget::JudgementMean ? judgement_target : Eigen::RowVectorXd(beliefs.colwise().mean());

    BootstrapCurve curve;
    curve.reps = options.reps;
    curve.seed = options.seed;
    curve.pool = options.pool.label();
    curve.rmse_judgement.resize(static_cast<Eigen::Index>(options.n_max));
    curve.rmse_belief.resize(static_cast<Eigen::Index>(options.n_max));

    Eigen::RowVectorXd sum_j(items), sum_b(items);
    for (std::size_t n = 1; n <= options.n_max; ++n) {
        double sq_j = 0.0, sq_b = 0.0;
        for (std::size_t r = 0; r < options.reps; ++r) {
            Rng rng = substream(options.seed, {n, r});
            sum_j.setZero();
            sum_b.setZero();
            for (std::size_t k = 0; k < n; ++k) {
                const Eigen::Index row = pool[rng.below(pool.size())];
                sum_j += judgements.row(row);
                sum_b += beliefs.row(row);
            }
            const double inv = 1.0 / static_cast<double>(n);
            sq_j += (sum_j * inv - judgement_target).squaredNorm();
            sq_b += (sum_b * inv - belief_target).squaredNorm();
        }
        const double denom = static_cast<double>(options.reps) * static_cast<double>(items);
        curve.n_values.push_back(n);
        curve.rmse_judgement(static_cast<Eigen::Index>(n - 1)) = std::sqrt(sq_j / denom);
        curve.rmse_belief(static_cast<Eigen::Index>(n - 1)) = std::sqrt(sq_b / denom);
    }
    return curve;
}

BootstrapCurve bootstrap_rmse_curve(const Eigen::Ref<const Eigen::VectorXd>& judgements,
                                    const Eigen::Ref<const Eigen::VectorXd>& beliefs,
                                    const std::vector<std::string>& groups, const BootstrapOptions& options) {
    BootstrapPopulation population{judgements, beliefs, groups};
    return bootstrap_rmse_curve(population, options);
}

std::optional<std::size_t> crossover_point(const BootstrapCurve& curve) {
    std::optional<std::size_t> last;
    for (std::size_t i = 0; i < curve.n_values.size(); ++i) {
        const auto idx = static_cast<Eigen::Index>(i);
        if (!(curve.rmse_belief(idx) < curve.rmse_judgement(idx))) break;
        last = curve.n_values[i];
    }
    return last;
}

}  // namespace belief::stats
