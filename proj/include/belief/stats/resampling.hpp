#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "belief/stats/rank_tests.hpp"

namespace belief::stats {

constexpr std::size_t kDefaultPermutationReps = 10000;
constexpr std::size_t kMinPermutationReps = 100;

/// Sample standard deviation (n - 1 denominator), two-pass.
template <typename Derived>
typename Derived::Scalar sample_sd(const Eigen::MatrixBase<Derived>& x) {
    using Scalar = typename Derived::Scalar;
    if (x.size() < 2) return Scalar(0);
    const Scalar mean = x.mean();
    return std::sqrt((x.array() - mean).square().sum() / Scalar(x.size() - 1));
}

/// One-sided test that beliefs vary less than judgements. The statistic is
/// SD(judgements) - SD(beliefs). The null swaps each participant's
/// (judgement, belief) labels with probability 1/2 when paired, or reshuffles
/// the pooled values when not. p = (1 + #{perm >= observed}) / (reps + 1).
/// Each replicate draws from its own (seed, replicate) substream.
TestResult permutation_variance_test(const Eigen::Ref<const Eigen::VectorXd>& judgements,
                                     const Eigen::Ref<const Eigen::VectorXd>& beliefs, bool paired_by_participant,
                                     std::size_t reps, std::uint64_t seed);

/// Participants x items table of per-participant responses, e.g. items = stances.
struct BootstrapPopulation {
    Eigen::MatrixXd judgements;
    Eigen::MatrixXd beliefs;
    std::vector<std::string> groups;  // one label per row
};

struct BootstrapPool {
    std::optional<std::string> group;  // nullopt: sample from everyone

    static BootstrapPool balanced() { return {}; }
    static BootstrapPool group_only(std::string g) { return {std::move(g)}; }
    std::string label() const { return group ? "group:" + *group : "balanced"; }
};

/// What the sample means are compared against. JudgementMean scores both
/// curves against the full-population judgement mean (the representative
/// average annotation); OwnMean scores beliefs against the belief mean.
enum class BootstrapTarget { JudgementMean, OwnMean };

struct BootstrapOptions {
    std::size_t n_max = 50;
    std::size_t reps = 1000;
    std::uint64_t seed = 0;
    BootstrapPool pool;
    BootstrapTarget target = BootstrapTarget::JudgementMean;
};

struct BootstrapCurve {
    std::vector<std::size_t> n_values;
    Eigen::VectorXd rmse_judgement;
    Eigen::VectorXd rmse_belief;
    std::size_t reps = 0;
    std::uint64_t seed = 0;
    std::string pool;
};

/// For each n in 1..n_max, draws `reps` samples of n participants with
/// replacement from the pool (the same rows for judgements and beliefs) and
/// reports sqrt(mean over reps and items of (sample mean - target)^2). Targets
/// are always computed over the whole population.
BootstrapCurve bootstrap_rmse_curve(const BootstrapPopulation& population, const BootstrapOptions& options);

/// Single-item convenience overload.
BootstrapCurve bootstrap_rmse_curve(const Eigen::Ref<const Eigen::VectorXd>& judgements,
                                    const Eigen::Ref<const Eigen::VectorXd>& beliefs,
                                    const std::vector<std::string>& groups, const BootstrapOptions& options);

/// Largest n with rmse_belief[m] < rmse_judgement[m] for every m <= n;
/// nullopt when beliefs do not win at n = 1.
std::optional<std::size_t> crossover_point(const BootstrapCurve& curve);

}  // namespace belief::stats
