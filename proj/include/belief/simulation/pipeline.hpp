#pragma once

#include <json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "belief/core_model.hpp"
#include "belief/simulation/population.hpp"
#include "belief/stats/descriptive.hpp"
#include "belief/stats/lmm.hpp"
#include "belief/stats/rank_tests.hpp"
#include "belief/stats/resampling.hpp"

namespace belief {

struct AnalysisConfig {
    std::size_t bootstrap_n_max = 50;
    std::size_t bootstrap_reps = 1000;
    std::size_t permutation_reps = stats::kDefaultPermutationReps;
    std::uint64_t seed = 0;
    stats::PValueMethod method = stats::PValueMethod::Auto;
    bool run_bootstrap = true;
    bool run_lmm = true;
};

struct DescriptiveCell {
    GroupId group;
    Stance stance = Stance::Neutral;
    ResponseKind kind = ResponseKind::Judgement;
    stats::Summary summary;
};

/// Median of the first declared group minus median of the second.
struct MedianGap {
    Stance stance = Stance::Neutral;
    double judgement = 0.0;
    double belief = 0.0;
};

/// A test that either ran or failed with a message (e.g. degenerate input).
struct NamedTest {
    std::string hypothesis;
    std::string label;
    std::optional<stats::TestResult> result;
    std::string error;
};

struct NamedLmm {
    std::string label;
    std::optional<stats::LmmFit> fit;
    std::string error;
};

struct NamedCurve {
    std::string label;
    stats::BootstrapCurve curve;
    std::optional<std::size_t> crossover;
};

struct AnalysisReport {
    std::size_t n_sessions = 0;
    std::size_t n_kept = 0;
    std::size_t n_excluded = 0;
    std::map<GroupId, std::size_t> kept_per_group;
    std::vector<DescriptiveCell> descriptives;
    std::vector<MedianGap> median_gaps;
    std::vector<NamedTest> tests;
    std::vector<NamedLmm> lmms;
    std::vector<NamedCurve> bootstrap;

    const NamedTest* find_test(std::string_view hypothesis, std::string_view label) const;
    const NamedCurve* find_curve(std::string_view label) const;
    const MedianGap* find_gap(Stance s) const;
    const DescriptiveCell* find_descriptive(const GroupId& g, Stance s, ResponseKind kind) const;
};

inline constexpr std::string_view kAnnotatorBiasHypothesis = "annotator-bias hypothesis";
inline constexpr std::string_view kBeliefElicitationHypothesis = "belief-elicitation hypothesis";
inline constexpr std::string_view kVarianceReduction = "variance reduction";
inline constexpr std::string_view kIncentiveEffect = "incentive effect";

/// Per kept participant and stance, the mean judgement and mean belief
/// midpoint. Rows follow `kept`; columns follow the stances present in the
/// campaign in enum order.
struct StanceMeans {
    std::vector<Stance> stances;
    std::vector<GroupId> groups;  // per row
    std::vector<Arm> arms;        // per row
    Eigen::MatrixXd judgement;
    Eigen::MatrixXd belief;
};

StanceMeans stance_means(const CampaignConfig& config, std::span<const SessionRecord> kept);

/// Runs the analysis battery on sessions of one campaign. Exclusions are
/// applied here, so `sessions` may contain incomplete or mismatched records.
/// The first two declared groups are compared.
AnalysisReport run_analysis(const CampaignConfig& config, std::span<const SessionRecord> sessions,
                            const AnalysisConfig& analysis);

/// Simulates a cohort from the spec and analyses it.
AnalysisReport run_pipeline(const sim::PopulationSpec& spec, std::span<const Statement> statements,
                            const AnalysisConfig& analysis);

nlohmann::json to_json(const stats::TestResult& r);
nlohmann::json to_json(const stats::LmmFit& f);
nlohmann::json to_json(const stats::BootstrapCurve& c, const std::optional<std::size_t>& crossover);
nlohmann::json to_json(const AnalysisReport& report);

}  // namespace belief
