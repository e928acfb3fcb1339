#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace belief {

using GroupId = std::string;
using ParticipantId = std::string;
using StatementId = std::string;

struct ScaleBounds {
    double a = 0.0;
    double b = 1.0;

    double width() const { return b - a; }
    bool contains(double v) const { return v >= a && v <= b; }
    bool valid() const { return a < b; }

    friend bool operator==(const ScaleBounds&, const ScaleBounds&) = default;
};

enum class Stance { DemocratLeaning, RepublicanLeaning, Neutral };

std::string_view to_string(Stance s);
Stance stance_from_string(std::string_view s);

struct Statement {
    StatementId id;
    std::string topic;
    std::string body;
    Stance stance = Stance::Neutral;

    friend bool operator==(const Statement&, const Statement&) = default;
};

/// Who a belief interval is about: the whole (representative) population, or
/// one declared annotator group.
class PopulationTarget {
public:
    PopulationTarget() = default;
    static PopulationTarget representative() { return {}; }
    static PopulationTarget group(GroupId g) {
        PopulationTarget t;
        t.group_ = std::move(g);
        return t;
    }

    bool is_representative() const { return !group_.has_value(); }
    const GroupId& group_id() const { return *group_; }

    // "representative" or the group name.
    std::string label() const { return group_ ? *group_ : std::string(kRepresentativeLabel); }
    static PopulationTarget parse(std::string_view label);

    static constexpr std::string_view kRepresentativeLabel = "representative";

    friend bool operator==(const PopulationTarget&, const PopulationTarget&) = default;
    friend auto operator<=>(const PopulationTarget&, const PopulationTarget&) = default;

private:
    std::optional<GroupId> group_;
};

struct AnnotatorProfile {
    ParticipantId participant_id;
    GroupId recruited_group;
    GroupId reported_group;
    std::map<std::string, std::string> demographics;

    friend bool operator==(const AnnotatorProfile&, const AnnotatorProfile&) = default;
};

struct JudgementResponse {
    StatementId statement_id;
    double value = 0.0;

    friend bool operator==(const JudgementResponse&, const JudgementResponse&) = default;
};

struct BeliefInterval {
    StatementId statement_id;
    PopulationTarget target;
    double lower = 0.0;
    double upper = 0.0;

    double width() const { return upper - lower; }
    double midpoint() const { return 0.5 * (lower + upper); }

    friend bool operator==(const BeliefInterval&, const BeliefInterval&) = default;
};

enum class ElicitationMode { AggregateBelief, PerGroupBelief };

std::string_view to_string(ElicitationMode m);
ElicitationMode elicitation_mode_from_string(std::string_view s);

struct IncentiveArms {
    double incentivized_fraction = 0.5;

    friend bool operator==(const IncentiveArms&, const IncentiveArms&) = default;
};

struct CampaignConfig {
    std::vector<Statement> statements;
    std::vector<GroupId> groups;
    ElicitationMode mode = ElicitationMode::AggregateBelief;
    IncentiveArms incentive_arms;
    ScaleBounds bounds;
    std::string population_description;
    std::uint64_t seed = 0;

    const Statement* find_statement(std::string_view id) const;
    bool declares_group(std::string_view g) const;
    std::vector<StatementId> statement_ids() const;

    /// The belief targets a session must cover for each statement, in the
    /// order they are exported.
    std::vector<PopulationTarget> belief_targets() const;

    friend bool operator==(const CampaignConfig&, const CampaignConfig&) = default;
};

enum class Arm { Incentivized, Unincentivized };

std::string_view to_string(Arm a);
Arm arm_from_string(std::string_view s);

enum class SessionStatus { InProgress, Complete, Excluded };
enum class ExclusionReason { AffiliationMismatch, Incomplete };

std::string_view to_string(SessionStatus s);
std::string_view to_string(ExclusionReason r);
SessionStatus session_status_from_string(std::string_view s);
ExclusionReason exclusion_reason_from_string(std::string_view s);

struct SessionRecord {
    AnnotatorProfile profile;
    Arm arm = Arm::Unincentivized;
    std::vector<StatementId> presentation_order;
    std::vector<JudgementResponse> judgements;
    std::vector<BeliefInterval> beliefs;
    SessionStatus status = SessionStatus::InProgress;
    std::optional<ExclusionReason> exclusion_reason;

    const JudgementResponse* find_judgement(std::string_view statement_id) const;
    const BeliefInterval* find_belief(std::string_view statement_id, const PopulationTarget& target) const;

    friend bool operator==(const SessionRecord&, const SessionRecord&) = default;
};

// ---------------------------------------------------------------------------
// Operations

/// Rounds to two decimals, half away from zero. Throws RangeError when the
/// value is outside [a, b].
double quantize(double value, const ScaleBounds& bounds);

/// True when `value` lies in bounds and survives quantize() unchanged.
bool is_scale_value(double value, const ScaleBounds& bounds);

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

ValidationReport validate_campaign(const CampaignConfig& config);

/// Checks a session against the campaign: ranges, quantization, permutation,
/// and (for Complete sessions) response completeness under the mode.
ValidationReport validate_session(const SessionRecord& session, const CampaignConfig& config);

/// Missing items that keep a session from being complete; empty when complete.
std::vector<std::string> missing_responses(const SessionRecord& session, const CampaignConfig& config);

struct ExclusionResult {
    std::vector<SessionRecord> kept;
    std::vector<SessionRecord> excluded;
};

/// Partitions sessions into the analysis population and exclusions.
/// Affiliation mismatch is checked first, then completeness.
ExclusionResult apply_exclusions(std::span<const SessionRecord> sessions);

/// Seeded Fisher-Yates permutation, deterministic in (seed, participant_id).
std::vector<StatementId> presentation_order(std::uint64_t seed, std::string_view participant_id,
                                            std::span<const StatementId> statement_ids);

/// Incentive arm for the participant_index-th session of a campaign.
Arm assign_arm(std::uint64_t seed, std::uint64_t participant_index, double incentivized_fraction);

enum class ResponseKind { Judgement, BeliefMidpoint };

/// Mean of the participant's responses over all statements with `stance`.
/// Beliefs contribute their midpoint; when several targets are present for a
/// statement (per-group elicitation) the per-target midpoints are averaged
/// first, i.e. the midpoint of the two midpoints for two groups.
double participant_stance_mean(const SessionRecord& session, std::span<const Statement> statements,
                               Stance stance, ResponseKind kind);

}  // namespace belief
