#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "belief/core_model.hpp"

namespace belief {

enum class AnchorSource { JudgementMean, BeliefMidpointMean };

std::string_view to_string(AnchorSource s);
AnchorSource anchor_source_from_string(std::string_view s);

/// Most Likely Interval parameters. The score exponent is g = (1 - lambda) / lambda,
/// so smaller lambda penalises wide intervals harder.
struct IncentiveParams {
    double lambda = 0.5;
    ScaleBounds bounds;
    AnchorSource anchor_source = AnchorSource::BeliefMidpointMean;

    double exponent() const { return (1.0 - lambda) / lambda; }
    // Throws ConfigurationError unless 0 < lambda < 1 and bounds are ordered.
    void validate() const;
};

struct Score {
    double value = 0.0;
};

/// Realized population quantity a belief interval is scored against.
struct Anchor {
    StatementId statement_id;
    PopulationTarget target;
    double x = 0.0;

    friend bool operator==(const Anchor&, const Anchor&) = default;
};

struct BonusEntry {
    ParticipantId participant_id;
    StatementId statement_id;
    PopulationTarget target;
    double lower = 0.0;
    double upper = 0.0;
    double x = 0.0;
    double score = 0.0;
    double bonus = 0.0;

    friend bool operator==(const BonusEntry&, const BonusEntry&) = default;
};

struct BonusLedger {
    std::vector<BonusEntry> entries;
    std::map<ParticipantId, double> totals;

    double total(const ParticipantId& pid) const;
    double grand_total() const;

    friend bool operator==(const BonusLedger&, const BonusLedger&) = default;
};

/// S = (1 - W/(b-a))^g when L <= x <= U, else 0.
Score score_interval(const BeliefInterval& interval, const Anchor& anchor, const IncentiveParams& params);

/// Anchor for one (statement, target) pair over the analysis population.
///  - BeliefMidpointMean: mean midpoint of every interval given for the pair.
///  - JudgementMean: mean task-1 judgement of the statement, restricted to the
///    target group's recruits when the target is a group.
Anchor compute_anchor(std::span<const SessionRecord> sessions, const StatementId& statement_id,
                      const PopulationTarget& target, const IncentiveParams& params);

double interval_midpoint(const BeliefInterval& interval);

/// Midpoint of the per-group midpoints; requires one interval per declared
/// group, all for the same statement.
double combined_belief_midpoint(std::span<const BeliefInterval> per_group_intervals, std::span<const GroupId> groups);

/// Bonus = rate * S for every interval of every incentivized session.
/// Unincentivized sessions get no entries. Throws DomainError naming the
/// (statement, target) pair when an anchor is missing.
BonusLedger compute_bonuses(std::span<const SessionRecord> sessions, std::span<const Anchor> anchors,
                            const IncentiveParams& params, double rate);

/// participant_id,statement_id,target,L,U,x,score,bonus
std::string ledger_to_csv(const BonusLedger& ledger);

}  // namespace belief
