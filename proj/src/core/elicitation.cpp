#include "belief/elicitation.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "belief/errors.hpp"
#include "belief/format.hpp"

namespace belief {

std::string_view to_string(AnchorSource s) {
    return s == AnchorSource::JudgementMean ? "JudgementMean" : "BeliefMidpointMean";
}

AnchorSource anchor_source_from_string(std::string_view s) {
    if (s == "JudgementMean") return AnchorSource::JudgementMean;
    if (s == "BeliefMidpointMean") return AnchorSource::BeliefMidpointMean;
    throw std::invalid_argument("unknown anchor source: " + std::string(s));
}

void IncentiveParams::validate() const {
    if (!(lambda > 0.0 && lambda < 1.0)) throw ConfigurationError("lambda must lie in (0, 1)");
    if (!bounds.valid()) throw ConfigurationError("scale bounds must satisfy a < b");
}

double BonusLedger::total(const ParticipantId& pid) const {
    auto it = totals.find(pid);
    return it == totals.end() ? 0.0 : it->second;
}

double BonusLedger::grand_total() const {
    double sum = 0.0;
    for (const auto& [pid, t] : totals) sum += t;
    return sum;
}

Score score_interval(const BeliefInterval& interval, const Anchor& anchor, const IncentiveParams& params) {
    params.validate();
    if (interval.statement_id != anchor.statement_id || interval.target != anchor.target) {
        throw DomainError("interval (" + interval.statement_id + ", " + interval.target.label() +
                          ") does not match anchor (" + anchor.statement_id + ", " + anchor.target.label() + ")");
    }
    const auto& bounds = params.bounds;
    if (!(interval.lower <= interval.upper) || !bounds.contains(interval.lower) || !bounds.contains(interval.upper)) {
        throw RangeError("invalid belief interval for " + interval.statement_id);
    }
    if (anchor.x < interval.lower || anchor.x > interval.upper) return {0.0};
    const double relative_width = std::clamp(interval.width() / bounds.width(), 0.0, 1.0);
    return {std::pow(1.0 - relative_width, params.exponent())};
}

Anchor compute_anchor(std::span<const SessionRecord> sessions, const StatementId& statement_id,
                      const PopulationTarget& target, const IncentiveParams& params) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : sessions) {
        if (params.anchor_source == AnchorSource::BeliefMidpointMean) {
            if (const auto* b = s.find_belief(statement_id, target)) {
                sum += b->midpoint();
                ++n;
            }
        } else {
            if (!target.is_representative() && s.profile.recruited_group != target.group_id()) continue;
            if (const auto* j = s.find_judgement(statement_id)) {
                sum += j->value;
                ++n;
            }
        }
    }
    if (n == 0) {
        throw DomainError("no responses to anchor (" + statement_id + ", " + target.label() + ") using " +
                          std::string(to_string(params.anchor_source)));
    }
    return Anchor{statement_id, target, sum / static_cast<double>(n)};
}

double interval_midpoint(const BeliefInterval& interval) { return interval.midpoint(); }

double combined_belief_midpoint(std::span<const BeliefInterval> per_group_intervals, std::span<const GroupId> groups) {
    if (groups.empty()) throw DomainError("no groups declared");
    if (per_group_intervals.size() != groups.size()) {
        throw DomainError("expected one interval per declared group (" + std::to_string(groups.size()) + "), got " +
                          std::to_string(per_group_intervals.size()));
    }
    std::set<GroupId> seen;
    const auto& statement = per_group_intervals.front().statement_id;
    std::vector<double> mids;
    for (const auto& b : per_group_intervals) {
        if (b.target.is_representative()) throw DomainError("representative interval in per-group belief");
        if (b.statement_id != statement) throw DomainError("per-group intervals span several statements");
        if (std::find(groups.begin(), groups.end(), b.target.group_id()) == groups.end()) {
            throw DomainError("interval for undeclared group " + b.target.group_id());
        }
        if (!seen.insert(b.target.group_id()).second) {
            throw DomainError("duplicate interval for group " + b.target.group_id());
        }
        mids.push_back(b.midpoint());
    }
    std::sort(mids.begin(), mids.end());
    double sum = 0.0;
    for (double m : mids) sum += m;
    return sum / static_cast<double>(mids.size());
}

BonusLedger compute_bonuses(std::span<const SessionRecord> sessions, std::span<const Anchor> anchors,
                            const IncentiveParams& params, double rate) {
    params.validate();
    if (!(rate >= 0.0) || !std::isfinite(rate)) throw ConfigurationError("bonus rate must be a non-negative number");

    auto find_anchor = [&](const BeliefInterval& b) -> const Anchor& {
        for (const auto& a : anchors) {
            if (a.statement_id == b.statement_id && a.target == b.target) return a;
        }
        throw DomainError("missing anchor for (" + b.statement_id + ", " + b.target.label() + ")");
    };

    BonusLedger ledger;
    for (const auto& s : sessions) {
        if (s.arm != Arm::Incentivized) continue;
        const auto& pid = s.profile.participant_id;
        double& total = ledger.totals[pid];
        for (const auto& b : s.beliefs) {
            const Anchor& anchor = find_anchor(b);
            const double score = score_interval(b, anchor, params).value;
            const double bonus = rate * score;
            ledger.entries.push_back(BonusEntry{pid, b.statement_id, b.target, b.lower, b.upper, anchor.x, score, bonus});
            total += bonus;
        }
    }
    return ledger;
}

std::string ledger_to_csv(const BonusLedger& ledger) {
    std::string out = "participant_id,statement_id,target,L,U,x,score,bonus\n";
    for (const auto& e : ledger.entries) {
        out += csv_field(e.participant_id) + ',' + csv_field(e.statement_id) + ',' + csv_field(e.target.label()) + ',' +
               format_number(e.lower) + ',' + format_number(e.upper) + ',' + format_number(e.x) + ',' +
               format_number(e.score) + ',' + format_number(e.bonus) + '\n';
    }
    return out;
}

}  // namespace belief
