#pragma once

#include <map>
#include <json.hpp>
#include <span>
#include <utility>
#include <vector>

#include "belief/core_model.hpp"
#include "belief/rng.hpp"
#include "belief/simulation/truncated_normal.hpp"

namespace belief::sim {

/// Latent (pre-restriction) normal parameters for one (group, stance) cell.
struct GroupStanceParams {
    double judgement_mean = 0.5;
    double judgement_sd = 0.0;
    BoundaryModel judgement_model = BoundaryModel::Truncated;
    double belief_center_mean = 0.5;
    double belief_center_sd = 0.0;
    BoundaryModel belief_model = BoundaryModel::Truncated;
    double belief_width_mean = 0.20;
    double belief_width_sd = 0.10;
    // Per-statement scatter around a participant's stance latent. Deviations
    // are centred within the participant, so the stance mean is unchanged.
    double judgement_within_sd = 0.0;
    double belief_within_sd = 0.0;
    // Added to the belief center for a given target label; empty means 0.
    std::map<std::string, double> belief_target_offsets;

    void validate() const;
    friend bool operator==(const GroupStanceParams&, const GroupStanceParams&) = default;
};

using CellKey = std::pair<GroupId, Stance>;

struct PopulationSpec {
    std::map<CellKey, GroupStanceParams> params;
    std::map<GroupId, std::size_t> group_sizes;
    ElicitationMode mode = ElicitationMode::AggregateBelief;
    ScaleBounds bounds;
    double incentivized_fraction = 0.5;
    std::uint64_t seed = 0;

    const GroupStanceParams& at(const GroupId& g, Stance s) const;
    std::vector<GroupId> groups() const;
    void validate() const;

    friend bool operator==(const PopulationSpec&, const PopulationSpec&) = default;
};

struct SimulatedCohort {
    std::vector<SessionRecord> sessions;
    PopulationSpec provenance;
};

/// Draw from the judgement distribution, quantized to the 2-decimal scale.
double sample_judgement(const GroupStanceParams& params, const ScaleBounds& bounds, Rng& rng);

/// Center from the belief distribution, width from Normal(width_mean,
/// width_sd) truncated to [0, b - a]. The half-width is then shrunk as needed
/// to keep the interval on the scale, so the midpoint is the quantized center.
BeliefInterval sample_belief_interval(const GroupStanceParams& params, const StatementId& statement_id,
                                      const PopulationTarget& target, const ScaleBounds& bounds, Rng& rng);

/// Builds the interval around an already drawn center.
BeliefInterval belief_interval_around(double center, double width, const StatementId& statement_id,
                                      const PopulationTarget& target, const ScaleBounds& bounds);

struct SummaryRow {
    GroupId group;
    Stance stance = Stance::Neutral;
    ResponseKind kind = ResponseKind::Judgement;
    double mean = 0.0;
    double sd = 0.0;
};

/// Target moments of per-participant stance means, plus cohort shape.
struct CalibrationSummary {
    std::vector<SummaryRow> rows;
    std::map<GroupId, std::size_t> group_sizes;
    ElicitationMode mode = ElicitationMode::AggregateBelief;
    ScaleBounds bounds;
    double incentivized_fraction = 0.5;
    std::uint64_t seed = 0;
    double belief_width_mean = 0.20;
    double belief_width_sd = 0.10;
    double judgement_within_sd = 0.10;
    double belief_within_sd = 0.05;
};

/// Moment-matches every (group, stance) cell. Throws DomainError when a cell
/// lacks its judgement or belief row and CalibrationError for unreachable
/// targets.
PopulationSpec calibrate_from_summary(const CalibrationSummary& summary, const CalibrationTolerance& tolerance = {});

/// One session per simulated participant, all Complete with matching
/// recruited and reported group. Participant i draws from substream(seed, {i}),
/// so the cohort does not depend on generation order. Each participant holds
/// one latent judgement and one latent belief center per stance; the
/// statements of that stance scatter around it via spread_within.
SimulatedCohort generate_cohort(const PopulationSpec& spec, std::span<const Statement> statements);

/// k values around `latent` with zero-mean scatter of roughly `sd`, shrunk
/// toward the latent as needed so every value stays in bounds. The mean of the
/// returned values equals the latent (before any quantization).
std::vector<double> spread_within(double latent, std::size_t k, double sd, const ScaleBounds& bounds, Rng& rng);

/// Campaign matching a spec and statement list.
CampaignConfig campaign_for(const PopulationSpec& spec, std::vector<Statement> statements);

void to_json(nlohmann::json& j, const GroupStanceParams& p);
void from_json(const nlohmann::json& j, GroupStanceParams& p);
void to_json(nlohmann::json& j, const PopulationSpec& s);
void from_json(const nlohmann::json& j, PopulationSpec& s);
void to_json(nlohmann::json& j, const CalibrationSummary& s);
void from_json(const nlohmann::json& j, CalibrationSummary& s);

}  // namespace belief::sim
