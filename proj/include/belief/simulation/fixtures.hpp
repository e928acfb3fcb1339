#pragma once

#include <vector>

#include "belief/core_model.hpp"
#include "belief/simulation/population.hpp"

namespace belief::fixtures {

inline const GroupId kDemocrat = "Democrat";
inline const GroupId kRepublican = "Republican";

// Six statements, three per stance.
std::vector<Statement> exp1_statements();
// Four statements, two per stance.
std::vector<Statement> exp2_statements();
// Fourteen statements in seven topic pairs; stance follows the writer's party.
std::vector<Statement> pilot_statements();

// Aggregate beliefs about a representative population, half the sessions incentivized.
CampaignConfig exp1_campaign(std::uint64_t seed = 1);
// One belief per group and statement, no incentive arm.
CampaignConfig exp2_campaign(std::uint64_t seed = 2);

// Published per-participant stance-mean moments and cohort sizes.
sim::CalibrationSummary exp1_summary(std::uint64_t seed = 1);
sim::CalibrationSummary exp2_summary(std::uint64_t seed = 2);

}  // namespace belief::fixtures
