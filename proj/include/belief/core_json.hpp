#pragma once

#include <json.hpp>

#include "belief/core_model.hpp"

namespace belief {

// snake_case keys matching the struct field names.
void to_json(nlohmann::json& j, const ScaleBounds& v);
void from_json(const nlohmann::json& j, ScaleBounds& v);
void to_json(nlohmann::json& j, const Statement& v);
void from_json(const nlohmann::json& j, Statement& v);
void to_json(nlohmann::json& j, const CampaignConfig& v);
void from_json(const nlohmann::json& j, CampaignConfig& v);
void to_json(nlohmann::json& j, const AnnotatorProfile& v);
void from_json(const nlohmann::json& j, AnnotatorProfile& v);
void to_json(nlohmann::json& j, const JudgementResponse& v);
void from_json(const nlohmann::json& j, JudgementResponse& v);
void to_json(nlohmann::json& j, const BeliefInterval& v);
void from_json(const nlohmann::json& j, BeliefInterval& v);
void to_json(nlohmann::json& j, const SessionRecord& v);
void from_json(const nlohmann::json& j, SessionRecord& v);

}  // namespace belief
