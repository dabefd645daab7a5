#pragma once

#include <string>

#include "json.hpp"

#include "regflow/rates.hpp"
#include "regflow/regularity.hpp"

namespace regflow {

[[nodiscard]] nlohmann::json point_json(const Point& p);
/// Throws UsageError unless `j` is an array of numbers.
[[nodiscard]] Point json_point(const nlohmann::json& j);

[[nodiscard]] std::string to_string(RegularityMode mode);
[[nodiscard]] std::string to_string(DecayModel model);
[[nodiscard]] std::string to_string(DecayMetric metric);

void to_json(nlohmann::json& j, const Region& r);
void to_json(nlohmann::json& j, const RegularityEstimate& e);
void to_json(nlohmann::json& j, const CollectionEstimate& e);
void to_json(nlohmann::json& j, const InequalityReport& r);
void to_json(nlohmann::json& j, const RateFit& f);
void to_json(nlohmann::json& j, const ModelSelection& s);
void to_json(nlohmann::json& j, const BoundCheck& b);
void to_json(nlohmann::json& j, const HoelderBoundResult& h);

} // namespace regflow
