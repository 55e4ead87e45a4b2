#pragma once

#include <initializer_list>
#include <string>

#include "json.hpp"

#include "qlif/qstate.hpp"
#include "qlif/spacetime.hpp"
#include "qlif/units.hpp"

namespace qlif::json_io {

using nlohmann::json;

/// Config error unless every key of `obj` is in `allowed`.
void require_known_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where);

json to_json(const UnitSystem& u);
UnitSystem units_from_json(const json& j);

/// Metric parameters; the unit system is carried separately.
json to_json(const MetricField& m);
MetricField metric_from_json(const json& j, const UnitSystem& units);

json to_json(const GridSpec& g);
GridSpec grid_from_json(const json& j);

json to_json(const FourVector& v);
FourVector four_vector_from_json(const json& j);
Vector3 vector3_from_json(const json& j);

}  // namespace qlif::json_io
