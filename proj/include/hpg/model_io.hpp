#pragma once

#include <string>
#include <string_view>

#include "hpg/model.hpp"

namespace hpg {

inline constexpr int kModelFormatVersion = 1;

enum class ExportFormat { Json, Dot };

/// Serialises a model. JSON round-trips exactly through import_model; DOT is
/// for viewing only and labels each link "count (probability)".
/// Throws ParameterError for a model without page states.
std::string export_model(const HpgModel& model, ExportFormat format);

/// Reads the JSON form. Throws SchemaError naming the offending JSON path.
HpgModel import_model(std::string_view json_text);

HpgModel load_model(const std::string& path);
void save_model(const HpgModel& model, const std::string& path, ExportFormat format = ExportFormat::Json);

}  // namespace hpg
