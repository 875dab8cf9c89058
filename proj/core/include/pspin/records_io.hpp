#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pspin/amp.hpp"
#include "pspin/harness.hpp"
#include "pspin/oracle.hpp"

namespace pspin {

void to_json(nlohmann::json& j, const RunMetadata& m);
void from_json(const nlohmann::json& j, RunMetadata& m);
void to_json(nlohmann::json& j, const ScheduleConfig& c);
void from_json(const nlohmann::json& j, ScheduleConfig& c);
void to_json(nlohmann::json& j, const StabilityRecord& r);
void from_json(const nlohmann::json& j, StabilityRecord& r);
void to_json(nlohmann::json& j, const PathRecord& r);
void from_json(const nlohmann::json& j, PathRecord& r);
void to_json(nlohmann::json& j, const ConcentrationRecord& r);
void from_json(const nlohmann::json& j, ConcentrationRecord& r);
void to_json(nlohmann::json& j, const OverlapSample& s);
void from_json(const nlohmann::json& j, OverlapSample& s);
void to_json(nlohmann::json& j, const OgpReport& r);
void from_json(const nlohmann::json& j, OgpReport& r);
void to_json(nlohmann::json& j, const ChaosReport& r);
void from_json(const nlohmann::json& j, ChaosReport& r);
void to_json(nlohmann::json& j, const GroundStateResult& r);
void from_json(const nlohmann::json& j, GroundStateResult& r);
void to_json(nlohmann::json& j, const RoundingResult& r);
void from_json(const nlohmann::json& j, RoundingResult& r);
void to_json(nlohmann::json& j, const ScheduleReport& r);

/// Schedule name, provenance, per-step norms and V; the full U sequence only if `full`.
nlohmann::json trace_to_json(const IterationTrace& trace, bool full);
IterationTrace trace_from_json(const nlohmann::json& j);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double x);
double parse_double(std::string_view s);

// CSV files start with a "# meta {...}" comment line when metadata is given;
// parsers skip every line beginning with '#'.
std::string stability_csv(const std::vector<StabilityRecord>& rows, const RunMetadata* meta = nullptr);
std::vector<StabilityRecord> parse_stability_csv(const std::string& text);

std::string path_csv(const std::vector<PathRecord>& rows, const RunMetadata* meta = nullptr);
std::vector<PathRecord> parse_path_csv(const std::string& text);

std::string concentration_csv(const ConcentrationRecord& rec, const RunMetadata* meta = nullptr);
std::vector<double> parse_concentration_csv(const std::string& text);

std::string overlaps_csv(const std::vector<OverlapSample>& rows, const RunMetadata* meta = nullptr);
std::vector<OverlapSample> parse_overlaps_csv(const std::string& text);

/// step, norm, min, max per iterate.
std::string trace_csv(const IterationTrace& trace, const RunMetadata* meta = nullptr);
/// j, multiplier, delta per rounding step.
std::string rounding_csv(const RoundingResult& r, const RunMetadata* meta = nullptr);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace pspin
