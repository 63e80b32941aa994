#pragma once

// Serialization of records, profiles and sweeps. Every file starts with a
// header carrying the config hash and the tool version.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include <json.hpp>

#include "paneitz/discretize.hpp"
#include "paneitz/solvers.hpp"
#include "paneitz/variational.hpp"

namespace paneitz {

using Json = nlohmann::json;

std::string tool_version();

std::uint64_t fnv1a64(std::string_view bytes);

struct OutputHeader {
    std::string config_hash;  // 16 hex digits of FNV-1a over the canonical config JSON
    std::string tool_version;
};

OutputHeader make_header(const Json& config);

Json record_to_json(const SolutionRecord& r, const DiscreteOperator& op, const std::string& profile_name);
SolutionRecord record_from_json(const Json& j);

/// samples: logA on a uniform interior grid of the given size.
Json profile_to_json(const FoliationProfile& p, int samples = 201);

/// {"header": {...}, <key>: body}
Json with_header(const OutputHeader& h, const std::string& key, Json body);

void write_csv_header(std::ostream& os, const OutputHeader& h);

/// "m,d_m,I,E,residual,sign_changes,converged", one row per level (refined record).
void write_sweep_summary_csv(std::ostream& os, const SweepResult& sweep);

/// Plot-ready "t,u".
void write_profile_csv(std::ostream& os, const Grid& g, const SolutionRecord& r);

/// Writes through a temporary file and renames, so readers never see a partial file.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace paneitz
