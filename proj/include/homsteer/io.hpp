#pragma once

#include <string>

#include <json.hpp>

#include "homsteer/induced.hpp"
#include "homsteer/kernels.hpp"

namespace homsteer {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Specs. Every parser throws ConfigError on malformed input.

/// {"kind": "cyclic"|"dihedral"|"symmetric"|"semidirect", "n": int, "flip": bool},
/// or a shorthand string: "Z8", "D4", "S3", "Z8:Z2" (flip), "Z8xZ2".
GroupPtr group_from_json(const Json& spec);
Json group_to_json(const GroupTable& group);

/// Element list, {"kind": "trivial"|"whole"|"flip"|"stabilizer"|"generated"|"elements", ...},
/// or "trivial", "whole", "flip", "stab0", "gen:1,2", "perm:1,0,2" (symmetric groups).
SubgroupPtr subgroup_from_json(const GroupPtr& group, const Json& spec);
Json subgroup_to_json(const Subgroup& subgroup);

/// {"kind": "trivial"|"regular"|"sign"|"rotation"|"matrices", "dim": int, "freqs": [int],
/// "matrices": [...]}, or "trivial", "trivial:3", "sign", "regular", "rotation:1,3".
RepPtr rep_from_json(const SubgroupPtr& domain, const Json& spec);
/// Named spec for trivial, sign and regular reps; explicit matrices otherwise.
Json rep_to_json(const Representation& rep);

/// Parses a JSON value from a string, or a spec shorthand when the text is
/// not JSON.
Json parse_spec_text(const std::string& text);

// ---------------------------------------------------------------------------
// Values

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& rows);

/// {"kind": "feature", "group", "subgroup", "rep", "values": one array per element}.
Json feature_to_json(const FeatureMap& f);
FeatureMap feature_from_json(const Json& j);

/// {"kind": "section", "group", "subgroup", "rep", "section": [...], "values": one array per coset}.
Json section_feature_to_json(const SectionFeature& f);
SectionFeature section_feature_from_json(const Json& j);

Json kernel_to_json(const OneArgKernel& k);

// ---------------------------------------------------------------------------
// Files and canonical form

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// Sorted keys, two-space indent, floats as %.17g (non-finite as null).
std::string canonical_dump(const Json& j);

}  // namespace homsteer
