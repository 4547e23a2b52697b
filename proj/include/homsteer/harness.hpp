#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "homsteer/instances.hpp"
#include "homsteer/io.hpp"

namespace homsteer {

// ---------------------------------------------------------------------------
// Configuration

/// Named tolerances. Checks look theirs up by name; configs may override any
/// entry but not add new ones.
std::map<std::string, double> default_tolerances();

struct GroupEntry {
  std::string name;
  Json spec;
  GroupPtr group;
};

struct CellEntry {
  std::string name;
  std::string group;
  GroupPtr g;
  SubgroupPtr sigma_domain;
  SubgroupPtr rho_domain;
  RepPtr sigma;
  RepPtr rho;
};

struct InstanceEntry {
  std::string name;
  std::string group;
  /// {"instance", "group", "params", "init"}, group resolved to a spec.
  Json spec;
  GroupPtr g;
  int trials = 4;
};

struct SuiteConfig {
  std::vector<GroupEntry> groups;
  std::vector<CellEntry> cells;
  std::vector<InstanceEntry> instances;
  int trials = 32;
  int nonlinear_trials = 4;
  std::uint64_t seed = 0;
  std::map<std::string, double> tolerances;
  bool violation_fixture = false;
  std::string output;
  /// The parsed input, echoed into reports.
  Json echo;
};

/// Throws ConfigError for anything unresolvable. With strict, unknown keys
/// are errors too.
SuiteConfig parse_suite_config(const Json& j, bool strict = false);

// ---------------------------------------------------------------------------
// Instances built from config

using SectionOp = std::function<SectionFeature(const SectionFeature&)>;

struct InstanceBundle {
  std::string kind;
  std::shared_ptr<const OmegaHat> omega;
  RepPtr in;
  RepPtr out;
  /// Quotient by the domain of `in`.
  QuotientPtr quotient;
  /// Section-level operator on X, when the instance has one.
  SectionOp section_op;
  /// Direct group-level operator (G-CNN convolution, LieTransformer).
  FeatureOp native_op;
  /// Extra data some checks need.
  std::optional<ImplicitKernelSpec> implicit;
  std::optional<AttentionParams> attention;
};

/// spec: {"instance": kind, "group": group spec, "params": {...},
/// "init": {"seed": int, "init": "uniform[-1,1]"}}. Weights are drawn from
/// init.seed in a fixed order. Throws ConfigError.
InstanceBundle build_instance(const Json& spec, const GroupPtr& group);

// ---------------------------------------------------------------------------
// Reports

struct CheckRecord {
  std::string check_id;
  int criterion = 0;
  std::string group;
  std::string instance;
  double max_violation = 0.0;
  double tolerance = 0.0;
  std::string tolerance_name;
  bool passed = false;
  double runtime_ms = 0.0;
  /// For lower-bound checks the measured value; max_violation then holds the
  /// shortfall below the floor.
  std::optional<double> observed;
  std::string detail;
};

struct Report {
  std::uint64_t seed = 0;
  bool strict = false;
  Json config;
  std::vector<CheckRecord> records;

  bool all_passed() const;
  Json to_json(bool include_runtime = true) const;
};

/// Runs every check in the matrix. Cells run concurrently; each draws from
/// its own seed derived from the suite seed and its key, and records are
/// sorted by check_id.
Report run_verify(const SuiteConfig& config, bool strict = false);

// ---------------------------------------------------------------------------
// Layer runner

struct LayerResult {
  Json output;
  double mackey_residual = 0.0;
};

/// config: an instance spec plus optional "path": "nonlinear" (default) or
/// "native" (G-CNN convolution / LieTransformer direct form). Input may be a
/// feature or a section feature; the output uses the same domain.
LayerResult run_layer(const Json& config, const Json& input, bool strict = false);

}  // namespace homsteer
