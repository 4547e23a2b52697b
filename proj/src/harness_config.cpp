#include <cmath>
#include <set>

#include "homsteer/errors.hpp"
#include "homsteer/harness.hpp"

namespace homsteer {

std::map<std::string, double> default_tolerances() {
  return {
      {"exact", 0.0},
      {"float_sum", 1e-14},
      {"roundtrip", 1e-12},
      {"mackey", 1e-9},
      {"lemma_mackey", 1e-10},
      {"violation_floor", 1e-4},
      {"kernel_class", 1e-12},
      {"basis_residual", 1e-10},
      {"gcnn_equivariance", 1e-11},
      {"equivariance", 1e-10},
      {"nonlinear_closure", 1e-10},
      {"operator_equality", 1e-10},
      {"operator_equality_exact", 1e-12},
      {"implicit_constraint", 1e-11},
      {"translation_equivariance", 1e-11},
      {"rotary_identity", 1e-12},
      {"softmax", 1e-12},
  };
}

namespace {

void reject_unknown_keys(const Json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
T get_as(const Json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(where + ": '" + key + "' has the wrong type");
  }
}

std::string required_name(const Json& j, const std::string& where) {
  const auto name = get_as<std::string>(j, "name", "", where);
  if (name.empty()) throw ConfigError(where + " needs a non-empty 'name'");
  return name;
}

}  // namespace

SuiteConfig parse_suite_config(const Json& j, bool strict) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (strict) {
    reject_unknown_keys(j,
                        {"seed", "trials", "nonlinear_trials", "tolerances", "groups", "cells", "instances",
                         "fixtures", "output"},
                        "config");
  }
  SuiteConfig cfg;
  cfg.echo = j;
  cfg.seed = get_as<std::uint64_t>(j, "seed", 0, "config");
  cfg.trials = get_as<int>(j, "trials", 32, "config");
  cfg.nonlinear_trials = get_as<int>(j, "nonlinear_trials", 4, "config");
  if (cfg.trials < 1 || cfg.nonlinear_trials < 1) throw ConfigError("trials must be >= 1");
  cfg.output = get_as<std::string>(j, "output", "", "config");

  cfg.tolerances = default_tolerances();
  if (j.contains("tolerances")) {
    if (!j["tolerances"].is_object()) throw ConfigError("'tolerances' must be an object");
    for (const auto& [key, value] : j["tolerances"].items()) {
      if (!cfg.tolerances.count(key)) throw ConfigError("unknown tolerance '" + key + "'");
      if (!value.is_number() || !std::isfinite(value.get<double>()) || value.get<double>() < 0) {
        throw ConfigError("tolerance '" + key + "' must be a finite number >= 0");
      }
      cfg.tolerances[key] = value.get<double>();
    }
  }

  if (j.contains("fixtures")) {
    const Json& fx = j["fixtures"];
    if (!fx.is_object()) throw ConfigError("'fixtures' must be an object");
    if (strict) reject_unknown_keys(fx, {"violation"}, "fixtures");
    cfg.violation_fixture = get_as<bool>(fx, "violation", false, "fixtures");
  }

  const Json groups = j.value("groups", Json::array());
  if (!groups.is_array() || groups.empty()) throw ConfigError("config needs a non-empty 'groups' list");
  std::map<std::string, std::size_t> by_name;
  for (const auto& g : groups) {
    if (!g.is_object()) throw ConfigError("group entries must be objects");
    GroupEntry e;
    e.name = required_name(g, "group entry");
    if (by_name.count(e.name)) throw ConfigError("duplicate group name '" + e.name + "'");
    if (g.contains("spec")) {
      e.spec = g["spec"];
    } else {
      e.spec = g;
      e.spec.erase("name");
    }
    e.group = group_from_json(e.spec);
    by_name[e.name] = cfg.groups.size();
    cfg.groups.push_back(std::move(e));
  }
  auto resolve_group = [&](const Json& entry, const std::string& where) -> const GroupEntry& {
    const auto name = get_as<std::string>(entry, "group", "", where);
    const auto it = by_name.find(name);
    if (it == by_name.end()) throw ConfigError(where + " refers to unknown group '" + name + "'");
    return cfg.groups[it->second];
  };

  std::set<std::string> names;
  for (const auto& c : j.value("cells", Json::array())) {
    if (!c.is_object()) throw ConfigError("cell entries must be objects");
    CellEntry e;
    e.name = required_name(c, "cell");
    if (!names.insert(e.name).second) throw ConfigError("duplicate cell name '" + e.name + "'");
    const std::string where = "cell '" + e.name + "'";
    if (strict) reject_unknown_keys(c, {"name", "group", "subgroup", "sigma_subgroup", "sigma", "rho"}, where);
    const GroupEntry& g = resolve_group(c, where);
    e.group = g.name;
    e.g = g.group;
    e.rho_domain = subgroup_from_json(e.g, c.value("subgroup", Json("trivial")));
    e.sigma_domain = c.contains("sigma_subgroup") ? subgroup_from_json(e.g, c["sigma_subgroup"]) : e.rho_domain;
    e.sigma = rep_from_json(e.sigma_domain, c.value("sigma", Json("trivial")));
    e.rho = rep_from_json(e.rho_domain, c.value("rho", Json("trivial")));
    cfg.cells.push_back(std::move(e));
  }

  for (const auto& inst : j.value("instances", Json::array())) {
    if (!inst.is_object()) throw ConfigError("instance entries must be objects");
    InstanceEntry e;
    e.name = required_name(inst, "instance");
    if (!names.insert(e.name).second) throw ConfigError("duplicate cell/instance name '" + e.name + "'");
    const std::string where = "instance '" + e.name + "'";
    if (strict) reject_unknown_keys(inst, {"name", "instance", "group", "params", "init", "trials"}, where);
    const GroupEntry& g = resolve_group(inst, where);
    e.group = g.name;
    e.g = g.group;
    e.trials = get_as<int>(inst, "trials", cfg.nonlinear_trials, where);
    if (e.trials < 1) throw ConfigError(where + ": trials must be >= 1");
    e.spec = inst;
    e.spec.erase("name");
    e.spec.erase("trials");
    e.spec["group"] = g.spec;
    cfg.instances.push_back(std::move(e));
  }
  return cfg;
}

bool Report::all_passed() const {
  for (const auto& r : records) {
    if (!r.passed) return false;
  }
  return true;
}

Json Report::to_json(bool include_runtime) const {
  Json recs = Json::array();
  Json failed = Json::array();
  int passed = 0;
  for (const auto& r : records) {
    Json o = {{"check_id", r.check_id},
              {"criterion", r.criterion},
              {"group", r.group},
              {"instance", r.instance},
              {"max_violation", r.max_violation},
              {"tolerance", r.tolerance},
              {"tolerance_name", r.tolerance_name},
              {"passed", r.passed}};
    if (include_runtime) o["runtime_ms"] = r.runtime_ms;
    if (r.observed) o["observed"] = *r.observed;
    if (!r.detail.empty()) o["detail"] = r.detail;
    recs.push_back(std::move(o));
    if (r.passed) {
      ++passed;
    } else {
      failed.push_back(r.check_id);
    }
  }
  Json echo = config;
  echo["seed"] = seed;
  return {{"seed", seed},
          {"strict", strict},
          {"config", echo},
          {"records", recs},
          {"summary",
           {{"total", static_cast<int>(records.size())},
            {"passed", passed},
            {"failed", static_cast<int>(records.size()) - passed},
            {"failed_checks", failed}}}};
}

}  // namespace homsteer
