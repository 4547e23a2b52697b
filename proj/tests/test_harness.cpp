#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "homsteer/errors.hpp"
#include "homsteer/harness.hpp"

namespace homsteer {
namespace {

Json small_config() {
  return Json::parse(R"({
    "seed": 7,
    "trials": 4,
    "nonlinear_trials": 2,
    "groups": [{"name": "S3", "kind": "symmetric", "n": 3}, {"name": "D4", "kind": "dihedral", "n": 4}],
    "cells": [
      {"name": "S3_t12_triv", "group": "S3", "subgroup": "perm:1,0,2"},
      {"name": "D4_flip_sign", "group": "D4", "subgroup": "flip", "sigma": "sign", "rho": "sign"}
    ],
    "instances": [
      {"name": "gcnn_S3", "instance": "gcnn", "group": "S3",
       "params": {"subgroup": "perm:1,0,2", "sigma": "sign", "rho": "sign"},
       "init": {"seed": 1, "init": "uniform[-1,1]"}}
    ]
  })");
}

TEST(CanonicalDump, FormatsScalarsAndArrays) {
  const Json j = {{"b", {1.0, 2.5, -0.0}}, {"a", 3}, {"c", {{"x", std::numeric_limits<double>::infinity()}}},
                  {"d", Json::array({Json::array({1.0}), Json::array({0.1})})}};
  const std::string expected =
      "{\n"
      "  \"a\": 3,\n"
      "  \"b\": [1.0, 2.5, -0.0],\n"
      "  \"c\": {\n"
      "    \"x\": null\n"
      "  },\n"
      "  \"d\": [\n"
      "    [1.0],\n"
      "    [0.10000000000000001]\n"
      "  ]\n"
      "}\n";
  EXPECT_EQ(canonical_dump(j), expected);
}

TEST(Config, Shorthands) {
  const auto s3 = group_from_json(Json("S3"));
  EXPECT_EQ(s3->order(), 6);
  EXPECT_EQ(group_from_json(Json("Z8:Z2"))->order(), 16);
  EXPECT_EQ(subgroup_from_json(s3, Json("perm:1,0,2"))->order(), 2);
  EXPECT_EQ(subgroup_from_json(s3, Json("stab0"))->order(), 2);
  EXPECT_EQ(subgroup_from_json(s3, Json("whole"))->order(), 6);
  EXPECT_EQ(rep_from_json(subgroup_from_json(s3, Json("trivial")), Json("trivial:3"))->dim(), 3);
  const auto z8 = group_from_json(Json("Z8"));
  EXPECT_EQ(rep_from_json(subgroup_from_json(z8, Json("gen:2")), Json("rotation:1,3"))->dim(), 4);
}

TEST(Config, Rejections) {
  Json empty = small_config();
  empty["groups"] = Json::array();
  EXPECT_THROW(parse_suite_config(empty), ConfigError);

  Json unknown_group = small_config();
  unknown_group["cells"][0]["group"] = "Z7";
  EXPECT_THROW(parse_suite_config(unknown_group), ConfigError);

  Json dup = small_config();
  dup["cells"][1]["name"] = "S3_t12_triv";
  EXPECT_THROW(parse_suite_config(dup), ConfigError);

  Json tol = small_config();
  tol["tolerances"] = {{"no_such_tolerance", 1e-3}};
  EXPECT_THROW(parse_suite_config(tol), ConfigError);

  Json extra = small_config();
  extra["colour"] = "blue";
  EXPECT_NO_THROW(parse_suite_config(extra, false));
  EXPECT_THROW(parse_suite_config(extra, true), ConfigError);

  const auto s3 = group_from_json(Json("S3"));
  EXPECT_THROW(subgroup_from_json(s3, Json("gen:9")), ConfigError);
  EXPECT_THROW(rep_from_json(subgroup_from_json(s3, Json("trivial")), Json("sign")), ConfigError);
  EXPECT_THROW(group_from_json(Json("Q8")), ConfigError);
}

TEST(Io, FeatureRoundTrip) {
  const auto d4 = group_from_json(Json("D4"));
  const auto rep = rep_from_json(subgroup_from_json(d4, Json("flip")), Json("regular"));
  std::mt19937_64 rng(3);
  const FeatureMap f = random_feature(rep, rng);
  const std::string text = canonical_dump(feature_to_json(f));
  const FeatureMap g = feature_from_json(Json::parse(text));
  EXPECT_EQ(g.values(), f.values());
  EXPECT_EQ(g.rep().dim(), 2);
  EXPECT_EQ(canonical_dump(feature_to_json(g)), text);
}

TEST(Verify, SmallSuitePassesAndIsDeterministic) {
  const SuiteConfig cfg = parse_suite_config(small_config(), true);
  const Report a = run_verify(cfg, true);
  const Report b = run_verify(cfg, true);
  EXPECT_TRUE(a.all_passed());
  EXPECT_GT(a.records.size(), 20u);
  EXPECT_EQ(canonical_dump(a.to_json(false)), canonical_dump(b.to_json(false)));
  for (const auto& r : a.records) {
    EXPECT_GE(r.criterion, 1);
    EXPECT_LE(r.criterion, 13);
  }
  SuiteConfig other = cfg;
  other.seed = 8;
  EXPECT_NE(canonical_dump(run_verify(other).to_json(false)), canonical_dump(a.to_json(false)));
}

TEST(Verify, ReportIndependentOfThreadCount) {
  const SuiteConfig cfg = parse_suite_config(small_config());
  setenv("HOMSTEER_THREADS", "1", 1);
  const std::string serial = canonical_dump(run_verify(cfg).to_json(false));
  setenv("HOMSTEER_THREADS", "4", 1);
  const std::string threaded = canonical_dump(run_verify(cfg).to_json(false));
  unsetenv("HOMSTEER_THREADS");
  EXPECT_EQ(serial, threaded);
}

TEST(Verify, ViolationFixtureFailsWithNamedCheck) {
  Json j = small_config();
  j["fixtures"] = {{"violation", true}};
  const Report r = run_verify(parse_suite_config(j));
  EXPECT_FALSE(r.all_passed());
  const Json out = r.to_json(false);
  ASSERT_EQ(out["summary"]["failed"], 1);
  EXPECT_NE(out["summary"]["failed_checks"][0].get<std::string>().find("fixture"), std::string::npos);
}

TEST(RunLayer, NativeMatchesNonlinearPath) {
  Json cfg = {{"group", "S3"},
              {"instance", "gcnn"},
              {"params", {{"subgroup", "perm:1,0,2"}, {"sigma", "sign"}, {"rho", "sign"}}},
              {"init", {{"seed", 5}, {"init", "uniform[-1,1]"}}}};
  const auto s3 = group_from_json(Json("S3"));
  const auto rep = rep_from_json(subgroup_from_json(s3, Json("perm:1,0,2")), Json("sign"));
  std::mt19937_64 rng(11);
  const Json input = feature_to_json(random_feature(rep, rng));

  cfg["path"] = "native";
  const LayerResult native = run_layer(cfg, input, true);
  cfg["path"] = "nonlinear";
  const LayerResult nonlinear = run_layer(cfg, input, true);
  EXPECT_EQ(canonical_dump(native.output["values"]), canonical_dump(nonlinear.output["values"]));
  EXPECT_LE(nonlinear.mackey_residual, 1e-10);

  const Json zero = feature_to_json(FeatureMap::zeros(rep));
  const LayerResult z = run_layer(cfg, zero, true);
  for (const auto& col : z.output["values"]) {
    for (const auto& v : col) EXPECT_EQ(v.get<double>(), 0.0);
  }

  cfg["path"] = "sideways";
  EXPECT_THROW(run_layer(cfg, input), ConfigError);
}

TEST(RunLayer, RejectsMismatchedInput) {
  const Json cfg = {{"group", "S3"},
                    {"instance", "gcnn"},
                    {"params", {{"subgroup", "perm:1,0,2"}, {"sigma", "sign"}, {"rho", "sign"}}},
                    {"init", {{"seed", 5}, {"init", "uniform[-1,1]"}}}};
  const auto d4 = group_from_json(Json("D4"));
  const auto rep = rep_from_json(subgroup_from_json(d4, Json("flip")), Json("sign"));
  EXPECT_THROW(run_layer(cfg, feature_to_json(FeatureMap::zeros(rep))), DimensionMismatch);
}

}  // namespace
}  // namespace homsteer
