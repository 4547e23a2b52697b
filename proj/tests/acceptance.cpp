// Runs the default verification matrix twice and prints one line per criterion.
#include <algorithm>
#include <cstdio>
#include <exception>
#include <map>
#include <string>
#include <vector>

#include "homsteer/errors.hpp"
#include "homsteer/harness.hpp"

namespace {

const char* const kTitles[] = {
    "",
    "group laws",
    "quotient integral formula",
    "twist cocycle",
    "induced round trips and intertwining",
    "constrained kernels give Mackey outputs",
    "kernel classes and canonical representative",
    "steerable basis dimension",
    "G-CNN equivariance",
    "domain reductions",
    "non-linear Mackey closure and equivariance",
    "universality",
    "instance derivations",
    "rotary relative identity",
    "determinism",
};

struct Tally {
  int total = 0;
  int failed = 0;
  double worst = 0.0;
  std::string worst_id;
  std::vector<std::string> failures;
};

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <config.json>\n", argv[0]);
    return 2;
  }
  try {
    const auto cfg = homsteer::parse_suite_config(homsteer::read_json_file(argv[1]), true);
    if (cfg.violation_fixture) {
      std::fprintf(stderr, "acceptance config must not enable the violation fixture\n");
      return 2;
    }
    const homsteer::Report first = homsteer::run_verify(cfg);
    const homsteer::Report second = homsteer::run_verify(cfg);

    std::map<int, Tally> by;
    for (const auto& r : first.records) {
      Tally& t = by[r.criterion];
      ++t.total;
      if (!r.passed) {
        ++t.failed;
        t.failures.push_back(r.check_id);
      }
      // Ratio to tolerance, so criteria with mixed tolerances report their tightest margin.
      const double margin = r.tolerance > 0 ? r.max_violation / r.tolerance : (r.max_violation > 0 ? 1e300 : 0.0);
      if (t.worst_id.empty() || margin > t.worst) {
        t.worst = margin;
        t.worst_id = r.check_id;
      }
    }

    bool all = true;
    for (int c = 1; c <= 13; ++c) {
      const auto it = by.find(c);
      if (it == by.end()) {
        std::printf("criterion %2d %-44s FAIL (no checks ran)\n", c, kTitles[c]);
        all = false;
        continue;
      }
      const Tally& t = it->second;
      const bool ok = t.failed == 0;
      all = all && ok;
      std::printf("criterion %2d %-44s %s (%d checks, worst %.3g of tolerance at %s)\n", c, kTitles[c],
                  ok ? "PASS" : "FAIL", t.total, t.worst, t.worst_id.c_str());
      for (const auto& id : t.failures) std::printf("    failed: %s\n", id.c_str());
    }
    // Records that errored out carry criterion 0.
    if (const auto it = by.find(0); it != by.end()) {
      all = false;
      for (const auto& id : it->second.failures) std::printf("    error: %s\n", id.c_str());
    }

    const std::string a = homsteer::canonical_dump(first.to_json(false));
    const std::string b = homsteer::canonical_dump(second.to_json(false));
    const bool same = a == b;
    all = all && same;
    std::printf("criterion 14 %-44s %s (%zu bytes per report)\n", kTitles[14], same ? "PASS" : "FAIL", a.size());

    std::printf("%s\n", all ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL");
    return all ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
