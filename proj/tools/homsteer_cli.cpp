#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "homsteer/errors.hpp"
#include "homsteer/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitInvalid = 2;

using homsteer::Json;

int cmd_verify(const std::string& config_path, const std::string& out_path, std::optional<std::uint64_t> seed,
               bool strict) {
  homsteer::SuiteConfig cfg = homsteer::parse_suite_config(homsteer::read_json_file(config_path), strict);
  if (seed) cfg.seed = *seed;
  const homsteer::Report report = homsteer::run_verify(cfg, strict);
  homsteer::write_text_file(out_path, homsteer::canonical_dump(report.to_json()));

  int failed = 0;
  for (const auto& r : report.records) {
    if (r.passed) continue;
    ++failed;
    std::cerr << "FAIL " << r.check_id << " max_violation=" << r.max_violation << " tolerance=" << r.tolerance;
    if (!r.detail.empty()) std::cerr << " (" << r.detail << ")";
    std::cerr << "\n";
  }
  std::cout << report.records.size() - failed << "/" << report.records.size() << " checks passed, seed "
            << cfg.seed << ", report " << out_path << "\n";
  return failed == 0 ? kExitOk : kExitFailed;
}

int cmd_solve_basis(const std::string& group_text, const std::string& subgroup_text,
                    const std::string& sigma_subgroup_text, const std::string& reps_text, const std::string& out_path) {
  const Json group_spec = homsteer::parse_spec_text(group_text);
  const auto group = homsteer::group_from_json(group_spec);
  const auto rho_domain = homsteer::subgroup_from_json(group, homsteer::parse_spec_text(subgroup_text));
  const auto sigma_domain = sigma_subgroup_text.empty()
                                ? rho_domain
                                : homsteer::subgroup_from_json(group, homsteer::parse_spec_text(sigma_subgroup_text));

  // "sign" (sigma = rho), "trivial/sign" (sigma/rho), or {"sigma": ..., "rho": ...}.
  Json sigma_spec, rho_spec;
  const Json reps = homsteer::parse_spec_text(reps_text);
  if (reps.is_object() && reps.contains("sigma") && reps.contains("rho")) {
    sigma_spec = reps["sigma"];
    rho_spec = reps["rho"];
  } else if (reps.is_string() && reps.get<std::string>().find('/') != std::string::npos) {
    const std::string s = reps.get<std::string>();
    const auto slash = s.find('/');
    sigma_spec = homsteer::parse_spec_text(s.substr(0, slash));
    rho_spec = homsteer::parse_spec_text(s.substr(slash + 1));
  } else {
    sigma_spec = rho_spec = reps;
  }
  const auto sigma = homsteer::rep_from_json(sigma_domain, sigma_spec);
  const auto rho = homsteer::rep_from_json(rho_domain, rho_spec);

  const homsteer::HomRep hr(sigma, rho);
  const auto solved = homsteer::solve_steerable_basis(hr);
  double residual = solved.constraint_residual;
  Json basis = Json::array();
  for (const auto& b : solved.basis) {
    residual = std::max(residual, b.bi_equivariance_residual());
    basis.push_back(homsteer::kernel_to_json(b));
  }
  const auto space = homsteer::double_cosets(sigma_domain, rho_domain);
  const Json out = {{"group", homsteer::group_to_json(*group)},
                    {"subgroup", homsteer::subgroup_to_json(*rho_domain)},
                    {"sigma_subgroup", homsteer::subgroup_to_json(*sigma_domain)},
                    {"sigma", homsteer::rep_to_json(*sigma)},
                    {"rho", homsteer::rep_to_json(*rho)},
                    {"dimension", static_cast<int>(solved.basis.size())},
                    {"double_cosets", space.size()},
                    {"residual", residual},
                    {"basis", basis}};
  homsteer::write_text_file(out_path, homsteer::canonical_dump(out));
  std::cout << "dimension " << solved.basis.size() << ", residual " << residual << "\n";
  return residual <= homsteer::kKernelTolerance ? kExitOk : kExitFailed;
}

int cmd_run_layer(const std::string& config_path, const std::string& in_path, const std::string& out_path,
                  bool strict) {
  const Json config = homsteer::read_json_file(config_path);
  const Json input = homsteer::read_json_file(in_path);
  const homsteer::LayerResult result = homsteer::run_layer(config, input, strict);
  homsteer::write_text_file(out_path, homsteer::canonical_dump(result.output));
  std::cout << "mackey residual " << result.mackey_residual << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"homsteer: equivariant operators on homogeneous spaces of finite groups"};
  app.require_subcommand(1);

  std::string config_path, out_path, in_path;
  std::optional<std::uint64_t> seed;
  bool strict = false;

  auto* verify = app.add_subcommand("verify", "Run the verification matrix and write a JSON report");
  verify->add_option("--config", config_path, "Suite config (JSON)")->required();
  verify->add_option("--out", out_path, "Report path")->required();
  verify->add_option("--seed", seed, "Override the config seed");
  verify->add_flag("--strict", strict, "Reject unknown config keys and check integrands before applying");

  std::string group_text, subgroup_text = "trivial", sigma_subgroup_text, reps_text = "trivial";
  auto* solve = app.add_subcommand("solve-basis", "Solve for a basis of bi-equivariant kernels");
  solve->add_option("--group", group_text, "Group spec: JSON or shorthand (Z8, D4, S3, Z8:Z2)")->required();
  solve->add_option("--subgroup", subgroup_text, "Subgroup H' of rho (and of sigma unless --sigma-subgroup)");
  solve->add_option("--sigma-subgroup", sigma_subgroup_text, "Subgroup H of sigma");
  solve->add_option("--reps", reps_text, "Rep spec for both, 'sigma/rho', or {\"sigma\":..,\"rho\":..}");
  solve->add_option("--out", out_path, "Output path")->required();

  auto* layer = app.add_subcommand("run-layer", "Apply a configured operator to a feature file");
  layer->add_option("--config", config_path, "Instance config (JSON)")->required();
  layer->add_option("--in", in_path, "Input feature (JSON)")->required();
  layer->add_option("--out", out_path, "Output feature path")->required();
  layer->add_flag("--strict", strict, "Check the integrand constraints before applying");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    if (verify->parsed()) return cmd_verify(config_path, out_path, seed, strict);
    if (solve->parsed()) return cmd_solve_basis(group_text, subgroup_text, sigma_subgroup_text, reps_text, out_path);
    return cmd_run_layer(config_path, in_path, out_path, strict);
  } catch (const homsteer::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
}
