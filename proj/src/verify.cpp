#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "homsteer/errors.hpp"
#include "homsteer/harness.hpp"
#include "homsteer/linalg.hpp"
#include "homsteer/parallel.hpp"

namespace homsteer {

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Per-task generator from the suite seed and the task key.
std::mt19937_64 task_rng(std::uint64_t seed, const std::string& key) {
  const std::uint64_t k = fnv1a(key);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  return std::mt19937_64(seq);
}

class Recorder {
 public:
  Recorder(std::string group, std::string instance, const std::map<std::string, double>& tolerances)
      : group_(std::move(group)), instance_(std::move(instance)), tolerances_(tolerances), last_(Clock::now()) {}

  void at_most(int criterion, const std::string& check, double value, const std::string& tol,
               std::string detail = {}) {
    CheckRecord r = base(criterion, check, tol);
    r.max_violation = value;
    r.passed = value <= r.tolerance;
    r.detail = std::move(detail);
    records_.push_back(std::move(r));
  }

  /// Passes when observed >= floor; stores the shortfall as max_violation.
  void at_least(int criterion, const std::string& check, double observed, const std::string& floor_name) {
    CheckRecord r = base(criterion, check, floor_name);
    const double floor = r.tolerance;
    r.observed = observed;
    r.max_violation = std::isnan(observed) ? floor : std::max(0.0, floor - observed);
    r.tolerance = 0.0;
    r.passed = observed >= floor;
    r.detail = "lower bound " + std::to_string(floor);
    records_.push_back(std::move(r));
  }

  void error(const std::string& check, const std::exception& e) {
    CheckRecord r = base(0, check, "exact");
    r.max_violation = std::numeric_limits<double>::infinity();
    r.passed = false;
    r.detail = e.what();
    records_.push_back(std::move(r));
  }

  std::vector<CheckRecord> take() { return std::move(records_); }

 private:
  CheckRecord base(int criterion, const std::string& check, const std::string& tol) {
    const auto now = Clock::now();
    CheckRecord r;
    char prefix[8];
    std::snprintf(prefix, sizeof prefix, "c%02d/", criterion);
    r.check_id = prefix + check + "/" + (instance_.empty() ? group_ : instance_);
    r.criterion = criterion;
    r.group = group_;
    r.instance = instance_;
    r.tolerance_name = tol;
    r.tolerance = tolerances_.at(tol);
    r.runtime_ms = std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
    return r;
  }

  std::string group_;
  std::string instance_;
  const std::map<std::string, double>& tolerances_;
  Clock::time_point last_;
  std::vector<CheckRecord> records_;
};

// ---------------------------------------------------------------------------
// Oracles

// Averaging projector over H x H' on the ambient |G| dd kernel space. Built
// independently of the per-double-coset solver.
Matrix averaging_projector(const HomRep& hr) {
  const auto& G = hr.sigma().group();
  const int dd = hr.dim();
  const int n = G.order() * dd;
  const auto& hs = hr.sigma().domain().elements();
  const auto& hps = hr.rho().domain().elements();
  Matrix t = Matrix::Zero(n, n);
  const double w = 1.0 / static_cast<double>(hs.size() * hps.size());
  for (Element g = 0; g < G.order(); ++g) {
    for (Element h : hs) {
      for (Element hp : hps) {
        // (T k)(g) += sigma(h)^-1 k(h g h') rho(h')^-1, as a block on vec.
        const Element src = G.mul(G.mul(h, g), hp);
        t.block(g * dd, src * dd, dd, dd) += w * kron(hr.rho()(G.inv(hp)).transpose(), hr.sigma()(G.inv(h)));
      }
    }
  }
  return t;
}

// Sections that pick the largest element of each non-identity coset.
std::vector<Element> max_section(const Quotient& q) {
  std::vector<Element> s(q.size());
  for (CosetIndex x = 0; x < q.size(); ++x) {
    s[x] = x == 0 ? q.group().identity() : *std::max_element(q.cosets()[x].begin(), q.cosets()[x].end());
  }
  return s;
}

bool signed_permutation(const Representation& r) {
  for (int i = 0; i < r.domain().order(); ++i) {
    const Matrix& m = r.at_position(i);
    for (Eigen::Index row = 0; row < m.rows(); ++row) {
      int nonzero = 0;
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const double v = m(row, c);
        if (v == 1.0 || v == -1.0) {
          ++nonzero;
        } else if (v != 0.0) {
          return false;
        }
      }
      if (nonzero != 1) return false;
    }
  }
  return true;
}

// Elementwise cube for signed-permutation reps, |v|^2 v otherwise; both
// commute with the output representation.
FeatureMap cubic(const FeatureMap& f, bool elementwise) {
  Matrix v = f.values();
  if (elementwise) {
    v = v.array().cube().matrix();
  } else {
    for (Eigen::Index c = 0; c < v.cols(); ++c) v.col(c) *= v.col(c).squaredNorm();
  }
  return FeatureMap(f.rep_ptr(), std::move(v));
}

double section_equivariance(const SectionOp& op, const QuotientPtr& q, const RepPtr& in, int trials,
                            std::mt19937_64& rng) {
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const SectionFeature sf = random_section_feature(q, in, rng);
    const SectionFeature out = op(sf);
    for (Element k = 0; k < q->group().order(); ++k) {
      worst = std::max(worst, max_abs_diff(op(section_action(k, sf)), section_action(k, out)));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Group and quotient checks

void group_checks(const GroupEntry& g, Recorder& rec) {
  rec.at_most(1, "group_laws", static_cast<double>(g.group->count_law_violations()), "exact");
}

void quotient_checks(const SubgroupPtr& h, const std::string& label, Recorder& rec, std::mt19937_64& rng) {
  const auto base = left_cosets(h);
  const std::vector<Quotient> sections = {base, left_cosets(h, max_section(base))};
  const auto& G = *h->group_ptr();
  std::vector<std::int64_t> ints(G.order());
  for (Element g = 0; g < G.order(); ++g) ints[g] = (static_cast<std::int64_t>(g + 1) * 7919) % 1009 - 504;
  const Matrix floats = random_uniform(G.order(), 1, rng);

  double int_violations = 0.0, float_diff = 0.0, cocycle_violations = 0.0;
  for (const auto& q : sections) {
    const auto fi = [&](Element g) { return ints[g]; };
    if (haar_sum(G, fi, false) != quotient_sum(q, fi)) int_violations += 1.0;
    const auto ff = [&](Element g) { return floats(g, 0); };
    float_diff = std::max(float_diff, std::abs(haar_sum(G, ff, false) - quotient_sum(q, ff)));
    for (CosetIndex x = 0; x < q.size(); ++x) {
      for (Element g1 = 0; g1 < G.order(); ++g1) {
        for (Element g2 = 0; g2 < G.order(); ++g2) {
          const Element lhs = q.twist(x, G.mul(g1, g2));
          const Element rhs = G.mul(q.twist(q.act(g2, x), g1), q.twist(x, g2));
          if (lhs != rhs) cocycle_violations += 1.0;
        }
      }
    }
  }
  rec.at_most(2, "quotient_integral_int" + label, int_violations, "exact");
  rec.at_most(2, "quotient_integral_float" + label, float_diff, "float_sum");
  rec.at_most(3, "twist_cocycle" + label, cocycle_violations, "exact");
}

// ---------------------------------------------------------------------------
// Cell checks: criteria 2 to 11

void cell_checks(const CellEntry& c, const SuiteConfig& cfg, bool strict, Recorder& rec, std::mt19937_64& rng) {
  const auto& G = *c.g;
  const int n = G.order();
  const HomRep hr(c.sigma, c.rho);
  const auto qr = std::make_shared<const Quotient>(left_cosets(c.rho_domain));
  const int trials = cfg.trials, nl_trials = cfg.nonlinear_trials;

  quotient_checks(c.rho_domain, "", rec, rng);
  if (c.sigma_domain->elements() != c.rho_domain->elements()) {
    quotient_checks(c.sigma_domain, "_sigma", rec, rng);
  }

  // 4. Lift and sink.
  {
    double round = 0.0, intertwine = 0.0;
    for (int t = 0; t < trials; ++t) {
      const SectionFeature sf = random_section_feature(qr, c.rho, rng);
      round = std::max(round, max_abs_diff(sink(lift(sf), qr), sf));
      const FeatureMap f = random_feature(c.rho, rng);
      round = std::max(round, max_abs_diff(lift(sink(f, qr)), f));
      for (Element k = 0; k < n; ++k) {
        intertwine = std::max(intertwine, max_abs_diff(lift(section_action(k, sf)), g_action(k, lift(sf))));
      }
    }
    rec.at_most(4, "lambda_roundtrip", round, "roundtrip");
    rec.at_most(4, "lambda_intertwine", intertwine, "roundtrip");
  }

  // 5. Left constraint gives Mackey outputs; a perturbed kernel does not.
  {
    const auto rand_two = [&] {
      return TwoArgKernel(hr, random_uniform(n * hr.rows(), n * hr.cols(), rng));
    };
    double worst = 0.0, detected = std::numeric_limits<double>::infinity();
    for (int t = 0; t < std::min(trials, 8); ++t) {
      const TwoArgKernel k = left_project(rand_two());
      const FeatureMap raw(c.rho, random_uniform(hr.cols(), n, rng));
      worst = std::max(worst, apply_two_arg(k, raw).mackey_residual());
      if (c.sigma_domain->order() > 1) {
        const TwoArgKernel bad(hr, k.values() + 1e-3 * rand_two().values());
        detected = std::min(detected, apply_two_arg(bad, raw).mackey_residual());
      }
    }
    rec.at_most(5, "lemma_mackey_output", worst, "lemma_mackey");
    if (c.sigma_domain->order() > 1) rec.at_least(5, "lemma_violation_detected", detected, "violation_floor");
  }

  // 6. Kernel classes and the canonical representative.
  {
    const TwoArgKernel k = left_project(TwoArgKernel(hr, random_uniform(n * hr.rows(), n * hr.cols(), rng)));
    const TwoArgKernel k0 = canonical_representative(k);
    rec.at_most(6, "canonical_idempotent", max_abs(canonical_representative(k0).values() - k0.values()),
                "kernel_class");
    rec.at_most(6, "canonical_right_constraint", k0.right_residual(), "kernel_class");
    const TwoArgKernel eps = left_project(TwoArgKernel(hr, random_uniform(n * hr.rows(), n * hr.cols(), rng)));
    const TwoArgKernel other(hr, k.values() + eps.values() - canonical_representative(eps).values());
    rec.at_most(6, "class_canonical_unique", max_abs(canonical_representative(other).values() - k0.values()),
                "kernel_class");
    double op = 0.0;
    for (int t = 0; t < std::min(trials, 8); ++t) {
      const FeatureMap f = random_feature(c.rho, rng);
      const FeatureMap y = apply_two_arg(k, f);
      op = std::max({op, max_abs_diff(y, apply_two_arg(k0, f)), max_abs_diff(y, apply_two_arg(other, f))});
    }
    rec.at_most(6, "class_operator_equality", op, "kernel_class");
  }

  // 7. Basis dimension against the projector oracle.
  const auto solved = solve_steerable_basis(hr);
  {
    const int dim = static_cast<int>(solved.basis.size());
    const Matrix t = averaging_projector(hr);
    const int oracle = numerical_rank(t);
    rec.at_most(7, "basis_dimension_oracle", std::abs(dim - oracle), "exact",
                "solver " + std::to_string(dim) + ", oracle " + std::to_string(oracle));
    rec.at_most(7, "basis_dimension_trace", std::abs(dim - t.trace()), "basis_residual");
    double res = solved.constraint_residual;
    for (const auto& b : solved.basis) res = std::max(res, b.bi_equivariance_residual());
    rec.at_most(7, "basis_residual", res, "basis_residual");
    if (c.sigma->is_trivial() && c.rho->is_trivial() && hr.dim() == 1) {
      const auto space = double_cosets(c.sigma_domain, c.rho_domain);
      rec.at_most(7, "double_coset_count", std::abs(dim - space.size()), "exact",
                  std::to_string(space.size()) + " double cosets");
    }
  }

  std::mt19937_64 krng(rng());
  const OneArgKernel kh =
      solved.basis.empty() ? OneArgKernel::zeros(hr) : random_combination(hr, solved.basis, krng);
  const FeatureOp conv = [&](const FeatureMap& f) { return gcnn_apply(kh, f); };

  // 8. G-CNN equivariance.
  {
    const auto eq = check_equivariance(conv, c.rho, trials, rng());
    rec.at_most(8, "gcnn_equivariance", eq.max_violation, "gcnn_equivariance",
                solved.basis.empty() ? "empty solution space" : "");
  }

  // 9. Domain reductions.
  {
    const QuotientKernel qk = to_quotient_kernel(kh, qr);
    const DoubleCosetKernel dk = to_double_coset_kernel(qk);
    const QuotientKernel qk2 = from_double_coset_kernel(dk);
    const OneArgKernel kh2 = from_quotient_kernel(qk2);
    rec.at_most(9, "domain_roundtrip",
                std::max(max_abs(kh2.values() - kh.values()), max_abs(qk2.values() - qk.values())), "roundtrip");
    const int dg = solution_dimension_g(hr), dx = solution_dimension_x(hr, *qr),
              dd = solution_dimension_d(hr, dk.space());
    rec.at_most(9, "dimension_agreement", std::max(std::abs(dg - dx), std::abs(dg - dd)), "exact",
                std::to_string(dg) + "/" + std::to_string(dx) + "/" + std::to_string(dd));
  }

  ApplyOptions options;
  options.strict = strict;

  // 10. The G-CNN integrand through the non-linear path.
  {
    const OmegaHat w = gcnn_omega(kh);
    const OmegaReport r = check_omega_constraints(w, nl_trials, rng());
    rec.at_most(10, "gcnn_omega_constraints", r.max_violation(), "nonlinear_closure");
    const FeatureOp phi = [&](const FeatureMap& f) { return apply_nonlinear(w, f, options); };
    rec.at_most(10, "gcnn_omega_equivariance", check_equivariance(phi, c.rho, nl_trials, rng()).max_violation,
                "nonlinear_closure");
    double mackey = 0.0;
    for (int t = 0; t < nl_trials; ++t) mackey = std::max(mackey, phi(random_feature(c.rho, rng)).mackey_residual());
    rec.at_most(10, "gcnn_omega_mackey", mackey, "nonlinear_closure");
  }

  // 11. Universality via the delta construction.
  {
    const bool elementwise = signed_permutation(*c.sigma);
    const std::vector<std::pair<std::string, std::pair<FeatureOp, RepPtr>>> lambdas = {
        {"identity", {[](const FeatureMap& f) { return f; }, c.rho}},
        {"gcnn", {conv, c.sigma}},
        {"cubic_gcnn", {[&](const FeatureMap& f) { return cubic(conv(f), elementwise); }, c.sigma}},
    };
    for (const auto& [name, entry] : lambdas) {
      const auto& [lambda, out_rep] = entry;
      for (DeltaKind kind : {DeltaKind::coset, DeltaKind::identity}) {
        const OmegaHat w = universal_from_lambda(lambda, c.rho, out_rep, kind, 4, rng());
        double worst = 0.0;
        for (int t = 0; t < nl_trials; ++t) {
          const FeatureMap f = random_feature(c.rho, rng);
          worst = std::max(worst, max_abs_diff(apply_nonlinear(w, f), lambda(f)));
        }
        const std::string suffix = kind == DeltaKind::coset ? "" : "_identity_delta";
        rec.at_most(11, "universality_" + name + suffix, worst, "operator_equality_exact");
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Instance checks: criteria 10, 12, 13

void instance_checks(const InstanceEntry& inst, const InstanceBundle& b, bool strict, Recorder& rec,
                     std::mt19937_64& rng) {
  const int trials = inst.trials;
  ApplyOptions options;
  options.strict = strict;
  const OmegaHat& w = *b.omega;
  const FeatureOp phi = [&](const FeatureMap& f) { return apply_nonlinear(w, f, options); };

  const OmegaReport r = check_omega_constraints(w, trials, rng());
  rec.at_most(10, "omega_constraints", r.max_violation(), "nonlinear_closure",
              "pointwise H residual " + std::to_string(r.h_pointwise));
  if (r.alpha_violation >= 0.0) rec.at_most(10, "alpha_factorization", r.alpha_violation, "operator_equality_exact");
  rec.at_most(10, "equivariance", check_equivariance(phi, b.in, trials, rng()).max_violation, "nonlinear_closure");

  std::vector<FeatureMap> inputs;
  std::vector<SectionFeature> section_inputs;
  for (int t = 0; t < trials; ++t) {
    if (b.section_op) {
      section_inputs.push_back(random_section_feature(b.quotient, b.in, rng));
      inputs.push_back(lift(section_inputs.back()));
    } else {
      inputs.push_back(random_feature(b.in, rng));
    }
  }
  std::vector<FeatureMap> outputs;
  double mackey = 0.0;
  for (const auto& f : inputs) {
    outputs.push_back(phi(f));
    mackey = std::max(mackey, outputs.back().mackey_residual());
  }
  rec.at_most(10, "mackey_closure", mackey, "nonlinear_closure");

  // Lifted integrand against the section-level operator.
  double lifted = 0.0;
  for (std::size_t i = 0; i < section_inputs.size(); ++i) {
    lifted = std::max(lifted, max_abs_diff(outputs[i], lift(b.section_op(section_inputs[i]))));
  }

  if (b.kind == "gcnn") {
    double eq = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) eq = std::max(eq, max_abs_diff(outputs[i], b.native_op(inputs[i])));
    rec.at_most(12, "gcnn_operator_equality", eq, "operator_equality_exact");
  } else if (b.kind == "implicit") {
    rec.at_most(12, "implicit_symmetrized_constraint", implicit_constraint_residual(*b.implicit, trials, rng()),
                "implicit_constraint");
    rec.at_most(12, "implicit_conjugation", lifted, "operator_equality");
    rec.at_most(12, "section_equivariance", section_equivariance(b.section_op, b.quotient, b.in, 1, rng),
                "translation_equivariance");
  } else if (b.kind == "self_attention") {
    rec.at_most(12, "self_attention_lifted", lifted, "operator_equality");
    rec.at_most(12, "section_equivariance", section_equivariance(b.section_op, b.quotient, b.in, 1, rng),
                "translation_equivariance");
  } else if (b.kind == "rel_bias" || b.kind == "rotary") {
    const AttentionParams& p = *b.attention;
    rec.at_most(12, b.kind == "rel_bias" ? "rel_bias_lifted" : "rotary_lifted", lifted, "operator_equality");
    rec.at_most(12, "translation_equivariance", section_equivariance(b.section_op, b.quotient, b.in, trials, rng),
                "translation_equivariance");
    const auto& G = b.quotient->group();
    const Matrix F = section_inputs.front().values();
    const Matrix weights = b.kind == "rel_bias" ? relative_bias_weights(p, F, G) : rotary_weights(p, F, G);
    rec.at_most(12, "softmax_rows", max_abs(weights.rowwise().sum() - Vector::Ones(weights.rows())), "softmax");
    if (b.kind == "rel_bias" && p.bias_mode == BiasMode::add) {
      AttentionParams shifted = p;
      shifted.psi.array() += 2.5;
      rec.at_most(12, "bias_shift_invariance", max_abs(relative_bias_weights(shifted, F, G) - weights), "softmax");
    }
    if (b.kind == "rotary") {
      auto whole = std::make_shared<const Subgroup>(Subgroup::whole(b.quotient->subgroup().group_ptr()));
      const Representation rot = rotation_block_rep(whole, p.freqs);
      double worst = 0.0;
      for (Element x = 0; x < G.order(); ++x) {
        for (Element xp = 0; xp < G.order(); ++xp) {
          worst = std::max(worst, max_abs(rot(x).transpose() * rot(xp) - rot(G.mul(xp, G.inv(x)))));
        }
      }
      rec.at_most(13, "rotary_relative_identity", worst, "rotary_identity");
    }
  } else if (b.kind == "lie_transformer") {
    double eq = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) eq = std::max(eq, max_abs_diff(outputs[i], b.native_op(inputs[i])));
    rec.at_most(12, "lie_path", eq, "operator_equality");
    rec.at_most(10, "native_equivariance", check_equivariance(b.native_op, b.in, trials, rng()).max_violation,
                "nonlinear_closure");
  }
}

// Deliberate violation: an unconstrained G-CNN kernel on the first cell with
// a non-trivial output subgroup.
void violation_fixture(const SuiteConfig& cfg, Recorder& rec, std::mt19937_64& rng) {
  for (const auto& c : cfg.cells) {
    if (c.sigma_domain->order() < 2) continue;
    const HomRep hr(c.sigma, c.rho);
    const OneArgKernel raw(hr, random_uniform(hr.rows(), c.g->order() * hr.cols(), rng));
    double worst = 0.0;
    for (int t = 0; t < 4; ++t) worst = std::max(worst, gcnn_apply(raw, random_feature(c.rho, rng)).mackey_residual());
    rec.at_most(5, "fixture_unconstrained_kernel_mackey", worst, "mackey", "deliberate violation on " + c.name);
    return;
  }
  throw ConfigError("violation fixture needs a cell with a non-trivial subgroup");
}

}  // namespace

Report run_verify(const SuiteConfig& cfg, bool strict) {
  // Instances are built up front so construction errors surface as config errors.
  std::vector<InstanceBundle> bundles;
  for (const auto& inst : cfg.instances) bundles.push_back(build_instance(inst.spec, inst.g));

  struct Task {
    std::string key;
    std::function<void(Recorder&, std::mt19937_64&)> run;
    std::string group, instance;
  };
  std::vector<Task> tasks;
  for (const auto& g : cfg.groups) {
    tasks.push_back({"group:" + g.name, [&g](Recorder& r, std::mt19937_64&) { group_checks(g, r); }, g.name, ""});
  }
  for (const auto& c : cfg.cells) {
    tasks.push_back({"cell:" + c.name,
                     [&c, &cfg, strict](Recorder& r, std::mt19937_64& rng) { cell_checks(c, cfg, strict, r, rng); },
                     c.group, c.name});
  }
  for (std::size_t i = 0; i < cfg.instances.size(); ++i) {
    const auto& inst = cfg.instances[i];
    const auto& b = bundles[i];
    tasks.push_back({"instance:" + inst.name,
                     [&inst, &b, strict](Recorder& r, std::mt19937_64& rng) { instance_checks(inst, b, strict, r, rng); },
                     inst.group, inst.name});
  }
  if (cfg.violation_fixture) {
    if (std::none_of(cfg.cells.begin(), cfg.cells.end(), [](const CellEntry& c) { return c.sigma_domain->order() > 1; })) {
      throw ConfigError("violation fixture needs a cell with a non-trivial subgroup");
    }
    tasks.push_back({"fixture:violation", [&cfg](Recorder& r, std::mt19937_64& rng) { violation_fixture(cfg, r, rng); },
                     "", "fixture"});
  }

  std::vector<std::vector<CheckRecord>> results(tasks.size());
  parallel_for(static_cast<int>(tasks.size()), [&](int i) {
    Recorder rec(tasks[i].group, tasks[i].instance, cfg.tolerances);
    std::mt19937_64 rng = task_rng(cfg.seed, tasks[i].key);
    try {
      tasks[i].run(rec, rng);
    } catch (const std::exception& e) {
      rec.error("error", e);
    }
    results[i] = rec.take();
  });

  Report report;
  report.seed = cfg.seed;
  report.strict = strict;
  report.config = cfg.echo;
  for (auto& rs : results) {
    for (auto& r : rs) report.records.push_back(std::move(r));
  }
  std::stable_sort(report.records.begin(), report.records.end(),
                   [](const CheckRecord& a, const CheckRecord& b) { return a.check_id < b.check_id; });
  return report;
}

}  // namespace homsteer
