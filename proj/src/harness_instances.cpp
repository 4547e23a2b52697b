#include <set>

#include "homsteer/errors.hpp"
#include "homsteer/harness.hpp"
#include "homsteer/linalg.hpp"

namespace homsteer {

namespace {

int positive_param(const Json& params, const char* key, int fallback) {
  if (!params.contains(key)) return fallback;
  if (!params[key].is_number_integer() || params[key].get<int>() < 1) {
    throw ConfigError(std::string("param '") + key + "' must be a positive integer");
  }
  return params[key].get<int>();
}

std::string string_param(const Json& params, const char* key, const std::string& fallback,
                         const std::set<std::string>& allowed) {
  if (!params.contains(key)) return fallback;
  if (!params[key].is_string() || !allowed.count(params[key].get<std::string>())) {
    throw ConfigError(std::string("param '") + key + "' has an unsupported value " + params[key].dump());
  }
  return params[key].get<std::string>();
}

bool bool_param(const Json& params, const char* key, bool fallback) {
  if (!params.contains(key)) return fallback;
  if (!params[key].is_boolean()) throw ConfigError(std::string("param '") + key + "' must be a boolean");
  return params[key].get<bool>();
}

std::vector<int> freqs_param(const Json& params) {
  if (!params.contains("freqs")) return {1, 2};
  const Json& f = params["freqs"];
  if (!f.is_array() || f.empty()) throw ConfigError("'freqs' must be a non-empty list");
  std::vector<int> out;
  for (const auto& v : f) {
    if (!v.is_number_integer()) throw ConfigError("rotary frequencies must be integers");
    out.push_back(v.get<int>());
  }
  return out;
}

RepPtr trivial_on(const SubgroupPtr& h, int dim) { return std::make_shared<const Representation>(trivial_rep(h, dim)); }

QuotientPtr quotient_of(const SubgroupPtr& h) { return std::make_shared<const Quotient>(left_cosets(h)); }

void build_gcnn(InstanceBundle& b, const Json& params, const GroupPtr& group, std::mt19937_64& rng) {
  auto rho_domain = subgroup_from_json(group, params.value("subgroup", Json("trivial")));
  auto sigma_domain =
      params.contains("sigma_subgroup") ? subgroup_from_json(group, params["sigma_subgroup"]) : rho_domain;
  b.out = rep_from_json(sigma_domain, params.value("sigma", Json("trivial")));
  b.in = rep_from_json(rho_domain, params.value("rho", Json("trivial")));
  const HomRep hr(b.out, b.in);
  const auto solved = solve_steerable_basis(hr);
  auto kh = std::make_shared<const OneArgKernel>(solved.basis.empty() ? OneArgKernel::zeros(hr)
                                                                      : random_combination(hr, solved.basis, rng));
  b.omega = std::make_shared<const OmegaHat>(gcnn_omega(*kh));
  b.native_op = [kh](const FeatureMap& f) { return gcnn_apply(*kh, f); };
  b.quotient = quotient_of(rho_domain);
}

void build_implicit(InstanceBundle& b, const Json& params, const GroupPtr& group, std::mt19937_64& rng) {
  auto q = affine_quotient(group);
  const auto& h = q->subgroup_ptr();
  auto r = rep_from_json(h, params.value("rep", Json(h->order() == 2 ? "sign" : "trivial")));
  const bool feature_dependent = bool_param(params, "feature_dependent", true);
  const int d = r->dim(), n = q->size();
  // k(u, z1, z2) = A_u + (z1^T B_u z2) C_u + |z1|^2 D_u.
  auto a = std::make_shared<const Matrix>(random_uniform(d, d * n, rng));
  auto bm = std::make_shared<const Matrix>(random_uniform(d, d * n, rng));
  auto c = std::make_shared<const Matrix>(random_uniform(d, d * n, rng));
  auto dm = std::make_shared<const Matrix>(random_uniform(d, d * n, rng));
  ImplicitBase base = [a, bm, c, dm, d, feature_dependent](CosetIndex u, const Vector& z1, const Vector& z2) {
    Matrix k = a->middleCols(u * d, d);
    if (feature_dependent) {
      k += z1.dot(bm->middleCols(u * d, d) * z2) * c->middleCols(u * d, d);
      k += z1.squaredNorm() * dm->middleCols(u * d, d);
    }
    return k;
  };
  const ImplicitKernelSpec sym = symmetrize_implicit_kernel(ImplicitKernelSpec{q, r, r, r, base, false});
  b.in = b.out = r;
  b.quotient = q;
  b.implicit = sym;
  b.omega = std::make_shared<const OmegaHat>(implicit_omega(sym));
  b.section_op = [sym](const SectionFeature& f) { return implicit_conv_apply(sym, f); };
}

AttentionParams attention_params(const Json& params, std::mt19937_64& rng, int d_embed_default) {
  const int d_in = positive_param(params, "d_in", 2);
  const int d_embed = positive_param(params, "d_embed", d_embed_default);
  const int d_out = positive_param(params, "d_out", 2);
  return random_attention_params(d_in, d_embed, d_out, rng);
}

void build_self_attention(InstanceBundle& b, const Json& params, const GroupPtr& group, std::mt19937_64& rng) {
  if (group->family() != GroupFamily::symmetric) throw ConfigError("self_attention needs a symmetric group");
  auto stab = std::make_shared<const Subgroup>(point_stabilizer(group, 0));
  const AttentionParams p = attention_params(params, rng, 4);
  b.in = trivial_on(stab, static_cast<int>(p.WQ.cols()));
  b.out = trivial_on(stab, static_cast<int>(p.WV.rows()));
  b.quotient = quotient_of(stab);
  b.attention = p;
  b.omega = std::make_shared<const OmegaHat>(self_attention_omega(p, b.out, b.in));
  b.section_op = [p](const SectionFeature& f) { return self_attention_apply(p, f); };
}

void build_rel_bias(InstanceBundle& b, const Json& params, const GroupPtr& group, std::mt19937_64& rng) {
  if (group->family() != GroupFamily::cyclic) throw ConfigError("rel_bias needs a cyclic group");
  auto e = std::make_shared<const Subgroup>(Subgroup::trivial(group));
  AttentionParams p = attention_params(params, rng, 4);
  const std::string psi = string_param(params, "psi", "random", {"random", "zero"});
  p.psi = psi == "zero" ? Vector::Zero(group->order()).eval() : Vector(random_uniform(group->order(), 1, rng));
  p.bias_mode = string_param(params, "bias_mode", "add", {"add", "multiply"}) == "add" ? BiasMode::add
                                                                                     : BiasMode::multiply;
  b.in = trivial_on(e, static_cast<int>(p.WQ.cols()));
  b.out = trivial_on(e, static_cast<int>(p.WV.rows()));
  b.quotient = quotient_of(e);
  b.attention = p;
  b.omega = std::make_shared<const OmegaHat>(rel_bias_omega(p, b.out, b.in));
  b.section_op = [p](const SectionFeature& f) { return relative_bias_attention_apply(p, f); };
}

void build_rotary(InstanceBundle& b, const Json& params, const GroupPtr& group, std::mt19937_64& rng) {
  if (group->family() != GroupFamily::cyclic) throw ConfigError("rotary needs a cyclic group");
  const auto freqs = freqs_param(params);
  if (params.contains("d_embed") && positive_param(params, "d_embed", 0) != 2 * static_cast<int>(freqs.size())) {
    throw ConfigError("rotary d_embed must equal 2 * |freqs|");
  }
  auto e = std::make_shared<const Subgroup>(Subgroup::trivial(group));
  AttentionParams p = attention_params(params, rng, 2 * static_cast<int>(freqs.size()));
  p.freqs = freqs;
  b.in = trivial_on(e, static_cast<int>(p.WQ.cols()));
  b.out = trivial_on(e, static_cast<int>(p.WV.rows()));
  b.quotient = quotient_of(e);
  b.attention = p;
  b.omega = std::make_shared<const OmegaHat>(rotary_omega(p, b.out, b.in));
  b.section_op = [p](const SectionFeature& f) { return rotary_attention_apply(p, f); };
}

void build_lie(InstanceBundle& b, const Json& params, const GroupPtr& group, std::mt19937_64& rng) {
  auto h = subgroup_from_json(group, params.value("subgroup", Json("trivial")));
  AttentionParams p = attention_params(params, rng, 4);
  p.psi = bi_invariant_bias(random_uniform(group->order(), 1, rng), *h);
  const bool normalize = bool_param(params, "normalize", true);
  LieAlpha alpha;
  if (string_param(params, "alpha", "dot", {"dot", "poly"}) == "dot") {
    alpha = dot_product_alpha(p);
  } else {
    // 1 + (v^T M v')^2 + psi(g)^2, strictly positive.
    const Matrix m = p.WQ.transpose() * p.WK * p.scale();
    const Vector psi = p.psi;
    alpha = [m, psi](const Vector& v, const Vector& vp, Element g) {
      const double s = v.dot(m * vp);
      return 1.0 + s * s + psi(g) * psi(g);
    };
  }
  b.in = trivial_on(h, static_cast<int>(p.WQ.cols()));
  b.out = trivial_on(h, static_cast<int>(p.WV.rows()));
  b.quotient = quotient_of(h);
  b.attention = p;
  b.omega = std::make_shared<const OmegaHat>(lie_omega(alpha, p.WV, b.out, b.in, normalize));
  const Matrix wv = p.WV;
  const RepPtr out = b.out;
  b.native_op = [alpha, wv, out, normalize](const FeatureMap& f) {
    return lie_transformer_apply(alpha, wv, f, out, normalize);
  };
}

// Rebuilds a parsed feature on the instance's own input representation.
FeatureMap adopt(const FeatureMap& f, const RepPtr& rep) {
  if (f.rep().domain().elements() != rep->domain().elements() || f.dim() != rep->dim()) {
    throw DimensionMismatch("input feature does not match the instance's input representation");
  }
  for (int i = 0; i < rep->domain().order(); ++i) {
    if (max_abs(f.rep().at_position(i) - rep->at_position(i)) > kRepTolerance) {
      throw DimensionMismatch("input feature does not match the instance's input representation");
    }
  }
  return FeatureMap(rep, f.values());
}

}  // namespace

InstanceBundle build_instance(const Json& spec, const GroupPtr& group) {
  if (!spec.is_object() || !spec.contains("instance") || !spec["instance"].is_string()) {
    throw ConfigError("instance spec needs an 'instance' name");
  }
  const std::string kind = spec["instance"].get<std::string>();
  const Json params = spec.value("params", Json::object());
  if (!params.is_object()) throw ConfigError("instance params must be an object");
  const Json init = spec.value("init", Json::object());
  if (!init.is_object()) throw ConfigError("instance init must be an object");
  if (init.contains("init") && init["init"] != "uniform[-1,1]") {
    throw ConfigError("only uniform[-1,1] initialization is supported");
  }
  if (init.contains("seed") && !init["seed"].is_number_unsigned() &&
      !(init["seed"].is_number_integer() && init["seed"].get<long long>() >= 0)) {
    throw ConfigError("init seed must be a non-negative integer");
  }
  std::mt19937_64 rng(init.value("seed", std::uint64_t{0}));

  InstanceBundle b;
  b.kind = kind;
  try {
    if (kind == "gcnn") {
      build_gcnn(b, params, group, rng);
    } else if (kind == "implicit") {
      build_implicit(b, params, group, rng);
    } else if (kind == "self_attention") {
      build_self_attention(b, params, group, rng);
    } else if (kind == "rel_bias") {
      build_rel_bias(b, params, group, rng);
    } else if (kind == "rotary") {
      build_rotary(b, params, group, rng);
    } else if (kind == "lie_transformer") {
      build_lie(b, params, group, rng);
    } else {
      throw ConfigError("unknown instance '" + kind + "'");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("instance '" + kind + "': " + e.what());
  }
  return b;
}

LayerResult run_layer(const Json& config, const Json& input, bool strict) {
  if (!config.is_object() || !config.contains("group")) throw ConfigError("layer config needs a 'group'");
  const GroupPtr group = group_from_json(config["group"]);
  const InstanceBundle b = build_instance(config, group);
  const std::string path = config.value("path", std::string("nonlinear"));
  if (path != "nonlinear" && path != "native" && path != "section") {
    throw ConfigError("path must be nonlinear, native or section");
  }
  if (!input.is_object()) throw ConfigError("input must be a feature object");
  const std::string kind = input.value("kind", std::string("feature"));
  if (kind != "feature" && kind != "section") throw ConfigError("input kind must be feature or section");
  if (group_to_json(*group) != group_to_json(*group_from_json(input.value("group", Json())))) {
    throw DimensionMismatch("input feature lives on a different group");
  }

  FeatureMap f = [&] {
    if (kind == "feature") return adopt(feature_from_json(input), b.in);
    const SectionFeature sf = section_feature_from_json(input);
    if (sf.quotient().section_table() != b.quotient->section_table()) {
      throw DimensionMismatch("input section differs from the instance's section");
    }
    return adopt(lift(sf), b.in);
  }();

  FeatureMap out = [&] {
    if (path == "native") {
      if (!b.native_op) throw ConfigError("instance '" + b.kind + "' has no native path");
      return b.native_op(f);
    }
    if (path == "section") {
      if (!b.section_op) throw ConfigError("instance '" + b.kind + "' has no section-level path");
      return lift(b.section_op(sink(f, b.quotient)));
    }
    ApplyOptions options;
    options.strict = strict;
    return apply_nonlinear(*b.omega, f, options);
  }();

  LayerResult result;
  result.mackey_residual = out.mackey_residual();
  if (kind == "section") {
    auto q = out.rep().domain().elements() == b.quotient->subgroup().elements()
                 ? b.quotient
                 : std::make_shared<const Quotient>(left_cosets(out.rep().domain_ptr()));
    result.output = section_feature_to_json(sink(out, q));
  } else {
    result.output = feature_to_json(out);
  }
  result.output["mackey_residual"] = result.mackey_residual;
  result.output["instance"] = b.kind;
  result.output["path"] = path;
  return result;
}

}  // namespace homsteer
