#include "homsteer/nonlinear.hpp"

#include <algorithm>
#include <numeric>

#include "homsteer/errors.hpp"
#include "homsteer/parallel.hpp"

namespace homsteer {

namespace {

constexpr int kExhaustiveOrder = 48;

double vec_diff(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("integrand output has the wrong dimension");
  return a.size() == 0 ? 0.0 : (a - b).cwiseAbs().maxCoeff();
}

// Elements to test: all of G when small, else e plus a seeded sample.
std::vector<Element> probe_elements(const GroupTable& G, std::mt19937_64& rng) {
  std::vector<Element> out(G.order());
  std::iota(out.begin(), out.end(), 0);
  if (G.order() <= kExhaustiveOrder) return out;
  std::shuffle(out.begin() + 1, out.end(), rng);
  out.resize(kExhaustiveOrder);
  std::sort(out.begin(), out.end());
  return out;
}

EquivarianceReport equivariance_over(const FeatureOp& op, const RepPtr& input_rep,
                                     const std::vector<Element>& ks, int trials,
                                     std::mt19937_64& rng) {
  EquivarianceReport report;
  for (int t = 0; t < trials; ++t) {
    const FeatureMap f = random_feature(input_rep, rng);
    const FeatureMap out = op(f);
    for (Element k : ks) {
      const FeatureMap lhs = g_action(k, out);
      const FeatureMap rhs = op(g_action(k, f));
      if (lhs.values().rows() != rhs.values().rows()) {
        throw DimensionMismatch("operator output shape depends on its input");
      }
      for (Element g = 0; g < lhs.group().order(); ++g) {
        const double d = (lhs(g) - rhs(g)).cwiseAbs().maxCoeff();
        if (d > report.max_violation) {
          report.max_violation = d;
          report.witness_k = k;
          report.witness_g = g;
        }
      }
    }
  }
  return report;
}

}  // namespace

OmegaHat::OmegaHat(std::string name, RepPtr sigma, RepPtr rho, OmegaFn fn, nlohmann::json params)
    : name_(std::move(name)),
      sigma_(std::move(sigma)),
      rho_(std::move(rho)),
      fn_(std::move(fn)),
      params_(std::move(params)) {
  if (!sigma_ || !rho_ || !fn_) throw InvalidRepresentation("omega_hat needs sigma, rho and an evaluator");
  if (sigma_->domain().group_ptr() != rho_->domain().group_ptr()) {
    throw InvalidRepresentation("sigma and rho must live on the same group");
  }
  integration_group_ = rho_->domain().group_ptr();
}

OmegaReport check_omega_constraints(const OmegaHat& w, int trials, std::uint64_t seed) {
  const auto& G = w.group();
  const auto& hs = w.sigma().domain().elements();
  const auto& hps = w.rho().domain().elements();
  std::mt19937_64 rng(seed);
  OmegaReport report;
  report.trials = trials;
  for (int t = 0; t < trials; ++t) {
    const FeatureMap f = random_feature(w.rho_ptr(), rng);
    std::vector<Vector> base(G.order());
    for (Element gp = 0; gp < G.order(); ++gp) base[gp] = w(f, gp);
    Vector total = Vector::Zero(w.sigma().dim());
    for (const auto& v : base) total += v;

    for (Element h : hs) {
      const FeatureMap hf = g_action(h, f);
      const Matrix& s = w.sigma()(h);
      Vector moved = Vector::Zero(w.sigma().dim());
      for (Element gp = 0; gp < G.order(); ++gp) {
        const Vector v = w(hf, gp);
        report.h_pointwise = std::max(report.h_pointwise, vec_diff(v, s * base[gp]));
        moved += v;
      }
      report.h_violation = std::max(report.h_violation, vec_diff(moved, s * total));
    }
    for (Element gp = 0; gp < G.order(); ++gp) {
      for (Element hp : hps) {
        report.hprime_violation =
            std::max(report.hprime_violation, vec_diff(base[G.mul(gp, hp)], base[gp]));
      }
    }
    if (w.alpha()) {
      report.alpha_violation = std::max(report.alpha_violation, 0.0);
      std::vector<Matrix> alpha(G.order());
      for (Element gp = 0; gp < G.order(); ++gp) {
        alpha[gp] = w.alpha()(f, gp);
        report.alpha_violation = std::max(report.alpha_violation, vec_diff(alpha[gp] * f(gp), base[gp]));
      }
      for (Element gp = 0; gp < G.order(); ++gp) {
        for (Element hp : hps) {
          const Matrix d = alpha[G.mul(gp, hp)] - alpha[gp] * w.rho()(hp);
          report.alpha_violation = std::max(report.alpha_violation, d.cwiseAbs().maxCoeff());
        }
      }
    }
  }
  return report;
}

FeatureMap apply_nonlinear(const OmegaHat& w, const FeatureMap& f, const ApplyOptions& options) {
  if (f.dim() != w.rho().dim() || &f.group() != &w.group()) {
    throw DimensionMismatch("feature map does not match the integrand's input representation");
  }
  if (options.strict) {
    const OmegaReport r = check_omega_constraints(w, options.trials, options.seed);
    if (r.max_violation() > options.tolerance) {
      throw ConstraintViolation("integrand '" + w.name() + "' rejected (max violation " +
                                    std::to_string(r.max_violation()) + ")",
                                r.max_violation());
    }
  }
  const auto& G = f.group();
  const int ds = w.sigma().dim();
  Matrix out(ds, G.order());
  parallel_for(G.order(), [&](int g) {
    const FeatureMap moved = g_action(G.inv(g), f);
    Vector acc = Vector::Zero(ds);
    for (Element gp = 0; gp < G.order(); ++gp) {
      const Vector term = w(moved, gp);
      if (term.size() != ds) throw DimensionMismatch("integrand output has the wrong dimension");
      acc += term;
    }
    out.col(g) = acc;
  });
  return FeatureMap(w.sigma_ptr(), std::move(out));
}

FeatureMap apply_three_arg(const OmegaThreeArg& w, const FeatureMap& f) {
  const auto& G = f.group();
  const int ds = w.sigma->dim();
  Matrix out(ds, G.order());
  parallel_for(G.order(), [&](int g) {
    Vector acc = Vector::Zero(ds);
    for (Element gp = 0; gp < G.order(); ++gp) {
      const Vector term = w.fn(f, g, gp);
      acc += term;
    }
    out.col(g) = acc;
  });
  return FeatureMap(w.sigma, std::move(out));
}

InvarianceReport check_three_arg(const OmegaThreeArg& w, int trials, std::uint64_t seed) {
  const auto& G = w.rho->group();
  std::mt19937_64 rng(seed);
  InvarianceReport report;
  for (int t = 0; t < trials; ++t) {
    const FeatureMap f = random_feature(w.rho, rng);
    const auto gs = probe_elements(G, rng);
    const auto gps = probe_elements(G, rng);
    std::vector<FeatureMap> moved;
    for (Element k = 0; k < G.order(); ++k) moved.push_back(g_action(k, f));
    for (Element g : gs) {
      for (Element gp : gps) {
        const Vector base = w.fn(f, g, gp);
        for (Element k = 0; k < G.order(); ++k) {
          const Vector v = w.fn(moved[k], G.mul(k, g), gp);
          report.invariance = std::max(report.invariance, vec_diff(v, base));
        }
      }
      const auto summed = [&](Element x) {
        Vector acc = Vector::Zero(w.sigma->dim());
        for (Element gp = 0; gp < G.order(); ++gp) acc += w.fn(f, x, gp);
        return acc;
      };
      const Vector total = summed(g);
      for (Element h : w.sigma->domain().elements()) {
        report.right_constraint = std::max(report.right_constraint,
                                           vec_diff(summed(G.mul(g, h)), (*w.sigma)(G.inv(h)) * total));
      }
    }
  }
  return report;
}

OmegaHat reduce_three_to_two(const OmegaThreeArg& w, int trials, std::uint64_t seed) {
  const InvarianceReport r = check_three_arg(w, trials, seed);
  if (r.invariance > kOmegaTolerance) {
    throw ConstraintViolation("three-argument integrand '" + w.name + "' is not G-invariant (max violation " +
                                  std::to_string(r.invariance) + ")",
                              r.invariance);
  }
  const Element e = w.rho->group().identity();
  auto fn = w.fn;
  return OmegaHat(w.name + "/reduced", w.sigma, w.rho,
                  [fn, e](const FeatureMap& f, Element gp) { return fn(f, e, gp); });
}

EquivarianceReport check_equivariance(const FeatureOp& op, const RepPtr& input_rep, int trials,
                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Element> ks(input_rep->group().order());
  std::iota(ks.begin(), ks.end(), 0);
  return equivariance_over(op, input_rep, ks, trials, rng);
}

OmegaHat universal_from_lambda(FeatureOp lambda, RepPtr input_rep, RepPtr output_rep, DeltaKind kind,
                               int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto ks = probe_elements(input_rep->group(), rng);
  const EquivarianceReport r = equivariance_over(lambda, input_rep, ks, trials, rng);
  if (r.max_violation > kOmegaTolerance) {
    throw NotEquivariant("lambda is not equivariant: k=" + std::to_string(r.witness_k) +
                             " g=" + std::to_string(r.witness_g) +
                             " deviation=" + std::to_string(r.max_violation),
                         r.max_violation, r.witness_k, r.witness_g);
  }
  const GroupTable& G = input_rep->group();
  const Element e = G.identity();
  const int dim = output_rep->dim();
  OmegaFn fn;
  if (kind == DeltaKind::identity) {
    fn = [lambda, e, dim](const FeatureMap& f, Element gp) -> Vector {
      if (gp != e) return Vector::Zero(dim);
      return lambda(f)(e);
    };
  } else {
    SubgroupPtr hp = input_rep->domain_ptr();
    fn = [lambda, e, dim, hp](const FeatureMap& f, Element gp) -> Vector {
      if (!hp->contains(gp)) return Vector::Zero(dim);
      return lambda(f)(e) / static_cast<double>(hp->order());
    };
  }
  nlohmann::json params = {{"delta", kind == DeltaKind::identity ? "identity" : "coset"}};
  return OmegaHat("universal", std::move(output_rep), std::move(input_rep), std::move(fn), params);
}

}  // namespace homsteer
