#include "homsteer/instances.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include "homsteer/errors.hpp"
#include "homsteer/linalg.hpp"
#include "homsteer/parallel.hpp"

namespace homsteer {

namespace {

void require_trivial(const Representation& r, const char* what) {
  if (!r.is_trivial()) throw UnsupportedReps(std::string(what) + " needs trivial representations");
}

void require_cyclic_translation(const Representation& r, const char* what) {
  if (r.group().family() != GroupFamily::cyclic || r.domain().order() != 1) {
    throw UnsupportedGroup(std::string(what) + " is defined on Z_n with H = {e}");
  }
}

void check_attention_shapes(const AttentionParams& p, int d_in, int d_out) {
  if (p.WQ.cols() != d_in || p.WK.cols() != d_in || p.WV.cols() != d_in) {
    throw DimensionMismatch("attention weights do not match the input dimension");
  }
  if (p.WK.rows() != p.WQ.rows()) throw DimensionMismatch("WQ and WK need the same embed dimension");
  if (p.WV.rows() != d_out) throw DimensionMismatch("WV rows do not match the output dimension");
  if (p.embed_dim() < 1) throw DimensionMismatch("empty embedding");
}

// Softmax over a vector, max-subtracted.
Vector softmax(const Vector& logits) {
  const double top = logits.maxCoeff();
  Vector w = (logits.array() - top).exp().matrix();
  return w / w.sum();
}

// Logits row for query column q against every column of F, bias added.
double combine_bias(double logit, double bias, BiasMode mode) {
  return mode == BiasMode::add ? logit + bias : logit * bias;
}

Matrix rotary_block(const AttentionParams& p, const GroupTable& zn, Element x) {
  const int n = zn.family_n();
  Matrix r = Matrix::Zero(2 * static_cast<int>(p.freqs.size()), 2 * static_cast<int>(p.freqs.size()));
  for (std::size_t i = 0; i < p.freqs.size(); ++i) {
    const long long phase = ((static_cast<long long>(p.freqs[i]) * x) % n + n) % n;
    r.block(2 * i, 2 * i, 2, 2) = rotation2(2.0 * std::numbers::pi * static_cast<double>(phase) / n);
  }
  return r;
}

void check_rotary(const AttentionParams& p) {
  if (p.freqs.empty()) throw DimensionMismatch("rotary attention needs at least one frequency");
  if (p.embed_dim() % 2 != 0) throw DimensionMismatch("rotary attention needs an even embed dimension");
  if (p.embed_dim() != 2 * static_cast<int>(p.freqs.size())) {
    throw DimensionMismatch("rotary embed dimension must be 2 * |freqs|");
  }
}

SectionFeature section_output(const SectionFeature& f, const Matrix& values) {
  auto sigma = std::make_shared<const Representation>(
      trivial_rep(f.rep().domain_ptr(), static_cast<int>(values.rows())));
  return SectionFeature(f.quotient_ptr(), std::move(sigma), values);
}

}  // namespace

// ---------------------------------------------------------------------------
// G-CNN

OmegaHat gcnn_omega(const OneArgKernel& kh) {
  const double res = kh.bi_equivariance_residual();
  if (res > kKernelTolerance) {
    throw ConstraintViolation("G-CNN kernel is not bi-equivariant (max violation " + std::to_string(res) + ")",
                              res);
  }
  auto k = std::make_shared<const OneArgKernel>(kh);
  OmegaHat w("gcnn", kh.homrep().sigma_ptr(), kh.homrep().rho_ptr(),
             [k](const FeatureMap& f, Element gp) -> Vector {
               const Vector term = k->at(gp) * f(gp);
               return term;
             });
  w.set_alpha([k](const FeatureMap&, Element gp) -> Matrix { return k->at(gp); });
  return w;
}

// ---------------------------------------------------------------------------
// Implicit kernels

QuotientPtr affine_quotient(const GroupPtr& group) {
  const auto& aff = group->affine();
  if (!aff) throw UnsupportedGroup("implicit kernels need an affine group Z_n x| K");
  std::set<Element> linear(aff->linear.begin(), aff->linear.end());
  auto h = std::make_shared<const Subgroup>(
      Subgroup::from_elements(group, std::vector<Element>(linear.begin(), linear.end())));
  return std::make_shared<const Quotient>(left_cosets(h, aff->section));
}

namespace {

void check_implicit(const ImplicitKernelSpec& spec) {
  if (!spec.quotient || !spec.sigma || !spec.rho || !spec.rho_z || !spec.base) {
    throw InvalidRepresentation("implicit kernel spec is incomplete");
  }
  const auto& G = spec.quotient->group();
  const auto& aff = G.affine();
  if (!aff) throw UnsupportedGroup("implicit kernels need an affine group Z_n x| K");
  for (int x = 0; x < spec.quotient->size(); ++x) {
    if (spec.quotient->section(x) != aff->section[x]) {
      throw UnsupportedGroup("implicit kernels need the affine section s(x) = (x, e)");
    }
  }
  const auto& hs = spec.quotient->subgroup().elements();
  if (spec.sigma->domain().elements() != hs || spec.rho->domain().elements() != hs ||
      spec.rho_z->domain().elements() != hs) {
    throw DimensionMismatch("implicit kernel reps must be reps of the linear part H");
  }
}

// Relative coordinate of x' seen from x: the coset of s(x)^-1 s(x').
CosetIndex relative(const Quotient& q, CosetIndex x, CosetIndex xp) {
  const auto& G = q.group();
  return q.coset_of(G.mul(G.inv(q.section(x)), q.section(xp)));
}

}  // namespace

ImplicitKernelSpec symmetrize_implicit_kernel(const ImplicitKernelSpec& spec) {
  check_implicit(spec);
  ImplicitKernelSpec out = spec;
  const auto base = spec.base;
  const QuotientPtr q = spec.quotient;
  const RepPtr sigma = spec.sigma, rho = spec.rho, rho_z = spec.rho_z;
  out.base = [base, q, sigma, rho, rho_z](CosetIndex u, const Vector& z1, const Vector& z2) -> Matrix {
    const auto& G = q->group();
    const auto& hs = q->subgroup().elements();
    Matrix acc = Matrix::Zero(sigma->dim(), rho->dim());
    for (Element h : hs) {
      const Matrix& rz = (*rho_z)(h);
      acc += (*sigma)(G.inv(h)) * base(q->act(h, u), rz * z1, rz * z2) * (*rho)(h);
    }
    return acc / static_cast<double>(hs.size());
  };
  out.symmetrized = true;
  return out;
}

double implicit_constraint_residual(const ImplicitKernelSpec& spec, int trials, std::uint64_t seed) {
  check_implicit(spec);
  const auto& q = *spec.quotient;
  const auto& G = q.group();
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Matrix z = random_uniform(spec.rho_z->dim(), 2, rng);
    const Vector z1 = z.col(0), z2 = z.col(1);
    for (CosetIndex u = 0; u < q.size(); ++u) {
      const Matrix base = spec.base(u, z1, z2);
      for (Element h : q.subgroup().elements()) {
        const Matrix& rz = (*spec.rho_z)(h);
        const Matrix lhs = spec.base(q.act(h, u), rz * z1, rz * z2);
        const Matrix rhs = (*spec.sigma)(h) * base * (*spec.rho)(G.inv(h));
        worst = std::max(worst, max_abs(lhs - rhs));
      }
    }
  }
  return worst;
}

SectionFeature implicit_conv_apply(const ImplicitKernelSpec& spec, const SectionFeature& f) {
  check_implicit(spec);
  if (f.rep().dim() != spec.rho->dim() || f.quotient().size() != spec.quotient->size()) {
    throw DimensionMismatch("section feature does not match the implicit kernel");
  }
  if (spec.rho_z->dim() != spec.rho->dim()) {
    throw DimensionMismatch("feature-dependent kernels need rho_z = rho");
  }
  const auto& q = *spec.quotient;
  Matrix out(spec.sigma->dim(), q.size());
  for (CosetIndex x = 0; x < q.size(); ++x) {
    Vector acc = Vector::Zero(spec.sigma->dim());
    const Vector fx = f(x);
    for (CosetIndex xp = 0; xp < q.size(); ++xp) {
      const Vector fxp = f(xp);
      acc += spec.base(relative(q, x, xp), fx, fxp) * fxp;
    }
    out.col(x) = acc;
  }
  return SectionFeature(spec.quotient, spec.sigma, std::move(out));
}

OmegaHat implicit_omega(const ImplicitKernelSpec& spec) {
  check_implicit(spec);
  if (spec.rho_z->dim() != spec.rho->dim()) {
    throw DimensionMismatch("feature-dependent kernels need rho_z = rho");
  }
  const auto base = spec.base;
  const QuotientPtr q = spec.quotient;
  const RepPtr rho = spec.rho;
  return OmegaHat("implicit", spec.sigma, spec.rho, [base, q, rho](const FeatureMap& f, Element gp) -> Vector {
    const auto& G = q->group();
    const CosetIndex x = q->coset_of(gp);
    const Vector fe = f(G.identity());
    const Vector fs = f(q->section(x));
    const Vector term = base(x, fe, fs) * ((*rho)(q->fibre(gp)) * f(gp));
    return term / static_cast<double>(q->subgroup().order());
  });
}

// ---------------------------------------------------------------------------
// Attention

double AttentionParams::scale() const { return 1.0 / std::sqrt(static_cast<double>(embed_dim())); }

AttentionParams random_attention_params(int d_in, int d_embed, int d_out, std::mt19937_64& rng) {
  AttentionParams p;
  p.WQ = random_uniform(d_embed, d_in, rng);
  p.WK = random_uniform(d_embed, d_in, rng);
  p.WV = random_uniform(d_out, d_in, rng);
  return p;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) out.row(i) = softmax(logits.row(i).transpose()).transpose();
  return out;
}

Matrix self_attention_weights(const AttentionParams& p, const Matrix& F) {
  const Matrix q = p.WQ * F, k = p.WK * F;
  return softmax_rows((q.transpose() * k) * p.scale());
}

namespace {

void check_symmetric_stabilizer(const Quotient& q, const char* what) {
  const auto& G = q.group();
  if (G.family() != GroupFamily::symmetric) throw UnsupportedGroup(std::string(what) + " needs S_n");
  if (q.subgroup().elements() != point_stabilizer(q.subgroup().group_ptr(), 0).elements()) {
    throw UnsupportedGroup(std::string(what) + " needs H = Stab(0)");
  }
}

}  // namespace

SectionFeature self_attention_apply(const AttentionParams& p, const SectionFeature& f) {
  require_trivial(f.rep(), "self-attention");
  check_symmetric_stabilizer(f.quotient(), "self-attention");
  check_attention_shapes(p, f.dim(), static_cast<int>(p.WV.rows()));
  const Matrix w = self_attention_weights(p, f.values());
  // Row x of w weighs column x' of F.
  return section_output(f, p.WV * f.values() * w.transpose());
}

OmegaHat self_attention_omega(const AttentionParams& p, const RepPtr& sigma, const RepPtr& rho) {
  require_trivial(*sigma, "self-attention");
  require_trivial(*rho, "self-attention");
  const auto& G = rho->group();
  if (G.family() != GroupFamily::symmetric) throw UnsupportedGroup("self-attention needs S_n");
  if (G.family_n() < 2 || G.family_n() > 5) throw InvalidOrder("lifted self-attention needs 2 <= n <= 5");
  const auto stab = point_stabilizer(rho->domain().group_ptr(), 0).elements();
  if (rho->domain().elements() != stab || sigma->domain().elements() != stab) {
    throw UnsupportedGroup("self-attention needs H = H' = Stab(0)");
  }
  check_attention_shapes(p, rho->dim(), sigma->dim());
  const Matrix m = p.WQ.transpose() * p.WK * p.scale();
  const Matrix wv = p.WV;
  nlohmann::json params = {{"embed_dim", p.embed_dim()}};
  return OmegaHat("self_attention", sigma, rho,
                  [m, wv](const FeatureMap& f, Element gp) -> Vector {
                    const auto& G = f.group();
                    const Vector u = m.transpose() * f(G.identity());
                    const Vector logits = (f.values().transpose() * u).eval();
                    const Vector w = softmax(logits);
                    return w(gp) * (wv * f(gp));
                  },
                  params);
}

Matrix relative_bias_weights(const AttentionParams& p, const Matrix& F, const GroupTable& zn) {
  const int n = zn.order();
  if (p.psi.size() != n) throw DimensionMismatch("psi needs one entry per element of Z_n");
  const Matrix q = p.WQ * F, k = p.WK * F;
  Matrix logits = (q.transpose() * k) * p.scale();
  for (int x = 0; x < n; ++x)
    for (int xp = 0; xp < n; ++xp)
      logits(x, xp) = combine_bias(logits(x, xp), p.psi(zn.mul(xp, zn.inv(x))), p.bias_mode);
  return softmax_rows(logits);
}

SectionFeature relative_bias_attention_apply(const AttentionParams& p, const SectionFeature& f) {
  require_trivial(f.rep(), "relative-bias attention");
  require_cyclic_translation(f.rep(), "relative-bias attention");
  check_attention_shapes(p, f.dim(), static_cast<int>(p.WV.rows()));
  const Matrix w = relative_bias_weights(p, f.values(), f.quotient().group());
  return section_output(f, p.WV * f.values() * w.transpose());
}

OmegaHat rel_bias_omega(const AttentionParams& p, const RepPtr& sigma, const RepPtr& rho) {
  require_trivial(*sigma, "relative-bias attention");
  require_trivial(*rho, "relative-bias attention");
  require_cyclic_translation(*rho, "relative-bias attention");
  check_attention_shapes(p, rho->dim(), sigma->dim());
  if (p.psi.size() != rho->group().order()) throw DimensionMismatch("psi needs one entry per element of Z_n");
  const Matrix m = p.WQ.transpose() * p.WK * p.scale();
  const Matrix wv = p.WV;
  const Vector psi = p.psi;
  const BiasMode mode = p.bias_mode;
  nlohmann::json params = {{"bias_mode", mode == BiasMode::add ? "add" : "multiply"}};
  return OmegaHat("rel_bias", sigma, rho,
                  [m, wv, psi, mode](const FeatureMap& f, Element gp) -> Vector {
                    const auto& G = f.group();
                    const Vector u = m.transpose() * f(G.identity());
                    Vector logits = f.values().transpose() * u;
                    for (Element g = 0; g < G.order(); ++g) logits(g) = combine_bias(logits(g), psi(g), mode);
                    const Vector w = softmax(logits);
                    return w(gp) * (wv * f(gp));
                  },
                  params);
}

Matrix rotary_weights(const AttentionParams& p, const Matrix& F, const GroupTable& zn) {
  check_rotary(p);
  const int n = zn.order();
  Matrix q(p.embed_dim(), n), k(p.embed_dim(), n);
  for (int x = 0; x < n; ++x) {
    const Matrix r = rotary_block(p, zn, x);
    q.col(x) = r * (p.WQ * F.col(x));
    k.col(x) = r * (p.WK * F.col(x));
  }
  return softmax_rows((q.transpose() * k) * p.scale());
}

SectionFeature rotary_attention_apply(const AttentionParams& p, const SectionFeature& f) {
  require_trivial(f.rep(), "rotary attention");
  require_cyclic_translation(f.rep(), "rotary attention");
  check_attention_shapes(p, f.dim(), static_cast<int>(p.WV.rows()));
  const Matrix w = rotary_weights(p, f.values(), f.quotient().group());
  return section_output(f, p.WV * f.values() * w.transpose());
}

OmegaHat rotary_omega(const AttentionParams& p, const RepPtr& sigma, const RepPtr& rho) {
  require_trivial(*sigma, "rotary attention");
  require_trivial(*rho, "rotary attention");
  require_cyclic_translation(*rho, "rotary attention");
  check_attention_shapes(p, rho->dim(), sigma->dim());
  check_rotary(p);
  const auto& G = rho->group();
  // R(g')-conjugated key maps, one per element.
  std::vector<Matrix> keyed;
  for (Element g = 0; g < G.order(); ++g) keyed.push_back(p.WQ.transpose() * rotary_block(p, G, g) * p.WK * p.scale());
  const Matrix wv = p.WV;
  nlohmann::json params = {{"freqs", p.freqs}};
  return OmegaHat("rotary", sigma, rho,
                  [keyed, wv](const FeatureMap& f, Element gp) -> Vector {
                    const auto& G = f.group();
                    const Vector fe = f(G.identity());
                    Vector logits(G.order());
                    for (Element g = 0; g < G.order(); ++g) logits(g) = fe.dot(keyed[g] * f(g));
                    const Vector w = softmax(logits);
                    return w(gp) * (wv * f(gp));
                  },
                  params);
}

// ---------------------------------------------------------------------------
// LieTransformer

LieAlpha dot_product_alpha(const AttentionParams& p) {
  const Matrix m = p.WQ.transpose() * p.WK * p.scale();
  const Vector psi = p.psi;
  return [m, psi](const Vector& v, const Vector& vp, Element g) -> double {
    const double bias = psi.size() == 0 ? 0.0 : psi(g);
    return std::exp(v.dot(m * vp) + bias);
  };
}

Vector bi_invariant_bias(const Vector& psi, const Subgroup& h) {
  const auto& G = h.group();
  if (psi.size() != G.order()) throw DimensionMismatch("psi needs one entry per group element");
  Vector out = Vector::Zero(G.order());
  for (Element g = 0; g < G.order(); ++g) {
    for (Element a : h.elements())
      for (Element b : h.elements()) out(g) += psi(G.mul(G.mul(a, g), b));
  }
  return out / static_cast<double>(h.order() * h.order());
}

namespace {

void check_lie(const Matrix& WV, const Representation& sigma, const Representation& rho) {
  require_trivial(sigma, "LieTransformer");
  require_trivial(rho, "LieTransformer");
  if (WV.rows() != sigma.dim() || WV.cols() != rho.dim()) {
    throw DimensionMismatch("WV must be dim sigma x dim rho");
  }
}

double checked_normalizer(double z) {
  if (z == 0.0 || !std::isfinite(z)) {
    throw DegenerateNormalization("attention normalizer is " + std::to_string(z));
  }
  return z;
}

}  // namespace

FeatureMap lie_transformer_apply(const LieAlpha& alpha, const Matrix& WV, const FeatureMap& f,
                                 const RepPtr& sigma, bool normalize) {
  check_lie(WV, *sigma, f.rep());
  const auto& G = f.group();
  Matrix out(WV.rows(), G.order());
  parallel_for(G.order(), [&](int g) {
    const Element g_inv = G.inv(g);
    const Vector fg = f(g);
    Vector acc = Vector::Zero(WV.rows());
    double z = 0.0;
    for (Element gp = 0; gp < G.order(); ++gp) {
      const double a = alpha(fg, f(gp), G.mul(g_inv, gp));
      z += a;
      acc += a * (WV * f(gp));
    }
    out.col(g) = normalize ? Vector(acc / checked_normalizer(z)) : acc;
  });
  return FeatureMap(sigma, std::move(out));
}

OmegaHat lie_omega(const LieAlpha& alpha, const Matrix& WV, const RepPtr& sigma, const RepPtr& rho,
                   bool normalize) {
  check_lie(WV, *sigma, *rho);
  auto weight = [alpha, normalize](const FeatureMap& f, Element gp) -> double {
    const auto& G = f.group();
    const Vector fe = f(G.identity());
    const double a = alpha(fe, f(gp), gp);
    if (!normalize) return a;
    double z = 0.0;
    for (Element g = 0; g < G.order(); ++g) z += alpha(fe, f(g), g);
    return a / checked_normalizer(z);
  };
  const Matrix wv = WV;
  OmegaHat w("lie_transformer", sigma, rho,
             [weight, wv](const FeatureMap& f, Element gp) -> Vector { return weight(f, gp) * (wv * f(gp)); },
             nlohmann::json{{"normalize", normalize}});
  w.set_alpha([weight, wv](const FeatureMap& f, Element gp) -> Matrix { return weight(f, gp) * wv; });
  return w;
}

}  // namespace homsteer
