#pragma once

#include <functional>
#include <random>
#include <vector>

#include "homsteer/kernels.hpp"
#include "homsteer/nonlinear.hpp"

namespace homsteer {

// ---------------------------------------------------------------------------
// G-CNN

/// omega_hat(f, g') = kappa_hat(g') f(g'). Rejects kernels that are not
/// bi-equivariant to kKernelTolerance.
OmegaHat gcnn_omega(const OneArgKernel& kh);

// ---------------------------------------------------------------------------
// Implicit steerable kernels on an affine group Z_n x| K with X = Z_n.

/// base(u, z1, z2) -> dim sigma x dim rho, u the relative coordinate in X.
using ImplicitBase = std::function<Matrix(CosetIndex u, const Vector& z1, const Vector& z2)>;

struct ImplicitKernelSpec {
  /// G/H with the affine section s(x) = (x, e); H the linear part.
  QuotientPtr quotient;
  RepPtr sigma;
  RepPtr rho;
  RepPtr rho_z;
  ImplicitBase base;
  bool symmetrized = false;
};

/// Builds the quotient of an affine group by its linear part. Throws
/// UnsupportedGroup for groups without affine structure.
QuotientPtr affine_quotient(const GroupPtr& group);

/// k_sym(u, z1, z2) = (1/|H|) sum_h sigma(h)^-1 base(h |> u, rho_z(h) z1, rho_z(h) z2) rho(h).
ImplicitKernelSpec symmetrize_implicit_kernel(const ImplicitKernelSpec& spec);

/// max |k(h |> u, rho_z(h) z1, rho_z(h) z2) - sigma(h) k(u, z1, z2) rho(h)^-1|,
/// exhaustive over h and u, `trials` random (z1, z2).
double implicit_constraint_residual(const ImplicitKernelSpec& spec, int trials, std::uint64_t seed);

/// [Psi f](x) = sum_{x'} k(x' - x, f(x), f(x')) f(x').
SectionFeature implicit_conv_apply(const ImplicitKernelSpec& spec, const SectionFeature& f);

/// Lifted integrand omega_hat(f, g') = (1/|H|) k(pi(g'), f(e), f(s(pi g'))) rho(h(g')) f(g').
OmegaHat implicit_omega(const ImplicitKernelSpec& spec);

// ---------------------------------------------------------------------------
// Attention

enum class BiasMode { add, multiply };

struct AttentionParams {
  Matrix WQ;  // d_embed x d_in
  Matrix WK;  // d_embed x d_in
  Matrix WV;  // d_out x d_in
  Vector psi;  // relative bias, one entry per group element
  std::vector<int> freqs;
  BiasMode bias_mode = BiasMode::add;

  int embed_dim() const { return static_cast<int>(WQ.rows()); }
  double scale() const;
};

/// WQ, WK, WV drawn uniform [-1, 1] in that order; psi zero.
AttentionParams random_attention_params(int d_in, int d_embed, int d_out, std::mt19937_64& rng);

/// Row-wise softmax with max-subtraction.
Matrix softmax_rows(const Matrix& logits);

/// Attention weights among the columns of F (d_in x n): logits
/// F(:,x)^T WQ^T WK F(:,x') scale.
Matrix self_attention_weights(const AttentionParams& p, const Matrix& F);

/// Section-level self-attention over X = [n] with S_n / Stab(0). Reps trivial.
SectionFeature self_attention_apply(const AttentionParams& p, const SectionFeature& f);
/// Lifted integrand over S_n, 2 <= n <= 5, H = H' = Stab(0), trivial reps.
OmegaHat self_attention_omega(const AttentionParams& p, const RepPtr& sigma, const RepPtr& rho);

/// Section-level attention on Z_n (H = {e}) with relative bias psi(x' - x).
SectionFeature relative_bias_attention_apply(const AttentionParams& p, const SectionFeature& f);
Matrix relative_bias_weights(const AttentionParams& p, const Matrix& F, const GroupTable& zn);
OmegaHat rel_bias_omega(const AttentionParams& p, const RepPtr& sigma, const RepPtr& rho);

/// Rotary attention on Z_n: logits (R(x) WQ f(x))^T (R(x') WK f(x')) scale.
SectionFeature rotary_attention_apply(const AttentionParams& p, const SectionFeature& f);
Matrix rotary_weights(const AttentionParams& p, const Matrix& F, const GroupTable& zn);
/// omega_hat(f, g') with the relative factor R(g') in the logits.
OmegaHat rotary_omega(const AttentionParams& p, const RepPtr& sigma, const RepPtr& rho);

// ---------------------------------------------------------------------------
// LieTransformer

using LieAlpha = std::function<double(const Vector& v, const Vector& vp, Element g)>;

/// exp[(WQ v)^T (WK v') scale + psi(g)].
LieAlpha dot_product_alpha(const AttentionParams& p);

/// psi averaged over H x H so that psi(h g h') = psi(g).
Vector bi_invariant_bias(const Vector& psi, const Subgroup& h);

/// [Phi f](g) = (1/Z) sum_{g'} alpha(f(g), f(g'), g^-1 g') WV f(g'), with
/// Z = sum_{g'} alpha(f(g), f(g'), g^-1 g') when normalize, else 1.
/// Throws DegenerateNormalization for Z = 0.
FeatureMap lie_transformer_apply(const LieAlpha& alpha, const Matrix& WV, const FeatureMap& f,
                                 const RepPtr& sigma, bool normalize = true);
OmegaHat lie_omega(const LieAlpha& alpha, const Matrix& WV, const RepPtr& sigma, const RepPtr& rho,
                   bool normalize = true);

}  // namespace homsteer
