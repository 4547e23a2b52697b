#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include <json.hpp>

#include "homsteer/induced.hpp"

namespace homsteer {

inline constexpr int kDefaultConstraintTrials = 32;
inline constexpr double kOmegaTolerance = 1e-10;

using OmegaFn = std::function<Vector(const FeatureMap& f, Element gp)>;
using AlphaFn = std::function<Matrix(const FeatureMap& f, Element gp)>;

/// The integrand omega_hat: I_rho x G' -> V_sigma of a non-linear operator.
///
/// The evaluator sees the whole feature map. It must be pure and safe to call
/// concurrently. G' is always the group of rho here; the slot is kept so
/// callers can tell the integration group apart from the feature group.
class OmegaHat {
 public:
  OmegaHat(std::string name, RepPtr sigma, RepPtr rho, OmegaFn fn,
           nlohmann::json params = nlohmann::json::object());

  Vector operator()(const FeatureMap& f, Element gp) const { return fn_(f, gp); }

  const std::string& name() const { return name_; }
  const nlohmann::json& params() const { return params_; }
  const Representation& sigma() const { return *sigma_; }
  const Representation& rho() const { return *rho_; }
  const RepPtr& sigma_ptr() const { return sigma_; }
  const RepPtr& rho_ptr() const { return rho_; }
  const GroupTable& group() const { return rho_->group(); }
  const GroupPtr& integration_group() const { return integration_group_; }

  /// Optional alpha_hat with omega_hat(f, g') = alpha_hat(f, g') f(g').
  void set_alpha(AlphaFn alpha) { alpha_ = std::move(alpha); }
  const AlphaFn& alpha() const { return alpha_; }

 private:
  std::string name_;
  RepPtr sigma_;
  RepPtr rho_;
  GroupPtr integration_group_;
  OmegaFn fn_;
  AlphaFn alpha_;
  nlohmann::json params_;
};

/// omega(f, g, g') with omega(f, gh, g') = sigma(h^-1) omega(f, g, g').
using OmegaThreeFn = std::function<Vector(const FeatureMap& f, Element g, Element gp)>;

struct OmegaThreeArg {
  std::string name;
  RepPtr sigma;
  RepPtr rho;
  OmegaThreeFn fn;
};

struct OmegaReport {
  /// max_h |sum_g' w(hf, g') - sigma(h) sum_g' w(f, g')|.
  double h_violation = 0.0;
  /// max_{g', h'} |w(f, g'h') - w(f, g')|.
  double hprime_violation = 0.0;
  /// max_{h, g'} |w(hf, g') - sigma(h) w(f, g')|; informational.
  double h_pointwise = 0.0;
  /// max |alpha(f, g'h') - alpha(f, g') rho(h')| and |w - alpha f|; -1 without alpha.
  double alpha_violation = -1.0;
  int trials = 0;

  double max_violation() const { return std::max(h_violation, hprime_violation); }
};

/// Exhaustive over h in H, h' in H', g' in G; random induced f per trial.
OmegaReport check_omega_constraints(const OmegaHat& w, int trials = kDefaultConstraintTrials,
                                    std::uint64_t seed = 0);

struct ApplyOptions {
  bool strict = false;
  int trials = kDefaultConstraintTrials;
  std::uint64_t seed = 0;
  double tolerance = kOmegaTolerance;
};

/// [Phi f](g) = sum_{g'} omega_hat(g^-1 f, g'), counting measure, g' ascending.
/// With options.strict the integrand is checked first and a failing one is
/// rejected with ConstraintViolation.
FeatureMap apply_nonlinear(const OmegaHat& w, const FeatureMap& f, const ApplyOptions& options = {});

/// [Phi f](g) = sum_{g'} omega(f, g, g').
FeatureMap apply_three_arg(const OmegaThreeArg& w, const FeatureMap& f);

struct InvarianceReport {
  /// max |omega(kf, kg, g') - omega(f, g, g')|.
  double invariance = 0.0;
  /// max |sum_g' omega(f, gh, g') - sigma(h^-1) sum_g' omega(f, g, g')|.
  double right_constraint = 0.0;
};

/// Exhaustive over k, g, g' for |G| <= 48; above that g and g' are sampled.
InvarianceReport check_three_arg(const OmegaThreeArg& w, int trials = 4, std::uint64_t seed = 0);

/// omega_hat(f, g') = omega(f, e, g'). Throws ConstraintViolation when the
/// sampled G-invariance check exceeds kOmegaTolerance.
OmegaHat reduce_three_to_two(const OmegaThreeArg& w, int trials = 4, std::uint64_t seed = 0);

using FeatureOp = std::function<FeatureMap(const FeatureMap&)>;

struct EquivarianceReport {
  double max_violation = 0.0;
  Element witness_k = 0;
  Element witness_g = 0;
};

/// max over all k and `trials` random induced f of |k op(f) - op(k f)|.
EquivarianceReport check_equivariance(const FeatureOp& op, const RepPtr& input_rep,
                                      int trials = kDefaultConstraintTrials, std::uint64_t seed = 0);

enum class DeltaKind {
  /// Indicator of g' = e, weight 1.
  identity,
  /// Indicator of g' in H', weight 1/|H'|; also satisfies the pointwise
  /// H'-invariance.
  coset,
};

/// omega_hat(f, g') = delta(g') lambda[f](e), so apply_nonlinear reproduces
/// lambda. lambda is checked for equivariance first (exhaustive over k;
/// `trials` random f) and rejected with NotEquivariant.
OmegaHat universal_from_lambda(FeatureOp lambda, RepPtr input_rep, RepPtr output_rep,
                               DeltaKind kind = DeltaKind::identity, int trials = 8,
                               std::uint64_t seed = 0);

}  // namespace homsteer
