#pragma once

#include <memory>
#include <random>
#include <vector>

#include "homsteer/group.hpp"
#include "homsteer/induced.hpp"
#include "homsteer/representation.hpp"

namespace homsteer {

/// Tolerance used by kernel constructors that verify their input.
inline constexpr double kKernelTolerance = 1e-10;

/// kappa(g, g') in Hom(V_rho, V_sigma) for every pair, stored as one
/// (|G| dim sigma) x (|G| dim rho) matrix whose (g, g') block is kappa(g, g').
/// Applying the kernel to a feature is then a single matrix-vector product.
class TwoArgKernel {
 public:
  TwoArgKernel(HomRep homrep, Matrix values);
  static TwoArgKernel zeros(HomRep homrep);

  const HomRep& homrep() const { return homrep_; }
  const GroupTable& group() const { return homrep_.sigma().group(); }
  const Matrix& values() const { return values_; }
  Matrix& mutable_values() { return values_; }

  auto block(Element g, Element gp) const {
    return values_.block(g * homrep_.rows(), gp * homrep_.cols(), homrep_.rows(), homrep_.cols());
  }
  auto block(Element g, Element gp) {
    return values_.block(g * homrep_.rows(), gp * homrep_.cols(), homrep_.rows(), homrep_.cols());
  }

  /// max |kappa(gh, g') - sigma(h^-1) kappa(g, g')| over h in H.
  double left_residual() const;
  /// max |kappa(g, g'h') - kappa(g, g') rho(h')| over h' in H'.
  double right_residual() const;
  /// max |kappa(ug, ug') - kappa(g, g')| over all u, g, g'.
  double invariance_residual() const;
  bool is_canonical(double tol = 1e-12) const { return right_residual() <= tol; }

 private:
  HomRep homrep_;
  Matrix values_;
};

/// kappa_hat(g) in Hom(V_rho, V_sigma), stored as dim sigma x (|G| dim rho).
class OneArgKernel {
 public:
  OneArgKernel(HomRep homrep, Matrix values);
  static OneArgKernel zeros(HomRep homrep);

  const HomRep& homrep() const { return homrep_; }
  const GroupTable& group() const { return homrep_.sigma().group(); }
  const Matrix& values() const { return values_; }
  Matrix& mutable_values() { return values_; }

  auto at(Element g) const { return values_.middleCols(g * homrep_.cols(), homrep_.cols()); }
  auto at(Element g) { return values_.middleCols(g * homrep_.cols(), homrep_.cols()); }

  /// Worst deviation from kappa_hat(h g h') = sigma(h) kappa_hat(g) rho(h'),
  /// checked separately on the left (all h) and on the right (all h').
  double bi_equivariance_residual() const;

 private:
  HomRep homrep_;
  Matrix values_;
};

/// kappa(x) for cosets x of G/H', stored as dim sigma x (|G/H'| dim rho).
class QuotientKernel {
 public:
  QuotientKernel(QuotientPtr quotient, HomRep homrep, Matrix values);

  const Quotient& quotient() const { return *quotient_; }
  const QuotientPtr& quotient_ptr() const { return quotient_; }
  const HomRep& homrep() const { return homrep_; }
  const Matrix& values() const { return values_; }
  auto at(CosetIndex x) const { return values_.middleCols(x * homrep_.cols(), homrep_.cols()); }

  /// max |kappa(h |> x) - sigma(h) kappa(x) rho(h'(x, h))^-1| over h in H.
  double constraint_residual() const;

 private:
  QuotientPtr quotient_;
  HomRep homrep_;
  Matrix values_;
};

/// kappa(x) per double coset H gamma(x) H', stored like QuotientKernel.
/// `quotient` is the G/H' quotient whose section supplies gamma.
class DoubleCosetKernel {
 public:
  DoubleCosetKernel(std::shared_ptr<const DoubleCosetSpace> space, QuotientPtr quotient,
                    HomRep homrep, Matrix values);

  const DoubleCosetSpace& space() const { return *space_; }
  const std::shared_ptr<const DoubleCosetSpace>& space_ptr() const { return space_; }
  const Quotient& quotient() const { return *quotient_; }
  const QuotientPtr& quotient_ptr() const { return quotient_; }
  const HomRep& homrep() const { return homrep_; }
  const Matrix& values() const { return values_; }
  auto at(CosetIndex x) const { return values_.middleCols(x * homrep_.cols(), homrep_.cols()); }

  /// max |kappa(x) - sigma(h) kappa(x) rho^x(h)^-1| over h in each stabilizer,
  /// rho^x(h) = rho(gamma(x)^-1 h gamma(x)).
  double stabilizer_residual() const;

 private:
  std::shared_ptr<const DoubleCosetSpace> space_;
  QuotientPtr quotient_;
  HomRep homrep_;
  Matrix values_;
};

/// [Phi f](g) = sum_{g'} kappa(g, g') f(g'), counting measure.
FeatureMap apply_two_arg(const TwoArgKernel& k, const FeatureMap& f);

/// (1/|H|) sum_h sigma(h) kappa(gh, g'): projection onto the left constraint.
TwoArgKernel left_project(const TwoArgKernel& k);

/// kappa_0(g, g') = (1/|H'|) sum_{h in H'} kappa(g, g'h) rho(h^-1).
TwoArgKernel canonical_representative(const TwoArgKernel& k);

/// kappa_hat(g) = kappa(e, g). Throws ConstraintViolation when kappa is not
/// G-invariant to kKernelTolerance.
OneArgKernel reduce_to_one_arg(const TwoArgKernel& k);
/// kappa(g, g') = kappa_hat(g^-1 g').
TwoArgKernel expand_to_two_arg(const OneArgKernel& kh);

struct SteerableBasis {
  std::vector<OneArgKernel> basis;
  /// Worst bi-equivariance residual over the basis (0 when empty).
  double constraint_residual = 0.0;
};

/// Orthonormal basis of the bi-equivariant kernels. The constraint system is
/// built from generators of H and H' and solved one double coset at a time
/// (the system is block diagonal over double cosets). Basis elements are
/// ordered by double coset, then by nullspace column.
SteerableBasis solve_steerable_basis(const HomRep& homrep);

OneArgKernel linear_combination(const std::vector<OneArgKernel>& basis,
                                const std::vector<double>& coeffs);
/// Random combination with coefficients uniform in [-1, 1]. Zero kernel when
/// the basis is empty.
OneArgKernel random_combination(const HomRep& homrep, const std::vector<OneArgKernel>& basis,
                                std::mt19937_64& rng);

/// [Phi f](g) = sum_{g''} kappa_hat(g'') f(g g''), the substitution
/// g' = g g'' of sum_{g'} kappa_hat(g^-1 g') f(g'). Terms are accumulated in
/// ascending g''.
FeatureMap gcnn_apply(const OneArgKernel& kh, const FeatureMap& f);

/// kappa(x) = kappa_hat(s(x)); `quotient` must be a quotient by H'.
/// Throws ConstraintViolation for a kernel that is not bi-equivariant.
QuotientKernel to_quotient_kernel(const OneArgKernel& kh, QuotientPtr quotient);
/// kappa_hat(g) = kappa(gH') rho(h'(g)).
OneArgKernel from_quotient_kernel(const QuotientKernel& qk);

/// kappa(x) = kappa(gamma(x) H'), with gamma taken from the quotient section.
DoubleCosetKernel to_double_coset_kernel(const QuotientKernel& qk);
/// Propagates class values to every coset via the left-equivariance; throws
/// ConstraintViolation when two propagation paths disagree.
QuotientKernel from_double_coset_kernel(const DoubleCosetKernel& dk);

/// Solution-space dimension counted on each domain.
int solution_dimension_g(const HomRep& homrep);
int solution_dimension_x(const HomRep& homrep, const Quotient& quotient);
int solution_dimension_d(const HomRep& homrep, const DoubleCosetSpace& space);

}  // namespace homsteer
