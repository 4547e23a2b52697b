#pragma once

#include <random>

#include "homsteer/group.hpp"
#include "homsteer/linalg.hpp"
#include "homsteer/representation.hpp"

namespace homsteer {

/// Features accepted as induced when the Mackey residual is at most this.
inline constexpr double kMackeyAcceptTolerance = 1e-10;
/// sink() rejects inputs whose Mackey residual exceeds this.
inline constexpr double kMackeyRejectTolerance = 1e-8;

/// A function G -> V_rho stored densely: column g holds f(g).
///
/// Elements of the induced representation satisfy f(gh) = rho(h^-1) f(g) for
/// h in the domain of rho. The type does not enforce this on construction;
/// operator outputs are checked with mackey_residual() by the caller.
class FeatureMap {
 public:
  FeatureMap(RepPtr rep, Matrix values);
  static FeatureMap zeros(RepPtr rep);

  const GroupTable& group() const { return rep_->group(); }
  const Subgroup& subgroup() const { return rep_->domain(); }
  const Representation& rep() const { return *rep_; }
  const RepPtr& rep_ptr() const { return rep_; }
  int dim() const { return rep_->dim(); }

  const Matrix& values() const { return values_; }
  Matrix& mutable_values() { return values_; }
  Eigen::Ref<const Vector> operator()(Element g) const { return values_.col(g); }

  /// max_{g, h} |f(gh) - rho(h^-1) f(g)|.
  double mackey_residual() const;
  bool is_induced(double tol = kMackeyAcceptTolerance) const {
    return mackey_residual() <= tol;
  }

 private:
  RepPtr rep_;
  Matrix values_;
};

/// A section-level feature: column x holds f_X(x) for coset x of G/H'.
class SectionFeature {
 public:
  SectionFeature(QuotientPtr quotient, RepPtr rep, Matrix values);

  const Quotient& quotient() const { return *quotient_; }
  const QuotientPtr& quotient_ptr() const { return quotient_; }
  const Representation& rep() const { return *rep_; }
  const RepPtr& rep_ptr() const { return rep_; }
  int dim() const { return rep_->dim(); }
  const Matrix& values() const { return values_; }
  Eigen::Ref<const Vector> operator()(CosetIndex x) const { return values_.col(x); }

 private:
  QuotientPtr quotient_;
  RepPtr rep_;
  Matrix values_;
};

/// [Pf](g) = (1/|H'|) sum_h rho(h) f(gh), the projection onto I_rho.
/// `raw` is dim(rho) x |G|.
FeatureMap mackey_project(const Matrix& raw, RepPtr rep);

/// [k f](g) = f(k^-1 g).
FeatureMap g_action(Element k, const FeatureMap& f);

/// Lift: [f](g) = rho(h(g)^-1) f_X(gH').
FeatureMap lift(const SectionFeature& sf);

/// Sink: f_X(x) = f(s(x)). Throws NotInduced above kMackeyRejectTolerance.
SectionFeature sink(const FeatureMap& f, QuotientPtr quotient);

/// (k f_X)(x) = rho(h(x, k^-1)^-1) f_X(k^-1 |> x).
SectionFeature section_action(Element k, const SectionFeature& sf);

/// Uniform [-1, 1] entries followed by mackey_project.
FeatureMap random_feature(RepPtr rep, std::mt19937_64& rng);
SectionFeature random_section_feature(QuotientPtr quotient, RepPtr rep, std::mt19937_64& rng);

double max_abs_diff(const FeatureMap& a, const FeatureMap& b);
double max_abs_diff(const SectionFeature& a, const SectionFeature& b);

}  // namespace homsteer
