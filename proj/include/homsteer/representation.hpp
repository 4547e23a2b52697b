#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "homsteer/group.hpp"

namespace homsteer {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kRepTolerance = 1e-12;
inline constexpr int kMaxRegularRepOrder = 64;

/// A real matrix representation of a subgroup (possibly the whole group).
///
/// Matrices are looked up by parent-group element index. Immutable.
class Representation {
 public:
  /// `matrices[i]` is the image of `domain->elements()[i]`. Checked for the
  /// identity and homomorphism laws to kRepTolerance per entry.
  static Representation from_matrices(SubgroupPtr domain, std::vector<Matrix> matrices,
                                      std::string name = "custom");

  const Subgroup& domain() const { return *domain_; }
  const SubgroupPtr& domain_ptr() const { return domain_; }
  const GroupTable& group() const { return domain_->group(); }
  int dim() const { return dim_; }
  bool unitary() const { return unitary_; }
  const std::string& name() const { return name_; }

  /// rho(g); g must lie in the domain.
  const Matrix& operator()(Element g) const;
  const Matrix& at_position(int i) const { return matrices_[i]; }

  /// max_{a,b} |rho(ab) - rho(a) rho(b)|, together with |rho(e) - I|.
  double homomorphism_residual() const;
  /// max_g |rho(g)^T rho(g) - I|.
  double unitarity_residual() const;
  /// True when every matrix is the identity to kRepTolerance.
  bool is_trivial() const;

 private:
  friend Representation make_rep_unchecked(SubgroupPtr, std::vector<Matrix>, std::string);
  Representation() = default;

  SubgroupPtr domain_;
  std::vector<Matrix> matrices_;
  int dim_ = 0;
  bool unitary_ = false;
  std::string name_;
};

using RepPtr = std::shared_ptr<const Representation>;

Representation trivial_rep(SubgroupPtr domain, int dim);
/// Left-translation permutation matrices; |domain| <= 64.
Representation regular_rep(SubgroupPtr domain);
/// 1-dim sign representation of an order-2 subgroup.
Representation sign_rep_z2(SubgroupPtr domain);
/// Direct sum of 2x2 rotations R(2 pi m_i x / n) on a subgroup of Z_n.
Representation rotation_block_rep(SubgroupPtr domain, const std::vector<int>& freqs);
Representation direct_sum(const Representation& a, const Representation& b);

/// 2x2 rotation by `angle`.
Matrix rotation2(double angle);

/// The representation sigma (x) rho^* of H x H' on Hom(V_rho, V_sigma):
/// (h, h') L = sigma(h) L rho(h')^-1.
class HomRep {
 public:
  HomRep(RepPtr sigma, RepPtr rho);

  const Representation& sigma() const { return *sigma_; }
  const Representation& rho() const { return *rho_; }
  const RepPtr& sigma_ptr() const { return sigma_; }
  const RepPtr& rho_ptr() const { return rho_; }
  int rows() const { return sigma_->dim(); }
  int cols() const { return rho_->dim(); }
  int dim() const { return rows() * cols(); }

  Matrix act(Element h, Element hp, const Matrix& L) const;
  /// Matrix of the action on column-major vec(L): rho(h'^-1)^T (x) sigma(h).
  Matrix matrix(Element h, Element hp) const;
  /// Pairwise homomorphism check over (H x H')^2.
  double homomorphism_residual() const;

 private:
  RepPtr sigma_;
  RepPtr rho_;
};

HomRep hom_rep(RepPtr sigma, RepPtr rho);

/// Kronecker product a (x) b.
Matrix kron(const Matrix& a, const Matrix& b);

}  // namespace homsteer
