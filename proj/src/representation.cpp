#include "homsteer/representation.hpp"

#include <cmath>
#include <numbers>

#include "homsteer/errors.hpp"

namespace homsteer {

Representation make_rep_unchecked(SubgroupPtr domain, std::vector<Matrix> matrices,
                                  std::string name) {
  if (!domain) throw InvalidRepresentation("representation without domain");
  if (static_cast<int>(matrices.size()) != domain->order()) {
    throw InvalidRepresentation("need one matrix per domain element");
  }
  if (matrices.empty() || matrices.front().rows() < 1) {
    throw InvalidRepresentation("representation dimension must be positive");
  }
  const auto dim = matrices.front().rows();
  for (const auto& m : matrices) {
    if (m.rows() != dim || m.cols() != dim) {
      throw InvalidRepresentation("matrices must all be square of the same size");
    }
    if (!m.allFinite()) throw InvalidRepresentation("non-finite matrix entry");
  }
  Representation r;
  r.domain_ = std::move(domain);
  r.matrices_ = std::move(matrices);
  r.dim_ = static_cast<int>(dim);
  r.name_ = std::move(name);
  r.unitary_ = r.unitarity_residual() <= kRepTolerance;
  return r;
}

Representation Representation::from_matrices(SubgroupPtr domain, std::vector<Matrix> matrices,
                                             std::string name) {
  auto r = make_rep_unchecked(std::move(domain), std::move(matrices), std::move(name));
  const double res = r.homomorphism_residual();
  if (res > kRepTolerance) {
    throw InvalidRepresentation("homomorphism law violated by " + std::to_string(res));
  }
  return r;
}

const Matrix& Representation::operator()(Element g) const {
  const int i = domain_->position(g);
  if (i < 0) {
    throw InvalidRepresentation("element " + std::to_string(g) +
                                " is not in the representation's domain");
  }
  return matrices_[i];
}

double Representation::homomorphism_residual() const {
  const auto& G = group();
  const auto& hs = domain_->elements();
  double worst =
      (matrices_[domain_->position(G.identity())] - Matrix::Identity(dim_, dim_))
          .cwiseAbs()
          .maxCoeff();
  for (std::size_t a = 0; a < hs.size(); ++a) {
    for (std::size_t b = 0; b < hs.size(); ++b) {
      const Matrix& ab = (*this)(G.mul(hs[a], hs[b]));
      const double d = (ab - matrices_[a] * matrices_[b]).cwiseAbs().maxCoeff();
      worst = std::max(worst, d);
    }
  }
  return worst;
}

double Representation::unitarity_residual() const {
  double worst = 0.0;
  const Matrix eye = Matrix::Identity(dim_, dim_);
  for (const auto& m : matrices_) {
    worst = std::max(worst, (m.transpose() * m - eye).cwiseAbs().maxCoeff());
  }
  return worst;
}

bool Representation::is_trivial() const {
  const Matrix eye = Matrix::Identity(dim_, dim_);
  for (const auto& m : matrices_) {
    if ((m - eye).cwiseAbs().maxCoeff() > kRepTolerance) return false;
  }
  return true;
}

Representation trivial_rep(SubgroupPtr domain, int dim) {
  if (dim < 1) throw InvalidRepresentation("dimension must be positive");
  std::vector<Matrix> mats(domain->order(), Matrix::Identity(dim, dim));
  return make_rep_unchecked(std::move(domain), std::move(mats), "trivial");
}

Representation regular_rep(SubgroupPtr domain) {
  const int n = domain->order();
  if (n > kMaxRegularRepOrder) {
    throw InvalidOrder("regular representation limited to order " +
                       std::to_string(kMaxRegularRepOrder));
  }
  const auto& G = domain->group();
  const auto& hs = domain->elements();
  std::vector<Matrix> mats;
  mats.reserve(n);
  for (Element g : hs) {
    Matrix m = Matrix::Zero(n, n);
    for (int k = 0; k < n; ++k) m(domain->position(G.mul(g, hs[k])), k) = 1.0;
    mats.push_back(std::move(m));
  }
  return make_rep_unchecked(std::move(domain), std::move(mats), "regular");
}

Representation sign_rep_z2(SubgroupPtr domain) {
  if (domain->order() != 2) throw InvalidRepresentation("sign representation needs an order-2 subgroup");
  const Element e = domain->group().identity();
  std::vector<Matrix> mats;
  for (Element g : domain->elements()) mats.push_back(Matrix::Constant(1, 1, g == e ? 1.0 : -1.0));
  return make_rep_unchecked(std::move(domain), std::move(mats), "sign");
}

Matrix rotation2(double angle) {
  Matrix r(2, 2);
  const double c = std::cos(angle), s = std::sin(angle);
  r << c, -s, s, c;
  return r;
}

Representation rotation_block_rep(SubgroupPtr domain, const std::vector<int>& freqs) {
  const auto& G = domain->group();
  if (G.family() != GroupFamily::cyclic) {
    throw UnsupportedGroup("rotation blocks are defined on cyclic groups");
  }
  if (freqs.empty()) throw InvalidRepresentation("need at least one frequency");
  const int n = G.family_n();
  const int dim = 2 * static_cast<int>(freqs.size());
  std::vector<Matrix> mats;
  for (Element x : domain->elements()) {
    Matrix m = Matrix::Zero(dim, dim);
    for (std::size_t i = 0; i < freqs.size(); ++i) {
      // Reduce m*x mod n before forming the angle.
      const long long phase = ((static_cast<long long>(freqs[i]) * x) % n + n) % n;
      if ((4 * phase) % n == 0) {
        // Quarter turns are exact.
        static const double kCos[4] = {1.0, 0.0, -1.0, 0.0};
        static const double kSin[4] = {0.0, 1.0, 0.0, -1.0};
        const int q = static_cast<int>(4 * phase / n);
        m.block(2 * i, 2 * i, 2, 2) << kCos[q], -kSin[q], kSin[q], kCos[q];
      } else {
        m.block(2 * i, 2 * i, 2, 2) = rotation2(2.0 * std::numbers::pi * phase / n);
      }
    }
    mats.push_back(std::move(m));
  }
  return make_rep_unchecked(std::move(domain), std::move(mats), "rotation");
}

Representation direct_sum(const Representation& a, const Representation& b) {
  if (a.domain().elements() != b.domain().elements() ||
      a.domain().group_ptr() != b.domain().group_ptr()) {
    throw InvalidRepresentation("direct sum needs a common domain");
  }
  std::vector<Matrix> mats;
  for (int i = 0; i < a.domain().order(); ++i) {
    Matrix m = Matrix::Zero(a.dim() + b.dim(), a.dim() + b.dim());
    m.topLeftCorner(a.dim(), a.dim()) = a.at_position(i);
    m.bottomRightCorner(b.dim(), b.dim()) = b.at_position(i);
    mats.push_back(std::move(m));
  }
  return make_rep_unchecked(a.domain_ptr(), std::move(mats), a.name() + "+" + b.name());
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

HomRep::HomRep(RepPtr sigma, RepPtr rho) : sigma_(std::move(sigma)), rho_(std::move(rho)) {
  if (!sigma_ || !rho_) throw InvalidRepresentation("hom representation needs two reps");
  if (sigma_->domain().group_ptr() != rho_->domain().group_ptr()) {
    throw InvalidRepresentation("sigma and rho must live on the same group");
  }
}

Matrix HomRep::act(Element h, Element hp, const Matrix& L) const {
  const auto& G = rho_->group();
  return (*sigma_)(h) * L * (*rho_)(G.inv(hp));
}

Matrix HomRep::matrix(Element h, Element hp) const {
  const auto& G = rho_->group();
  return kron((*rho_)(G.inv(hp)).transpose(), (*sigma_)(h));
}

double HomRep::homomorphism_residual() const {
  const auto& G = rho_->group();
  const auto& H = sigma_->domain().elements();
  const auto& Hp = rho_->domain().elements();
  double worst = (matrix(G.identity(), G.identity()) - Matrix::Identity(dim(), dim()))
                     .cwiseAbs()
                     .maxCoeff();
  for (Element h1 : H)
    for (Element p1 : Hp) {
      const Matrix m1 = matrix(h1, p1);
      for (Element h2 : H)
        for (Element p2 : Hp) {
          const Matrix prod = matrix(G.mul(h1, h2), G.mul(p1, p2));
          worst = std::max(worst, (prod - m1 * matrix(h2, p2)).cwiseAbs().maxCoeff());
        }
    }
  return worst;
}

HomRep hom_rep(RepPtr sigma, RepPtr rho) { return HomRep(std::move(sigma), std::move(rho)); }

}  // namespace homsteer
