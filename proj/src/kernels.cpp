#include "homsteer/kernels.hpp"

#include <algorithm>
#include <map>

#include "homsteer/errors.hpp"
#include "homsteer/linalg.hpp"

namespace homsteer {

namespace {

template <class A, class B>
double block_diff(const A& a, const B& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

void require_same_group(const HomRep& hr, const GroupTable& g, const char* what) {
  if (&hr.sigma().group() != &g) throw DimensionMismatch(std::string(what) + ": group mismatch");
}

// vec(sigma(h) L rho(hp)^-1) as a matrix on column-major vec(L).
Matrix action_matrix(const HomRep& hr, Element h, Element hp) {
  const auto& G = hr.sigma().group();
  return kron(hr.rho()(G.inv(hp)).transpose(), hr.sigma()(h));
}

}  // namespace

// ---------------------------------------------------------------------------
// TwoArgKernel

TwoArgKernel::TwoArgKernel(HomRep homrep, Matrix values)
    : homrep_(std::move(homrep)), values_(std::move(values)) {
  const int n = group().order();
  if (values_.rows() != n * homrep_.rows() || values_.cols() != n * homrep_.cols()) {
    throw DimensionMismatch("two-argument kernel must be (|G| dim sigma) x (|G| dim rho)");
  }
}

TwoArgKernel TwoArgKernel::zeros(HomRep homrep) {
  const int n = homrep.sigma().group().order();
  Matrix v = Matrix::Zero(n * homrep.rows(), n * homrep.cols());
  return TwoArgKernel(std::move(homrep), std::move(v));
}

double TwoArgKernel::left_residual() const {
  const auto& G = group();
  double worst = 0.0;
  for (Element h : homrep_.sigma().domain().elements()) {
    const Matrix& s = homrep_.sigma()(G.inv(h));
    for (Element g = 0; g < G.order(); ++g) {
      const Element gh = G.mul(g, h);
      for (Element gp = 0; gp < G.order(); ++gp) {
        worst = std::max(worst, block_diff(block(gh, gp), s * block(g, gp)));
      }
    }
  }
  return worst;
}

double TwoArgKernel::right_residual() const {
  const auto& G = group();
  double worst = 0.0;
  for (Element hp : homrep_.rho().domain().elements()) {
    const Matrix& r = homrep_.rho()(hp);
    for (Element g = 0; g < G.order(); ++g) {
      for (Element gp = 0; gp < G.order(); ++gp) {
        worst = std::max(worst, block_diff(block(g, G.mul(gp, hp)), block(g, gp) * r));
      }
    }
  }
  return worst;
}

double TwoArgKernel::invariance_residual() const {
  const auto& G = group();
  double worst = 0.0;
  for (Element u = 0; u < G.order(); ++u) {
    for (Element g = 0; g < G.order(); ++g) {
      const Element ug = G.mul(u, g);
      for (Element gp = 0; gp < G.order(); ++gp) {
        worst = std::max(worst, block_diff(block(ug, G.mul(u, gp)), block(g, gp)));
      }
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// OneArgKernel

OneArgKernel::OneArgKernel(HomRep homrep, Matrix values)
    : homrep_(std::move(homrep)), values_(std::move(values)) {
  if (values_.rows() != homrep_.rows() || values_.cols() != group().order() * homrep_.cols()) {
    throw DimensionMismatch("one-argument kernel must be dim sigma x (|G| dim rho)");
  }
}

OneArgKernel OneArgKernel::zeros(HomRep homrep) {
  const int n = homrep.sigma().group().order();
  Matrix v = Matrix::Zero(homrep.rows(), n * homrep.cols());
  return OneArgKernel(std::move(homrep), std::move(v));
}

double OneArgKernel::bi_equivariance_residual() const {
  const auto& G = group();
  double worst = 0.0;
  for (Element h : homrep_.sigma().domain().elements()) {
    const Matrix& s = homrep_.sigma()(h);
    for (Element g = 0; g < G.order(); ++g) {
      worst = std::max(worst, block_diff(at(G.mul(h, g)), s * at(g)));
    }
  }
  for (Element hp : homrep_.rho().domain().elements()) {
    const Matrix& r = homrep_.rho()(hp);
    for (Element g = 0; g < G.order(); ++g) {
      worst = std::max(worst, block_diff(at(G.mul(g, hp)), at(g) * r));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// QuotientKernel / DoubleCosetKernel

QuotientKernel::QuotientKernel(QuotientPtr quotient, HomRep homrep, Matrix values)
    : quotient_(std::move(quotient)), homrep_(std::move(homrep)), values_(std::move(values)) {
  if (quotient_->subgroup().elements() != homrep_.rho().domain().elements()) {
    throw DimensionMismatch("quotient kernel needs a quotient by the domain of rho");
  }
  if (values_.rows() != homrep_.rows() || values_.cols() != quotient_->size() * homrep_.cols()) {
    throw DimensionMismatch("quotient kernel must be dim sigma x (|G/H'| dim rho)");
  }
}

double QuotientKernel::constraint_residual() const {
  const auto& q = *quotient_;
  const auto& G = q.group();
  double worst = 0.0;
  for (Element h : homrep_.sigma().domain().elements()) {
    for (CosetIndex x = 0; x < q.size(); ++x) {
      const Element t = q.twist(x, h);
      const Matrix rhs = homrep_.sigma()(h) * at(x) * homrep_.rho()(G.inv(t));
      worst = std::max(worst, block_diff(at(q.act(h, x)), rhs));
    }
  }
  return worst;
}

DoubleCosetKernel::DoubleCosetKernel(std::shared_ptr<const DoubleCosetSpace> space,
                                     QuotientPtr quotient, HomRep homrep, Matrix values)
    : space_(std::move(space)),
      quotient_(std::move(quotient)),
      homrep_(std::move(homrep)),
      values_(std::move(values)) {
  if (space_->left().elements() != homrep_.sigma().domain().elements() ||
      space_->right().elements() != homrep_.rho().domain().elements() ||
      quotient_->subgroup().elements() != space_->right().elements()) {
    throw DimensionMismatch("double coset kernel subgroups do not match its representations");
  }
  if (values_.rows() != homrep_.rows() || values_.cols() != space_->size() * homrep_.cols()) {
    throw DimensionMismatch("double coset kernel must be dim sigma x (|D| dim rho)");
  }
}

double DoubleCosetKernel::stabilizer_residual() const {
  const auto& G = space_->group();
  double worst = 0.0;
  for (CosetIndex x = 0; x < space_->size(); ++x) {
    const Element gamma = space_->representative(x);
    const Element gamma_inv = G.inv(gamma);
    for (Element h : space_->stabilizer(x).elements()) {
      const Element inner_inv = G.mul(gamma_inv, G.mul(G.inv(h), gamma));
      const Matrix rhs = homrep_.sigma()(h) * at(x) * homrep_.rho()(inner_inv);
      worst = std::max(worst, block_diff(at(x), rhs));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Two-argument operations

FeatureMap apply_two_arg(const TwoArgKernel& k, const FeatureMap& f) {
  const auto& hr = k.homrep();
  require_same_group(hr, f.group(), "apply_two_arg");
  if (f.dim() != hr.cols()) throw DimensionMismatch("feature dim does not match kernel columns");
  const int n = f.group().order();
  const Eigen::Map<const Vector> in(f.values().data(), f.values().size());
  const Vector out = k.values() * in;
  return FeatureMap(hr.sigma_ptr(), Eigen::Map<const Matrix>(out.data(), hr.rows(), n));
}

TwoArgKernel left_project(const TwoArgKernel& k) {
  const auto& G = k.group();
  const auto& hr = k.homrep();
  const auto& hs = hr.sigma().domain().elements();
  TwoArgKernel out = TwoArgKernel::zeros(hr);
  for (Element g = 0; g < G.order(); ++g) {
    for (Element h : hs) {
      const Element gh = G.mul(g, h);
      const Matrix& s = hr.sigma()(h);
      for (Element gp = 0; gp < G.order(); ++gp) out.block(g, gp) += s * k.block(gh, gp);
    }
  }
  out.mutable_values() /= static_cast<double>(hs.size());
  return out;
}

TwoArgKernel canonical_representative(const TwoArgKernel& k) {
  const auto& G = k.group();
  const auto& hr = k.homrep();
  const auto& hps = hr.rho().domain().elements();
  TwoArgKernel out = TwoArgKernel::zeros(hr);
  for (Element gp = 0; gp < G.order(); ++gp) {
    for (Element h : hps) {
      const Element gph = G.mul(gp, h);
      const Matrix& r = hr.rho()(G.inv(h));
      for (Element g = 0; g < G.order(); ++g) out.block(g, gp) += k.block(g, gph) * r;
    }
  }
  out.mutable_values() /= static_cast<double>(hps.size());
  return out;
}

OneArgKernel reduce_to_one_arg(const TwoArgKernel& k) {
  const double res = k.invariance_residual();
  if (res > kKernelTolerance) {
    throw ConstraintViolation("two-argument kernel is not G-invariant (max violation " +
                                  std::to_string(res) + ")",
                              res);
  }
  const auto& G = k.group();
  OneArgKernel out = OneArgKernel::zeros(k.homrep());
  for (Element g = 0; g < G.order(); ++g) out.at(g) = k.block(G.identity(), g);
  return out;
}

TwoArgKernel expand_to_two_arg(const OneArgKernel& kh) {
  const auto& G = kh.group();
  TwoArgKernel out = TwoArgKernel::zeros(kh.homrep());
  for (Element g = 0; g < G.order(); ++g) {
    const Element g_inv = G.inv(g);
    for (Element gp = 0; gp < G.order(); ++gp) out.block(g, gp) = kh.at(G.mul(g_inv, gp));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Basis solving

SteerableBasis solve_steerable_basis(const HomRep& homrep) {
  const auto& G = homrep.sigma().group();
  const int dd = homrep.dim();
  const int rows = homrep.rows();
  const int cols = homrep.cols();
  const auto& hgens = homrep.sigma().domain().generators();
  const auto& hpgens = homrep.rho().domain().generators();
  const auto space = double_cosets(homrep.sigma().domain_ptr(), homrep.rho().domain_ptr());

  std::vector<Matrix> left_ops, right_ops;
  const Matrix eye_r = Matrix::Identity(cols, cols);
  const Matrix eye_s = Matrix::Identity(rows, rows);
  // vec(sigma(h) L) = (I (x) sigma(h)) vec L; vec(L rho(h')) = (rho(h')^T (x) I) vec L.
  for (Element h : hgens) left_ops.push_back(kron(eye_r, homrep.sigma()(h)));
  for (Element hp : hpgens) right_ops.push_back(kron(homrep.rho()(hp).transpose(), eye_s));

  SteerableBasis result;
  std::vector<int> local(G.order(), -1);
  for (const auto& members : space.classes()) {
    const int m = static_cast<int>(members.size());
    for (int i = 0; i < m; ++i) local[members[i]] = i;
    const int eqs = m * static_cast<int>(hgens.size() + hpgens.size());
    Matrix a = Matrix::Zero(static_cast<Eigen::Index>(eqs) * dd, static_cast<Eigen::Index>(m) * dd);
    Eigen::Index row = 0;
    for (int i = 0; i < m; ++i) {
      const Element g = members[i];
      for (std::size_t j = 0; j < hgens.size(); ++j) {
        a.block(row, local[G.mul(hgens[j], g)] * dd, dd, dd) += Matrix::Identity(dd, dd);
        a.block(row, i * dd, dd, dd) -= left_ops[j];
        row += dd;
      }
      for (std::size_t j = 0; j < hpgens.size(); ++j) {
        a.block(row, local[G.mul(g, hpgens[j])] * dd, dd, dd) += Matrix::Identity(dd, dd);
        a.block(row, i * dd, dd, dd) -= right_ops[j];
        row += dd;
      }
    }
    const Matrix ns = nullspace(a);
    for (Eigen::Index c = 0; c < ns.cols(); ++c) {
      OneArgKernel k = OneArgKernel::zeros(homrep);
      for (int i = 0; i < m; ++i) {
        const Vector piece = ns.col(c).segment(static_cast<Eigen::Index>(i) * dd, dd);
        k.at(members[i]) = Eigen::Map<const Matrix>(piece.data(), rows, cols);
      }
      result.basis.push_back(std::move(k));
    }
    for (Element g : members) local[g] = -1;
  }
  for (const auto& k : result.basis) {
    result.constraint_residual = std::max(result.constraint_residual, k.bi_equivariance_residual());
  }
  return result;
}

OneArgKernel linear_combination(const std::vector<OneArgKernel>& basis,
                                const std::vector<double>& coeffs) {
  if (basis.empty()) throw DimensionMismatch("linear combination of an empty basis");
  if (basis.size() != coeffs.size()) throw DimensionMismatch("one coefficient per basis element");
  OneArgKernel out = OneArgKernel::zeros(basis.front().homrep());
  for (std::size_t i = 0; i < basis.size(); ++i) out.mutable_values() += coeffs[i] * basis[i].values();
  return out;
}

OneArgKernel random_combination(const HomRep& homrep, const std::vector<OneArgKernel>& basis,
                                std::mt19937_64& rng) {
  if (basis.empty()) return OneArgKernel::zeros(homrep);
  const Matrix c = random_uniform(static_cast<int>(basis.size()), 1, rng);
  return linear_combination(basis, std::vector<double>(c.data(), c.data() + c.size()));
}

// ---------------------------------------------------------------------------
// G-CNN

FeatureMap gcnn_apply(const OneArgKernel& kh, const FeatureMap& f) {
  const auto& hr = kh.homrep();
  require_same_group(hr, f.group(), "gcnn_apply");
  if (f.dim() != hr.cols()) throw DimensionMismatch("feature dim does not match kernel columns");
  const auto& G = f.group();
  Matrix out = Matrix::Zero(hr.rows(), G.order());
  for (Element g = 0; g < G.order(); ++g) {
    Vector acc = Vector::Zero(hr.rows());
    for (Element gpp = 0; gpp < G.order(); ++gpp) {
      const Vector term = kh.at(gpp) * f(G.mul(g, gpp));
      acc += term;
    }
    out.col(g) = acc;
  }
  return FeatureMap(hr.sigma_ptr(), std::move(out));
}

// ---------------------------------------------------------------------------
// Domain reduction

QuotientKernel to_quotient_kernel(const OneArgKernel& kh, QuotientPtr quotient) {
  const double res = kh.bi_equivariance_residual();
  if (res > kKernelTolerance) {
    throw ConstraintViolation("kernel is not bi-equivariant (max violation " + std::to_string(res) + ")",
                              res);
  }
  const auto& hr = kh.homrep();
  Matrix values(hr.rows(), quotient->size() * hr.cols());
  for (CosetIndex x = 0; x < quotient->size(); ++x) {
    values.middleCols(x * hr.cols(), hr.cols()) = kh.at(quotient->section(x));
  }
  return QuotientKernel(std::move(quotient), hr, std::move(values));
}

OneArgKernel from_quotient_kernel(const QuotientKernel& qk) {
  const double res = qk.constraint_residual();
  if (res > kKernelTolerance) {
    throw ConstraintViolation("quotient kernel violates left-equivariance (max violation " +
                                  std::to_string(res) + ")",
                              res);
  }
  const auto& q = qk.quotient();
  const auto& G = q.group();
  OneArgKernel out = OneArgKernel::zeros(qk.homrep());
  for (Element g = 0; g < G.order(); ++g) {
    out.at(g) = qk.at(q.coset_of(g)) * qk.homrep().rho()(q.fibre(g));
  }
  return out;
}

DoubleCosetKernel to_double_coset_kernel(const QuotientKernel& qk) {
  const auto& hr = qk.homrep();
  auto space = std::make_shared<const DoubleCosetSpace>(
      double_cosets(hr.sigma().domain_ptr(), qk.quotient().subgroup_ptr(), &qk.quotient()));
  Matrix values(hr.rows(), space->size() * hr.cols());
  for (CosetIndex x = 0; x < space->size(); ++x) {
    values.middleCols(x * hr.cols(), hr.cols()) =
        qk.at(qk.quotient().coset_of(space->representative(x)));
  }
  return DoubleCosetKernel(std::move(space), qk.quotient_ptr(), hr, std::move(values));
}

QuotientKernel from_double_coset_kernel(const DoubleCosetKernel& dk) {
  const auto& q = dk.quotient();
  const auto& G = q.group();
  const auto& hr = dk.homrep();
  const auto& space = dk.space();
  Matrix values(hr.rows(), q.size() * hr.cols());
  std::vector<bool> seen(q.size(), false);
  double worst = 0.0;
  for (CosetIndex x = 0; x < space.size(); ++x) {
    const CosetIndex base = q.coset_of(space.representative(x));
    for (Element h : space.left().elements()) {
      const CosetIndex y = q.act(h, base);
      const Element t = q.twist(base, h);
      const Matrix v = hr.sigma()(h) * dk.at(x) * hr.rho()(G.inv(t));
      auto slot = values.middleCols(y * hr.cols(), hr.cols());
      if (!seen[y]) {
        slot = v;
        seen[y] = true;
      } else {
        worst = std::max(worst, block_diff(slot, v));
      }
    }
  }
  if (worst > kKernelTolerance) {
    throw ConstraintViolation("double coset kernel propagates inconsistently (max violation " +
                                  std::to_string(worst) + ")",
                              worst);
  }
  return QuotientKernel(dk.quotient_ptr(), hr, std::move(values));
}

// ---------------------------------------------------------------------------
// Dimensions on the three domains

int solution_dimension_g(const HomRep& homrep) {
  return static_cast<int>(solve_steerable_basis(homrep).basis.size());
}

int solution_dimension_x(const HomRep& homrep, const Quotient& quotient) {
  if (quotient.subgroup().elements() != homrep.rho().domain().elements()) {
    throw DimensionMismatch("quotient must be by the domain of rho");
  }
  const int dd = homrep.dim();
  const auto& hgens = homrep.sigma().domain().generators();
  // H-orbits on G/H'; the system is block diagonal over them.
  std::vector<int> orbit(quotient.size(), -1);
  int total = 0;
  for (CosetIndex start = 0; start < quotient.size(); ++start) {
    if (orbit[start] >= 0) continue;
    std::vector<CosetIndex> members{start};
    orbit[start] = start;
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (Element h : homrep.sigma().domain().elements()) {
        const CosetIndex y = quotient.act(h, members[i]);
        if (orbit[y] < 0) {
          orbit[y] = start;
          members.push_back(y);
        }
      }
    }
    std::map<CosetIndex, int> local;
    for (std::size_t i = 0; i < members.size(); ++i) local[members[i]] = static_cast<int>(i);
    const auto m = static_cast<Eigen::Index>(members.size());
    Matrix a = Matrix::Zero(m * static_cast<Eigen::Index>(hgens.size()) * dd, m * dd);
    Eigen::Index row = 0;
    for (CosetIndex x : members) {
      for (Element h : hgens) {
        const Element t = quotient.twist(x, h);
        a.block(row, local[quotient.act(h, x)] * dd, dd, dd) += Matrix::Identity(dd, dd);
        a.block(row, local[x] * dd, dd, dd) -= action_matrix(homrep, h, t);
        row += dd;
      }
    }
    total += static_cast<int>(nullspace(a).cols());
  }
  return total;
}

int solution_dimension_d(const HomRep& homrep, const DoubleCosetSpace& space) {
  const auto& G = homrep.sigma().group();
  const int dd = homrep.dim();
  int total = 0;
  for (CosetIndex x = 0; x < space.size(); ++x) {
    const Element gamma = space.representative(x);
    const auto& gens = space.stabilizer(x).generators();
    // A trivial stabilizer imposes no constraint.
    Matrix a = Matrix::Zero(static_cast<Eigen::Index>(gens.size()) * dd, dd);
    for (std::size_t j = 0; j < gens.size(); ++j) {
      const Element inner = G.mul(G.inv(gamma), G.mul(gens[j], gamma));
      a.block(j * dd, 0, dd, dd) = Matrix::Identity(dd, dd) - action_matrix(homrep, gens[j], inner);
    }
    total += static_cast<int>(nullspace(a).cols());
  }
  return total;
}

}  // namespace homsteer
