#include <gtest/gtest.h>

#include "homsteer/errors.hpp"
#include "homsteer/kernels.hpp"
#include "test_support.hpp"

namespace homsteer {
namespace {

using testing::share;

// Averaging projector (T k)(g) = mean over (h, h') of sigma(h)^-1 k(h g h') rho(h')^-1,
// built column by column on the ambient |G| dd space.
Matrix averaging_projector(const HomRep& hr) {
  const auto& G = hr.sigma().group();
  const int rows = hr.rows(), cols = hr.cols(), dd = hr.dim();
  const int n = G.order() * dd;
  const auto& hs = hr.sigma().domain().elements();
  const auto& hps = hr.rho().domain().elements();
  Matrix t = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    Matrix k = Matrix::Zero(rows, G.order() * cols);
    // Ambient coordinate j: element j / dd, column-major entry j % dd.
    const int g0 = j / dd, e = j % dd;
    k(e % rows, g0 * cols + e / rows) = 1.0;
    Matrix out = Matrix::Zero(rows, G.order() * cols);
    for (Element g = 0; g < G.order(); ++g) {
      for (Element h : hs) {
        for (Element hp : hps) {
          const Element src = G.mul(G.mul(h, g), hp);
          out.middleCols(g * cols, cols) +=
              hr.sigma()(G.inv(h)) * k.middleCols(src * cols, cols) * hr.rho()(G.inv(hp));
        }
      }
    }
    out /= static_cast<double>(hs.size() * hps.size());
    for (Element g = 0; g < G.order(); ++g) {
      const Matrix blk = out.middleCols(g * cols, cols);
      t.col(j).segment(g * dd, dd) = Eigen::Map<const Vector>(blk.data(), dd);
    }
  }
  return t;
}

Vector flatten(const OneArgKernel& k) {
  const auto& G = k.group();
  const int dd = k.homrep().dim();
  Vector v(G.order() * dd);
  for (Element g = 0; g < G.order(); ++g) {
    const Matrix blk = k.at(g);
    v.segment(g * dd, dd) = Eigen::Map<const Vector>(blk.data(), dd);
  }
  return v;
}

TwoArgKernel random_left_constrained(const HomRep& hr, std::mt19937_64& rng) {
  const int n = hr.sigma().group().order();
  return left_project(TwoArgKernel(hr, random_uniform(n * hr.rows(), n * hr.cols(), rng)));
}

TEST(TwoArg, ApplyExamples) {
  auto d4 = make_dihedral(4);
  auto e = share(Subgroup::trivial(d4));
  auto r = share(trivial_rep(e, 2));
  HomRep hr(r, r);
  std::mt19937_64 rng(1);
  const FeatureMap f = random_feature(r, rng);
  EXPECT_EQ(apply_two_arg(TwoArgKernel::zeros(hr), f).values(), Matrix::Zero(2, 8));
  TwoArgKernel id(hr, Matrix::Identity(16, 16));
  EXPECT_EQ(apply_two_arg(id, f).values(), f.values());
}

TEST(TwoArg, LeftConstraintGivesMackeyOutputs) {
  for (const auto& cell : testing::kernel_cells()) {
    const HomRep hr = cell.homrep();
    std::mt19937_64 rng(17);
    const TwoArgKernel k = random_left_constrained(hr, rng);
    EXPECT_LE(k.left_residual(), 1e-12) << cell.name;
    const FeatureMap f = random_feature(cell.rho, rng);
    EXPECT_LE(apply_two_arg(k, f).mackey_residual(), 1e-10) << cell.name;
    // Raw, non-induced inputs too: the left constraint alone suffices.
    const FeatureMap raw(cell.rho, random_uniform(hr.cols(), cell.group->order(), rng));
    EXPECT_LE(apply_two_arg(k, raw).mackey_residual(), 1e-10) << cell.name;

    // Violation fixture: perturb by 1e-3 without re-projecting.
    if (cell.sigma->domain().order() > 1) {
      const int n = cell.group->order();
      TwoArgKernel bad(hr, k.values() + 1e-3 * random_uniform(n * hr.rows(), n * hr.cols(), rng));
      EXPECT_GE(bad.left_residual(), 1e-4) << cell.name;
      EXPECT_GE(apply_two_arg(bad, raw).mackey_residual(), 1e-4) << cell.name;
    }
  }
}

TEST(TwoArg, CanonicalRepresentative) {
  for (const auto& cell : testing::kernel_cells()) {
    const HomRep hr = cell.homrep();
    std::mt19937_64 rng(23);
    const TwoArgKernel k = random_left_constrained(hr, rng);
    const TwoArgKernel k0 = canonical_representative(k);
    EXPECT_LE(k0.right_residual(), 1e-12) << cell.name;
    EXPECT_LE(k0.left_residual(), 1e-12) << cell.name;
    EXPECT_LE(max_abs(canonical_representative(k0).values() - k0.values()), 1e-12) << cell.name;

    // Same operator on induced inputs.
    double worst = 0.0;
    for (int t = 0; t < 8; ++t) {
      const FeatureMap f = random_feature(cell.rho, rng);
      worst = std::max(worst, max_abs_diff(apply_two_arg(k, f), apply_two_arg(k0, f)));
    }
    EXPECT_LE(worst, 1e-12) << cell.name;

    // A second class member k + (eps - P eps) has the same canonical form.
    const TwoArgKernel eps = random_left_constrained(hr, rng);
    TwoArgKernel other(hr, k.values() + eps.values() - canonical_representative(eps).values());
    EXPECT_LE(max_abs(canonical_representative(other).values() - k0.values()), 1e-12) << cell.name;
    const FeatureMap f = random_feature(cell.rho, rng);
    EXPECT_LE(max_abs_diff(apply_two_arg(other, f), apply_two_arg(k, f)), 1e-12) << cell.name;
  }
}

TEST(TwoArg, CanonicalTrivialRhoAveragesFlip) {
  auto d4 = make_dihedral(4);
  auto flip = share(flip_subgroup(d4));
  auto triv = share(trivial_rep(flip, 1));
  HomRep hr(triv, triv);
  std::mt19937_64 rng(5);
  const TwoArgKernel k(hr, random_uniform(8, 8, rng));
  const TwoArgKernel k0 = canonical_representative(k);
  const Element t = flip->elements()[1];
  for (Element g = 0; g < 8; ++g)
    for (Element gp = 0; gp < 8; ++gp)
      EXPECT_NEAR(k0.values()(g, gp), 0.5 * (k.values()(g, gp) + k.values()(g, d4->mul(gp, t))), 1e-15);
}

TEST(Reduction, OneArgRoundTripAndErrors) {
  for (const auto& cell : testing::kernel_cells()) {
    const HomRep hr = cell.homrep();
    const auto basis = solve_steerable_basis(hr);
    std::mt19937_64 rng(31);
    const OneArgKernel kh = random_combination(hr, basis.basis, rng);
    const TwoArgKernel k = expand_to_two_arg(kh);
    // Expanded kernels are G-orbit constant and left-constrained.
    EXPECT_EQ(k.invariance_residual(), 0.0) << cell.name;
    EXPECT_LE(k.left_residual(), 1e-12) << cell.name;
    const OneArgKernel back = reduce_to_one_arg(k);
    EXPECT_EQ(back.values(), kh.values()) << cell.name;
    EXPECT_LE(back.bi_equivariance_residual(), 1e-10) << cell.name;
    EXPECT_EQ(expand_to_two_arg(back).values(), k.values());
  }
  auto s3 = make_symmetric(3);
  auto e = share(Subgroup::trivial(s3));
  auto r = share(trivial_rep(e, 1));
  HomRep hr(r, r);
  TwoArgKernel c(hr, Matrix::Constant(6, 6, 2.5));
  EXPECT_EQ(reduce_to_one_arg(c).values(), Matrix::Constant(1, 6, 2.5));
  std::mt19937_64 rng(2);
  TwoArgKernel noisy(hr, random_uniform(6, 6, rng));
  EXPECT_THROW(reduce_to_one_arg(noisy), ConstraintViolation);
}

TEST(Basis, DimensionsMatchOracle) {
  for (const auto& cell : testing::kernel_cells()) {
    const HomRep hr = cell.homrep();
    const auto solved = solve_steerable_basis(hr);
    const int dim = static_cast<int>(solved.basis.size());
    const Matrix t = averaging_projector(hr);
    EXPECT_LE(max_abs(t * t - t), 1e-12) << cell.name;
    EXPECT_EQ(dim, numerical_rank(t)) << cell.name;
    EXPECT_NEAR(t.trace(), dim, 1e-9) << cell.name;
    EXPECT_LE(solved.constraint_residual, 1e-10) << cell.name;
    if (dim == 0) continue;
    Matrix b(t.rows(), dim);
    for (int i = 0; i < dim; ++i) b.col(i) = flatten(solved.basis[i]);
    EXPECT_LE(max_abs(b.transpose() * b - Matrix::Identity(dim, dim)), 1e-12) << cell.name;
    EXPECT_LE(max_abs(t * b - b), 1e-10) << cell.name;
  }
}

TEST(Basis, Examples) {
  auto s3 = make_symmetric(3);
  auto t12 = testing::s3_transposition(s3);
  auto triv = share(trivial_rep(t12, 1));
  EXPECT_EQ(solve_steerable_basis(HomRep(triv, triv)).basis.size(), 2u);
  EXPECT_EQ(double_cosets(t12, t12).size(), 2);

  for (auto g : {make_dihedral(4), make_symmetric(4), make_cyclic(12)}) {
    auto e = share(Subgroup::trivial(g));
    HomRep hr(share(trivial_rep(e, 2)), share(trivial_rep(e, 3)));
    EXPECT_EQ(solve_steerable_basis(hr).basis.size(), static_cast<std::size_t>(g->order() * 6));
  }
  // Trivial 1-dim reps: one kernel per double coset.
  for (const auto& cell : testing::small_cells()) {
    auto r = share(trivial_rep(cell.subgroup, 1));
    EXPECT_EQ(static_cast<int>(solve_steerable_basis(HomRep(r, r)).basis.size()),
              double_cosets(cell.subgroup, cell.subgroup).size())
        << cell.name;
  }
}

TEST(Basis, Deterministic) {
  const auto cell = testing::kernel_cells()[4];
  const auto a = solve_steerable_basis(cell.homrep());
  const auto b = solve_steerable_basis(cell.homrep());
  ASSERT_EQ(a.basis.size(), b.basis.size());
  for (std::size_t i = 0; i < a.basis.size(); ++i) EXPECT_EQ(a.basis[i].values(), b.basis[i].values());
}

TEST(GCNN, ExamplesAndEquivariance) {
  auto d4 = make_dihedral(4);
  auto e = share(Subgroup::trivial(d4));
  auto r = share(trivial_rep(e, 1));
  HomRep hr(r, r);
  std::mt19937_64 rng(3);
  const FeatureMap f = random_feature(r, rng);
  EXPECT_EQ(gcnn_apply(OneArgKernel::zeros(hr), f).values(), Matrix::Zero(1, 8));
  OneArgKernel delta = OneArgKernel::zeros(hr);
  delta.at(d4->identity()) = Matrix::Identity(1, 1);
  EXPECT_EQ(gcnn_apply(delta, f).values(), f.values());

  for (const auto& cell : testing::kernel_cells()) {
    const HomRep chr = cell.homrep();
    const auto& G = *cell.group;
    const auto solved = solve_steerable_basis(chr);
    for (const auto& kh : solved.basis) {
      std::mt19937_64 frng(41);
      const FeatureMap x = random_feature(cell.rho, frng);
      const FeatureMap y = gcnn_apply(kh, x);
      EXPECT_LE(y.mackey_residual(), 1e-10) << cell.name;
      double worst = 0.0;
      for (Element k = 0; k < G.order(); ++k) {
        worst = std::max(worst, max_abs_diff(g_action(k, y), gcnn_apply(kh, g_action(k, x))));
      }
      EXPECT_LE(worst, 1e-11) << cell.name;
      EXPECT_LE(max_abs_diff(y, apply_two_arg(expand_to_two_arg(kh), x)), 1e-12) << cell.name;
    }
  }
}

TEST(DomainReduction, RoundTripsAndDimensions) {
  for (const auto& cell : testing::kernel_cells()) {
    const HomRep hr = cell.homrep();
    auto q = share(left_cosets(cell.rho->domain_ptr()));
    const auto solved = solve_steerable_basis(hr);
    std::mt19937_64 rng(59);
    const OneArgKernel kh = random_combination(hr, solved.basis, rng);
    const QuotientKernel qk = to_quotient_kernel(kh, q);
    EXPECT_LE(qk.constraint_residual(), 1e-10) << cell.name;
    EXPECT_LE(max_abs(from_quotient_kernel(qk).values() - kh.values()), 1e-12) << cell.name;
    const DoubleCosetKernel dk = to_double_coset_kernel(qk);
    EXPECT_LE(dk.stabilizer_residual(), 1e-10) << cell.name;
    EXPECT_LE(max_abs(from_double_coset_kernel(dk).values() - qk.values()), 1e-12) << cell.name;

    const int dg = static_cast<int>(solved.basis.size());
    EXPECT_EQ(solution_dimension_g(hr), dg) << cell.name;
    EXPECT_EQ(solution_dimension_x(hr, *q), dg) << cell.name;
    EXPECT_EQ(solution_dimension_d(hr, dk.space()), dg) << cell.name;
  }
}

TEST(DomainReduction, TrivialSubgroupExamples) {
  auto d4 = make_dihedral(4);
  auto flip = share(flip_subgroup(d4));
  auto e = share(Subgroup::trivial(d4));
  // H' = {e}: quotient kernel equals kappa_hat verbatim.
  HomRep hr(share(sign_rep_z2(flip)), share(trivial_rep(e, 1)));
  std::mt19937_64 rng(8);
  const auto solved = solve_steerable_basis(hr);
  const OneArgKernel kh = random_combination(hr, solved.basis, rng);
  auto qe = share(left_cosets(e));
  EXPECT_EQ(to_quotient_kernel(kh, qe).values(), kh.values());

  // H = {e}: double cosets are the cosets of G/H', values unchanged.
  HomRep hr2(share(trivial_rep(e, 1)), share(sign_rep_z2(flip)));
  const auto solved2 = solve_steerable_basis(hr2);
  const OneArgKernel kh2 = random_combination(hr2, solved2.basis, rng);
  auto qf = share(left_cosets(flip));
  const QuotientKernel qk2 = to_quotient_kernel(kh2, qf);
  const DoubleCosetKernel dk2 = to_double_coset_kernel(qk2);
  EXPECT_EQ(dk2.space().size(), qf->size());
  for (CosetIndex x = 0; x < dk2.space().size(); ++x) {
    EXPECT_EQ(Matrix(dk2.at(x)), Matrix(qk2.at(qf->coset_of(dk2.space().representative(x)))));
  }
}

TEST(DomainReduction, RejectsViolations) {
  const auto cell = testing::kernel_cells()[0];
  const HomRep hr = cell.homrep();
  std::mt19937_64 rng(12);
  OneArgKernel bad(hr, random_uniform(hr.rows(), cell.group->order() * hr.cols(), rng));
  auto q = share(left_cosets(cell.rho->domain_ptr()));
  EXPECT_THROW(to_quotient_kernel(bad, q), ConstraintViolation);

  // Class values violating a stabilizer constraint cannot be propagated.
  // Z8xZ2 with sigma = sign, rho = trivial forces the identity class to zero.
  const auto sd = testing::kernel_cells()[9];
  const HomRep sdr = sd.homrep();
  auto sq = share(left_cosets(sd.rho->domain_ptr()));
  const QuotientKernel qk = to_quotient_kernel(OneArgKernel::zeros(sdr), sq);
  const DoubleCosetKernel dk = to_double_coset_kernel(qk);
  Matrix values = dk.values();
  values.setConstant(1.0);
  DoubleCosetKernel broken(dk.space_ptr(), dk.quotient_ptr(), sdr, values);
  EXPECT_GT(broken.stabilizer_residual(), 1e-4);
  EXPECT_THROW(from_double_coset_kernel(broken), ConstraintViolation);
}

}  // namespace
}  // namespace homsteer
