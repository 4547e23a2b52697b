#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "homsteer/errors.hpp"
#include "homsteer/representation.hpp"
#include "test_support.hpp"

namespace homsteer {
namespace {

using testing::share;

TEST(Representations, TrivialIsIdentity) {
  auto s4 = make_symmetric(4);
  auto rep = trivial_rep(share(Subgroup::whole(s4)), 1);
  for (Element g = 0; g < s4->order(); ++g) EXPECT_EQ(rep(g)(0, 0), 1.0);
  EXPECT_EQ(rep.homomorphism_residual(), 0.0);
  EXPECT_TRUE(rep.is_trivial());
  EXPECT_THROW(trivial_rep(share(Subgroup::whole(s4)), 0), InvalidRepresentation);
}

TEST(Representations, RegularRep) {
  auto z2 = make_cyclic(2);
  auto r2 = regular_rep(share(Subgroup::whole(z2)));
  Matrix swap(2, 2);
  swap << 0, 1, 1, 0;
  EXPECT_EQ(r2(1), swap);

  auto s3 = make_symmetric(3);
  auto r = regular_rep(share(Subgroup::whole(s3)));
  for (Element g = 0; g < 6; ++g) EXPECT_EQ(r(g).trace(), g == s3->identity() ? 6.0 : 0.0);
  // Exhaustive pair check, exact since entries are 0/1.
  for (Element a = 0; a < 6; ++a)
    for (Element b = 0; b < 6; ++b) EXPECT_EQ(r(s3->mul(a, b)), r(a) * r(b));

  EXPECT_THROW(regular_rep(share(Subgroup::whole(make_cyclic(65)))), InvalidOrder);
}

TEST(Representations, SignRep) {
  auto d4 = make_dihedral(4);
  auto flip = share(flip_subgroup(d4));
  auto s = sign_rep_z2(flip);
  EXPECT_EQ(s(d4->identity())(0, 0), 1.0);
  EXPECT_EQ(s(flip->elements()[1])(0, 0), -1.0);
  EXPECT_TRUE(s.unitary());
  EXPECT_THROW(sign_rep_z2(share(Subgroup::whole(d4))), InvalidRepresentation);
  // Lookups outside the domain are rejected.
  EXPECT_THROW(s(1), InvalidRepresentation);
}

TEST(Representations, RotationBlocks) {
  auto z4 = make_cyclic(4);
  auto r4 = rotation_block_rep(share(Subgroup::whole(z4)), {1});
  Matrix quarter(2, 2);
  quarter << 0, -1, 1, 0;
  EXPECT_EQ(r4(1), quarter);

  auto z8 = make_cyclic(8);
  auto zero = rotation_block_rep(share(Subgroup::whole(z8)), {0});
  for (Element x = 0; x < 8; ++x) EXPECT_EQ(zero(x), Matrix::Identity(2, 2));

  auto r = rotation_block_rep(share(Subgroup::whole(z8)), {1, 3});
  EXPECT_EQ(r.dim(), 4);
  double worst = 0.0;
  for (Element x = 0; x < 8; ++x) {
    for (Element y = 0; y < 8; ++y) {
      const Matrix rel = r(x).transpose() * r(y);
      worst = std::max(worst, max_abs(rel - r(z8->mul(y, z8->inv(x)))));
      worst = std::max(worst, max_abs(r(x) * r(y) - r(z8->mul(x, y))));
    }
  }
  EXPECT_LE(worst, 1e-12);
  // Independent oracle: the angle formula evaluated directly.
  for (Element x = 0; x < 8; ++x) {
    const double a = 2.0 * std::numbers::pi * 3 * x / 8;
    EXPECT_NEAR(r(x)(2, 2), std::cos(a), 1e-15);
    EXPECT_NEAR(r(x)(3, 2), std::sin(a), 1e-15);
  }
  EXPECT_THROW(rotation_block_rep(share(Subgroup::whole(make_dihedral(4))), {1}), UnsupportedGroup);
}

TEST(Representations, FromMatricesValidates) {
  auto z2 = make_cyclic(2);
  auto whole = share(Subgroup::whole(z2));
  Matrix bad = Matrix::Constant(1, 1, 2.0);
  EXPECT_THROW(Representation::from_matrices(whole, {Matrix::Identity(1, 1), bad}),
               InvalidRepresentation);
  EXPECT_THROW(Representation::from_matrices(whole, {Matrix::Identity(1, 1)}), InvalidRepresentation);
}

TEST(HomReps, TrivialAndIdentityActions) {
  auto s3 = make_symmetric(3);
  auto h = testing::s3_transposition(s3);
  auto triv = share(trivial_rep(h, 2));
  auto hr = hom_rep(triv, share(trivial_rep(h, 3)));
  std::mt19937_64 rng(3);
  const Matrix L = random_uniform(2, 3, rng);
  for (Element a : h->elements())
    for (Element b : h->elements()) EXPECT_EQ(hr.act(a, b, L), L);

  auto sign = share(sign_rep_z2(h));
  auto hs = hom_rep(sign, sign);
  const Element t = h->elements()[1];
  const Matrix one = Matrix::Constant(1, 1, 0.7);
  EXPECT_EQ(hs.act(t, t, one), one);
  EXPECT_EQ(hs.act(s3->identity(), s3->identity(), one), one);
}

TEST(HomReps, HomomorphismOfProductGroup) {
  auto s3 = make_symmetric(3);
  auto h = testing::s3_transposition(s3);
  auto sign = share(sign_rep_z2(h));
  auto hr = hom_rep(sign, sign);
  EXPECT_EQ(hr.homomorphism_residual(), 0.0);

  // Non-scalar case on the order-4 subgroup {0,2,4,6} of Z8.
  auto z8 = make_cyclic(8);
  auto sub = share(Subgroup::generated(z8, {2}));
  auto rot = share(rotation_block_rep(sub, {1}));
  auto rot2 = share(rotation_block_rep(sub, {2, 1}));
  auto hr2 = hom_rep(rot, rot2);
  std::mt19937_64 rng(11);
  const Matrix L = random_uniform(2, 4, rng);
  double worst = 0.0;
  for (Element a : sub->elements()) {
    for (Element b : sub->elements()) {
      for (Element c : sub->elements()) {
        for (Element d : sub->elements()) {
          const Matrix lhs = hr2.act(z8->mul(a, c), z8->mul(b, d), L);
          const Matrix rhs = hr2.act(a, b, hr2.act(c, d, L));
          worst = std::max(worst, max_abs(lhs - rhs));
        }
      }
      // vec form agrees with the direct action.
      const Matrix direct = hr2.act(a, b, L);
      const Eigen::Map<const Vector> vec_l(L.data(), L.size());
      const Vector via_matrix = hr2.matrix(a, b) * vec_l;
      worst = std::max(worst, max_abs(Eigen::Map<const Vector>(direct.data(), direct.size()) - via_matrix));
    }
  }
  EXPECT_LE(worst, 1e-12);
}

}  // namespace
}  // namespace homsteer
