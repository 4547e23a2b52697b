#include <map>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "homsteer/errors.hpp"
#include "homsteer/group.hpp"
#include "test_support.hpp"

namespace homsteer {
namespace {

using testing::perm_index;
using testing::share;

TEST(GroupConstructors, CyclicExamples) {
  auto z1 = make_cyclic(1);
  EXPECT_EQ(z1->order(), 1);
  EXPECT_EQ(z1->mul(0, 0), 0);

  auto z4 = make_cyclic(4);
  EXPECT_EQ(z4->mul(2, 3), 1);
  EXPECT_EQ(z4->identity(), 0);

  auto z5 = make_cyclic(5);
  EXPECT_EQ(z5->inv(3), 2);
}

TEST(GroupConstructors, ZeroOrderRejected) {
  EXPECT_THROW(make_cyclic(0), InvalidOrder);
  EXPECT_THROW(make_dihedral(0), InvalidOrder);
  EXPECT_THROW(make_semidirect(0, true), InvalidOrder);
  EXPECT_THROW(make_symmetric(0), InvalidOrder);
  EXPECT_THROW(make_symmetric(8), InvalidOrder);
  EXPECT_THROW(make_cyclic(kMaxGroupOrder + 1), InvalidOrder);
}

TEST(GroupConstructors, DihedralExamples) {
  auto d1 = make_dihedral(1);
  EXPECT_EQ(d1->order(), 2);
  EXPECT_TRUE(d1->is_abelian());

  auto d4 = make_dihedral(4);
  const Element r1 = d4->find_by_label("(1,0)");
  const Element f1 = d4->find_by_label("(1,1)");
  EXPECT_EQ(d4->label(d4->mul(r1, f1)), "(2,1)");

  // Center of D3 by brute force over all 6 elements.
  auto d3 = make_dihedral(3);
  int central = 0;
  for (Element a = 0; a < 6; ++a) {
    bool ok = true;
    for (Element b = 0; b < 6; ++b) ok = ok && d3->mul(a, b) == d3->mul(b, a);
    central += ok;
  }
  EXPECT_EQ(central, 1);
  EXPECT_EQ(d3->center().size(), 1u);
}

TEST(GroupConstructors, SymmetricComposition) {
  auto s1 = make_symmetric(1);
  EXPECT_EQ(s1->order(), 1);

  auto s3 = make_symmetric(3);
  EXPECT_EQ(s3->order(), 6);
  EXPECT_EQ(s3->identity(), 0);
  const std::vector<int> t12{1, 0, 2};
  const std::vector<int> t13{2, 1, 0};
  // Hand composition (t o p)(i) = t(p(i)).
  std::vector<int> composed(3);
  for (int i = 0; i < 3; ++i) composed[i] = t12[t13[i]];
  EXPECT_EQ(composed, (std::vector<int>{2, 0, 1}));
  const Element c = s3->mul(perm_index(*s3, t12), perm_index(*s3, t13));
  EXPECT_EQ(s3->permutations()[c], composed);
  // A 3-cycle has no fixed point and order 3.
  EXPECT_NE(c, s3->identity());
  EXPECT_EQ(s3->mul(c, s3->mul(c, c)), s3->identity());
}

TEST(GroupConstructors, SymmetricInverseOfFourCycle) {
  auto s4 = make_symmetric(4);
  const Element cycle = perm_index(*s4, {1, 2, 3, 0});
  Element brute = -1;
  for (Element g = 0; g < s4->order(); ++g) {
    if (s4->mul(cycle, g) == s4->identity()) brute = g;
  }
  EXPECT_EQ(s4->permutations()[brute], (std::vector<int>{3, 0, 1, 2}));
  EXPECT_EQ(s4->inv(cycle), brute);
}

TEST(GroupConstructors, Semidirect) {
  auto sd = make_semidirect(4, true);
  EXPECT_EQ(sd->label(sd->mul(sd->find_by_label("(1,1)"), sd->find_by_label("(1,0)"))), "(0,1)");

  auto direct = make_semidirect(3, false);
  bool commutes = true;
  for (Element a = 0; a < direct->order(); ++a)
    for (Element b = 0; b < direct->order(); ++b)
      commutes = commutes && direct->mul(a, b) == direct->mul(b, a);
  EXPECT_TRUE(commutes);

  // With the section s(x) = (x, 0), the fibre of (t, h) is h.
  for (int n : {3, 5, 8}) {
    auto g = make_semidirect(n, true);
    auto q = left_cosets(share(flip_subgroup(g)));
    ASSERT_TRUE(g->affine().has_value());
    for (Element e = 0; e < g->order(); ++e) {
      EXPECT_EQ(q.fibre(e), g->affine()->linear[e]);
      EXPECT_EQ(q.coset_of(e), g->affine()->projection[e]);
    }
    for (int x = 0; x < n; ++x) EXPECT_EQ(q.section(x), g->affine()->section[x]);
  }
}

TEST(GroupConstructors, LawsHoldForDefaultMatrix) {
  for (auto g : {make_cyclic(8), make_cyclic(12), make_dihedral(4), make_symmetric(3),
                 make_symmetric(4), make_semidirect(8, true), make_symmetric(5)}) {
    EXPECT_EQ(g->count_law_violations(), 0);
  }
}

TEST(GroupConstructors, FromTableValidates) {
  // Z2 as a table.
  EXPECT_NO_THROW(GroupTable::from_table({{0, 1}, {1, 0}}));
  // No identity.
  EXPECT_THROW(GroupTable::from_table({{0, 0}, {1, 1}}), InvalidOrder);
  // Not associative: a Latin square with identity 0 that is not a group.
  const std::vector<std::vector<Element>> loop{{0, 1, 2, 3, 4},
                                              {1, 0, 3, 4, 2},
                                              {2, 4, 0, 1, 3},
                                              {3, 2, 4, 0, 1},
                                              {4, 3, 1, 2, 0}};
  EXPECT_THROW(GroupTable::from_table(loop), InvalidOrder);
}

TEST(Subgroups, ValidationAndGenerators) {
  auto z4 = make_cyclic(4);
  EXPECT_THROW(Subgroup::from_elements(z4, {0, 1}), InvalidSubgroup);
  EXPECT_THROW(Subgroup::from_elements(z4, {2}), InvalidSubgroup);
  auto h = Subgroup::from_elements(z4, {2, 0});
  EXPECT_EQ(h.elements(), (std::vector<Element>{0, 2}));
  EXPECT_EQ(h.generators(), (std::vector<Element>{2}));

  auto s4 = make_symmetric(4);
  auto stab = point_stabilizer(s4, 0);
  EXPECT_EQ(stab.order(), 6);
  // Generators regenerate the subgroup.
  auto regen = Subgroup::generated(s4, stab.generators());
  EXPECT_EQ(regen.elements(), stab.elements());
}

TEST(Quotients, Examples) {
  auto z4 = make_cyclic(4);
  auto q = left_cosets(share(Subgroup::from_elements(z4, {0, 2})));
  ASSERT_EQ(q.size(), 2);
  EXPECT_EQ(q.cosets()[0], (std::vector<Element>{0, 2}));
  EXPECT_EQ(q.cosets()[1], (std::vector<Element>{1, 3}));

  auto d4 = make_dihedral(4);
  auto trivial = left_cosets(share(Subgroup::trivial(d4)));
  EXPECT_EQ(trivial.size(), d4->order());
  for (CosetIndex x = 0; x < trivial.size(); ++x) EXPECT_EQ(trivial.section(x), x);

  // S3 / <(12)> by brute-force partition into {g, g(12)}.
  auto s3 = make_symmetric(3);
  auto h = testing::s3_transposition(s3);
  auto q3 = left_cosets(h);
  EXPECT_EQ(q3.size(), 3);
  std::set<std::set<Element>> brute;
  for (Element g = 0; g < 6; ++g) {
    std::set<Element> c;
    for (Element x : h->elements()) c.insert(s3->mul(g, x));
    brute.insert(c);
  }
  std::set<std::set<Element>> got;
  for (const auto& c : q3.cosets()) {
    EXPECT_EQ(c.size(), 2u);
    got.insert(std::set<Element>(c.begin(), c.end()));
  }
  EXPECT_EQ(got, brute);
}

TEST(Quotients, PartitionAndSectionInvariants) {
  for (const auto& cell : testing::small_cells()) {
    auto q = left_cosets(cell.subgroup);
    const auto& G = *cell.group;
    EXPECT_EQ(q.size() * cell.subgroup->order(), G.order()) << cell.name;
    std::vector<int> hits(G.order(), 0);
    for (const auto& c : q.cosets()) {
      EXPECT_EQ(static_cast<int>(c.size()), cell.subgroup->order());
      for (Element g : c) ++hits[g];
    }
    for (int h : hits) EXPECT_EQ(h, 1);
    for (CosetIndex x = 0; x < q.size(); ++x) EXPECT_EQ(q.coset_of(q.section(x)), x);
    EXPECT_EQ(q.section(q.coset_of(G.identity())), G.identity());
  }
}

TEST(Quotients, SectionHints) {
  auto z4 = make_cyclic(4);
  auto h = share(Subgroup::from_elements(z4, {0, 2}));
  EXPECT_NO_THROW(left_cosets(h, std::vector<Element>{0, 3}));
  EXPECT_EQ(left_cosets(h, std::vector<Element>{0, 3}).section(1), 3);
  EXPECT_THROW(left_cosets(h, std::vector<Element>{0, 2}), InvalidSection);
  EXPECT_THROW(left_cosets(h, std::vector<Element>{2, 1}), InvalidSection);
  EXPECT_THROW(left_cosets(h, std::vector<Element>{0}), InvalidSection);
}

TEST(Twist, Examples) {
  auto d4 = make_dihedral(4);
  auto flip = share(flip_subgroup(d4));
  auto q = left_cosets(flip);
  for (CosetIndex x = 0; x < q.size(); ++x) EXPECT_EQ(q.twist(x, d4->identity()), d4->identity());
  const CosetIndex root = q.coset_of(d4->identity());
  for (Element h : flip->elements()) EXPECT_EQ(q.twist(root, h), h);
}

TEST(Twist, DefiningPropertyAndCocycle) {
  for (const auto& cell : testing::small_cells()) {
    const auto& G = *cell.group;
    if (G.order() > 48) continue;
    auto q = left_cosets(cell.subgroup);
    std::int64_t bad = 0;
    for (CosetIndex x = 0; x < q.size(); ++x) {
      for (Element g1 = 0; g1 < G.order(); ++g1) {
        const Element t1 = q.twist(x, g1);
        // g s(x) = s(g |> x) h(x, g) with h in H.
        EXPECT_TRUE(cell.subgroup->contains(t1));
        EXPECT_EQ(G.mul(g1, q.section(x)), G.mul(q.section(q.act(g1, x)), t1));
        for (Element g2 = 0; g2 < G.order(); ++g2) {
          const Element lhs = q.twist(x, G.mul(g2, g1));
          const Element rhs = G.mul(q.twist(q.act(g1, x), g2), t1);
          bad += lhs != rhs;
        }
      }
    }
    EXPECT_EQ(bad, 0) << cell.name;
  }
}

TEST(DoubleCosets, Examples) {
  auto d4 = make_dihedral(4);
  auto e = share(Subgroup::trivial(d4));
  auto all = share(Subgroup::whole(d4));
  EXPECT_EQ(double_cosets(e, e).size(), d4->order());
  EXPECT_EQ(double_cosets(all, all).size(), 1);

  auto s3 = make_symmetric(3);
  auto h = testing::s3_transposition(s3);
  auto d = double_cosets(h, h);
  ASSERT_EQ(d.size(), 2);
  std::multiset<std::size_t> sizes;
  for (const auto& c : d.classes()) sizes.insert(c.size());
  EXPECT_EQ(sizes, (std::multiset<std::size_t>{2, 4}));
}

TEST(DoubleCosets, PartitionAndStabilizers) {
  for (const auto& cell : testing::small_cells()) {
    auto q = left_cosets(cell.subgroup);
    for (const Quotient* align : std::vector<const Quotient*>{nullptr, &q}) {
      auto d = double_cosets(cell.subgroup, cell.subgroup, align);
      std::size_t total = 0;
      for (CosetIndex x = 0; x < d.size(); ++x) {
        total += d.classes()[x].size();
        EXPECT_EQ(d.class_of(d.representative(x)), x);
        const auto& stab = d.stabilizer(x);
        for (Element h : stab.elements()) EXPECT_TRUE(cell.subgroup->contains(h));
        if (align) EXPECT_EQ(q.section(q.coset_of(d.representative(x))), d.representative(x));
      }
      EXPECT_EQ(static_cast<int>(total), cell.group->order()) << cell.name;
    }
  }
}

TEST(HaarSum, Examples) {
  auto d4 = make_dihedral(4);
  const auto zero = haar_sum(*d4, [](Element) { return 0.0; }, false);
  EXPECT_EQ(zero, 0.0);
  const auto mean = haar_sum(*d4, [](Element) { return 2.5; }, true);
  EXPECT_DOUBLE_EQ(mean, 2.5);
}

TEST(HaarSum, QuotientIntegralFormulaExactOnIntegers) {
  auto d4 = make_dihedral(4);
  auto q = left_cosets(share(flip_subgroup(d4)));
  for (long long seed = 1; seed < 20; ++seed) {
    auto f = [&](Element g) { return (seed * 7919LL * (g + 3)) % 1009 - 500; };
    EXPECT_EQ(haar_sum(*d4, f, false), quotient_sum(q, f));
  }
  // Alternative section: s(x) = max element of each coset, keeping s(eH) = e.
  std::vector<Element> hint;
  for (const auto& c : q.cosets()) hint.push_back(c.back());
  hint[q.coset_of(d4->identity())] = d4->identity();
  auto q2 = left_cosets(share(flip_subgroup(d4)), hint);
  auto f = [](Element g) { return static_cast<long long>(g * g - 3 * g + 1); };
  EXPECT_EQ(haar_sum(*d4, f, false), quotient_sum(q2, f));
}

}  // namespace
}  // namespace homsteer
