#include "homsteer/group.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>

#include "homsteer/errors.hpp"

namespace homsteer {

std::string to_string(GroupFamily family) {
  switch (family) {
    case GroupFamily::cyclic: return "cyclic";
    case GroupFamily::dihedral: return "dihedral";
    case GroupFamily::symmetric: return "symmetric";
    case GroupFamily::semidirect: return "semidirect";
    case GroupFamily::custom: return "custom";
  }
  return "custom";
}

struct GroupBuilder {
  static GroupTable build(int order, const std::function<Element(Element, Element)>& op,
                          std::vector<std::string> labels) {
    if (order < 1 || order > kMaxGroupOrder) {
      throw InvalidOrder("group order " + std::to_string(order) +
                         " outside [1, " + std::to_string(kMaxGroupOrder) + "]");
    }
    GroupTable t;
    t.order_ = order;
    t.mult_.resize(static_cast<std::size_t>(order) * order);
    for (Element a = 0; a < order; ++a) {
      for (Element b = 0; b < order; ++b) {
        const Element c = op(a, b);
        if (c < 0 || c >= order) throw InvalidOrder("product outside the table");
        t.mult_[static_cast<std::size_t>(a) * order + b] = c;
      }
    }
    t.identity_ = -1;
    for (Element e = 0; e < order && t.identity_ < 0; ++e) {
      bool ok = true;
      for (Element g = 0; g < order && ok; ++g) {
        ok = t.mul(e, g) == g && t.mul(g, e) == g;
      }
      if (ok) t.identity_ = e;
    }
    if (t.identity_ < 0) throw InvalidOrder("table has no identity element");
    t.inv_.assign(order, -1);
    for (Element g = 0; g < order; ++g) {
      for (Element h = 0; h < order; ++h) {
        if (t.mul(g, h) == t.identity_) {
          t.inv_[g] = h;
          break;
        }
      }
      if (t.inv_[g] < 0) throw InvalidOrder("element without inverse");
    }
    if (labels.empty()) {
      labels.resize(order);
      for (Element g = 0; g < order; ++g) labels[g] = std::to_string(g);
    }
    if (static_cast<int>(labels.size()) != order) {
      throw InvalidOrder("label count does not match order");
    }
    t.labels_ = std::move(labels);
    t.validate();
    return t;
  }

  static void tag(GroupTable& t, GroupFamily family, int n, bool flip, bool affine_layout) {
    t.family_ = family;
    t.family_n_ = n;
    t.family_flip_ = flip;
    if (affine_layout) t.affine_ = affine(t, n);
  }

  static void set_permutations(GroupTable& t, std::vector<std::vector<int>> perms) {
    t.permutations_ = std::move(perms);
  }

  static AffineStructure affine(const GroupTable& t, int n) {
    // Index layout shared by all affine families: index = k * n + t.
    AffineStructure a;
    a.n = n;
    a.section.resize(n);
    std::iota(a.section.begin(), a.section.end(), 0);
    a.projection.resize(t.order());
    a.linear.resize(t.order());
    for (Element g = 0; g < t.order(); ++g) {
      a.projection[g] = g % n;
      a.linear[g] = (g / n) * n;
    }
    return a;
  }
};

GroupTable GroupTable::from_table(std::vector<std::vector<Element>> mult,
                                  std::vector<std::string> labels) {
  const int order = static_cast<int>(mult.size());
  for (const auto& row : mult) {
    if (static_cast<int>(row.size()) != order) throw InvalidOrder("table is not square");
  }
  return GroupBuilder::build(
      order, [&](Element a, Element b) { return mult[a][b]; }, std::move(labels));
}

void GroupTable::validate() const {
  for (Element g = 0; g < order_; ++g) {
    if (mul(g, inv_[g]) != identity_ || mul(inv_[g], g) != identity_) {
      throw InvalidOrder("inverse law fails");
    }
  }
  auto assoc = [&](Element a, Element b, Element c) {
    return mul(mul(a, b), c) == mul(a, mul(b, c));
  };
  if (order_ <= kFullAssociativityCheckOrder) {
    for (Element a = 0; a < order_; ++a)
      for (Element b = 0; b < order_; ++b)
        for (Element c = 0; c < order_; ++c)
          if (!assoc(a, b, c)) throw InvalidOrder("associativity fails");
  } else {
    std::mt19937_64 rng(0x5eedULL + static_cast<unsigned>(order_));
    std::uniform_int_distribution<Element> pick(0, order_ - 1);
    for (int i = 0; i < 200000; ++i) {
      if (!assoc(pick(rng), pick(rng), pick(rng))) throw InvalidOrder("associativity fails");
    }
  }
}

std::int64_t GroupTable::count_law_violations() const {
  std::int64_t bad = 0;
  for (Element g = 0; g < order_; ++g) {
    if (mul(identity_, g) != g || mul(g, identity_) != g) ++bad;
    if (mul(g, inv_[g]) != identity_ || mul(inv_[g], g) != identity_) ++bad;
  }
  for (Element a = 0; a < order_; ++a)
    for (Element b = 0; b < order_; ++b) {
      const Element ab = mul(a, b);
      for (Element c = 0; c < order_; ++c)
        if (mul(ab, c) != mul(a, mul(b, c))) ++bad;
    }
  return bad;
}

bool GroupTable::is_abelian() const {
  for (Element a = 0; a < order_; ++a)
    for (Element b = a + 1; b < order_; ++b)
      if (mul(a, b) != mul(b, a)) return false;
  return true;
}

std::vector<Element> GroupTable::center() const {
  std::vector<Element> out;
  for (Element a = 0; a < order_; ++a) {
    bool central = true;
    for (Element b = 0; b < order_ && central; ++b) central = mul(a, b) == mul(b, a);
    if (central) out.push_back(a);
  }
  return out;
}

Element GroupTable::find_by_label(const std::string& label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw Error("no element labelled '" + label + "'");
  return static_cast<Element>(it - labels_.begin());
}

namespace {

void require_positive(int n, int max_n, const char* what) {
  if (n < 1 || n > max_n) {
    throw InvalidOrder(std::string(what) + ": n=" + std::to_string(n) +
                       " outside [1, " + std::to_string(max_n) + "]");
  }
}

int mod(int a, int n) { return ((a % n) + n) % n; }

}  // namespace

GroupPtr make_cyclic(int n) {
  require_positive(n, kMaxGroupOrder, "cyclic");
  auto t = GroupBuilder::build(
      n, [n](Element a, Element b) { return (a + b) % n; }, {});
  GroupBuilder::tag(t, GroupFamily::cyclic, n, false, true);
  return std::make_shared<const GroupTable>(std::move(t));
}

namespace {

GroupPtr make_affine_z2(int n, bool flip, GroupFamily family) {
  std::vector<std::string> labels(2 * n);
  for (int b = 0; b < 2; ++b)
    for (int k = 0; k < n; ++k)
      labels[b * n + k] = "(" + std::to_string(k) + "," + std::to_string(b) + ")";
  auto op = [n, flip](Element x, Element y) {
    const int k1 = x % n, b1 = x / n, k2 = y % n, b2 = y / n;
    const int sign = (flip && b1 == 1) ? -1 : 1;
    return (b1 ^ b2) * n + mod(k1 + sign * k2, n);
  };
  auto t = GroupBuilder::build(2 * n, op, std::move(labels));
  GroupBuilder::tag(t, family, n, flip, true);
  return std::make_shared<const GroupTable>(std::move(t));
}

}  // namespace

GroupPtr make_dihedral(int n) {
  require_positive(n, kMaxGroupOrder / 2, "dihedral");
  return make_affine_z2(n, true, GroupFamily::dihedral);
}

GroupPtr make_semidirect(int n, bool flip) {
  require_positive(n, kMaxGroupOrder / 2, "semidirect");
  return make_affine_z2(n, flip, GroupFamily::semidirect);
}

GroupPtr make_symmetric(int n) {
  require_positive(n, 7, "symmetric");
  std::vector<std::vector<int>> perms;
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  do {
    perms.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  // Lexicographic rank of a one-line array (Lehmer code).
  std::vector<int> factorial(n + 1, 1);
  for (int i = 1; i <= n; ++i) factorial[i] = factorial[i - 1] * i;
  auto rank = [&](const std::vector<int>& q) {
    Element r = 0;
    for (int i = 0; i < n; ++i) {
      int smaller = 0;
      for (int j = i + 1; j < n; ++j) smaller += q[j] < q[i];
      r += smaller * factorial[n - 1 - i];
    }
    return r;
  };
  const int order = static_cast<int>(perms.size());
  std::vector<std::vector<Element>> table(order, std::vector<Element>(order));
  std::vector<int> c(n);
  for (Element a = 0; a < order; ++a) {
    for (Element b = 0; b < order; ++b) {
      for (int i = 0; i < n; ++i) c[i] = perms[a][perms[b][i]];
      table[a][b] = rank(c);
    }
  }
  std::vector<std::string> labels(order);
  for (Element g = 0; g < order; ++g) {
    std::ostringstream os;
    os << '[';
    for (int i = 0; i < n; ++i) os << (i ? " " : "") << perms[g][i];
    os << ']';
    labels[g] = os.str();
  }
  auto t = GroupBuilder::build(
      order, [&](Element a, Element b) { return table[a][b]; }, std::move(labels));
  GroupBuilder::tag(t, GroupFamily::symmetric, n, false, false);
  GroupBuilder::set_permutations(t, std::move(perms));
  return std::make_shared<const GroupTable>(std::move(t));
}

// ---------------------------------------------------------------- Subgroup

void Subgroup::index() {
  std::sort(elements_.begin(), elements_.end());
  elements_.erase(std::unique(elements_.begin(), elements_.end()), elements_.end());
  position_.assign(group_->order(), -1);
  for (int i = 0; i < order(); ++i) position_[elements_[i]] = i;

  // Greedy generating set: add the smallest element not yet generated.
  generators_.clear();
  std::vector<char> reached(group_->order(), 0);
  reached[group_->identity()] = 1;
  for (Element g : elements_) {
    if (reached[g]) continue;
    generators_.push_back(g);
    std::fill(reached.begin(), reached.end(), 0);
    std::vector<Element> span{group_->identity()};
    reached[group_->identity()] = 1;
    for (std::size_t i = 0; i < span.size(); ++i) {
      for (Element s : generators_) {
        const Element p = group_->mul(span[i], s);
        if (!reached[p]) {
          reached[p] = 1;
          span.push_back(p);
        }
      }
    }
  }
}

Subgroup Subgroup::from_elements(GroupPtr group, std::vector<Element> elements, Side side) {
  if (!group) throw InvalidSubgroup("subgroup without parent group");
  for (Element g : elements) {
    if (g < 0 || g >= group->order()) throw InvalidSubgroup("element index out of range");
  }
  Subgroup s;
  s.group_ = std::move(group);
  s.elements_ = std::move(elements);
  s.side_ = side;
  s.index();
  const auto& G = *s.group_;
  if (!s.contains(G.identity())) throw InvalidSubgroup("subgroup lacks the identity");
  for (Element a : s.elements_) {
    if (!s.contains(G.inv(a))) throw InvalidSubgroup("subgroup not closed under inverses");
    for (Element b : s.elements_) {
      if (!s.contains(G.mul(a, b))) throw InvalidSubgroup("subgroup not closed under products");
    }
  }
  return s;
}

Subgroup Subgroup::generated(GroupPtr group, const std::vector<Element>& gens, Side side) {
  if (!group) throw InvalidSubgroup("subgroup without parent group");
  std::vector<char> seen(group->order(), 0);
  std::vector<Element> span{group->identity()};
  seen[group->identity()] = 1;
  for (Element g : gens) {
    if (g < 0 || g >= group->order()) throw InvalidSubgroup("generator index out of range");
  }
  for (std::size_t i = 0; i < span.size(); ++i) {
    for (Element g : gens) {
      const Element p = group->mul(span[i], g);
      if (!seen[p]) {
        seen[p] = 1;
        span.push_back(p);
      }
    }
  }
  return from_elements(std::move(group), std::move(span), side);
}

Subgroup Subgroup::trivial(GroupPtr group) {
  const Element e = group->identity();
  return from_elements(std::move(group), {e});
}

Subgroup Subgroup::whole(GroupPtr group) {
  std::vector<Element> all(group->order());
  std::iota(all.begin(), all.end(), 0);
  return from_elements(std::move(group), std::move(all));
}

Subgroup flip_subgroup(GroupPtr group) {
  const auto fam = group->family();
  const bool ok = fam == GroupFamily::dihedral ||
                  (fam == GroupFamily::semidirect);
  if (!ok) throw UnsupportedGroup("flip subgroup needs a dihedral or semidirect group");
  const Element flip = group->family_n();  // (0, 1)
  return Subgroup::generated(std::move(group), {flip});
}

Subgroup point_stabilizer(GroupPtr group, int point) {
  if (group->family() != GroupFamily::symmetric) {
    throw UnsupportedGroup("point stabilizer needs a symmetric group");
  }
  if (point < 0 || point >= group->family_n()) throw InvalidSubgroup("point out of range");
  std::vector<Element> fixing;
  for (Element g = 0; g < group->order(); ++g) {
    if (group->permutations()[g][point] == point) fixing.push_back(g);
  }
  return Subgroup::from_elements(std::move(group), std::move(fixing));
}

// ---------------------------------------------------------------- Quotient

Element Quotient::twist(CosetIndex x, Element g) const {
  const auto& G = group();
  const Element moved = section_[act(g, x)];
  return G.mul(G.inv(moved), G.mul(g, section_[x]));
}

Element Quotient::fibre(Element g) const {
  const auto& G = group();
  return G.mul(G.inv(section_[coset_of_[g]]), g);
}

Quotient left_cosets(SubgroupPtr subgroup,
                     const std::optional<std::vector<Element>>& section_hint) {
  if (!subgroup) throw InvalidSubgroup("null subgroup");
  const auto& G = subgroup->group();
  Quotient q;
  q.subgroup_ = subgroup;
  q.coset_of_.assign(G.order(), -1);
  for (Element g = 0; g < G.order(); ++g) {
    if (q.coset_of_[g] >= 0) continue;
    const CosetIndex x = static_cast<CosetIndex>(q.cosets_.size());
    std::vector<Element> coset;
    coset.reserve(subgroup->order());
    for (Element h : subgroup->elements()) coset.push_back(G.mul(g, h));
    std::sort(coset.begin(), coset.end());
    for (Element member : coset) {
      if (q.coset_of_[member] >= 0) throw InvalidSubgroup("cosets overlap");
      q.coset_of_[member] = x;
    }
    q.cosets_.push_back(std::move(coset));
  }
  const CosetIndex root = q.coset_of_[G.identity()];
  if (section_hint) {
    const auto& hint = *section_hint;
    if (static_cast<int>(hint.size()) != q.size()) {
      throw InvalidSection("section hint has the wrong length");
    }
    for (CosetIndex x = 0; x < q.size(); ++x) {
      const Element s = hint[x];
      if (s < 0 || s >= G.order() || q.coset_of_[s] != x) {
        throw InvalidSection("section hint is not a transversal");
      }
    }
    if (hint[root] != G.identity()) {
      throw InvalidSection("section hint must map eH to e");
    }
    q.section_ = hint;
  } else {
    q.section_.resize(q.size());
    for (CosetIndex x = 0; x < q.size(); ++x) q.section_[x] = q.cosets_[x].front();
    q.section_[root] = G.identity();
  }
  return q;
}

// ---------------------------------------------------------------- Double cosets

DoubleCosetSpace double_cosets(SubgroupPtr left, SubgroupPtr right, const Quotient* align) {
  if (!left || !right) throw InvalidSubgroup("null subgroup");
  if (left->group_ptr() != right->group_ptr()) {
    throw InvalidSubgroup("subgroups belong to different groups");
  }
  if (align && align->subgroup().elements() != right->elements()) {
    throw InvalidSubgroup("aligning quotient is not over the right subgroup");
  }
  const auto& G = left->group();
  DoubleCosetSpace d;
  d.left_ = left;
  d.right_ = right;
  d.class_of_.assign(G.order(), -1);
  for (Element g = 0; g < G.order(); ++g) {
    if (d.class_of_[g] >= 0) continue;
    const CosetIndex x = static_cast<CosetIndex>(d.classes_.size());
    std::vector<Element> members;
    for (Element h : left->elements()) {
      const Element hg = G.mul(h, g);
      for (Element hp : right->elements()) {
        const Element m = G.mul(hg, hp);
        if (d.class_of_[m] < 0) {
          d.class_of_[m] = x;
          members.push_back(m);
        }
      }
    }
    std::sort(members.begin(), members.end());
    d.classes_.push_back(std::move(members));
  }
  d.gamma_.resize(d.size());
  for (CosetIndex x = 0; x < d.size(); ++x) {
    Element rep = d.classes_[x].front();
    if (align) {
      // Smallest section element inside the class.
      rep = -1;
      for (Element s : align->section_table()) {
        if (d.class_of_[s] == x && (rep < 0 || s < rep)) rep = s;
      }
    }
    d.gamma_[x] = rep;
  }
  d.stabilizers_.reserve(d.size());
  for (CosetIndex x = 0; x < d.size(); ++x) {
    const Element gamma = d.gamma_[x];
    const Element gamma_inv = G.inv(gamma);
    std::vector<Element> stab;
    for (Element h : left->elements()) {
      // h gamma H' = gamma H'  <=>  gamma^-1 h gamma in H'.
      if (right->contains(G.mul(gamma_inv, G.mul(h, gamma)))) stab.push_back(h);
    }
    d.stabilizers_.push_back(Subgroup::from_elements(left->group_ptr(), std::move(stab)));
  }
  return d;
}

}  // namespace homsteer
