#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace homsteer {

/// Dense index of a group element inside its GroupTable.
using Element = int;

/// Index of a coset (or double coset) inside a Quotient / DoubleCosetSpace.
using CosetIndex = int;

inline constexpr int kMaxGroupOrder = 5040;
inline constexpr int kFullAssociativityCheckOrder = 512;

enum class GroupFamily { cyclic, dihedral, symmetric, semidirect, custom };

std::string to_string(GroupFamily family);

/// Discrete affine structure Z_n x| K: elements are pairs (t, k) with the
/// translation part t in Z_n. Present for cyclic, dihedral and semidirect
/// groups. section[t] = (t, e), projection[g] = t, linear[g] = (0, k).
struct AffineStructure {
  int n = 0;
  std::vector<Element> section;
  std::vector<int> projection;
  std::vector<Element> linear;
};

/// A finite group given by its full multiplication table.
///
/// Immutable after construction. Every constructor validates the identity and
/// inverse laws exactly, and associativity exhaustively up to order 512
/// (seeded sample of triples above that).
class GroupTable {
 public:
  static GroupTable from_table(std::vector<std::vector<Element>> mult,
                               std::vector<std::string> labels = {});

  int order() const { return order_; }
  Element identity() const { return identity_; }
  Element mul(Element a, Element b) const {
    return mult_[static_cast<std::size_t>(a) * order_ + b];
  }
  Element inv(Element g) const { return inv_[g]; }
  const std::string& label(Element g) const { return labels_[g]; }

  GroupFamily family() const { return family_; }
  int family_n() const { return family_n_; }
  bool family_flip() const { return family_flip_; }

  const std::optional<AffineStructure>& affine() const { return affine_; }
  /// One-line notation per element, only for symmetric groups.
  const std::vector<std::vector<int>>& permutations() const {
    return permutations_;
  }

  /// Maximum number of violated (identity, inverse, associativity) laws, as a
  /// count. Exhaustive regardless of order; used by verification suites.
  std::int64_t count_law_violations() const;

  bool is_abelian() const;
  std::vector<Element> center() const;
  Element find_by_label(const std::string& label) const;

 private:
  GroupTable() = default;
  void validate() const;
  friend struct GroupBuilder;

  int order_ = 0;
  Element identity_ = 0;
  std::vector<Element> mult_;
  std::vector<Element> inv_;
  std::vector<std::string> labels_;
  GroupFamily family_ = GroupFamily::custom;
  int family_n_ = 0;
  bool family_flip_ = false;
  std::optional<AffineStructure> affine_;
  std::vector<std::vector<int>> permutations_;
};

using GroupPtr = std::shared_ptr<const GroupTable>;

/// Z_n under addition mod n.
GroupPtr make_cyclic(int n);
/// D_n as pairs (k, b), (k1,b1)(k2,b2) = (k1 + (-1)^b1 k2, b1 ^ b2).
/// Element index is b * n + k.
GroupPtr make_dihedral(int n);
/// S_n in lexicographic one-line order, (t o p)(i) = t(p(i)).
GroupPtr make_symmetric(int n);
/// Z_n x| Z_2 (flip) or Z_n x Z_2 (no flip). Index is h * n + t.
GroupPtr make_semidirect(int n, bool flip);

enum class Side { left, right };

/// A subgroup of a GroupTable, stored as a sorted element list.
class Subgroup {
 public:
  static Subgroup from_elements(GroupPtr group, std::vector<Element> elements,
                                Side side = Side::left);
  static Subgroup generated(GroupPtr group, const std::vector<Element>& gens,
                            Side side = Side::left);
  static Subgroup trivial(GroupPtr group);
  static Subgroup whole(GroupPtr group);

  const GroupTable& group() const { return *group_; }
  const GroupPtr& group_ptr() const { return group_; }
  const std::vector<Element>& elements() const { return elements_; }
  int order() const { return static_cast<int>(elements_.size()); }
  Side side() const { return side_; }
  bool contains(Element g) const { return position_[g] >= 0; }
  /// Position of g in elements(), -1 when g is not a member.
  int position(Element g) const { return position_[g]; }
  /// A small generating set, chosen greedily in ascending index order.
  const std::vector<Element>& generators() const { return generators_; }

 private:
  Subgroup() = default;
  void index();

  GroupPtr group_;
  std::vector<Element> elements_;
  std::vector<int> position_;
  std::vector<Element> generators_;
  Side side_ = Side::left;
};

using SubgroupPtr = std::shared_ptr<const Subgroup>;

/// {e, (0,1)} in a dihedral or semidirect(flip) group.
Subgroup flip_subgroup(GroupPtr group);
/// Permutations of a symmetric group fixing `point`.
Subgroup point_stabilizer(GroupPtr group, int point);

/// Left cosets gH with a normalized section s (s(eH) = e).
class Quotient {
 public:
  const GroupTable& group() const { return subgroup_->group(); }
  const Subgroup& subgroup() const { return *subgroup_; }
  const SubgroupPtr& subgroup_ptr() const { return subgroup_; }

  int size() const { return static_cast<int>(cosets_.size()); }
  const std::vector<std::vector<Element>>& cosets() const { return cosets_; }
  CosetIndex coset_of(Element g) const { return coset_of_[g]; }
  Element section(CosetIndex x) const { return section_[x]; }
  const std::vector<Element>& section_table() const { return section_; }

  /// Induced action on cosets, g |> x = coset of g s(x).
  CosetIndex act(Element g, CosetIndex x) const {
    return coset_of_[group().mul(g, section_[x])];
  }
  /// Twist cocycle h(x, g) = s(g |> x)^-1 g s(x), an element of H.
  Element twist(CosetIndex x, Element g) const;
  /// Fibre coordinate h(g) = s(gH)^-1 g.
  Element fibre(Element g) const;

 private:
  friend Quotient left_cosets(SubgroupPtr, const std::optional<std::vector<Element>>&);
  SubgroupPtr subgroup_;
  std::vector<std::vector<Element>> cosets_;
  std::vector<CosetIndex> coset_of_;
  std::vector<Element> section_;
};

using QuotientPtr = std::shared_ptr<const Quotient>;

/// Cosets are ordered by their minimal element. The default section picks the
/// minimal element of each coset and maps eH to e. A hint must be a
/// normalized transversal.
Quotient left_cosets(SubgroupPtr subgroup,
                     const std::optional<std::vector<Element>>& section_hint = std::nullopt);

/// Double cosets H g H'.
class DoubleCosetSpace {
 public:
  const GroupTable& group() const { return left_->group(); }
  const Subgroup& left() const { return *left_; }
  const Subgroup& right() const { return *right_; }
  const SubgroupPtr& left_ptr() const { return left_; }
  const SubgroupPtr& right_ptr() const { return right_; }

  int size() const { return static_cast<int>(classes_.size()); }
  const std::vector<std::vector<Element>>& classes() const { return classes_; }
  CosetIndex class_of(Element g) const { return class_of_[g]; }
  Element representative(CosetIndex x) const { return gamma_[x]; }
  /// H^{gamma(x) H'} = {h in H : h gamma(x) H' = gamma(x) H'}.
  const Subgroup& stabilizer(CosetIndex x) const { return stabilizers_[x]; }

 private:
  friend DoubleCosetSpace double_cosets(SubgroupPtr, SubgroupPtr, const Quotient*);
  SubgroupPtr left_;
  SubgroupPtr right_;
  std::vector<std::vector<Element>> classes_;
  std::vector<CosetIndex> class_of_;
  std::vector<Element> gamma_;
  std::vector<Subgroup> stabilizers_;
};

/// Classes ordered by minimal element. When `align` (a quotient by the right
/// subgroup) is given, gamma(x) is taken from its section so that
/// s(gamma(x) H') = gamma(x); otherwise gamma(x) is the minimal element.
DoubleCosetSpace double_cosets(SubgroupPtr left, SubgroupPtr right,
                               const Quotient* align = nullptr);

/// Sum of f over G in ascending element order (counting measure), or the
/// normalized mean. Works for any value type with += and scalar division.
template <class F>
auto haar_sum(const GroupTable& group, F&& f, bool normalized) {
  using Value = std::decay_t<decltype(f(Element{0}))>;
  Value acc = f(Element{0});
  for (Element g = 1; g < group.order(); ++g) acc += f(g);
  if (normalized) {
    if constexpr (std::is_integral_v<Value>) {
      throw std::invalid_argument("normalized haar_sum needs a floating value type");
    } else {
      acc = acc / static_cast<double>(group.order());
    }
  }
  return acc;
}

/// The right-hand side of the quotient integral formula:
/// sum over cosets x, then over h in H (ascending), of f(s(x) h).
template <class F>
auto quotient_sum(const Quotient& q, F&& f) {
  const auto& group = q.group();
  const auto& hs = q.subgroup().elements();
  using Value = std::decay_t<decltype(f(Element{0}))>;
  Value acc = f(group.mul(q.section(0), hs[0]));
  bool first = true;
  for (CosetIndex x = 0; x < q.size(); ++x) {
    for (Element h : hs) {
      if (first) {
        first = false;
        continue;
      }
      acc += f(group.mul(q.section(x), h));
    }
  }
  return acc;
}

}  // namespace homsteer
