#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace specdens {

enum class GroupKind { FiniteTable, FreeAbelian, FreeGroup, DirectProduct };

class Group;
using GroupPtr = std::shared_ptr<const Group>;

/// Value type in canonical normal form. The variant alternative is tied to
/// the owning group's kind: table index, exponent vector, freely reduced
/// word (entries +/-(i+1) for generator i), or one component per factor.
struct GroupElement {
  std::variant<std::int32_t, std::vector<std::int64_t>, std::vector<std::int32_t>,
               std::vector<GroupElement>>
      v;

  bool operator==(const GroupElement& o) const { return v == o.v; }
  bool operator!=(const GroupElement& o) const { return !(*this == o); }
  bool operator<(const GroupElement& o) const;
};

struct ElementLess {
  bool operator()(const GroupElement& a, const GroupElement& b) const {
    return a < b;
  }
};

enum class ClassStatus { Finite, Infinite, Undecided };

struct ConjugacyClassInfo {
  GroupElement representative;
  std::vector<GroupElement> elements;  // sorted; populated only when Finite
  ClassStatus status = ClassStatus::Finite;
  long size() const { return static_cast<long>(elements.size()); }
};

/// Immutable group descriptor plus operations. Elements are plain values;
/// all operations validate that the element's shape matches this
/// descriptor and throw std::invalid_argument on mismatch.
class Group : public std::enable_shared_from_this<Group> {
 public:
  GroupKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  int rank() const { return rank_; }
  /// Number of elements; -1 when infinite.
  long order() const;
  bool is_finite() const { return order() >= 0; }
  const std::vector<GroupPtr>& factors() const { return factors_; }

  int num_generators() const { return static_cast<int>(gen_names_.size()); }
  const std::string& generator_name(int i) const { return gen_names_.at(i); }
  GroupElement generator(int i) const;

  GroupElement identity() const;
  bool is_identity(const GroupElement& x) const;
  GroupElement mul(const GroupElement& x, const GroupElement& y) const;
  GroupElement inverse(const GroupElement& x) const;
  GroupElement pow(const GroupElement& x, long long e) const;
  void check_element(const GroupElement& x) const;

  /// Word metric for the stored generating set (generators and inverses).
  long word_distance(const GroupElement& x, const GroupElement& y) const;
  long word_length(const GroupElement& x) const;

  /// Enumerates the conjugacy class of g. The budget caps enumeration
  /// effort; exceeding it yields status Undecided, never a wrong answer.
  ConjugacyClassInfo conjugacy_class(const GroupElement& g, long budget = 4096) const;

  // Finite enumeration (finite kinds only; throws otherwise).
  long element_count() const;
  GroupElement element_at(long idx) const;
  long index_of(const GroupElement& x) const;

  std::string format(const GroupElement& x) const;
  /// Parses words like "u^2*t^-1", "e". Exponents are integers.
  GroupElement parse(const std::string& word) const;

  /// Structural equality of descriptors (same kind, tables, factors, names).
  bool same_descriptor(const Group& o) const;

  // Builders.
  static GroupPtr finite_table(std::vector<std::vector<int>> table,
                               std::vector<int> generator_indices,
                               std::vector<std::string> element_names = {},
                               bool validate = true);
  static GroupPtr cyclic(long n, const std::string& gen_name = "u");
  static GroupPtr symmetric(int n);  // small n; generators: transposition, n-cycle
  static GroupPtr free_abelian(int rank, std::vector<std::string> names = {});
  static GroupPtr free_group(int rank, std::vector<std::string> names = {});
  static GroupPtr direct_product(std::vector<GroupPtr> factors);

 private:
  GroupKind kind_;
  std::string name_;
  int rank_ = 0;                     // FreeAbelian/FreeGroup
  std::vector<GroupPtr> factors_;    // DirectProduct
  std::vector<std::string> gen_names_;

  // FiniteTable data.
  long n_ = 0;
  std::vector<std::int32_t> table_;  // n*n, row-major: table_[a*n+b] = a*b
  std::vector<std::int32_t> inv_;
  std::vector<std::int32_t> gens_;   // generator element indices
  std::int32_t e_idx_ = 0;
  std::vector<std::string> elem_names_;
  std::vector<std::int32_t> dist_;          // word length from identity
  std::vector<std::int32_t> bfs_parent_;    // for expressing elements as words
  std::vector<std::int32_t> bfs_gen_;       // signed: +(i+1) forward, -(i+1) inverse

  Group() = default;
  void finite_table_init(bool validate);
  friend struct QuotientMap;
};

/// Homomorphism between described groups, defined on generators. Used both
/// for quotient towers (surjections onto finite groups) and for connecting
/// maps of direct systems. verify() checks the defining relations of the
/// source kind; apply() factors an element through its generator word.
struct QuotientMap {
  GroupPtr source;
  GroupPtr target;
  std::vector<GroupElement> gen_images;  // one per source generator

  QuotientMap() = default;
  QuotientMap(GroupPtr src, GroupPtr tgt, std::vector<GroupElement> images);

  GroupElement apply(const GroupElement& x) const;
  /// Verifies the map is a well-defined homomorphism; returns false and
  /// fills `why` on failure.
  bool verify(std::string* why = nullptr) const;

  /// Componentwise reduction Z^d -> (Z/n)^d (or U x Z^d -> U x (Z/n)^d with
  /// U fixed). Cyclic factors become explicit tables.
  static QuotientMap mod_quotient(const GroupPtr& source, long n);
  static QuotientMap identity_map(const GroupPtr& g);
  static QuotientMap compose(const QuotientMap& first, const QuotientMap& then);

 private:
  // Cached full image table for FiniteTable sources.
  mutable std::vector<GroupElement> image_table_;
  // Cached restrictions to the factors of a DirectProduct source.
  std::vector<QuotientMap> sub_maps_;
  void build_image_table() const;
};

}  // namespace specdens
