#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "rieszmix/lattice.hpp"
#include "rieszmix/report.hpp"

namespace rieszmix {

/// Partition of the atoms into disjoint nonempty blocks, stored as one block label per atom.
class Partition {
 public:
  /// Labels must be dense in [0, block_count) with every block nonempty.
  static Partition from_labels(SpacePtr space, std::vector<std::uint32_t> labels);
  /// Blocks must be pairwise disjoint, nonempty, and cover every atom.
  static Partition from_blocks(SpacePtr space, const std::vector<std::vector<std::size_t>>& blocks);
  static Partition trivial(SpacePtr space);
  static Partition discrete(SpacePtr space);

  const SpacePtr& space() const { return space_; }
  std::size_t block_count() const { return block_count_; }
  std::uint32_t block_of(std::size_t atom) const { return labels_[atom]; }
  const std::vector<std::uint32_t>& labels() const { return labels_; }
  std::vector<std::vector<std::size_t>> blocks() const;
  /// Every block of *this lies inside a single block of `coarser`.
  bool refines(const Partition& coarser) const;
  /// Same blocks, possibly labelled differently.
  bool same_blocks(const Partition& other) const;

 private:
  Partition(SpacePtr space, std::vector<std::uint32_t> labels, std::size_t block_count)
      : space_(std::move(space)), labels_(std::move(labels)), block_count_(block_count) {}

  SpacePtr space_;
  std::vector<std::uint32_t> labels_;
  std::size_t block_count_;
};

/// Conditional expectation induced by a partition: weighted block averaging.
///
/// Positive, idempotent, fixes e, and has as range the block-constant
/// elements R(T). Copies share the partition.
class CondExpectation {
 public:
  explicit CondExpectation(Partition partition);

  const Partition& partition() const { return *partition_; }
  const SpacePtr& space() const { return partition_->space(); }

  Element apply(const Element& f) const;
  Element operator()(const Element& f) const { return apply(f); }
  /// f is constant on every block (to `tolerance`), i.e. f lies in R(T).
  bool in_range(const Element& f, double tolerance = kIdentityTolerance) const;

 private:
  std::shared_ptr<const Partition> partition_;
  std::vector<double> block_mass_;
};

/// Filtration (T_i) stored on an index window [low, high] together with a
/// compatible global T. Indices below the window resolve to T, indices above
/// it to the operator at `high`.
class Filtration {
 public:
  /// `operators[k]` is T_{low + k}. The refinement and compatibility
  /// invariants are not enforced here; see verify_filtration.
  Filtration(int low, std::vector<CondExpectation> operators, CondExpectation global);

  int low() const { return low_; }
  int high() const { return low_ + static_cast<int>(ops_.size()) - 1; }
  const CondExpectation& global() const { return global_; }
  const SpacePtr& space() const { return global_.space(); }
  /// T_i with clamping to the stored window.
  const CondExpectation& at(int index) const;

 private:
  int low_;
  std::vector<CondExpectation> ops_;
  CondExpectation global_;
};

/// T_i with index clamping (below the window: the global T).
inline const CondExpectation& filtration_at(const Filtration& filtration, int index) {
  return filtration.at(index);
}

struct FiltrationReport {
  /// T_i T_j f = T_i f = T_j T_i f for i <= j.
  CheckReport tower{"filtration tower property"};
  /// T_i T f = T f = T T_i f.
  CheckReport compatibility{"filtration compatible with T"};
  bool passed() const { return tower.passed && compatibility.passed; }
};

/// Checks the tower and compatibility identities on a probe set: the atom
/// indicator basis when the space has at most `basis_cap` atoms, otherwise
/// `random_probes` seeded random elements.
FiltrationReport verify_filtration(const Filtration& filtration, std::size_t basis_cap = 256,
                                   std::size_t random_probes = 8, std::uint64_t seed = 1);

/// T(f g) = f T g. Throws PreconditionError if f is not block-constant for T.
CheckReport averaging_check(const CondExpectation& t, const Element& f, const Element& g);

struct IndependenceReport {
  Element tptq;  // T P T Q e
  Element tpq;   // T P Q e
  Element tqtp;  // T Q T P e
  double gap = 0.0;
  bool independent = false;
};

/// T-conditional independence of two band projections: TPTQe = TPQe = TQTPe.
IndependenceReport independence_check(const BandProjection& p, const BandProjection& q,
                                      const CondExpectation& t,
                                      double tolerance = kIdentityTolerance);

struct SubspaceIndependenceOptions {
  /// Enumerate every pair of block unions when the combined block count is at most this.
  std::size_t exhaustive_block_limit = 12;
  /// Random union pairs drawn when enumeration is too large.
  std::size_t sampled_unions = 64;
  std::uint64_t seed = 7;
  double tolerance = kIdentityTolerance;
};

struct SubspaceIndependenceReport {
  CheckReport check{"subspace conditional independence"};
  std::size_t pairs_checked = 0;
  bool exhaustive = false;
  bool independent() const { return check.passed; }
};

/// Independence of the subspaces generated by two partitions (together with
/// R(T)): every pair of band projections onto unions of A-blocks and unions of
/// B-blocks satisfies TPTQe = TPQe = TQTPe.
SubspaceIndependenceReport subspace_independence_check(
    const Partition& a, const Partition& b, const CondExpectation& t,
    const SubspaceIndependenceOptions& options = {});

}  // namespace rieszmix
