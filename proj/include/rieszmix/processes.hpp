#pragma once

// Adapted sequences on product sample spaces.
//
// A process over horizon H is driven by i.i.d. innovations eps_1..eps_H with a
// finite support. Every term f_i is a LocalFunctional: a lookup table over a
// short window of coordinates ending at i. The table form gives exact
// conditional expectations given the first j coordinates by marginalising
// the trailing coordinates, which is what the Monte-Carlo backend relies on.
// The exhaustive backend materialises the same tables as Elements on the full
// product space, where T_j is block averaging over the first-j-coordinate
// cylinders.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rieszmix/conditional.hpp"
#include "rieszmix/lattice.hpp"
#include "rieszmix/report.hpp"

namespace rieszmix {

/// Finite-support innovation distribution. Support order fixes atom order.
struct InnovationLaw {
  std::vector<double> values;
  std::vector<double> probs;

  static InnovationLaw fair_coin() { return {{1.0, -1.0}, {0.5, 0.5}}; }

  std::size_t size() const { return values.size(); }
  double mean() const;
  /// Throws ArgumentError unless probabilities are strictly positive, sum to
  /// one, and match the value count; support must be nonempty and at most 255.
  void validate() const;
};

enum class ProcessKind { independent, moving_average, martingale_difference, custom };

std::string_view to_string(ProcessKind kind);
std::optional<ProcessKind> parse_process_kind(std::string_view name);

/// What to generate.
///
/// - independent: f_i = eps_i.
/// - moving_average: f_i = sum_k theta_k eps_{i-k}, terms with i-k < 1 dropped.
/// - martingale_difference: f_i = (eps_i - mu)(1 + theta_0 (eps_{i-1} - mu)),
///   f_1 = eps_1 - mu; uncorrelated but dependent.
/// - custom: seeded random tables over the window [i - memory, i] with
///   entries uniform in [-bound, bound], optionally centred so T f_i = 0.
struct ProcessSpec {
  ProcessKind kind = ProcessKind::independent;
  int horizon = 1;
  std::vector<double> theta;
  InnovationLaw innovations = InnovationLaw::fair_coin();
  int memory = 1;
  double bound = 1.0;
  bool centered = true;
  std::uint64_t seed = 0;

  /// Throws ArgumentError on an invalid field.
  void validate() const;
};

/// Real function of innovation coordinates first..last (1-based, inclusive).
/// An empty window (first > last) is a constant.
class LocalFunctional {
 public:
  /// `table` is indexed in mixed radix `support` with coordinate `first` most significant.
  LocalFunctional(int first, int last, std::size_t support, std::vector<double> table);

  static LocalFunctional constant(double value, std::size_t support);
  /// eps_k.
  static LocalFunctional coordinate(int k, const InnovationLaw& law);

  int first() const { return first_; }
  int last() const { return last_; }
  bool is_constant() const { return first_ > last_; }
  std::size_t support() const { return support_; }
  std::span<const double> table() const { return table_; }

  /// `path[k-1]` is the support index of coordinate k.
  double evaluate(std::span<const std::uint8_t> path) const;
  /// Conditional expectation given coordinates 1..level (trailing coordinates
  /// integrated out under the innovation law).
  LocalFunctional conditioned(int level, const InnovationLaw& law) const;
  double expectation(const InnovationLaw& law) const;
  double sup_norm() const;

  LocalFunctional map(const std::function<double(double)>& op) const;
  /// Pointwise op(a, b) over the union of the two windows.
  static LocalFunctional combine(const LocalFunctional& a, const LocalFunctional& b,
                                 const std::function<double(double, double)>& op);

 private:
  int first_;
  int last_;
  std::size_t support_;
  std::vector<double> table_;
};

/// Terms f_1..f_H of a process together with its innovation law.
struct ProcessModel {
  InnovationLaw law;
  int horizon = 0;
  std::vector<LocalFunctional> terms;  // terms[i-1] is f_i

  const LocalFunctional& term(int i) const { return terms[static_cast<std::size_t>(i - 1)]; }
  /// max_i sup|f_i|.
  double bound() const;
};

/// Builds the term tables described by `spec`. Throws ArgumentError on an invalid spec.
ProcessModel make_process(const ProcessSpec& spec);

/// 2^20, or the value of RIESZMIX_ATOM_CAP when set to a positive integer.
std::size_t default_atom_cap();
/// |support|^horizon, saturating at SIZE_MAX.
std::size_t product_atom_count(std::size_t support, int horizon);

/// All innovation paths with product weights, and the coordinate filtration
/// T_i = conditioning on the first i coordinates, stored on [0, horizon];
/// T_0 and the global T are the trivial partition.
struct ProductSpace {
  InnovationLaw law;
  int horizon = 0;
  SpacePtr space;
  std::shared_ptr<const Filtration> filtration;

  /// Support index of coordinate k (1-based) on `atom`.
  std::uint8_t digit(std::size_t atom, int k) const;
  Element materialize(const LocalFunctional& term) const;
};

/// Throws AtomCapError if |support|^horizon exceeds `atom_cap`.
ProductSpace build_product_space(const InnovationLaw& law, int horizon,
                                 std::size_t atom_cap = default_atom_cap());
ProductSpace build_product_space(const ProcessSpec& spec, std::size_t atom_cap = default_atom_cap());

/// eps_1..eps_H as elements.
std::vector<Element> coordinate_elements(const ProductSpace& ps);
/// Partition generated by coordinate k alone.
Partition coordinate_partition(const ProductSpace& ps, int k);

/// Sequence f_1..f_n with f_i in R(T_i).
class AdaptedSequence {
 public:
  /// Throws PreconditionError naming the first i with f_i outside R(T_i).
  AdaptedSequence(std::shared_ptr<const Filtration> filtration, std::vector<Element> terms,
                  double tolerance = kIdentityTolerance);

  const Filtration& filtration() const { return *filtration_; }
  const std::shared_ptr<const Filtration>& filtration_ptr() const { return filtration_; }
  std::span<const Element> terms() const { return terms_; }
  /// 1-based.
  const Element& term(int i) const { return terms_[static_cast<std::size_t>(i - 1)]; }
  int length() const { return static_cast<int>(terms_.size()); }

 private:
  std::shared_ptr<const Filtration> filtration_;
  std::vector<Element> terms_;
};

/// Materialises every term of `model` on `ps`.
AdaptedSequence materialize(const ProductSpace& ps, const ProcessModel& model);
/// Moving average of the coordinate elements with coefficients spec.theta.
AdaptedSequence moving_average(const ProcessSpec& spec, const ProductSpace& ps);

/// g_i = f_i - T_{i-1} f_i. Throws PreconditionError if T_{i-1} g_i != 0,
/// which only happens when the filtration is not a tower.
AdaptedSequence martingale_difference_from(const AdaptedSequence& adapted);
/// T_i g_j = 0 for every i < j.
CheckReport martingale_difference_check(const AdaptedSequence& g);
/// s_0 = 0, s_1, ..., s_n.
std::vector<Element> partial_sums(const AdaptedSequence& g);
/// f_i = T_i f_j for all 1 <= i <= j <= n (terms are 1-based).
CheckReport is_martingale(std::span<const Element> terms, const Filtration& filtration);

/// Stream of weighted innovation paths: either every path of the product
/// space (exact) or seeded i.i.d. samples with weight 1/count.
class PathSet {
 public:
  using Visitor = std::function<void(std::span<const std::uint8_t> path, double weight)>;

  /// Throws AtomCapError if the product space exceeds `cap`.
  static PathSet enumerate(InnovationLaw law, int horizon, std::size_t cap = default_atom_cap());
  static PathSet sample(InnovationLaw law, int horizon, std::size_t count, std::uint64_t seed);

  bool exact() const { return exact_; }
  std::size_t count() const { return count_; }
  int horizon() const { return horizon_; }
  std::uint64_t seed() const { return seed_; }
  static constexpr std::string_view kGenerator = "mt19937_64";

  void for_each(const Visitor& visit) const;

 private:
  PathSet(InnovationLaw law, int horizon, std::size_t count, bool exact, std::uint64_t seed)
      : law_(std::move(law)), horizon_(horizon), count_(count), exact_(exact), seed_(seed) {}

  InnovationLaw law_;
  int horizon_;
  std::size_t count_;
  bool exact_;
  std::uint64_t seed_;
};

}  // namespace rieszmix
