#pragma once

#include <limits>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace rieszmix {

/// Outcome of a numerical verification. Violations are recorded, never thrown.
struct CheckReport {
  std::string claim;
  bool passed = true;
  /// Largest observed violation (or gap, for identities); negative values are
  /// slack. -infinity until something is observed.
  double worst = -std::numeric_limits<double>::infinity();
  /// Location of the worst violation, e.g. "i=3 m=1 side=(i) atom=5".
  std::string where;
  std::vector<std::string> notes;

  CheckReport() = default;
  explicit CheckReport(std::string name) : claim(std::move(name)) {}

  /// Records a candidate violation. `location` is either a string or a
  /// callable producing one; it is only evaluated when the worst case changes.
  template <class Location>
  void observe(double violation, double tolerance, Location&& location) {
    if (violation > tolerance || violation != violation) passed = false;
    if (violation > worst || violation != violation) {
      worst = violation;
      if constexpr (std::is_invocable_v<Location>)
        where = std::forward<Location>(location)();
      else
        where = std::string(std::forward<Location>(location));
    }
  }

  /// Folds another report into this one; the larger violation wins.
  void merge(const CheckReport& other) {
    passed = passed && other.passed;
    if (other.worst > worst || other.worst != other.worst) {
      worst = other.worst;
      where = other.where;
    }
    notes.insert(notes.end(), other.notes.begin(), other.notes.end());
  }
};

}  // namespace rieszmix
