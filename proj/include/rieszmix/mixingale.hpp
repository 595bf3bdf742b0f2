#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rieszmix/conditional.hpp"
#include "rieszmix/lattice.hpp"
#include "rieszmix/report.hpp"

namespace rieszmix {

/// Slack added to the right-hand side of every mixingale inequality.
inline constexpr double kInequalitySlack = 1e-10;

/// Witnesses (c_i) in E+ and (Phi_m) in R+ for the two mixingale inequalities
///   (i)  T|T_{i-m} f_i|     <= Phi_m     c_i
///   (ii) T|f_i - T_{i+m} f_i| <= Phi_{m+1} c_i
/// over i = 1..n, m >= 1.
struct MixingaleCertificate {
  std::vector<Element> c;    // c[i-1] is c_i
  std::vector<double> phi;   // phi[m-1] is Phi_m
  bool phi_tail_zero = false;

  /// Phi_m; zero past the list when phi_tail_zero, otherwise unknown.
  std::optional<double> phi_at(int m) const;
};

/// Sign/nonnegativity invariants and the Phi_m -> 0 evidence: either an
/// asserted zero tail or min_{m <= M} Phi_m below `epsilon`.
CheckReport validate_certificate(const MixingaleCertificate& cert, double epsilon = 1e-8);

enum class MixingaleSide { lagged, residual };  // (i), (ii)

/// Left-hand side of inequality (i) or (ii) for term i and lag m.
using MixingaleLhs = std::function<Element(int i, int m, MixingaleSide side)>;

struct MixingaleReport {
  CheckReport check{"mixingale inequalities"};
  int worst_i = 0;
  int worst_m = 0;
  MixingaleSide worst_side = MixingaleSide::lagged;
  /// (i, m) pairs whose side (ii) was skipped because Phi_{m+1} is unknown.
  int skipped = 0;
  bool passed() const { return check.passed; }
};

/// LHS of (i)/(ii) computed with the filtration's clamped operators.
MixingaleLhs filtration_lhs(std::span<const Element> f, const Filtration& filtration);

/// Checks both inequalities for i = 1..n and m = 1..max_lag with slack 1e-10.
MixingaleReport check_mixingale(std::span<const Element> f, const Filtration& filtration,
                                const MixingaleCertificate& cert, int max_lag);
/// Same check against any LHS provider (e.g. exact table expectations).
MixingaleReport check_mixingale(int n, const MixingaleLhs& lhs, const MixingaleCertificate& cert,
                                int max_lag);

/// Least Phi_1..Phi_{max_lag} for the given c: Phi_m is the largest ratio
/// LHS/c_i over i, over side (i) at lag m and side (ii) at lag m - 1.
/// +infinity flags a lag where LHS > 0 on an atom with c_i = 0.
std::vector<double> minimal_phi(std::span<const Element> f, const Filtration& filtration,
                                std::span<const Element> c, int max_lag);
std::vector<double> minimal_phi(int n, const MixingaleLhs& lhs, std::span<const Element> c,
                                int max_lag);

/// Smallest s with lhs <= s c componentwise; +infinity when lhs > 0 where c = 0.
double componentwise_ratio(const Element& lhs, const Element& c);

/// T f_i = 0 for all i, to 1e-10.
CheckReport t_mean_zero_check(std::span<const Element> f, const Filtration& filtration);

/// envelope[k] = sup over the family of T P_{(|f|-c e)+} |f| at c = c_grid[k].
struct UniformityProfile {
  std::vector<double> c_grid;
  std::vector<Element> envelope;
  /// Componentwise nonincreasing in c (checked on construction).
  CheckReport monotone{"uniformity envelope nonincreasing in c"};

  /// First grid level whose envelope is below epsilon everywhere.
  std::optional<std::size_t> first_level_below(double epsilon) const;
};

/// Throws ArgumentError if the grid is empty, not strictly increasing, or
/// has a negative level. An empty family has the zero envelope.
UniformityProfile uniformity_profile(std::span<const Element> family, const CondExpectation& t,
                                     std::span<const double> c_grid);

struct UniformBoundReport {
  CheckReport check{"uniform family bound T|f| <= envelope(K) + K e"};
  std::optional<double> level;  // K, when the envelope drops below epsilon
};

/// Boundedness of {T|f_a|} for a uniform family: at the first grid level K
/// with envelope below epsilon, T|f_a| <= envelope(K) + K e for every member.
/// Fails with a note when no grid level qualifies. An empty family passes.
UniformBoundReport uniform_bound_check(const UniformityProfile& profile,
                                       std::span<const Element> family, const CondExpectation& t,
                                       double epsilon = 1e-8);

}  // namespace rieszmix
