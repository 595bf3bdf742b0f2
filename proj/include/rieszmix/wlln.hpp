#pragma once

// Weak law of large numbers machinery: the martingale-difference Cesaro
// bound, the telescoping decomposition of the Cesaro mean, the truncation
// split, and the seeded experiment that checks the whole chain of bounds.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rieszmix/conditional.hpp"
#include "rieszmix/lattice.hpp"
#include "rieszmix/mixingale.hpp"
#include "rieszmix/processes.hpp"
#include "rieszmix/report.hpp"

namespace rieszmix {

/// Relative tolerance for T(s_n^2) = sum_i T(g_i^2); the denominator is floored at 1e-12.
inline constexpr double kSquareIdentityTolerance = 1e-10;
/// Statistical checks pass when estimate <= bound + kSigmaSlack * SE.
inline constexpr double kSigmaSlack = 3.0;

/// (1 + 4B^2) / (2 sqrt(n)).
double cesaro_bound(double bound, int n);

/// T-valued quantity along a grid of horizons, optionally with a reference curve.
struct CesaroTrace {
  std::vector<int> n_grid;
  std::vector<Element> values;
  std::vector<double> bound;           // empty when there is no reference curve
  std::vector<double> standard_error;  // empty on exact backends

  double max_component(std::size_t k) const { return values[k].max(); }
};

struct MartingaleBoundReport {
  double bound = 0.0;  // B with |f_i| <= B e
  CheckReport increments{"martingale differences bounded: |g_i| <= 2B e"};
  CheckReport differences{"martingale difference: T_i g_j = 0 for i < j"};
  CheckReport martingale{"partial sums form a martingale"};
  CheckReport orthogonality{"orthogonal increments: T(g_i g_j) = 0 for i < j"};
  CheckReport square_identity{"square identity: T(s_n^2) = sum T(g_i^2)"};
  CheckReport square_bound{"square bound: T(s_n^2) <= 4 n B^2 e"};
  CheckReport cesaro{"Cesaro bound: T|gbar_n| <= (1 + 4B^2) / (2 sqrt n) e"};
  /// T|gbar_n| for n = 1..N with the bound curve.
  CesaroTrace trace;

  std::vector<const CheckReport*> claims() const;
  bool passed() const;
};

/// For an e-bounded adapted sequence, forms g_i = f_i - T_{i-1} f_i and checks
/// the martingale-difference structure, the square identity, and both bounds
/// for every n up to the sequence length.
/// Throws PreconditionError naming (i, atom) if |f_i| <= B e fails.
MartingaleBoundReport martingale_cesaro_bound(const AdaptedSequence& f, double bound);

/// e/sqrt(n) + s^2/n^{3/2} >= 2|s|/n pointwise and after applying T, plus
/// (J e)^2 = e and (J e) s = |s| for the signum element J e of s.
CheckReport signum_inequality_check(const Element& s, int n, const CondExpectation& t);

/// fbar_n = tail + middle + head with
///   tail   = (1/n) sum_i (f_i - T_{i+M} f_i)
///   middle = sum_{m=-M+1..M} ybar_{m,n},  y_{m,i} = T_{i+m} f_i - T_{i+m-1} f_i
///   head   = (1/n) sum_i T_{i-M} f_i
struct TelescopeParts {
  int lag = 0;  // M
  int n = 0;
  Element fbar;
  Element tail;
  Element middle;
  Element head;

  double reconstruction_error() const;
};

/// Throws ArgumentError if M < 1 or n is outside 1..f.size().
TelescopeParts telescope(std::span<const Element> f, const Filtration& filtration, int lag, int n);

/// ybar_{m,n} = (1/n) sum_{i<=n} (T_{i+m} f_i - T_{i+m-1} f_i).
Element y_bar(std::span<const Element> f, const Filtration& filtration, int m, int n);

struct YTraceReport {
  CesaroTrace trace;  // T|ybar_{m,n}| with the Cesaro bound for the effective bound
  double effective_bound = 0.0;  // max_i sup|T_{i+m} f_i|
  CheckReport differences{"y_{m,i} martingale differences for (T_{i+m})"};
  CheckReport cesaro{"T|ybar_{m,n}| under the Cesaro bound"};
};

YTraceReport ymn_trace(std::span<const Element> f, const Filtration& filtration, int m,
                       std::span<const int> n_grid);

/// f = bounded + excess with bounded = (I - P) f, excess = P f, P = P_{(|f| - B e)+}.
struct TruncationSplit {
  Element bounded;
  Element excess;
};

/// Throws ArgumentError unless B > 0.
TruncationSplit truncation_split(const Element& f, double bound);

// ---------------------------------------------------------------------------
// Experiments

enum class Backend { exhaustive, monte_carlo };
std::string_view to_string(Backend backend);

enum class CertificateMode {
  minimal,   // c_i = scale * e, least Phi
  given,     // c_i = scale * e, Phi as listed
  t_abs,     // c_i = T|f_i|, least Phi
};
std::string_view to_string(CertificateMode mode);

struct CertificateDirective {
  CertificateMode mode = CertificateMode::minimal;
  double c_scale = 1.0;
  std::vector<double> phi;
  bool phi_tail_zero = false;
  double epsilon = 1e-8;
};

struct Schedule {
  std::vector<int> n_grid{4, 16, 64, 256, 1024};
  std::vector<int> lag_grid{1, 2, 4, 8};
  std::vector<double> bound_grid{0.5, 1.0, 2.0, 4.0};
};

struct ExperimentSpec {
  std::string id = "experiment";
  ProcessSpec process;
  CertificateDirective certificate;
  Schedule schedule;
  Backend backend = Backend::exhaustive;
  std::size_t paths = 4000;  // monte-carlo only; 0 enumerates every path
  std::uint64_t seed = 1;
  /// When set, the largest-n value of T|fbar_n| must fall below it.
  std::optional<double> decay_threshold;
  std::size_t atom_cap = default_atom_cap();
};

/// One (n, M, B) cell of the chain of bounds.
struct TraceRow {
  int n = 0;
  int lag = 0;       // M
  double level = 0;  // B
  double tfbar = 0;  // max component of T|fbar_n|
  double tfbar_se = 0;
  double chain_bound = 0;
  bool chain_pass = false;
  double telescope_error = 0;
  double excess_lhs = 0;  // max over m of T|ybar_{m,n}| built from the truncated-away parts
  double excess_bound = 0;
  bool excess_pass = false;
  double bounded_lhs = 0;  // same, built from the bounded parts
  double bounded_bound = 0;
  bool bounded_pass = false;
  double gbar = 0;  // max component of T|gbar_n|
  double gbar_bound = 0;
  bool gbar_pass = false;
};

struct WllnReport {
  std::string id;
  Backend backend = Backend::exhaustive;
  std::uint64_t seed = 0;
  std::size_t paths = 0;
  double process_bound = 0;
  std::vector<double> phi;
  std::vector<TraceRow> rows;
  CesaroTrace fbar;  // T|fbar_n| over the n grid
  CesaroTrace gbar;  // T|gbar_n| with the Cesaro bound
  std::vector<CheckReport> claims;

  bool passed() const;
};

/// Builds the certificate, checks it, and then verifies the chain of bounds on
/// every (n, M, B) cell. Throws CertificateError when the certificate fails.
WllnReport wlln_experiment(const ExperimentSpec& spec);

/// Certificate for the materialised sequence `f` under `directive`; minimal
/// modes compute Phi_1..Phi_{max_lag + 1}.
MixingaleCertificate build_certificate(std::span<const Element> f, const Filtration& filtration,
                                       const CertificateDirective& directive, int max_lag);

/// Certificate for `model` under `directive` with max lag `max_lag`, its LHS
/// realised exactly from the term tables (global T is the expectation, so
/// T-values are scalars on a one-atom space).
struct ScalarCertificate {
  MixingaleCertificate certificate;
  MixingaleLhs lhs;
  SpacePtr range;  // one-atom space standing in for R(T)
};
ScalarCertificate scalar_certificate(const ProcessModel& model, const CertificateDirective& directive,
                                     int max_lag);

}  // namespace rieszmix
