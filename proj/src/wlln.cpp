#include "rieszmix/wlln.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rieszmix/errors.hpp"

namespace rieszmix {

double cesaro_bound(double bound, int n) {
  return (1.0 + 4.0 * bound * bound) / (2.0 * std::sqrt(static_cast<double>(n)));
}

std::vector<const CheckReport*> MartingaleBoundReport::claims() const {
  return {&increments, &differences, &martingale, &orthogonality, &square_identity, &square_bound, &cesaro};
}

bool MartingaleBoundReport::passed() const {
  const auto all = claims();
  return std::all_of(all.begin(), all.end(), [](const CheckReport* r) { return r->passed; });
}

MartingaleBoundReport martingale_cesaro_bound(const AdaptedSequence& f, double bound) {
  if (!(bound > 0.0)) throw ArgumentError("the uniform bound B must be positive");
  for (int i = 1; i <= f.length(); ++i) {
    const Element& fi = f.term(i);
    for (std::size_t a = 0; a < fi.size(); ++a) {
      if (std::abs(fi[a]) > bound) {
        std::ostringstream msg;
        msg << "|f_" << i << "| <= B e fails at atom " << a << ": |" << fi[a] << "| > " << bound;
        throw PreconditionError(msg.str());
      }
    }
  }

  MartingaleBoundReport report;
  report.bound = bound;
  const Filtration& F = f.filtration();
  const CondExpectation& t = F.global();
  const AdaptedSequence g = martingale_difference_from(f);
  const int n_max = g.length();

  for (int i = 1; i <= n_max; ++i)
    report.increments.observe(g.term(i).sup_norm() - 2.0 * bound, kIdentityTolerance,
                              "i=" + std::to_string(i));
  report.differences = martingale_difference_check(g);

  const std::vector<Element> s = partial_sums(g);
  report.martingale.merge(is_martingale(std::span(s).subspan(1), F));

  std::vector<Element> t_sq;  // T(g_i^2)
  for (int i = 1; i <= n_max; ++i) {
    t_sq.push_back(t(g.term(i) * g.term(i)));
    for (int j = i + 1; j <= n_max; ++j)
      report.orthogonality.observe(t(g.term(i) * g.term(j)).sup_norm(), kInequalitySlack,
                                   [i, j] { return "i=" + std::to_string(i) + " j=" + std::to_string(j); });
  }

  Element sum_sq = Element::zero(F.space());
  for (int n = 1; n <= n_max; ++n) {
    const Element& sn = s[static_cast<std::size_t>(n)];
    sum_sq = sum_sq + t_sq[static_cast<std::size_t>(n - 1)];
    const Element lhs = t(sn * sn);
    double rel = 0.0;
    for (std::size_t a = 0; a < lhs.size(); ++a)
      rel = std::max(rel, std::abs(lhs[a] - sum_sq[a]) / std::max(std::abs(sum_sq[a]), 1e-12));
    report.square_identity.observe(rel, kSquareIdentityTolerance, "n=" + std::to_string(n));

    const double square_cap = 4.0 * n * bound * bound;
    report.square_bound.observe(lhs.max() - square_cap, kInequalitySlack, "n=" + std::to_string(n));

    const Element tg = t(abs(sn / static_cast<double>(n)));
    const double cap = cesaro_bound(bound, n);
    report.cesaro.observe(tg.max() - cap, kInequalitySlack, "n=" + std::to_string(n));
    report.trace.n_grid.push_back(n);
    report.trace.values.push_back(tg);
    report.trace.bound.push_back(cap);
  }
  return report;
}

CheckReport signum_inequality_check(const Element& s, int n, const CondExpectation& t) {
  if (n < 1) throw ArgumentError("n must be at least 1");
  CheckReport report("signum inequality e/sqrt(n) + s^2/n^{3/2} >= 2|s|/n");
  const SpacePtr& space = s.space();
  const Element e = Element::unit(space);
  const Element j = signum_projection(s);
  report.observe(max_abs_diff(j * j, e), kIdentityTolerance, "(Je)^2 = e");
  report.observe(max_abs_diff(j * s, abs(s)), kIdentityTolerance, "(Je) s = |s|");

  const double dn = static_cast<double>(n);
  const Element lhs = e / std::sqrt(dn) + (s * s) / std::pow(dn, 1.5);
  const Element rhs = (2.0 / dn) * abs(s);
  report.observe(max_excess(rhs, lhs), kIdentityTolerance,
                 [&] { return "pointwise at atom " + std::to_string(argmax_excess(rhs, lhs)); });
  const Element tl = t(lhs);
  const Element tr = t(rhs);
  report.observe(max_excess(tr, tl), kIdentityTolerance,
                 [&] { return "T-image at atom " + std::to_string(argmax_excess(tr, tl)); });
  return report;
}

double TelescopeParts::reconstruction_error() const {
  return max_abs_diff(tail + middle + head, fbar);
}

namespace {

void require_horizon(std::span<const Element> f, int n) {
  if (n < 1 || n > static_cast<int>(f.size()))
    throw ArgumentError("n = " + std::to_string(n) + " is outside 1.." + std::to_string(f.size()));
}

Element cesaro_mean(std::span<const Element> f, int n) {
  Element sum = f[0];
  for (int i = 2; i <= n; ++i) sum = sum + f[static_cast<std::size_t>(i - 1)];
  return sum / static_cast<double>(n);
}

}  // namespace

Element y_bar(std::span<const Element> f, const Filtration& filtration, int m, int n) {
  require_horizon(f, n);
  Element sum = Element::zero(filtration.space());
  for (int i = 1; i <= n; ++i) {
    const Element& fi = f[static_cast<std::size_t>(i - 1)];
    sum = sum + (filtration.at(i + m)(fi) - filtration.at(i + m - 1)(fi));
  }
  return sum / static_cast<double>(n);
}

TelescopeParts telescope(std::span<const Element> f, const Filtration& filtration, int lag, int n) {
  if (lag < 1) throw ArgumentError("telescoping lag M must be at least 1");
  require_horizon(f, n);
  const SpacePtr& space = filtration.space();
  Element tail = Element::zero(space);
  Element head = Element::zero(space);
  for (int i = 1; i <= n; ++i) {
    const Element& fi = f[static_cast<std::size_t>(i - 1)];
    tail = tail + (fi - filtration.at(i + lag)(fi));
    head = head + filtration.at(i - lag)(fi);
  }
  Element middle = Element::zero(space);
  for (int m = -lag + 1; m <= lag; ++m) middle = middle + y_bar(f, filtration, m, n);
  const double dn = static_cast<double>(n);
  return TelescopeParts{lag, n, cesaro_mean(f, n), tail / dn, std::move(middle), head / dn};
}

YTraceReport ymn_trace(std::span<const Element> f, const Filtration& filtration, int m,
                       std::span<const int> n_grid) {
  YTraceReport report;
  if (n_grid.empty()) return report;
  const int n_max = *std::max_element(n_grid.begin(), n_grid.end());
  require_horizon(f, n_max);

  std::vector<Element> y;
  for (int i = 1; i <= n_max; ++i) {
    const Element& fi = f[static_cast<std::size_t>(i - 1)];
    const Element upper = filtration.at(i + m)(fi);
    report.effective_bound = std::max(report.effective_bound, upper.sup_norm());
    y.push_back(upper - filtration.at(i + m - 1)(fi));
  }
  // (y_{m,i}) is adapted to (T_{i+m}) and T_{k+m} y_{m,i} = 0 for k < i.
  for (int i = 1; i <= n_max; ++i) {
    const Element& yi = y[static_cast<std::size_t>(i - 1)];
    report.differences.observe(max_abs_diff(filtration.at(i + m)(yi), yi), kIdentityTolerance,
                               "adaptedness i=" + std::to_string(i));
    for (int k = 0; k < i; ++k)
      report.differences.observe(filtration.at(k + m)(yi).sup_norm(), kIdentityTolerance,
                                 [i, k] { return "k=" + std::to_string(k) + " i=" + std::to_string(i); });
  }

  const CondExpectation& t = filtration.global();
  const double beff = std::max(report.effective_bound, std::numeric_limits<double>::min());
  for (int n : n_grid) {
    Element sum = Element::zero(filtration.space());
    for (int i = 1; i <= n; ++i) sum = sum + y[static_cast<std::size_t>(i - 1)];
    const Element value = t(abs(sum / static_cast<double>(n)));
    const double cap = cesaro_bound(beff, n);
    report.cesaro.observe(value.max() - cap, kInequalitySlack, "n=" + std::to_string(n));
    report.trace.n_grid.push_back(n);
    report.trace.values.push_back(value);
    report.trace.bound.push_back(cap);
  }
  return report;
}

TruncationSplit truncation_split(const Element& f, double bound) {
  if (!(bound > 0.0)) throw ArgumentError("truncation bound must be positive");
  const BandProjection p = truncation_band(f, bound);
  return TruncationSplit{p.complement()(f), p(f)};
}

std::string_view to_string(Backend backend) {
  return backend == Backend::exhaustive ? "exhaustive" : "monte-carlo";
}

std::string_view to_string(CertificateMode mode) {
  switch (mode) {
    case CertificateMode::minimal: return "minimal";
    case CertificateMode::given: return "given";
    case CertificateMode::t_abs: return "t-abs";
  }
  return "?";
}

bool WllnReport::passed() const {
  return std::all_of(claims.begin(), claims.end(), [](const CheckReport& r) { return r.passed; });
}

MixingaleCertificate build_certificate(std::span<const Element> f, const Filtration& filtration,
                                       const CertificateDirective& directive, int max_lag) {
  MixingaleCertificate cert;
  const CondExpectation& t = filtration.global();
  for (const Element& fi : f)
    cert.c.push_back(directive.mode == CertificateMode::t_abs ? t(abs(fi))
                                                             : Element::constant(filtration.space(), directive.c_scale));
  if (directive.mode == CertificateMode::given) {
    cert.phi = directive.phi;
    cert.phi_tail_zero = directive.phi_tail_zero;
  } else {
    cert.phi = minimal_phi(f, filtration, cert.c, max_lag + 1);
  }
  return cert;
}

ScalarCertificate scalar_certificate(const ProcessModel& model, const CertificateDirective& directive,
                                     int max_lag) {
  ScalarCertificate out;
  out.range = SampleSpace::create({1.0});
  const SpacePtr range = out.range;
  const InnovationLaw law = model.law;
  const std::vector<LocalFunctional> terms = model.terms;
  out.lhs = [range, law, terms](int i, int m, MixingaleSide side) {
    const LocalFunctional& fi = terms[static_cast<std::size_t>(i - 1)];
    const auto absval = [](double v) { return std::abs(v); };
    double value = 0.0;
    if (side == MixingaleSide::lagged) {
      value = fi.conditioned(std::max(i - m, 0), law).map(absval).expectation(law);
    } else {
      const auto upper = fi.conditioned(i + m, law);
      value = LocalFunctional::combine(fi, upper, [](double a, double b) { return std::abs(a - b); })
                  .expectation(law);
    }
    return Element::constant(range, value);
  };

  auto& cert = out.certificate;
  for (const auto& fi : model.terms) {
    const double c = directive.mode == CertificateMode::t_abs
                         ? fi.map([](double v) { return std::abs(v); }).expectation(law)
                         : directive.c_scale;
    cert.c.push_back(Element::constant(range, c));
  }
  if (directive.mode == CertificateMode::given) {
    cert.phi = directive.phi;
    cert.phi_tail_zero = directive.phi_tail_zero;
  } else {
    cert.phi = minimal_phi(static_cast<int>(model.terms.size()), out.lhs, cert.c, max_lag + 1);
  }
  return out;
}

namespace {

// Weighted first and second moments of a per-path quantity.
struct Moments {
  double weight = 0.0;
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t count = 0;

  void add(double w, double x) {
    weight += w;
    sum += w * x;
    sum_sq += w * x * x;
    ++count;
  }
  double mean() const { return weight > 0.0 ? sum / weight : 0.0; }
  double se(bool exact) const {
    if (exact || count < 2) return 0.0;
    const double m = mean();
    const double var = std::max(sum_sq / weight - m * m, 0.0);
    return std::sqrt(var / static_cast<double>(count - 1));
  }
};

std::vector<double> certificate_c_values(const MixingaleCertificate& cert) {
  std::vector<double> c;
  for (const auto& e : cert.c) c.push_back(e[0]);
  return c;
}

void validate_schedule(const Schedule& s, int horizon) {
  if (s.n_grid.empty() || s.lag_grid.empty() || s.bound_grid.empty())
    throw ArgumentError("schedule grids must be nonempty");
  for (std::size_t k = 0; k < s.n_grid.size(); ++k)
    if (s.n_grid[k] < 1 || (k > 0 && s.n_grid[k] <= s.n_grid[k - 1]))
      throw ArgumentError("n_grid must be positive and strictly increasing");
  for (std::size_t k = 0; k < s.lag_grid.size(); ++k)
    if (s.lag_grid[k] < 1 || (k > 0 && s.lag_grid[k] <= s.lag_grid[k - 1]))
      throw ArgumentError("M_grid must be positive and strictly increasing");
  for (std::size_t k = 0; k < s.bound_grid.size(); ++k)
    if (!(s.bound_grid[k] > 0.0) || (k > 0 && s.bound_grid[k] <= s.bound_grid[k - 1]))
      throw ArgumentError("B_grid must be positive and strictly increasing");
  if (s.n_grid.back() > horizon)
    throw ArgumentError("n_grid exceeds the process horizon " + std::to_string(horizon));
}

std::string certificate_diagnostic(const MixingaleReport& mix, const CheckReport& validity) {
  std::ostringstream msg;
  msg << "mixingale certificate rejected";
  if (!validity.passed) {
    msg << ": " << validity.where;
    for (const auto& n : validity.notes) msg << "; " << n;
  }
  if (!mix.passed())
    msg << ": worst violation " << mix.check.worst << " at i=" << mix.worst_i << " m=" << mix.worst_m
        << " side=" << (mix.worst_side == MixingaleSide::lagged ? "(i)" : "(ii)");
  return msg.str();
}

void certify(WllnReport& report, const MixingaleCertificate& cert, const MixingaleReport& mix,
             double epsilon) {
  CheckReport validity = validate_certificate(cert, epsilon);
  report.phi = cert.phi;
  if (!validity.passed || !mix.passed()) throw CertificateError(certificate_diagnostic(mix, validity));
  report.claims.push_back(validity);
  report.claims.push_back(mix.check);
}

int lag_index(int m, int max_lag) { return m + max_lag - 1; }  // m in [-max_lag+1, max_lag]

std::vector<double> sorted_levels(const Schedule& s, double process_bound) {
  std::vector<double> levels(s.bound_grid.begin(), s.bound_grid.end());
  levels.push_back(process_bound);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  return levels;
}

// ---------------------------------------------------------------------------
// Exhaustive backend: materialised elements and partition operators.

WllnReport run_exhaustive(const ExperimentSpec& spec, const ProcessModel& model) {
  const ProductSpace ps = build_product_space(model.law, model.horizon, spec.atom_cap);
  const AdaptedSequence seq = materialize(ps, model);
  const Filtration& F = seq.filtration();
  const CondExpectation& t = F.global();
  const SpacePtr& space = ps.space;
  const Schedule& sched = spec.schedule;
  const int max_lag = sched.lag_grid.back();
  const int n_max = sched.n_grid.back();
  const auto terms = seq.terms();

  WllnReport report;
  report.id = spec.id;
  report.backend = Backend::exhaustive;
  report.seed = spec.seed;
  report.process_bound = model.bound();

  const MixingaleCertificate cert = build_certificate(terms, F, spec.certificate, max_lag);
  certify(report, cert, check_mixingale(terms, F, cert, max_lag), spec.certificate.epsilon);
  report.claims.push_back(t_mean_zero_check(terms, F));

  const std::vector<double> levels = sorted_levels(sched, report.process_bound);
  const UniformityProfile profile = uniformity_profile(terms, t, levels);
  report.claims.push_back(profile.monotone);
  report.claims.push_back(uniform_bound_check(profile, terms, t, spec.certificate.epsilon).check);

  const MartingaleBoundReport mb = martingale_cesaro_bound(seq, report.process_bound);
  for (const CheckReport* c : mb.claims()) report.claims.push_back(*c);

  // T|ybar_{m,n}| for f and for the two truncation parts, via running sums.
  const std::size_t n_lags = static_cast<std::size_t>(2 * max_lag);
  const std::size_t n_levels = sched.bound_grid.size();
  const std::size_t n_cells = sched.n_grid.size();
  std::vector<std::vector<Element>> ty(n_lags), ty_bounded(n_lags * n_levels), ty_excess(n_lags * n_levels);
  std::vector<std::vector<Element>> sup_td(n_levels);  // sup_{i<=n} T|d_i|

  std::vector<std::vector<Element>> bounded_parts(n_levels), excess_parts(n_levels);
  for (std::size_t b = 0; b < n_levels; ++b)
    for (int i = 1; i <= n_max; ++i) {
      auto split = truncation_split(seq.term(i), sched.bound_grid[b]);
      bounded_parts[b].push_back(std::move(split.bounded));
      excess_parts[b].push_back(std::move(split.excess));
    }

  const auto accumulate = [&](std::span<const Element> x, int m, std::vector<Element>& out) {
    Element sum = Element::zero(space);
    std::size_t cell = 0;
    for (int i = 1; i <= n_max && cell < n_cells; ++i) {
      const Element& xi = x[static_cast<std::size_t>(i - 1)];
      sum = sum + (F.at(i + m)(xi) - F.at(i + m - 1)(xi));
      if (i == sched.n_grid[cell]) {
        out.push_back(t(abs(sum / static_cast<double>(i))));
        ++cell;
      }
    }
  };
  for (int m = -max_lag + 1; m <= max_lag; ++m) {
    const auto li = static_cast<std::size_t>(lag_index(m, max_lag));
    accumulate(terms, m, ty[li]);
    for (std::size_t b = 0; b < n_levels; ++b) {
      accumulate(bounded_parts[b], m, ty_bounded[li * n_levels + b]);
      accumulate(excess_parts[b], m, ty_excess[li * n_levels + b]);
    }
  }
  for (std::size_t b = 0; b < n_levels; ++b) {
    Element running = Element::zero(space);
    std::size_t cell = 0;
    for (int i = 1; i <= n_max && cell < n_cells; ++i) {
      running = sup(running, t(abs(excess_parts[b][static_cast<std::size_t>(i - 1)])));
      if (i == sched.n_grid[cell]) {
        sup_td[b].push_back(running);
        ++cell;
      }
    }
  }

  CheckReport chain("chain of bounds T|fbar_n| <= Phi tail + sum T|ybar| + Phi head");
  CheckReport excess_claim("truncated part: T|ybar(d)| <= 2 sup T P|f_i|");
  CheckReport bounded_claim("bounded part: T|ybar(h)| under the Cesaro bound");
  CheckReport tele("telescoping identity");

  for (std::size_t k = 0; k < n_cells; ++k) {
    const int n = sched.n_grid[k];
    const double dn = static_cast<double>(n);
    const Element tf = t(abs(cesaro_mean(terms, n)));
    report.fbar.n_grid.push_back(n);
    report.fbar.values.push_back(tf);
    const Element& tg = mb.trace.values[static_cast<std::size_t>(n - 1)];
    report.gbar.n_grid.push_back(n);
    report.gbar.values.push_back(tg);
    report.gbar.bound.push_back(mb.trace.bound[static_cast<std::size_t>(n - 1)]);

    Element mean_c = Element::zero(space);
    for (int i = 1; i <= n; ++i) mean_c = mean_c + cert.c[static_cast<std::size_t>(i - 1)];
    mean_c = mean_c / dn;

    for (int lag : sched.lag_grid) {
      const TelescopeParts parts = telescope(terms, F, lag, n);
      const double tele_err = parts.reconstruction_error();
      tele.observe(tele_err, kIdentityTolerance, "n=" + std::to_string(n) + " M=" + std::to_string(lag));

      Element rhs = (*cert.phi_at(lag + 1) + *cert.phi_at(lag)) * mean_c;
      for (int m = -lag + 1; m <= lag; ++m) rhs = rhs + ty[static_cast<std::size_t>(lag_index(m, max_lag))][k];
      const double chain_excess = max_excess(tf, rhs);
      chain.observe(chain_excess, kInequalitySlack, "n=" + std::to_string(n) + " M=" + std::to_string(lag));

      for (std::size_t b = 0; b < n_levels; ++b) {
        const double level = sched.bound_grid[b];
        TraceRow row;
        row.n = n;
        row.lag = lag;
        row.level = level;
        row.tfbar = tf.max();
        row.chain_bound = rhs.max();
        row.chain_pass = chain_excess <= kInequalitySlack;
        row.telescope_error = tele_err;
        row.gbar = tg.max();
        row.gbar_bound = mb.trace.bound[static_cast<std::size_t>(n - 1)];
        row.gbar_pass = row.gbar <= row.gbar_bound + kInequalitySlack;

        const Element excess_cap = 2.0 * sup_td[b][k];
        const double bounded_cap = cesaro_bound(level, n);
        double excess_worst = -std::numeric_limits<double>::infinity();
        double bounded_worst = -std::numeric_limits<double>::infinity();
        for (int m = -lag + 1; m <= lag; ++m) {
          const auto li = static_cast<std::size_t>(lag_index(m, max_lag));
          const Element& te = ty_excess[li * n_levels + b][k];
          const Element& th = ty_bounded[li * n_levels + b][k];
          row.excess_lhs = std::max(row.excess_lhs, te.max());
          row.bounded_lhs = std::max(row.bounded_lhs, th.max());
          excess_worst = std::max(excess_worst, max_excess(te, excess_cap));
          bounded_worst = std::max(bounded_worst, th.max() - bounded_cap);
        }
        row.excess_bound = excess_cap.max();
        row.excess_pass = excess_worst <= kInequalitySlack;
        row.bounded_bound = bounded_cap;
        row.bounded_pass = bounded_worst <= kInequalitySlack;
        const std::string cell = "n=" + std::to_string(n) + " M=" + std::to_string(lag) +
                                 " B=" + std::to_string(level);
        excess_claim.observe(excess_worst, kInequalitySlack, cell);
        bounded_claim.observe(bounded_worst, kInequalitySlack, cell);
        report.rows.push_back(row);
      }
    }
  }
  report.claims.push_back(chain);
  report.claims.push_back(excess_claim);
  report.claims.push_back(bounded_claim);
  report.claims.push_back(tele);
  return report;
}

// ---------------------------------------------------------------------------
// Path backend: exact conditioning on term tables, T estimated over paths.

// A term with its conditional expectations T_j x for every level j that can
// differ: levels first-1 (the constant E x) through last (x itself).
struct LevelTables {
  int low = 0;  // first - 1
  std::vector<LocalFunctional> by_level;

  LevelTables(const LocalFunctional& x, int index, const InnovationLaw& law) {
    low = x.is_constant() ? index : x.first() - 1;
    const int high = x.is_constant() ? index : x.last();
    for (int j = low; j <= high; ++j) by_level.push_back(x.conditioned(j, law));
  }
  void evaluate(std::span<const std::uint8_t> path, std::vector<double>& out) const {
    out.resize(by_level.size());
    for (std::size_t k = 0; k < by_level.size(); ++k) out[k] = by_level[k].evaluate(path);
  }
  // T_j x on the path, given the evaluated levels.
  double at(int j, const std::vector<double>& vals) const {
    const int k = std::clamp(j - low, 0, static_cast<int>(vals.size()) - 1);
    return vals[static_cast<std::size_t>(k)];
  }
};

WllnReport run_paths(const ExperimentSpec& spec, const ProcessModel& model, const PathSet& paths) {
  const Schedule& sched = spec.schedule;
  const int max_lag = sched.lag_grid.back();
  const int n_max = sched.n_grid.back();
  const std::size_t n_cells = sched.n_grid.size();
  const std::size_t n_lags = static_cast<std::size_t>(2 * max_lag);
  const std::size_t n_levels = sched.bound_grid.size();
  const std::size_t n_m = sched.lag_grid.size();
  const InnovationLaw& law = model.law;
  const bool exact = paths.exact();

  WllnReport report;
  report.id = spec.id;
  report.backend = Backend::monte_carlo;
  report.seed = spec.seed;
  report.paths = paths.count();
  report.process_bound = model.bound();

  ProcessModel window = model;
  window.terms.erase(window.terms.begin() + n_max, window.terms.end());
  window.horizon = n_max;
  const ScalarCertificate sc = scalar_certificate(window, spec.certificate, max_lag);
  certify(report, sc.certificate, check_mixingale(n_max, sc.lhs, sc.certificate, max_lag),
          spec.certificate.epsilon);
  const std::vector<double> c = certificate_c_values(sc.certificate);

  // Exact T-quantities from the tables.
  CheckReport mean_zero("T-mean zero: T f_i = 0");
  std::vector<std::vector<double>> e_excess(n_levels);  // E|d_i| per level
  double process_bound = 0.0;
  std::vector<LevelTables> f_tab;
  std::vector<std::vector<LevelTables>> h_tab(n_levels), d_tab(n_levels);
  for (int i = 1; i <= n_max; ++i) {
    const LocalFunctional& fi = window.term(i);
    process_bound = std::max(process_bound, fi.sup_norm());
    mean_zero.observe(std::abs(fi.expectation(law)), kInequalitySlack, "i=" + std::to_string(i));
    f_tab.emplace_back(fi, i, law);
    for (std::size_t b = 0; b < n_levels; ++b) {
      const double level = sched.bound_grid[b];
      const auto h = fi.map([level](double v) { return std::abs(v) > level ? 0.0 : v; });
      const auto d = fi.map([level](double v) { return std::abs(v) > level ? v : 0.0; });
      e_excess[b].push_back(d.map([](double v) { return std::abs(v); }).expectation(law));
      h_tab[b].emplace_back(h, i, law);
      d_tab[b].emplace_back(d, i, law);
    }
  }
  report.claims.push_back(mean_zero);

  // Per-cell accumulators.
  std::vector<Moments> m_fbar(n_cells), m_gbar(n_cells), m_sqdiff(n_cells);
  std::vector<Moments> m_chain(n_cells * n_m);
  std::vector<Moments> m_y(n_cells * n_lags);
  std::vector<Moments> m_h(n_cells * n_levels * n_lags), m_d(n_cells * n_levels * n_lags);
  std::vector<double> tele_err(n_cells * n_m, 0.0);

  std::vector<double> y(n_lags), tail(n_m), head(n_m);
  std::vector<double> yh(n_levels * n_lags), yd(n_levels * n_lags);
  std::vector<double> fv, hv, dv;

  paths.for_each([&](std::span<const std::uint8_t> path, double w) {
    double sf = 0.0, sg = 0.0, sg2 = 0.0;
    std::fill(y.begin(), y.end(), 0.0);
    std::fill(tail.begin(), tail.end(), 0.0);
    std::fill(head.begin(), head.end(), 0.0);
    std::fill(yh.begin(), yh.end(), 0.0);
    std::fill(yd.begin(), yd.end(), 0.0);
    std::size_t cell = 0;
    for (int i = 1; i <= n_max; ++i) {
      const LevelTables& ft = f_tab[static_cast<std::size_t>(i - 1)];
      ft.evaluate(path, fv);
      const double fi = ft.at(i, fv);
      const double gi = fi - ft.at(i - 1, fv);
      sf += fi;
      sg += gi;
      sg2 += gi * gi;
      for (int m = -max_lag + 1; m <= max_lag; ++m)
        y[static_cast<std::size_t>(lag_index(m, max_lag))] += ft.at(i + m, fv) - ft.at(i + m - 1, fv);
      for (std::size_t k = 0; k < n_m; ++k) {
        const int lag = sched.lag_grid[k];
        tail[k] += fi - ft.at(i + lag, fv);
        head[k] += ft.at(i - lag, fv);
      }
      for (std::size_t b = 0; b < n_levels; ++b) {
        const LevelTables& ht = h_tab[b][static_cast<std::size_t>(i - 1)];
        const LevelTables& dt = d_tab[b][static_cast<std::size_t>(i - 1)];
        ht.evaluate(path, hv);
        dt.evaluate(path, dv);
        for (int m = -max_lag + 1; m <= max_lag; ++m) {
          const auto li = static_cast<std::size_t>(lag_index(m, max_lag));
          yh[b * n_lags + li] += ht.at(i + m, hv) - ht.at(i + m - 1, hv);
          yd[b * n_lags + li] += dt.at(i + m, dv) - dt.at(i + m - 1, dv);
        }
      }

      if (cell < n_cells && i == sched.n_grid[cell]) {
        const double dn = static_cast<double>(i);
        const double fbar = sf / dn;
        m_fbar[cell].add(w, std::abs(fbar));
        m_gbar[cell].add(w, std::abs(sg / dn));
        m_sqdiff[cell].add(w, sg * sg - sg2);
        for (std::size_t li = 0; li < n_lags; ++li) m_y[cell * n_lags + li].add(w, std::abs(y[li] / dn));
        for (std::size_t k = 0; k < n_m; ++k) {
          const int lag = sched.lag_grid[k];
          double middle = 0.0, ysum = 0.0;
          for (int m = -lag + 1; m <= lag; ++m) {
            const double v = y[static_cast<std::size_t>(lag_index(m, max_lag))] / dn;
            middle += v;
            ysum += std::abs(v);
          }
          m_chain[cell * n_m + k].add(w, std::abs(fbar) - ysum);
          const double err = std::abs(tail[k] / dn + middle + head[k] / dn - fbar);
          tele_err[cell * n_m + k] = std::max(tele_err[cell * n_m + k], err);
        }
        for (std::size_t b = 0; b < n_levels; ++b)
          for (std::size_t li = 0; li < n_lags; ++li) {
            const std::size_t slot = (cell * n_levels + b) * n_lags + li;
            m_h[slot].add(w, std::abs(yh[b * n_lags + li] / dn));
            m_d[slot].add(w, std::abs(yd[b * n_lags + li] / dn));
          }
        ++cell;
      }
    }
  });

  const SpacePtr range = sc.range;
  const auto se_of = [exact](const Moments& m) { return m.se(exact); };
  const double sigma = exact ? 0.0 : kSigmaSlack;

  CheckReport square_identity("square identity: T(s_n^2) = sum T(g_i^2)");
  CheckReport cesaro("Cesaro bound: T|gbar_n| <= (1 + 4B^2) / (2 sqrt n) e");
  CheckReport chain("chain of bounds T|fbar_n| <= Phi tail + sum T|ybar| + Phi head");
  CheckReport excess_claim("truncated part: T|ybar(d)| <= 2 sup T P|f_i|");
  CheckReport bounded_claim("bounded part: T|ybar(h)| under the Cesaro bound");
  CheckReport tele("telescoping identity");
  if (!exact) {
    const std::string note = "statistical backend: " + std::to_string(paths.count()) + " paths, " +
                             std::string(PathSet::kGenerator) + " seed " + std::to_string(paths.seed()) +
                             ", tolerance 3 SE";
    for (auto* r : {&square_identity, &cesaro, &chain, &excess_claim, &bounded_claim}) r->notes.push_back(note);
  }

  for (std::size_t k = 0; k < n_cells; ++k) {
    const int n = sched.n_grid[k];
    const double dn = static_cast<double>(n);
    const std::string at_n = "n=" + std::to_string(n);

    const double tf = m_fbar[k].mean();
    report.fbar.n_grid.push_back(n);
    report.fbar.values.push_back(Element::constant(range, tf));
    report.fbar.standard_error.push_back(se_of(m_fbar[k]));

    const double tg = m_gbar[k].mean();
    const double g_cap = cesaro_bound(process_bound, n);
    report.gbar.n_grid.push_back(n);
    report.gbar.values.push_back(Element::constant(range, tg));
    report.gbar.bound.push_back(g_cap);
    report.gbar.standard_error.push_back(se_of(m_gbar[k]));
    cesaro.observe(tg - g_cap - sigma * se_of(m_gbar[k]), kInequalitySlack, at_n);

    // Exactly zero in expectation; the sample mean must sit within 3 SE.
    const double diff = std::abs(m_sqdiff[k].mean());
    if (exact) {
      square_identity.observe(diff, kSquareIdentityTolerance * std::max(1.0, 4.0 * dn * process_bound * process_bound), at_n);
    } else {
      square_identity.observe(diff - sigma * se_of(m_sqdiff[k]), kInequalitySlack, at_n);
    }

    double mean_c = 0.0;
    for (int i = 1; i <= n; ++i) mean_c += c[static_cast<std::size_t>(i - 1)];
    mean_c /= dn;

    for (std::size_t mk = 0; mk < n_m; ++mk) {
      const int lag = sched.lag_grid[mk];
      const std::string at_nm = at_n + " M=" + std::to_string(lag);
      const double phi_part = (*sc.certificate.phi_at(lag + 1) + *sc.certificate.phi_at(lag)) * mean_c;
      double ysum = 0.0;
      for (int m = -lag + 1; m <= lag; ++m) ysum += m_y[k * n_lags + static_cast<std::size_t>(lag_index(m, max_lag))].mean();
      const Moments& cm = m_chain[k * n_m + mk];
      const double chain_excess = cm.mean() - phi_part - sigma * se_of(cm);
      chain.observe(chain_excess, kInequalitySlack, at_nm);
      const double terr = tele_err[k * n_m + mk];
      tele.observe(terr, kIdentityTolerance, at_nm);

      for (std::size_t b = 0; b < n_levels; ++b) {
        const double level = sched.bound_grid[b];
        TraceRow row;
        row.n = n;
        row.lag = lag;
        row.level = level;
        row.tfbar = tf;
        row.tfbar_se = se_of(m_fbar[k]);
        row.chain_bound = phi_part + ysum;
        row.chain_pass = chain_excess <= kInequalitySlack;
        row.telescope_error = terr;
        row.gbar = tg;
        row.gbar_bound = g_cap;
        row.gbar_pass = tg - g_cap - sigma * se_of(m_gbar[k]) <= kInequalitySlack;

        double sup_excess = 0.0;
        for (int i = 1; i <= n; ++i) sup_excess = std::max(sup_excess, e_excess[b][static_cast<std::size_t>(i - 1)]);
        row.excess_bound = 2.0 * sup_excess;
        row.bounded_bound = cesaro_bound(level, n);
        double excess_worst = -std::numeric_limits<double>::infinity();
        double bounded_worst = -std::numeric_limits<double>::infinity();
        for (int m = -lag + 1; m <= lag; ++m) {
          const std::size_t slot = (k * n_levels + b) * n_lags + static_cast<std::size_t>(lag_index(m, max_lag));
          row.excess_lhs = std::max(row.excess_lhs, m_d[slot].mean());
          row.bounded_lhs = std::max(row.bounded_lhs, m_h[slot].mean());
          excess_worst = std::max(excess_worst, m_d[slot].mean() - row.excess_bound - sigma * se_of(m_d[slot]));
          bounded_worst = std::max(bounded_worst, m_h[slot].mean() - row.bounded_bound - sigma * se_of(m_h[slot]));
        }
        row.excess_pass = excess_worst <= kInequalitySlack;
        row.bounded_pass = bounded_worst <= kInequalitySlack;
        const std::string cell = at_nm + " B=" + std::to_string(level);
        excess_claim.observe(excess_worst, kInequalitySlack, cell);
        bounded_claim.observe(bounded_worst, kInequalitySlack, cell);
        report.rows.push_back(row);
      }
    }
  }
  for (auto* r : {&square_identity, &cesaro, &chain, &excess_claim, &bounded_claim, &tele})
    report.claims.push_back(*r);
  return report;
}

}  // namespace

WllnReport wlln_experiment(const ExperimentSpec& spec) {
  const ProcessModel model = make_process(spec.process);
  validate_schedule(spec.schedule, model.horizon);
  const auto& dir = spec.certificate;
  if (dir.mode == CertificateMode::given && !dir.phi_tail_zero &&
      static_cast<int>(dir.phi.size()) < spec.schedule.lag_grid.back() + 1)
    throw ArgumentError("given Phi must cover lags up to max(M_grid) + 1 unless phi_tail_zero is set");

  WllnReport report;
  if (spec.backend == Backend::exhaustive) {
    report = run_exhaustive(spec, model);
  } else {
    const int n_max = spec.schedule.n_grid.back();
    const PathSet paths = spec.paths == 0
                              ? PathSet::enumerate(model.law, n_max, spec.atom_cap)
                              : PathSet::sample(model.law, n_max, spec.paths, spec.seed);
    report = run_paths(spec, model, paths);
  }

  if (spec.decay_threshold) {
    CheckReport decay("Cesaro mean decay: T|fbar_n| below threshold at the largest n");
    const std::size_t last = report.fbar.values.size() - 1;
    const double value = report.fbar.max_component(last);
    decay.observe(value - *spec.decay_threshold, 0.0, "n=" + std::to_string(report.fbar.n_grid[last]));
    report.claims.push_back(decay);
  }
  return report;
}

}  // namespace rieszmix
