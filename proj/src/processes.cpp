#include "rieszmix/processes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <sstream>

#include "rieszmix/errors.hpp"

namespace rieszmix {

namespace {

std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int k = 0; k < exp; ++k) r *= base;
  return r;
}

}  // namespace

double InnovationLaw::mean() const {
  double m = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) m += values[k] * probs[k];
  return m;
}

void InnovationLaw::validate() const {
  if (values.empty()) throw ArgumentError("innovation support is empty");
  if (values.size() > 255) throw ArgumentError("innovation support larger than 255 values");
  if (values.size() != probs.size())
    throw ArgumentError("innovation values and probabilities differ in length");
  double total = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (!(probs[k] > 0.0)) throw ArgumentError("innovation probability must be strictly positive");
    if (!std::isfinite(values[k])) throw ArgumentError("innovation value must be finite");
    total += probs[k];
  }
  if (std::abs(total - 1.0) > 1e-12) throw ArgumentError("innovation probabilities must sum to 1");
}

std::string_view to_string(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::independent: return "independent-innovations";
    case ProcessKind::moving_average: return "moving-average";
    case ProcessKind::martingale_difference: return "martingale-difference";
    case ProcessKind::custom: return "custom";
  }
  return "?";
}

std::optional<ProcessKind> parse_process_kind(std::string_view name) {
  for (auto k : {ProcessKind::independent, ProcessKind::moving_average,
                 ProcessKind::martingale_difference, ProcessKind::custom})
    if (to_string(k) == name) return k;
  return std::nullopt;
}

void ProcessSpec::validate() const {
  innovations.validate();
  if (horizon < 1) throw ArgumentError("horizon must be at least 1");
  if (kind == ProcessKind::moving_average && theta.empty())
    throw ArgumentError("moving-average needs at least one coefficient");
  if (kind == ProcessKind::custom) {
    if (memory < 0) throw ArgumentError("memory must be nonnegative");
    if (!(bound > 0.0)) throw ArgumentError("bound must be positive");
  }
  for (double t : theta)
    if (!std::isfinite(t)) throw ArgumentError("theta entries must be finite");
}

LocalFunctional::LocalFunctional(int first, int last, std::size_t support, std::vector<double> table)
    : first_(first), last_(last), support_(support), table_(std::move(table)) {
  if (support_ == 0) throw ArgumentError("local functional needs a nonempty support");
  const int len = last_ >= first_ ? last_ - first_ + 1 : 0;
  if (first_ < 1 && len > 0) throw ArgumentError("local functional window starts before coordinate 1");
  if (table_.size() != ipow(support_, len))
    throw DimensionError("local functional table size does not match its window");
}

LocalFunctional LocalFunctional::constant(double value, std::size_t support) {
  return LocalFunctional(1, 0, support, {value});
}

LocalFunctional LocalFunctional::coordinate(int k, const InnovationLaw& law) {
  return LocalFunctional(k, k, law.size(), law.values);
}

double LocalFunctional::evaluate(std::span<const std::uint8_t> path) const {
  std::size_t idx = 0;
  for (int k = first_; k <= last_; ++k) idx = idx * support_ + path[static_cast<std::size_t>(k - 1)];
  return table_[idx];
}

LocalFunctional LocalFunctional::conditioned(int level, const InnovationLaw& law) const {
  if (level >= last_) return *this;
  const int keep_last = std::max(level, first_ - 1);
  const int dropped = last_ - keep_last;
  const std::size_t inner = ipow(support_, dropped);

  // Product weights of the integrated-out suffix, same mixed radix.
  std::vector<double> w(inner, 1.0);
  for (std::size_t s = 0; s < inner; ++s) {
    std::size_t rest = s;
    for (int k = 0; k < dropped; ++k) {
      w[s] *= law.probs[rest % support_];
      rest /= support_;
    }
  }
  std::vector<double> out(table_.size() / inner, 0.0);
  for (std::size_t o = 0; o < out.size(); ++o) {
    double acc = 0.0;
    for (std::size_t s = 0; s < inner; ++s) acc += w[s] * table_[o * inner + s];
    out[o] = acc;
  }
  if (keep_last < first_) return LocalFunctional(1, 0, support_, std::move(out));
  return LocalFunctional(first_, keep_last, support_, std::move(out));
}

double LocalFunctional::expectation(const InnovationLaw& law) const {
  return conditioned(first_ - 1, law).table_[0];
}

double LocalFunctional::sup_norm() const {
  double m = 0.0;
  for (double v : table_) m = std::max(m, std::abs(v));
  return m;
}

LocalFunctional LocalFunctional::map(const std::function<double(double)>& op) const {
  std::vector<double> out(table_.size());
  std::transform(table_.begin(), table_.end(), out.begin(), op);
  return LocalFunctional(first_, last_, support_, std::move(out));
}

LocalFunctional LocalFunctional::combine(const LocalFunctional& a, const LocalFunctional& b,
                                         const std::function<double(double, double)>& op) {
  if (a.support_ != b.support_) throw DimensionError("local functionals over different supports");
  if (a.is_constant() && b.is_constant())
    return constant(op(a.table_[0], b.table_[0]), a.support_);
  const int first = a.is_constant() ? b.first_ : b.is_constant() ? a.first_ : std::min(a.first_, b.first_);
  const int last = std::max(a.last_, b.last_);
  const std::size_t s = a.support_;
  const int len = last - first + 1;
  std::vector<double> out(ipow(s, len));
  std::vector<std::uint8_t> path(static_cast<std::size_t>(last), 0);
  for (std::size_t idx = 0; idx < out.size(); ++idx) {
    std::size_t rest = idx;
    for (int k = last; k >= first; --k) {
      path[static_cast<std::size_t>(k - 1)] = static_cast<std::uint8_t>(rest % s);
      rest /= s;
    }
    out[idx] = op(a.evaluate(path), b.evaluate(path));
  }
  return LocalFunctional(first, last, s, std::move(out));
}

double ProcessModel::bound() const {
  double b = 0.0;
  for (const auto& t : terms) b = std::max(b, t.sup_norm());
  return b;
}

ProcessModel make_process(const ProcessSpec& spec) {
  spec.validate();
  const InnovationLaw& law = spec.innovations;
  const std::size_t s = law.size();
  ProcessModel model{law, spec.horizon, {}};
  model.terms.reserve(static_cast<std::size_t>(spec.horizon));
  const auto eps = [&](int k) { return LocalFunctional::coordinate(k, law); };
  const auto plus = [](double x, double y) { return x + y; };

  switch (spec.kind) {
    case ProcessKind::independent:
      for (int i = 1; i <= spec.horizon; ++i) model.terms.push_back(eps(i));
      break;
    case ProcessKind::moving_average:
      for (int i = 1; i <= spec.horizon; ++i) {
        auto f = LocalFunctional::constant(0.0, s);
        for (std::size_t k = 0; k < spec.theta.size(); ++k) {
          const int coord = i - static_cast<int>(k);
          if (coord < 1) break;
          const double th = spec.theta[k];
          f = LocalFunctional::combine(f, eps(coord).map([th](double v) { return th * v; }), plus);
        }
        model.terms.push_back(std::move(f));
      }
      break;
    case ProcessKind::martingale_difference: {
      const double mu = law.mean();
      const double a = spec.theta.empty() ? 0.5 : spec.theta[0];
      for (int i = 1; i <= spec.horizon; ++i) {
        auto centred = eps(i).map([mu](double v) { return v - mu; });
        if (i == 1) {
          model.terms.push_back(std::move(centred));
          continue;
        }
        auto scale = eps(i - 1).map([mu, a](double v) { return 1.0 + a * (v - mu); });
        model.terms.push_back(
            LocalFunctional::combine(centred, scale, [](double x, double y) { return x * y; }));
      }
      break;
    }
    case ProcessKind::custom: {
      std::mt19937_64 rng(spec.seed);
      std::uniform_real_distribution<double> u(-spec.bound, spec.bound);
      for (int i = 1; i <= spec.horizon; ++i) {
        const int first = std::max(1, i - spec.memory);
        std::vector<double> table(ipow(s, i - first + 1));
        for (auto& v : table) v = u(rng);
        LocalFunctional f(first, i, s, std::move(table));
        if (spec.centered) {
          const double m = f.expectation(law);
          f = f.map([m](double v) { return v - m; });
        }
        model.terms.push_back(std::move(f));
      }
      break;
    }
  }
  return model;
}

std::size_t default_atom_cap() {
  if (const char* env = std::getenv("RIESZMIX_ATOM_CAP")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::size_t{1} << 20;
}

std::size_t product_atom_count(std::size_t support, int horizon) {
  std::size_t n = 1;
  for (int k = 0; k < horizon; ++k) {
    if (n > std::numeric_limits<std::size_t>::max() / support) return std::numeric_limits<std::size_t>::max();
    n *= support;
  }
  return n;
}

std::uint8_t ProductSpace::digit(std::size_t atom, int k) const {
  const std::size_t s = law.size();
  return static_cast<std::uint8_t>((atom / ipow(s, horizon - k)) % s);
}

Element ProductSpace::materialize(const LocalFunctional& term) const {
  if (term.support() != law.size()) throw DimensionError("term support differs from the product space");
  if (term.last() > horizon) throw DimensionError("term depends on coordinates beyond the horizon");
  std::vector<double> v(space->size());
  if (term.is_constant()) {
    std::fill(v.begin(), v.end(), term.table()[0]);
  } else {
    // First coordinate is most significant in both the atom index and the table.
    const std::size_t stride = ipow(law.size(), horizon - term.last());
    const std::size_t span = term.table().size();
    for (std::size_t a = 0; a < v.size(); ++a) v[a] = term.table()[(a / stride) % span];
  }
  return Element(space, std::move(v));
}

ProductSpace build_product_space(const InnovationLaw& law, int horizon, std::size_t atom_cap) {
  law.validate();
  if (horizon < 1) throw ArgumentError("horizon must be at least 1");
  const std::size_t s = law.size();
  const std::size_t n = product_atom_count(s, horizon);
  if (n > atom_cap) {
    std::ostringstream msg;
    msg << "product space has " << s << "^" << horizon << " atoms, above the cap of " << atom_cap
        << "; use the monte-carlo backend or raise RIESZMIX_ATOM_CAP";
    throw AtomCapError(msg.str());
  }

  std::vector<double> w(n, 1.0);
  for (std::size_t a = 0; a < n; ++a) {
    std::size_t rest = a;
    for (int k = 0; k < horizon; ++k) {
      w[a] *= law.probs[rest % s];
      rest /= s;
    }
  }
  SpacePtr space = SampleSpace::create(std::move(w));

  std::vector<CondExpectation> ops;
  ops.reserve(static_cast<std::size_t>(horizon) + 1);
  for (int i = 0; i <= horizon; ++i) {
    const std::size_t stride = ipow(s, horizon - i);
    std::vector<std::uint32_t> labels(n);
    for (std::size_t a = 0; a < n; ++a) labels[a] = static_cast<std::uint32_t>(a / stride);
    ops.emplace_back(Partition::from_labels(space, std::move(labels)));
  }
  CondExpectation global = ops.front();
  auto filtration = std::make_shared<const Filtration>(0, std::move(ops), std::move(global));
  return ProductSpace{law, horizon, std::move(space), std::move(filtration)};
}

ProductSpace build_product_space(const ProcessSpec& spec, std::size_t atom_cap) {
  spec.validate();
  return build_product_space(spec.innovations, spec.horizon, atom_cap);
}

std::vector<Element> coordinate_elements(const ProductSpace& ps) {
  std::vector<Element> out;
  out.reserve(static_cast<std::size_t>(ps.horizon));
  for (int k = 1; k <= ps.horizon; ++k) out.push_back(ps.materialize(LocalFunctional::coordinate(k, ps.law)));
  return out;
}

Partition coordinate_partition(const ProductSpace& ps, int k) {
  if (k < 1 || k > ps.horizon) throw ArgumentError("coordinate index out of range");
  std::vector<std::uint32_t> labels(ps.space->size());
  for (std::size_t a = 0; a < labels.size(); ++a) labels[a] = ps.digit(a, k);
  return Partition::from_labels(ps.space, std::move(labels));
}

AdaptedSequence::AdaptedSequence(std::shared_ptr<const Filtration> filtration,
                                 std::vector<Element> terms, double tolerance)
    : filtration_(std::move(filtration)), terms_(std::move(terms)) {
  for (int i = 1; i <= length(); ++i) {
    const auto& t = filtration_->at(i);
    require_same_space(*t.space(), *term(i).space());
    if (!t.in_range(term(i), tolerance))
      throw PreconditionError("term " + std::to_string(i) + " is not in the range of T_" +
                              std::to_string(i));
  }
}

AdaptedSequence materialize(const ProductSpace& ps, const ProcessModel& model) {
  if (model.horizon > ps.horizon) throw DimensionError("process horizon exceeds the product space");
  std::vector<Element> terms;
  terms.reserve(model.terms.size());
  for (const auto& t : model.terms) terms.push_back(ps.materialize(t));
  return AdaptedSequence(ps.filtration, std::move(terms));
}

AdaptedSequence moving_average(const ProcessSpec& spec, const ProductSpace& ps) {
  ProcessSpec ma = spec;
  ma.kind = ProcessKind::moving_average;
  ma.horizon = ps.horizon;
  ma.innovations = ps.law;
  return materialize(ps, make_process(ma));
}

AdaptedSequence martingale_difference_from(const AdaptedSequence& adapted) {
  const Filtration& F = adapted.filtration();
  std::vector<Element> g;
  g.reserve(adapted.terms().size());
  for (int i = 1; i <= adapted.length(); ++i) {
    const Element& f = adapted.term(i);
    Element gi = f - F.at(i - 1)(f);
    const double residual = F.at(i - 1)(gi).sup_norm();
    if (residual > kIdentityTolerance * std::max(1.0, f.sup_norm()))
      throw PreconditionError("T_" + std::to_string(i - 1) + " g_" + std::to_string(i) +
                              " is not zero; the filtration is not a tower");
    g.push_back(std::move(gi));
  }
  return AdaptedSequence(adapted.filtration_ptr(), std::move(g));
}

CheckReport martingale_difference_check(const AdaptedSequence& g) {
  CheckReport report("martingale difference: T_i g_j = 0 for i < j");
  const Filtration& F = g.filtration();
  for (int j = 1; j <= g.length(); ++j)
    for (int i = 0; i < j; ++i)
      report.observe(F.at(i)(g.term(j)).sup_norm(), kIdentityTolerance, [i, j] {
        return "i=" + std::to_string(i) + " j=" + std::to_string(j);
      });
  return report;
}

std::vector<Element> partial_sums(const AdaptedSequence& g) {
  std::vector<Element> s;
  s.reserve(g.terms().size() + 1);
  s.push_back(Element::zero(g.filtration().space()));
  for (const Element& gi : g.terms()) s.push_back(s.back() + gi);
  return s;
}

CheckReport is_martingale(std::span<const Element> terms, const Filtration& filtration) {
  CheckReport report("martingale: f_i = T_i f_j for i <= j");
  const int n = static_cast<int>(terms.size());
  for (int j = 1; j <= n; ++j) {
    const Element& fj = terms[static_cast<std::size_t>(j - 1)];
    for (int i = 1; i <= j; ++i) {
      const Element& fi = terms[static_cast<std::size_t>(i - 1)];
      report.observe(max_abs_diff(filtration.at(i)(fj), fi), kIdentityTolerance, [i, j] {
        return "i=" + std::to_string(i) + " j=" + std::to_string(j);
      });
    }
  }
  return report;
}

PathSet PathSet::enumerate(InnovationLaw law, int horizon, std::size_t cap) {
  law.validate();
  const std::size_t n = product_atom_count(law.size(), horizon);
  if (n > cap) throw AtomCapError("path enumeration exceeds the atom cap");
  return PathSet(std::move(law), horizon, n, true, 0);
}

PathSet PathSet::sample(InnovationLaw law, int horizon, std::size_t count, std::uint64_t seed) {
  law.validate();
  if (count == 0) throw ArgumentError("monte-carlo path count must be positive");
  return PathSet(std::move(law), horizon, count, false, seed);
}

void PathSet::for_each(const Visitor& visit) const {
  std::vector<std::uint8_t> path(static_cast<std::size_t>(horizon_), 0);
  const std::size_t s = law_.size();
  if (exact_) {
    for (std::size_t p = 0; p < count_; ++p) {
      double w = 1.0;
      for (auto d : path) w *= law_.probs[d];
      visit(path, w);
      // Odometer: last coordinate is least significant, matching atom order.
      for (std::size_t k = path.size(); k-- > 0;) {
        if (++path[k] < s) break;
        path[k] = 0;
      }
    }
    return;
  }
  std::mt19937_64 rng(seed_);
  std::discrete_distribution<int> draw(law_.probs.begin(), law_.probs.end());
  const double w = 1.0 / static_cast<double>(count_);
  for (std::size_t p = 0; p < count_; ++p) {
    for (auto& d : path) d = static_cast<std::uint8_t>(draw(rng));
    visit(path, w);
  }
}

}  // namespace rieszmix
