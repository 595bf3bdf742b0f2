#include "rieszmix/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rieszmix/errors.hpp"

namespace rieszmix {

SpacePtr SampleSpace::create(std::vector<double> weights, std::vector<std::string> labels) {
  if (weights.empty()) throw ArgumentError("sample space needs at least one atom");
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (!(weights[k] > 0.0) || !std::isfinite(weights[k])) {
      std::ostringstream msg;
      msg << "atom " << k << " has non-positive weight " << weights[k];
      throw ArgumentError(msg.str());
    }
  }
  // Neumaier summation: product and uniform weights must validate at 2^20 atoms.
  double total = 0.0, carry = 0.0;
  for (double w : weights) {
    const double t = total + w;
    carry += std::abs(total) >= std::abs(w) ? (total - t) + w : (w - t) + total;
    total = t;
  }
  total += carry;
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "weights sum to " << total << ", expected 1";
    throw ArgumentError(msg.str());
  }
  if (!labels.empty() && labels.size() != weights.size()) {
    throw ArgumentError("atom label count differs from weight count");
  }
  return SpacePtr(new SampleSpace(std::move(weights), std::move(labels)));
}

SpacePtr SampleSpace::uniform(std::size_t atom_count) {
  if (atom_count == 0) throw ArgumentError("sample space needs at least one atom");
  std::vector<double> w(atom_count, 1.0 / static_cast<double>(atom_count));
  return create(std::move(w));
}

std::string SampleSpace::label(std::size_t atom) const {
  return labels_.empty() ? std::to_string(atom) : labels_[atom];
}

bool SampleSpace::same_as(const SampleSpace& other) const {
  return this == &other || weights_ == other.weights_;
}

Element::Element(SpacePtr space, std::vector<double> values)
    : space_(std::move(space)), values_(std::move(values)) {
  if (!space_) throw ArgumentError("element needs a sample space");
  if (values_.size() != space_->size()) {
    std::ostringstream msg;
    msg << "element has " << values_.size() << " entries, space has " << space_->size()
        << " atoms";
    throw DimensionError(msg.str());
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k]))
      throw ArgumentError("element entry at atom " + std::to_string(k) + " is not finite");
  }
}

Element Element::constant(SpacePtr space, double value) {
  const std::size_t n = space->size();
  return Element(std::move(space), std::vector<double>(n, value));
}

Element Element::indicator(SpacePtr space, std::span<const std::size_t> atoms) {
  std::vector<double> v(space->size(), 0.0);
  for (std::size_t a : atoms) {
    if (a >= v.size()) throw DimensionError("indicator atom out of range");
    v[a] = 1.0;
  }
  return Element(std::move(space), std::move(v));
}

double Element::max() const { return *std::max_element(values_.begin(), values_.end()); }
double Element::min() const { return *std::min_element(values_.begin(), values_.end()); }

double Element::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

void require_same_space(const SampleSpace& a, const SampleSpace& b) {
  if (a.size() != b.size()) {
    std::ostringstream msg;
    msg << "sample spaces differ: " << a.size() << " vs " << b.size() << " atoms";
    throw DimensionError(msg.str());
  }
  if (!a.same_as(b)) throw DimensionError("sample spaces differ in atom weights");
}

void require_same_space(const Element& a, const Element& b) {
  require_same_space(*a.space(), *b.space());
}

namespace {

template <class Op>
Element zip(const Element& f, const Element& g, Op op) {
  require_same_space(f, g);
  std::vector<double> out(f.size());
  auto fv = f.values();
  auto gv = g.values();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = op(fv[k], gv[k]);
  return Element(f.space(), std::move(out));
}

template <class Op>
Element map(const Element& f, Op op) {
  std::vector<double> out(f.size());
  auto fv = f.values();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = op(fv[k]);
  return Element(f.space(), std::move(out));
}

}  // namespace

Element operator+(const Element& f, const Element& g) {
  return zip(f, g, [](double a, double b) { return a + b; });
}
Element operator-(const Element& f, const Element& g) {
  return zip(f, g, [](double a, double b) { return a - b; });
}
Element operator-(const Element& f) {
  return map(f, [](double a) { return -a; });
}
Element operator*(double a, const Element& f) {
  return map(f, [a](double v) { return a * v; });
}
Element operator*(const Element& f, const Element& g) {
  return zip(f, g, [](double a, double b) { return a * b; });
}

Element sup(const Element& f, const Element& g) {
  return zip(f, g, [](double a, double b) { return std::max(a, b); });
}
Element inf(const Element& f, const Element& g) {
  return zip(f, g, [](double a, double b) { return std::min(a, b); });
}
Element abs(const Element& f) {
  return map(f, [](double a) { return std::abs(a); });
}
Element pos(const Element& f) {
  return map(f, [](double a) { return a > 0.0 ? a : 0.0; });
}
Element neg(const Element& f) {
  return map(f, [](double a) { return a < 0.0 ? -a : 0.0; });
}

double max_abs_diff(const Element& f, const Element& g) {
  require_same_space(f, g);
  double m = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) m = std::max(m, std::abs(f[k] - g[k]));
  return m;
}

double max_excess(const Element& f, const Element& g) {
  require_same_space(f, g);
  double m = f[0] - g[0];
  for (std::size_t k = 1; k < f.size(); ++k) m = std::max(m, f[k] - g[k]);
  return m;
}

std::size_t argmax_excess(const Element& f, const Element& g) {
  require_same_space(f, g);
  std::size_t best = 0;
  for (std::size_t k = 1; k < f.size(); ++k)
    if (f[k] - g[k] > f[best] - g[best]) best = k;
  return best;
}

bool is_positive(const Element& f, double tolerance) { return f.min() >= -tolerance; }

BandProjection::BandProjection(SpacePtr space, std::vector<bool> mask)
    : space_(std::move(space)), mask_(std::move(mask)) {
  if (!space_) throw ArgumentError("band projection needs a sample space");
  if (mask_.size() != space_->size()) throw DimensionError("band mask length differs from atom count");
}

BandProjection BandProjection::identity(SpacePtr space) {
  const std::size_t n = space->size();
  return BandProjection(std::move(space), std::vector<bool>(n, true));
}

BandProjection BandProjection::zero(SpacePtr space) {
  const std::size_t n = space->size();
  return BandProjection(std::move(space), std::vector<bool>(n, false));
}

std::size_t BandProjection::rank() const {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), true));
}

Element BandProjection::apply(const Element& f) const {
  require_same_space(*space_, *f.space());
  std::vector<double> out(f.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = mask_[k] ? f[k] : 0.0;
  return Element(f.space(), std::move(out));
}

Element BandProjection::unit_image() const { return apply(Element::unit(space_)); }

BandProjection BandProjection::complement() const {
  std::vector<bool> m(mask_.size());
  for (std::size_t k = 0; k < m.size(); ++k) m[k] = !mask_[k];
  return BandProjection(space_, std::move(m));
}

BandProjection BandProjection::compose(const BandProjection& other) const {
  require_same_space(*space_, *other.space_);
  std::vector<bool> m(mask_.size());
  for (std::size_t k = 0; k < m.size(); ++k) m[k] = mask_[k] && other.mask_[k];
  return BandProjection(space_, std::move(m));
}

bool BandProjection::operator==(const BandProjection& other) const {
  return space_->same_as(*other.space_) && mask_ == other.mask_;
}

BandProjection band_from_element(const Element& g) {
  std::vector<bool> m(g.size());
  for (std::size_t k = 0; k < m.size(); ++k) m[k] = g[k] != 0.0;
  return BandProjection(g.space(), std::move(m));
}

BandProjection truncation_band(const Element& f, double c) {
  if (!(c >= 0.0)) throw ArgumentError("truncation level must be nonnegative");
  // (|f| - c e)+ vanishes where |f| == c, so the boundary is excluded.
  std::vector<bool> m(f.size());
  for (std::size_t k = 0; k < m.size(); ++k) m[k] = std::abs(f[k]) > c;
  return BandProjection(f.space(), std::move(m));
}

Element signum_projection(const Element& f) {
  const BandProjection p = band_from_element(pos(f));
  return p.unit_image() - p.complement().unit_image();
}

}  // namespace rieszmix
