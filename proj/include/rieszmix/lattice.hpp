#pragma once

// Finite model of a Dedekind complete Riesz space with weak order unit:
// real functions on a finite weighted sample space, ordered componentwise.
// Bands correspond to atom subsets; the f-algebra product is pointwise.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace rieszmix {

inline constexpr double kIdentityTolerance = 1e-12;

class SampleSpace;
using SpacePtr = std::shared_ptr<const SampleSpace>;

/// Finite set of atoms with strictly positive probability weights summing to one.
class SampleSpace {
 public:
  /// Throws ArgumentError if a weight is not strictly positive, the weights
  /// do not sum to one within 1e-12, there are no atoms, or a nonempty label
  /// list differs in length from the weights.
  static SpacePtr create(std::vector<double> weights, std::vector<std::string> labels = {});
  static SpacePtr uniform(std::size_t atom_count);

  std::size_t size() const { return weights_.size(); }
  std::span<const double> weights() const { return weights_; }
  double weight(std::size_t atom) const { return weights_[atom]; }
  /// Atom label; the decimal index when no labels were given.
  std::string label(std::size_t atom) const;

  /// Same atom count and identical weights.
  bool same_as(const SampleSpace& other) const;

 private:
  SampleSpace(std::vector<double> weights, std::vector<std::string> labels)
      : weights_(std::move(weights)), labels_(std::move(labels)) {}

  std::vector<double> weights_;
  std::vector<std::string> labels_;
};

/// An element f of E: one finite real value per atom. Immutable.
class Element {
 public:
  /// Throws DimensionError on a length mismatch and ArgumentError on non-finite entries.
  Element(SpacePtr space, std::vector<double> values);

  static Element constant(SpacePtr space, double value);
  static Element zero(SpacePtr space) { return constant(std::move(space), 0.0); }
  /// The weak order unit e (all ones).
  static Element unit(SpacePtr space) { return constant(std::move(space), 1.0); }
  static Element indicator(SpacePtr space, std::span<const std::size_t> atoms);

  const SpacePtr& space() const { return space_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t atom) const { return values_[atom]; }

  double max() const;
  double min() const;
  /// Largest |f(w)|.
  double sup_norm() const;

 private:
  SpacePtr space_;
  std::vector<double> values_;
};

/// Throws DimensionError unless `a` and `b` live on the same space.
void require_same_space(const Element& a, const Element& b);
void require_same_space(const SampleSpace& a, const SampleSpace& b);

Element operator+(const Element& f, const Element& g);
Element operator-(const Element& f, const Element& g);
Element operator-(const Element& f);
Element operator*(double a, const Element& f);
inline Element operator*(const Element& f, double a) { return a * f; }
inline Element operator/(const Element& f, double a) { return (1.0 / a) * f; }
/// f-algebra product: pointwise, with e as the multiplicative unit.
Element operator*(const Element& f, const Element& g);
inline Element multiply(const Element& f, const Element& g) { return f * g; }

Element sup(const Element& f, const Element& g);
Element inf(const Element& f, const Element& g);
Element abs(const Element& f);
/// f+ = sup(f, 0).
Element pos(const Element& f);
/// f- = sup(-f, 0), so f = f+ - f-.
Element neg(const Element& f);

/// max_w |f(w) - g(w)|.
double max_abs_diff(const Element& f, const Element& g);
/// max_w (f(w) - g(w)); f <= g + slack holds iff this is <= slack.
double max_excess(const Element& f, const Element& g);
/// Atom index where f - g is largest.
std::size_t argmax_excess(const Element& f, const Element& g);
bool is_positive(const Element& f, double tolerance = 0.0);

/// Band projection onto the band of elements supported on a fixed atom subset.
class BandProjection {
 public:
  BandProjection(SpacePtr space, std::vector<bool> mask);

  static BandProjection identity(SpacePtr space);
  static BandProjection zero(SpacePtr space);

  const SpacePtr& space() const { return space_; }
  const std::vector<bool>& mask() const { return mask_; }
  bool contains(std::size_t atom) const { return mask_[atom]; }
  std::size_t rank() const;

  Element apply(const Element& f) const;
  Element operator()(const Element& f) const { return apply(f); }
  /// P e, the indicator of the band's support.
  Element unit_image() const;
  /// I - P.
  BandProjection complement() const;
  /// P Q (projection onto the intersection of the bands).
  BandProjection compose(const BandProjection& other) const;

  bool operator==(const BandProjection& other) const;

 private:
  SpacePtr space_;
  std::vector<bool> mask_;
};

/// Projection onto the principal band generated by g: support of |g|.
BandProjection band_from_element(const Element& g);
/// P_{(|f| - c e)+}: the band where |f| > c strictly. Throws ArgumentError if c < 0.
BandProjection truncation_band(const Element& f, double c);
/// J_f e with J_f = P_{f+} - (I - P_{f+}): +1 where f > 0, -1 elsewhere.
Element signum_projection(const Element& f);

}  // namespace rieszmix
