#include "rieszmix/conditional.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "rieszmix/errors.hpp"

namespace rieszmix {

Partition Partition::from_labels(SpacePtr space, std::vector<std::uint32_t> labels) {
  if (labels.size() != space->size()) throw DimensionError("partition label count differs from atom count");
  std::uint32_t max_label = 0;
  for (auto l : labels) max_label = std::max(max_label, l);
  const std::size_t count = static_cast<std::size_t>(max_label) + 1;
  std::vector<bool> seen(count, false);
  for (auto l : labels) seen[l] = true;
  for (std::size_t b = 0; b < count; ++b)
    if (!seen[b]) throw ArgumentError("partition block " + std::to_string(b) + " is empty");
  return Partition(std::move(space), std::move(labels), count);
}

Partition Partition::from_blocks(SpacePtr space, const std::vector<std::vector<std::size_t>>& blocks) {
  constexpr auto kUnset = static_cast<std::uint32_t>(-1);
  std::vector<std::uint32_t> labels(space->size(), kUnset);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].empty()) throw ArgumentError("partition block " + std::to_string(b) + " is empty");
    for (std::size_t atom : blocks[b]) {
      if (atom >= labels.size()) throw DimensionError("partition atom out of range");
      if (labels[atom] != kUnset)
        throw ArgumentError("atom " + std::to_string(atom) + " appears in two blocks");
      labels[atom] = static_cast<std::uint32_t>(b);
    }
  }
  for (std::size_t a = 0; a < labels.size(); ++a)
    if (labels[a] == kUnset) throw ArgumentError("atom " + std::to_string(a) + " is in no block");
  const std::size_t count = blocks.size();
  return Partition(std::move(space), std::move(labels), count);
}

Partition Partition::trivial(SpacePtr space) {
  const std::size_t n = space->size();
  return Partition(std::move(space), std::vector<std::uint32_t>(n, 0), 1);
}

Partition Partition::discrete(SpacePtr space) {
  std::vector<std::uint32_t> labels(space->size());
  for (std::size_t a = 0; a < labels.size(); ++a) labels[a] = static_cast<std::uint32_t>(a);
  const std::size_t n = labels.size();
  return Partition(std::move(space), std::move(labels), n);
}

std::vector<std::vector<std::size_t>> Partition::blocks() const {
  std::vector<std::vector<std::size_t>> out(block_count_);
  for (std::size_t a = 0; a < labels_.size(); ++a) out[labels_[a]].push_back(a);
  return out;
}

bool Partition::refines(const Partition& coarser) const {
  require_same_space(*space_, *coarser.space_);
  constexpr auto kUnset = static_cast<std::uint32_t>(-1);
  std::vector<std::uint32_t> image(block_count_, kUnset);
  for (std::size_t a = 0; a < labels_.size(); ++a) {
    auto& target = image[labels_[a]];
    if (target == kUnset)
      target = coarser.labels_[a];
    else if (target != coarser.labels_[a])
      return false;
  }
  return true;
}

bool Partition::same_blocks(const Partition& other) const {
  return block_count_ == other.block_count_ && refines(other) && other.refines(*this);
}

CondExpectation::CondExpectation(Partition partition)
    : partition_(std::make_shared<const Partition>(std::move(partition))),
      block_mass_(partition_->block_count(), 0.0) {
  auto w = partition_->space()->weights();
  for (std::size_t a = 0; a < w.size(); ++a) block_mass_[partition_->block_of(a)] += w[a];
}

Element CondExpectation::apply(const Element& f) const {
  require_same_space(*space(), *f.space());
  auto w = space()->weights();
  std::vector<double> sums(block_mass_.size(), 0.0);
  for (std::size_t a = 0; a < f.size(); ++a) sums[partition_->block_of(a)] += w[a] * f[a];
  for (std::size_t b = 0; b < sums.size(); ++b) sums[b] /= block_mass_[b];
  std::vector<double> out(f.size());
  for (std::size_t a = 0; a < out.size(); ++a) out[a] = sums[partition_->block_of(a)];
  return Element(f.space(), std::move(out));
}

bool CondExpectation::in_range(const Element& f, double tolerance) const {
  require_same_space(*space(), *f.space());
  std::vector<double> lo(block_mass_.size(), INFINITY), hi(block_mass_.size(), -INFINITY);
  for (std::size_t a = 0; a < f.size(); ++a) {
    const auto b = partition_->block_of(a);
    lo[b] = std::min(lo[b], f[a]);
    hi[b] = std::max(hi[b], f[a]);
  }
  for (std::size_t b = 0; b < lo.size(); ++b)
    if (hi[b] - lo[b] > tolerance) return false;
  return true;
}

Filtration::Filtration(int low, std::vector<CondExpectation> operators, CondExpectation global)
    : low_(low), ops_(std::move(operators)), global_(std::move(global)) {
  if (ops_.empty()) throw ArgumentError("filtration needs at least one operator");
  for (const auto& op : ops_) require_same_space(*op.space(), *global_.space());
}

const CondExpectation& Filtration::at(int index) const {
  if (index < low_) return global_;
  if (index > high()) return ops_.back();
  return ops_[static_cast<std::size_t>(index - low_)];
}

FiltrationReport verify_filtration(const Filtration& filtration, std::size_t basis_cap,
                                   std::size_t random_probes, std::uint64_t seed) {
  const SpacePtr& space = filtration.space();
  std::vector<Element> probes;
  if (space->size() <= basis_cap) {
    for (std::size_t a = 0; a < space->size(); ++a) {
      const std::size_t atom[] = {a};
      probes.push_back(Element::indicator(space, atom));
    }
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t p = 0; p < random_probes; ++p) {
      std::vector<double> v(space->size());
      for (auto& x : v) x = u(rng);
      probes.emplace_back(space, std::move(v));
    }
  }

  FiltrationReport report;
  const CondExpectation& t = filtration.global();
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const Element& f = probes[p];
    const Element tf = t(f);
    std::vector<Element> images;
    for (int i = filtration.low(); i <= filtration.high(); ++i) images.push_back(filtration.at(i)(f));

    for (int i = filtration.low(); i <= filtration.high(); ++i) {
      const auto& ti = filtration.at(i);
      const Element& tif = images[static_cast<std::size_t>(i - filtration.low())];
      const auto where = [&, i] {
        std::ostringstream s;
        s << "i=" << i << " probe=" << p;
        return s.str();
      };
      report.compatibility.observe(max_abs_diff(ti(tf), tf), kIdentityTolerance, where);
      report.compatibility.observe(max_abs_diff(t(tif), tf), kIdentityTolerance, where);
      for (int j = i; j <= filtration.high(); ++j) {
        const auto& tj = filtration.at(j);
        const Element& tjf = images[static_cast<std::size_t>(j - filtration.low())];
        const auto pair = [&, i, j] {
          std::ostringstream s;
          s << "i=" << i << " j=" << j << " probe=" << p;
          return s.str();
        };
        report.tower.observe(max_abs_diff(ti(tjf), tif), kIdentityTolerance, pair);
        report.tower.observe(max_abs_diff(tj(tif), tif), kIdentityTolerance, pair);
      }
    }
  }
  return report;
}

CheckReport averaging_check(const CondExpectation& t, const Element& f, const Element& g) {
  if (!t.in_range(f)) throw PreconditionError("averaging check needs f in the range of T");
  CheckReport report("averaging property T(fg) = f Tg");
  const Element lhs = t(f * g);
  const Element rhs = f * t(g);
  const double gap = max_abs_diff(lhs, rhs);
  report.observe(gap, kIdentityTolerance, [&] {
    return "atom=" + std::to_string(argmax_excess(abs(lhs - rhs), Element::zero(f.space())));
  });
  return report;
}

IndependenceReport independence_check(const BandProjection& p, const BandProjection& q,
                                      const CondExpectation& t, double tolerance) {
  require_same_space(*p.space(), *q.space());
  require_same_space(*p.space(), *t.space());
  const Element pe = p.unit_image();
  const Element qe = q.unit_image();
  IndependenceReport r{t(p(t(qe))), t(p(qe)), t(q(t(pe))), 0.0, false};
  r.gap = std::max(max_abs_diff(r.tptq, r.tpq), max_abs_diff(r.tpq, r.tqtp));
  r.independent = r.gap <= tolerance;
  return r;
}

namespace {

std::vector<bool> union_mask(const Partition& part, std::uint64_t chosen) {
  std::vector<bool> mask(part.space()->size());
  for (std::size_t a = 0; a < mask.size(); ++a) mask[a] = (chosen >> part.block_of(a)) & 1U;
  return mask;
}

std::vector<bool> random_union_mask(const Partition& part, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  std::vector<bool> chosen(part.block_count());
  for (std::size_t b = 0; b < chosen.size(); ++b) chosen[b] = coin(rng);
  std::vector<bool> mask(part.space()->size());
  for (std::size_t a = 0; a < mask.size(); ++a) mask[a] = chosen[part.block_of(a)];
  return mask;
}

std::vector<bool> block_mask(const Partition& part, std::size_t block) {
  std::vector<bool> mask(part.space()->size());
  for (std::size_t a = 0; a < mask.size(); ++a) mask[a] = part.block_of(a) == block;
  return mask;
}

}  // namespace

SubspaceIndependenceReport subspace_independence_check(const Partition& a, const Partition& b,
                                                       const CondExpectation& t,
                                                       const SubspaceIndependenceOptions& options) {
  require_same_space(*a.space(), *b.space());
  require_same_space(*a.space(), *t.space());
  const SpacePtr& space = a.space();
  SubspaceIndependenceReport report;

  const auto check_pair = [&](const std::vector<bool>& pm, const std::vector<bool>& qm,
                              const std::string& label) {
    const auto r = independence_check(BandProjection(space, pm), BandProjection(space, qm), t,
                                      options.tolerance);
    report.check.observe(r.gap, options.tolerance, label);
    ++report.pairs_checked;
  };

  // Each side of the identity is additive over disjoint masks, so the
  // block-by-block pairs carry the full content.
  for (std::size_t i = 0; i < a.block_count(); ++i)
    for (std::size_t j = 0; j < b.block_count(); ++j)
      check_pair(block_mask(a, i), block_mask(b, j),
                 "A-block " + std::to_string(i) + " x B-block " + std::to_string(j));

  if (a.block_count() + b.block_count() <= options.exhaustive_block_limit) {
    report.exhaustive = true;
    const std::uint64_t na = std::uint64_t{1} << a.block_count();
    const std::uint64_t nb = std::uint64_t{1} << b.block_count();
    for (std::uint64_t u = 0; u < na; ++u) {
      const auto pm = union_mask(a, u);
      for (std::uint64_t v = 0; v < nb; ++v)
        check_pair(pm, union_mask(b, v),
                   "A-union " + std::to_string(u) + " x B-union " + std::to_string(v));
    }
  } else {
    std::mt19937_64 rng(options.seed);
    for (std::size_t s = 0; s < options.sampled_unions; ++s)
      check_pair(random_union_mask(a, rng), random_union_mask(b, rng),
                 "sampled union pair " + std::to_string(s));
  }
  return report;
}

}  // namespace rieszmix
