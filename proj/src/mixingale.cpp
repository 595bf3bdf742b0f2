#include "rieszmix/mixingale.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rieszmix/errors.hpp"

namespace rieszmix {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

const char* side_name(MixingaleSide side) { return side == MixingaleSide::lagged ? "(i)" : "(ii)"; }

}  // namespace

std::optional<double> MixingaleCertificate::phi_at(int m) const {
  if (m >= 1 && static_cast<std::size_t>(m) <= phi.size()) return phi[static_cast<std::size_t>(m - 1)];
  if (m >= 1 && phi_tail_zero) return 0.0;
  return std::nullopt;
}

CheckReport validate_certificate(const MixingaleCertificate& cert, double epsilon) {
  CheckReport report("mixingale certificate invariants");
  for (std::size_t i = 0; i < cert.c.size(); ++i)
    report.observe(-cert.c[i].min(), 0.0, "c_" + std::to_string(i + 1));
  for (std::size_t m = 0; m < cert.phi.size(); ++m)
    report.observe(-cert.phi[m], 0.0, "Phi_" + std::to_string(m + 1));
  if (!cert.phi_tail_zero) {
    double envelope = kInfinity;
    for (double p : cert.phi) envelope = std::min(envelope, p);
    if (!(envelope < epsilon)) {
      report.passed = false;
      std::ostringstream note;
      note << "no zero tail asserted and min Phi_m = " << envelope << " is not below " << epsilon;
      report.notes.push_back(note.str());
    }
  }
  return report;
}

MixingaleLhs filtration_lhs(std::span<const Element> f, const Filtration& filtration) {
  return [f, &filtration](int i, int m, MixingaleSide side) {
    const Element& fi = f[static_cast<std::size_t>(i - 1)];
    const CondExpectation& t = filtration.global();
    if (side == MixingaleSide::lagged) return t(abs(filtration.at(i - m)(fi)));
    return t(abs(fi - filtration.at(i + m)(fi)));
  };
}

MixingaleReport check_mixingale(std::span<const Element> f, const Filtration& filtration,
                                const MixingaleCertificate& cert, int max_lag) {
  return check_mixingale(static_cast<int>(f.size()), filtration_lhs(f, filtration), cert, max_lag);
}

MixingaleReport check_mixingale(int n, const MixingaleLhs& lhs, const MixingaleCertificate& cert,
                                int max_lag) {
  if (static_cast<int>(cert.c.size()) < n)
    throw ArgumentError("certificate has fewer c_i than sequence terms");
  MixingaleReport report;
  double largest = -kInfinity;
  const auto visit = [&](int i, int m, MixingaleSide side, double phi) {
    const Element value = lhs(i, m, side);
    const Element rhs = phi * cert.c[static_cast<std::size_t>(i - 1)];
    const double excess = max_excess(value, rhs);
    if (excess > largest) {
      largest = excess;
      report.worst_i = i;
      report.worst_m = m;
      report.worst_side = side;
    }
    report.check.observe(excess, kInequalitySlack, [&] {
      std::ostringstream s;
      s << "i=" << i << " m=" << m << " side=" << side_name(side)
        << " atom=" << argmax_excess(value, rhs);
      return s.str();
    });
  };
  for (int m = 1; m <= max_lag; ++m) {
    const auto lag_phi = cert.phi_at(m);
    const auto residual_phi = cert.phi_at(m + 1);
    for (int i = 1; i <= n; ++i) {
      if (lag_phi)
        visit(i, m, MixingaleSide::lagged, *lag_phi);
      else
        ++report.skipped;
      if (residual_phi)
        visit(i, m, MixingaleSide::residual, *residual_phi);
      else
        ++report.skipped;
    }
  }
  if (report.skipped > 0)
    report.check.notes.push_back(std::to_string(report.skipped) +
                                 " (i, m, side) cells skipped: Phi beyond the certificate");
  return report;
}

double componentwise_ratio(const Element& lhs, const Element& c) {
  require_same_space(lhs, c);
  double s = 0.0;
  for (std::size_t a = 0; a < lhs.size(); ++a) {
    if (c[a] > 0.0)
      s = std::max(s, lhs[a] / c[a]);
    else if (lhs[a] > kIdentityTolerance)
      return kInfinity;
  }
  return s;
}

std::vector<double> minimal_phi(std::span<const Element> f, const Filtration& filtration,
                                std::span<const Element> c, int max_lag) {
  return minimal_phi(static_cast<int>(f.size()), filtration_lhs(f, filtration), c, max_lag);
}

std::vector<double> minimal_phi(int n, const MixingaleLhs& lhs, std::span<const Element> c,
                                int max_lag) {
  if (static_cast<int>(c.size()) < n) throw ArgumentError("fewer c_i than sequence terms");
  std::vector<double> phi(static_cast<std::size_t>(std::max(max_lag, 0)), 0.0);
  for (int m = 1; m <= max_lag; ++m) {
    double& p = phi[static_cast<std::size_t>(m - 1)];
    for (int i = 1; i <= n; ++i) {
      const Element& ci = c[static_cast<std::size_t>(i - 1)];
      p = std::max(p, componentwise_ratio(lhs(i, m, MixingaleSide::lagged), ci));
      // Side (ii) at lag m-1 constrains Phi_m; lag 0 is outside the definition.
      if (m >= 2) p = std::max(p, componentwise_ratio(lhs(i, m - 1, MixingaleSide::residual), ci));
    }
  }
  return phi;
}

CheckReport t_mean_zero_check(std::span<const Element> f, const Filtration& filtration) {
  CheckReport report("T-mean zero: T f_i = 0");
  for (std::size_t i = 0; i < f.size(); ++i)
    report.observe(filtration.global()(f[i]).sup_norm(), kInequalitySlack,
                   "i=" + std::to_string(i + 1));
  return report;
}

std::optional<std::size_t> UniformityProfile::first_level_below(double epsilon) const {
  for (std::size_t k = 0; k < envelope.size(); ++k)
    if (envelope[k].max() < epsilon) return k;
  return std::nullopt;
}

UniformityProfile uniformity_profile(std::span<const Element> family, const CondExpectation& t,
                                     std::span<const double> c_grid) {
  if (c_grid.empty()) throw ArgumentError("truncation grid is empty");
  for (std::size_t k = 0; k < c_grid.size(); ++k) {
    if (!(c_grid[k] >= 0.0)) throw ArgumentError("truncation levels must be nonnegative");
    if (k > 0 && !(c_grid[k] > c_grid[k - 1])) throw ArgumentError("truncation grid must increase");
  }
  UniformityProfile profile;
  profile.c_grid.assign(c_grid.begin(), c_grid.end());
  for (double c : c_grid) {
    Element env = Element::zero(t.space());
    for (const Element& f : family) {
      const Element af = abs(f);
      env = sup(env, t(truncation_band(f, c)(af)));
    }
    profile.envelope.push_back(std::move(env));
  }
  for (std::size_t k = 1; k < profile.envelope.size(); ++k)
    profile.monotone.observe(max_excess(profile.envelope[k], profile.envelope[k - 1]),
                             kIdentityTolerance, "c=" + std::to_string(c_grid[k]));
  return profile;
}

UniformBoundReport uniform_bound_check(const UniformityProfile& profile,
                                       std::span<const Element> family, const CondExpectation& t,
                                       double epsilon) {
  UniformBoundReport report;
  if (family.empty()) {
    report.check.notes.push_back("empty family");
    return report;
  }
  const auto k = profile.first_level_below(epsilon);
  if (!k) {
    report.check.passed = false;
    report.check.notes.push_back("envelope never drops below epsilon on the grid");
    return report;
  }
  const double level = profile.c_grid[*k];
  report.level = level;
  const Element rhs = profile.envelope[*k] + Element::constant(t.space(), level);
  for (std::size_t a = 0; a < family.size(); ++a) {
    const Element lhs = t(abs(family[a]));
    report.check.observe(max_excess(lhs, rhs), kInequalitySlack, "member " + std::to_string(a));
  }
  return report;
}

}  // namespace rieszmix
