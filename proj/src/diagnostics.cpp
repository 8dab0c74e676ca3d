#include "bubbledec/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace bubbledec {

namespace {
double critical_exponent(int n) { return 2.0 * n / (n - 2.0); }
}  // namespace

SlabProfile dyadic_slab_profile(const ScalarField& u, const QuadratureSpec& q) {
  const ManifoldModel& m = q.model();
  const double base = std::pow(2.0, (m.dimension - 2) / 2.0);
  const double p_star = critical_exponent(m.dimension);
  const double log_base = std::log(base);

  std::map<int, double> bins;
  auto bin_of = [&](double v) {
    return static_cast<int>(std::floor(std::log(v) / log_base));
  };
  const ScalarField* fs[] = {&u};
  integrate_visit(
      q.model(), q, fs,
      [&](double w, std::span<const double> curr, std::span<const double> prev) {
        const double vc = std::abs(curr[0]);
        const double vp = std::abs(prev[0]);
        if (vc > 0.0) bins[bin_of(vc)] += w * std::pow(vc, p_star);
        if (vp > 0.0) bins[bin_of(vp)] -= w * std::pow(vp, p_star);
      });

  SlabProfile out;
  out.base = base;
  for (const auto& [i, mass] : bins) {
    if (std::abs(mass) < 1e-300) continue;
    out.level_exponents.push_back(i);
    out.masses.push_back(mass);
    out.total += mass;
    out.sup_mass = std::max(out.sup_mass, mass);
  }
  return out;
}

VanishingCheck vanishing_bound_check(const ScalarField& u,
                                     const QuadratureSpec& q, double c_hat) {
  const ManifoldModel& m = q.model();
  const double p_star = critical_exponent(m.dimension);
  VanishingCheck out;
  if (u.is_zero()) return out;
  const SlabProfile slabs = dyadic_slab_profile(u, q);
  out.sup_mass = slabs.sup_mass;
  out.lhs = slabs.total;  // same nodes as lp_norm^{2*}
  out.h12_sq = h12_inner(u, u, q);
  out.rhs = c_hat * out.h12_sq * std::pow(out.sup_mass, 2.0 / m.dimension);
  out.ratio = out.rhs > 0.0 ? out.lhs / out.rhs : 0.0;
  return out;
}

double calibrate_slab_constant(const std::vector<ScalarField>& corpus,
                               const QuadratureSpec& q) {
  double worst = 0.0;
  for (const ScalarField& u : corpus) {
    const VanishingCheck check = vanishing_bound_check(u, q, 1.0);
    if (check.rhs > 0.0) worst = std::max(worst, check.lhs / check.rhs);
  }
  return worst;
}

std::vector<double> noconc_curve(const ManifoldModel& m, const FieldSequence& u,
                                 const std::function<Point(int)>& center_path,
                                 const std::function<int(int)>& scale_path,
                                 const GridSpec& grid,
                                 const std::vector<int>& ks) {
  std::vector<double> out;
  out.reserve(ks.size());
  for (int k : ks) {
    const Eigen::ArrayXd pb =
        rescaled_pullback(m, u.generator(k), center_path(k), scale_path(k), grid);
    out.push_back(pb.abs().maxCoeff());
  }
  return out;
}

bool noconc_passes(const std::vector<double>& curve) {
  if (curve.size() < 3) return false;
  const size_t n = curve.size();
  const double slack = 1e-12;
  return curve[n - 2] <= curve[n - 3] * (1.0 + slack) &&
         curve[n - 1] <= curve[n - 2] * (1.0 + slack);
}

std::vector<double> ao_decay_curve(const ManifoldModel& m, const BubbleSpec& a,
                                   const BubbleSpec& b, const CutoffSpec& cutoff,
                                   const std::vector<int>& ks,
                                   const QuadratureSpec& q) {
  std::vector<double> out;
  out.reserve(ks.size());
  for (int k : ks) {
    const ScalarField va = synth_bubble(m, a, cutoff, k);
    const ScalarField vb = synth_bubble(m, b, cutoff, k);
    out.push_back(h12_inner(va, vb, q));
  }
  return out;
}

}  // namespace bubbledec
