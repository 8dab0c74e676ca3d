#pragma once

#include "bubbledec/bubbles.hpp"
#include "bubbledec/extraction.hpp"
#include "bubbledec/fields.hpp"

#include <map>
#include <vector>

namespace bubbledec {

/// Dyadic level-set mass map of |u|: half-open slabs [b^i, b^{i+1}) with
/// b = 2^{(N-2)/2}, masses int_{slab} |u|^{2*} dmu.
struct SlabProfile {
  double base = 0.0;
  std::vector<int> level_exponents;  // slab i covers [b^i, b^{i+1})
  std::vector<double> masses;        // aligned with level_exponents
  double sup_mass = 0.0;
  double total = 0.0;  // sum of masses = int |u|^{2*} dmu
};

SlabProfile dyadic_slab_profile(const ScalarField& u, const QuadratureSpec& q);

struct VanishingCheck {
  double lhs = 0.0;       // ||u||_{2*}^{2*}
  double rhs = 0.0;       // C_hat ||u||_{H^{1,2}}^2 (sup slab mass)^{2/N}
  double ratio = 0.0;     // lhs / rhs (0 for the zero field)
  double sup_mass = 0.0;
  double h12_sq = 0.0;
};

VanishingCheck vanishing_bound_check(const ScalarField& u,
                                     const QuadratureSpec& q, double c_hat);

/// C_hat that makes the slab bound tight on a corpus: the maximal observed
/// ratio lhs / (||u||^2 (sup mass)^{2/N}).
double calibrate_slab_constant(const std::vector<ScalarField>& corpus,
                               const QuadratureSpec& q);

/// Per-k maximum of |rescaled pullback| along a candidate concentration
/// path; the no-concentration test passes when the tail decays.
std::vector<double> noconc_curve(const ManifoldModel& m, const FieldSequence& u,
                                 const std::function<Point(int)>& center_path,
                                 const std::function<int(int)>& scale_path,
                                 const GridSpec& grid,
                                 const std::vector<int>& ks);
bool noconc_passes(const std::vector<double>& curve);

/// H^{1,2} inner products of two synthesized bubble families across k.
std::vector<double> ao_decay_curve(const ManifoldModel& m, const BubbleSpec& a,
                                   const BubbleSpec& b, const CutoffSpec& cutoff,
                                   const std::vector<int>& ks,
                                   const QuadratureSpec& q);

}  // namespace bubbledec
