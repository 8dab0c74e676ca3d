#pragma once

#include "bubbledec/bubbles.hpp"
#include "bubbledec/fields.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bubbledec {

struct ExtractionConfig {
  int j_max = 12;
  double epsilon_stop = 0.05;
  double gamma = 0.5;  // near-max acceptance slack
  int max_bubbles = 8;
  std::vector<int> k_eval{4, 6, 8, 10};
  double scan_slope = 1.0;  // assumed dyadic growth per k of candidate paths
  GridSpec profile_grid{8.0, 65, 3};
  GridSpec scan_grid{8.0, 17, 3};
  double stability_limit = 0.10;
  // a candidate's grid energy must agree with its half-resolution value to
  // this relative tolerance, which rejects unresolved spike aliasing from
  // scale-mismatched levels
  double scan_consistency = 0.35;
  // candidate localization
  double keep_fraction = 0.10;
  int max_kept_cells = 16;
  // shift-concentration scan
  bool shifts_enabled = true;
  std::vector<double> shift_speeds{0.5, 1.0, 2.0, 4.0};
  double shift_epsilon = 0.05;
  int max_shifts = 4;
  GridSpec shift_grid{2.5, 33, 3};
  // weak limit sampling
  int limit_grid_points = 33;
  Ball region;
  int quad_order = 12;

  void validate(const ManifoldModel& m) const;
  int k_lo() const { return k_eval.front(); }
  int k_hi() const { return k_eval.back(); }
};

struct CandidateScore {
  Point center;
  int level = 0;       // dyadic level at the largest evaluated k
  int cell_index = 0;  // stable index within the level's candidate net
  double score = 0.0;  // grid Dirichlet norm of the estimated profile
};

struct ExtractedBubble {
  Point center;
  int level = 0;  // at k_hi
  double slope = 1.0;
  int k_anchor = 0;  // k at which `level` applies
  GridSpec grid;
  Eigen::ArrayXd profile_samples;
  double profile_energy = 0.0;  // int |grad w|^2 on the grid
  double stability = 0.0;
  double score = 0.0;

  std::function<Point(int)> center_path() const;
  std::function<int(int)> scale_path() const;
};

struct ProfileEstimate {
  std::vector<int> ks;
  std::vector<Eigen::ArrayXd> pullbacks;  // aligned with ks
  GridSpec grid;
  double energy = 0.0;     // of the largest-k pullback
  double stability = 0.0;  // relative L2 gap of the two largest-k pullbacks
};

ProfileEstimate estimate_profile(const ManifoldModel& m, const FieldSequence& u,
                                 const std::function<Point(int)>& center_path,
                                 const std::function<int(int)>& scale_path,
                                 const ExtractionConfig& config);

std::vector<CandidateScore> scan_candidates(
    const ManifoldModel& m, const FieldSequence& u,
    const ExtractionConfig& config,
    const std::vector<ExtractedBubble>& exclusions);

struct ExtractionResult {
  std::vector<ExtractedBubble> bubbles;
  FieldSequence remainder;
  bool saturated = false;
  // Dirichlet energy of the remainder at k_hi after each accepted bubble;
  // entry 0 is the input sequence.
  std::vector<double> residual_energy;
};

ExtractionResult extract_bubbles(const ManifoldModel& m, const FieldSequence& u,
                                 const ExtractionConfig& config);

struct ShiftTerm {
  int axis = 0;
  int sign = 1;
  double speed = 1.0;
  GridSpec grid;
  Eigen::ArrayXd profile_samples;
  double h12_energy = 0.0;  // squared H^{1,2}(M) norm of the profile
  double mass = 0.0;        // int_M |w|^{2*} dmu
  double stability = 0.0;

  std::function<Isometry(int)> isometry_path(const ManifoldModel& m) const;
};

struct LedgerRow {
  int k = 0;
  double total = 0.0;  // the u_k side of the identity
  double u_term = 0.0;
  double shift_term = 0.0;
  double bubble_term = 0.0;
  double slack = 0.0;  // total - (u + shifts + bubbles)
};

struct DecompositionReport {
  std::string manifold_kind;
  int dimension = 3;
  double curvature = 0.0;
  double chart_radius = 1.0;
  std::string frame_convention =
      "parallel transport of the basepoint frame along radial geodesics";
  std::string tie_breaking = "net index ascending";
  unsigned long long seed = 0;
  std::vector<int> k_eval;

  GridSpec weak_limit_grid;
  Eigen::ArrayXd weak_limit_samples;
  double weak_limit_h12 = 0.0;  // squared H^{1,2} norm
  double weak_limit_mass = 0.0;

  std::vector<ShiftTerm> shifts;
  std::vector<ExtractedBubble> bubbles;
  bool saturated = false;
  std::vector<double> residual_energy;
  std::map<double, std::vector<double>> remainder_norms;  // p -> per-k norms
  std::vector<LedgerRow> energy_ledger;
  std::vector<LedgerRow> mass_ledger;
};

struct DecompositionOutcome {
  DecompositionReport report;
  ScalarField weak_limit_field;
  std::vector<ScalarField> shift_profiles;  // profile fields w at the basepoint
  FieldSequence remainder;
};

DecompositionOutcome full_decompose(const ManifoldModel& m,
                                    const FieldSequence& u,
                                    const ExtractionConfig& config);

/// The weak-limit surrogate alone: per-node stabilization of u_k over
/// k_eval on a chart grid at the region center.
ScalarField estimate_weak_limit(const ManifoldModel& m, const FieldSequence& u,
                                const ExtractionConfig& config,
                                GridSpec* grid_out = nullptr,
                                Eigen::ArrayXd* samples_out = nullptr);

/// Field reconstruction of an extracted bubble at index k (used for
/// subtraction and for report verification).
ScalarField realize_bubble(const ManifoldModel& m, const ExtractedBubble& b,
                           int k);
ScalarField realize_shift(const ManifoldModel& m, const ShiftTerm& s, int k);
/// The shift profile as a field at the basepoint.
ScalarField shift_profile_field(const ManifoldModel& m, const ShiftTerm& s);

}  // namespace bubbledec
