#pragma once

#include "bubbledec/cutoff.hpp"
#include "bubbledec/fields.hpp"
#include "bubbledec/geometry.hpp"
#include "bubbledec/interpolant.hpp"

#include <functional>
#include <string>
#include <vector>

namespace bubbledec {

/// A compactly supported smooth profile on R^N from the named library
/// ("bump" or "aubin_talenti", the latter truncated smoothly at `support`).
struct ProfileSpec {
  std::string name;
  double support = 4.0;
  int dimension = 3;
  std::function<double(double)> radial;
  std::function<double(double)> radial_derivative;

  double value(const Vector& xi) const;
  Vector gradient(const Vector& xi) const;
};

ProfileSpec make_profile(const std::string& name, double support, int dimension);
std::vector<std::string> profile_library_names();

/// Parameters of one concentrating term: profile, center path k -> y_k and
/// integer dyadic scale path k -> j_k (nondecreasing, unbounded).
struct BubbleSpec {
  std::function<double(const Vector&)> profile_value;
  std::function<Vector(const Vector&)> profile_gradient;
  double profile_support = 4.0;
  std::function<Point(int)> center_path;
  std::function<int(int)> scale_path;
  double amplitude = 1.0;
};

BubbleSpec make_bubble(const ProfileSpec& profile, const Point& center,
                       std::function<int(int)> scale_path, double amplitude = 1.0);
BubbleSpec make_bubble_from_samples(const GridInterpolant& samples,
                                    const Point& center,
                                    std::function<int(int)> scale_path,
                                    double amplitude = 1.0);

/// A concentration escaping to infinity: a profile field composed with a
/// divergent isometry path.
struct ShiftSpec {
  ScalarField profile;
  std::function<Isometry(int)> isometry_path;
};

/// The synthesized concentrating term at index k: amplitude *
/// 2^{j(N-2)/2} chi(xi) w(2^j xi) in the chart at the center, extended by
/// zero outside the chart ball.
ScalarField synth_bubble(const ManifoldModel& m, const BubbleSpec& spec,
                         const CutoffSpec& cutoff, int k);

/// profile o eta_k, realized exactly through the isometry.
ScalarField apply_shift(const ManifoldModel& m, const ShiftSpec& spec, int k);

/// u o eta^{-1} with every component mapped exactly (anchors move by eta,
/// chart closures compose with the induced orthogonal frame change).
ScalarField transform_field(const ManifoldModel& m, const ScalarField& u,
                            const Isometry& eta);

ScalarField synth_sequence(const ManifoldModel& m,
                           const std::vector<BubbleSpec>& bubbles,
                           const std::vector<ShiftSpec>& shifts,
                           const ScalarField& background,
                           const CutoffSpec& cutoff, int k);

/// |j_k^A - j_k^B| + (2^{j_k^A} + 2^{j_k^B}) d(y_k^A, y_k^B).
double separation_functional(const ManifoldModel& m, const BubbleSpec& a,
                             const BubbleSpec& b, int k);
double separation_functional(const ManifoldModel& m, const Point& ya, int ja,
                             const Point& yb, int jb);

}  // namespace bubbledec
