#include "bubbledec/extraction.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>

namespace bubbledec {

namespace {

constexpr double kPlateauTol = 5e-3;  // near-max group for the level tie-break

double critical_exponent(int dimension) {
  return 2.0 * dimension / (dimension - 2.0);
}

int min_valid_level(const ManifoldModel& m, const GridSpec& grid) {
  const double reach = grid.radius * std::sqrt(double(grid.dimension));
  const double inj = m.injectivity_radius();
  if (!std::isfinite(inj)) return 0;
  int j = 0;
  while (std::pow(2.0, -j) * reach >= 0.98 * inj) ++j;
  return j;
}

GridInterpolant make_interpolant(const GridSpec& grid,
                                 const Eigen::ArrayXd& samples) {
  return GridInterpolant{grid, samples};
}

/// Radius of the smallest origin ball containing all samples above the
/// threshold (plus one cell of margin).
double trim_radius(const GridSpec& grid, const Eigen::ArrayXd& samples,
                   double threshold) {
  double rad = 0.0;
  for (long i = 0; i < samples.size(); ++i)
    if (std::abs(samples(i)) > threshold)
      rad = std::max(rad, grid.node(i).norm());
  return rad > 0 ? rad + 2.0 * grid.spacing() : 0.0;
}

ScalarField interpolant_field(const Point& anchor, const GridInterpolant& interp,
                              double support_radius, int level) {
  ScalarField out;
  if (support_radius <= 0) return out;
  FieldComponent c;
  c.anchor = anchor;
  c.level = level;
  c.support_radius = support_radius;
  c.value = [interp](const Vector& xi) { return interp.value(xi); };
  c.gradient = [interp](const Vector& xi) { return interp.gradient(xi); };
  out.components.push_back(std::move(c));
  return out;
}

// cached nets for candidate localization
const Discretization& cached_net(const ManifoldModel& m, double rho,
                                 const Ball& region) {
  static std::mutex mu;
  static std::map<std::string, Discretization> cache;
  std::ostringstream key;
  key.precision(17);
  key << to_string(m.kind) << ':' << m.dimension << ':' << m.curvature << ':'
      << rho << ':' << region.radius << ':';
  for (int i = 0; i < region.center.coords.size(); ++i)
    key << region.center.coords(i) << ',';
  std::scoped_lock lock(mu);
  auto it = cache.find(key.str());
  if (it != cache.end()) return it->second;
  // scan cells only need to cover the declared region; padding would blow
  // up the net on negatively curved models
  return cache.emplace(key.str(),
                       build_discretization(m, rho, region, /*padding=*/0.0))
      .first->second;
}

/// Flat unit-ball refinement stencil shared by every level and model.
const std::vector<Vector>& child_stencil(int dimension) {
  static std::mutex mu;
  static std::map<int, std::vector<Vector>> cache;
  std::scoped_lock lock(mu);
  auto it = cache.find(dimension);
  if (it != cache.end()) return it->second;
  const ManifoldModel flat = ManifoldModel::make_euclidean(dimension, 1.0);
  const Discretization net = build_discretization(
      flat, 0.25, Ball{flat.basepoint(), 1.0}, /*padding=*/0.0);
  std::vector<Vector> offsets;
  offsets.reserve(net.points.size());
  for (const Point& p : net.points) offsets.push_back(p.coords);
  return cache.emplace(dimension, std::move(offsets)).first->second;
}

struct Cell {
  Point center;
  double mass = 0.0;
  int index = 0;
};

}  // namespace

void ExtractionConfig::validate(const ManifoldModel& m) const {
  if (k_eval.empty()) throw std::invalid_argument("k_eval must be nonempty");
  for (size_t i = 1; i < k_eval.size(); ++i)
    if (k_eval[i] <= k_eval[i - 1])
      throw std::invalid_argument("k_eval must be strictly increasing");
  if (!(epsilon_stop > 0))
    throw std::invalid_argument("epsilon_stop must be positive");
  if (!(gamma > 0 && gamma <= 1))
    throw std::invalid_argument("gamma must lie in (0, 1]");
  if (max_bubbles < 0) throw std::invalid_argument("max_bubbles must be >= 0");
  if (!(scan_slope > 0)) throw std::invalid_argument("scan_slope must be positive");
  if (profile_grid.dimension != m.dimension ||
      scan_grid.dimension != m.dimension)
    throw std::invalid_argument(
        "grid dimension must match the manifold dimension");
  if (!(region.radius > 0) || !std::isfinite(region.radius))
    throw std::invalid_argument("region radius must be positive and finite");
}

std::function<Point(int)> ExtractedBubble::center_path() const {
  const Point c = center;
  return [c](int) { return c; };
}

std::function<int(int)> ExtractedBubble::scale_path() const {
  const int lvl = level;
  const double sl = slope;
  const int ka = k_anchor;
  return [lvl, sl, ka](int k) {
    const int j = lvl - static_cast<int>(std::llround(sl * (ka - k)));
    return std::max(0, j);
  };
}

std::function<Isometry(int)> ShiftTerm::isometry_path(
    const ManifoldModel& m) const {
  const int ax = axis;
  const double v = sign * speed;
  const ManifoldModel model = m;
  return [model, ax, v](int k) { return axis_transvection(model, ax, v * k); };
}

ProfileEstimate estimate_profile(const ManifoldModel& m, const FieldSequence& u,
                                 const std::function<Point(int)>& center_path,
                                 const std::function<int(int)>& scale_path,
                                 const ExtractionConfig& config) {
  ProfileEstimate out;
  out.grid = config.profile_grid;
  const int j_floor = min_valid_level(m, config.profile_grid);
  for (int k : config.k_eval) {
    if (scale_path(k) < j_floor) continue;  // chart-invalid at this k
    out.ks.push_back(k);
    out.pullbacks.push_back(rescaled_pullback(m, u.generator(k), center_path(k),
                                              scale_path(k), out.grid));
  }
  if (out.pullbacks.empty())
    throw std::domain_error("estimate_profile: no chart-valid k in k_eval");
  const Eigen::ArrayXd& last = out.pullbacks.back();
  out.energy = grid_h1_energy(last, out.grid);
  if (out.pullbacks.size() >= 2) {
    const Eigen::ArrayXd& prev = out.pullbacks[out.pullbacks.size() - 2];
    const double base = std::sqrt(grid_lp_pow(last, out.grid, 2.0));
    out.stability =
        base > 1e-14 ? grid_l2_distance(last, prev, out.grid) / base : 0.0;
  }
  return out;
}

namespace {

/// Scale-robust localization: critical-exponent mass of u at the largest k
/// inside shrinking smooth windows, refined coarse-to-fine.
std::vector<std::vector<Cell>> localization_pyramid(
    const ManifoldModel& m, const ScalarField& u_hi,
    const ExtractionConfig& config) {
  const double r = m.chart_radius;
  const double p_star = critical_exponent(m.dimension);
  QuadratureSpec q_loc(m, config.region, 6, 1);
  const ScalarField* fs[] = {&u_hi};
  auto mass_at = [&](const Point& y, double rad) {
    IntegrationWindow w{Ball{y, rad}};
    return integrate(
        m, q_loc, fs,
        [p_star](std::span<const double> v, std::span<const Vector>) {
          return std::pow(std::abs(v[0]), p_star);
        },
        &w, false);
  };

  std::vector<std::vector<Cell>> levels;
  std::vector<Cell> kept;
  for (int j = 0; j <= config.j_max; ++j) {
    const double cell = r * std::pow(2.0, -j);
    std::vector<Cell> cells;
    if (j == 0) {
      const Discretization& net = cached_net(m, r, config.region);
      for (const Point& p : net.points) cells.push_back({p, 0.0, 0});
    } else {
      for (const Cell& parent : kept) {
        for (const Vector& off : child_stencil(m.dimension)) {
          const Point child = exp_map(m, parent.center, (2.2 * cell) * off);
          bool dup = false;
          for (const Cell& existing : cells)
            if (distance(m, existing.center, child) < 0.4 * cell) {
              dup = true;
              break;
            }
          if (!dup) cells.push_back({child, 0.0, 0});
        }
      }
    }
    for (size_t i = 0; i < cells.size(); ++i) {
      cells[i].index = static_cast<int>(i);
      cells[i].mass = mass_at(cells[i].center, 2.0 * cell);
    }
    double top = 0.0;
    for (const Cell& c : cells) top = std::max(top, c.mass);
    std::vector<Cell> selected;
    if (top > 1e-18) {
      std::vector<Cell> ranked = cells;
      std::stable_sort(ranked.begin(), ranked.end(),
                       [](const Cell& a, const Cell& b) {
                         if (a.mass != b.mass) return a.mass > b.mass;
                         return a.index < b.index;
                       });
      for (const Cell& c : ranked) {
        if (c.mass < config.keep_fraction * top || c.mass <= 1e-18) break;
        selected.push_back(c);
        if (static_cast<int>(selected.size()) >= config.max_kept_cells) break;
      }
    }
    levels.push_back(selected);
    kept = levels.back();
    if (kept.empty()) break;
  }
  return levels;
}

bool separation_persists(const ManifoldModel& m, const Point& cand_center,
                         const std::function<int(int)>& cand_scale,
                         const ExtractedBubble& excl,
                         const std::vector<int>& k_eval) {
  const auto excl_center = excl.center_path();
  const auto excl_scale = excl.scale_path();
  const int k_lo = k_eval.front();
  const int k_hi = k_eval.back();
  const double s_lo = separation_functional(
      m, cand_center, cand_scale(k_lo), excl_center(k_lo), excl_scale(k_lo));
  const double s_hi = separation_functional(
      m, cand_center, cand_scale(k_hi), excl_center(k_hi), excl_scale(k_hi));
  return s_hi >= 2.0 * s_lo && s_hi >= 1.0;
}

std::function<int(int)> anchored_scale_path(int level, double slope, int k_hi) {
  return [level, slope, k_hi](int k) {
    return std::max(
        0, level - static_cast<int>(std::llround(slope * (k_hi - k))));
  };
}

/// Shifts a candidate center onto the mass centroid of its own pullback.
/// A center off by delta drags the k-pullbacks apart by 2^{j_k} delta, so
/// sub-cell accuracy here is what makes profile estimates k-stable.
Point refine_center(const ManifoldModel& m, const ScalarField& u_hi,
                    Point center, int level, const GridSpec& grid) {
  const double scale = std::pow(2.0, -level);
  for (int iter = 0; iter < 3; ++iter) {
    const Eigen::ArrayXd pb = rescaled_pullback(m, u_hi, center, level, grid);
    double mass = 0.0;
    Vector centroid = Vector::Zero(grid.dimension);
    for (long i = 0; i < pb.size(); ++i) {
      const double w = pb(i) * pb(i);
      mass += w;
      centroid += w * grid.node(i);
    }
    if (mass <= 1e-300) break;
    centroid /= mass;
    if (centroid.norm() < 0.05 * grid.spacing()) break;
    center = exp_map(m, center, scale * centroid);
  }
  return center;
}

}  // namespace

std::vector<CandidateScore> scan_candidates(
    const ManifoldModel& m, const FieldSequence& u,
    const ExtractionConfig& config,
    const std::vector<ExtractedBubble>& exclusions) {
  const int k_hi = config.k_hi();
  const ScalarField u_hi = u.generator(k_hi);
  if (u_hi.is_zero()) return {};
  const auto pyramid = localization_pyramid(m, u_hi, config);
  const int j_floor = min_valid_level(m, config.scan_grid);

  std::vector<CandidateScore> out;
  for (int j = 0; j < static_cast<int>(pyramid.size()); ++j) {
    if (j < j_floor) continue;
    for (const Cell& cell : pyramid[j]) {
      const auto scale = anchored_scale_path(j, config.scan_slope, k_hi);
      bool excluded = false;
      for (const ExtractedBubble& e : exclusions)
        if (!separation_persists(m, cell.center, scale, e, config.k_eval)) {
          excluded = true;
          break;
        }
      if (excluded) continue;
      const Eigen::ArrayXd pb =
          rescaled_pullback(m, u_hi, cell.center, j, config.scan_grid);
      const double energy = grid_h1_energy(pb, config.scan_grid);
      const double energy_half = grid_h1_energy(pb, config.scan_grid, 2);
      if (std::abs(energy - energy_half) >
          config.scan_consistency * std::max(energy, 1e-300))
        continue;  // features unresolved at this level
      out.push_back({cell.center, j, cell.index, std::sqrt(energy)});
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const CandidateScore& a, const CandidateScore& b) {
                     if (a.score != b.score) return a.score > b.score;
                     if (a.level != b.level) return a.level < b.level;
                     return a.cell_index < b.cell_index;
                   });
  return out;
}

ScalarField realize_bubble(const ManifoldModel& m, const ExtractedBubble& b,
                           int k) {
  GridInterpolant interp = make_interpolant(b.grid, b.profile_samples);
  BubbleSpec spec =
      make_bubble_from_samples(interp, b.center, b.scale_path(), 1.0);
  const int j_floor = min_valid_level(m, b.grid);
  auto base = spec.scale_path;
  spec.scale_path = [base, j_floor](int k2) {
    return std::max(base(k2), j_floor);
  };
  // keep the synthesized support inside the chart; the samples vanish
  // towards the cube edge, so clipping the corner reach is harmless
  const double reach = b.grid.radius * std::sqrt(double(b.grid.dimension));
  if (std::pow(2.0, -spec.scale_path(k)) * reach >= m.chart_radius)
    spec.profile_support = b.grid.radius;
  return synth_bubble(m, spec, smooth_cutoff(m.chart_radius), k);
}

ExtractionResult extract_bubbles(const ManifoldModel& m, const FieldSequence& u,
                                 const ExtractionConfig& config) {
  config.validate(m);
  QuadratureSpec q(m, config.region, config.quad_order);
  ExtractionResult result;
  result.remainder = u;
  result.residual_energy.push_back(
      std::pow(grad_seminorm(u.generator(config.k_hi()), q), 2));

  while (true) {
    const auto candidates =
        scan_candidates(m, result.remainder, config, result.bubbles);
    if (candidates.empty()) break;
    const double top = candidates.front().score;
    if (top < config.epsilon_stop) break;
    if (static_cast<int>(result.bubbles.size()) >= config.max_bubbles) {
      result.saturated = true;
      break;
    }

    // pick order: the near-maximal plateau first (coarsest level, lowest net
    // index), then the remaining candidates by rank
    std::vector<const CandidateScore*> order;
    for (const CandidateScore& c : candidates)
      if (c.score >= (1.0 - kPlateauTol) * top) order.push_back(&c);
    std::stable_sort(order.begin(), order.end(),
                     [](const CandidateScore* a, const CandidateScore* b) {
                       if (a->level != b->level) return a->level < b->level;
                       return a->cell_index < b->cell_index;
                     });
    for (const CandidateScore& c : candidates)
      if (c.score < (1.0 - kPlateauTol) * top) order.push_back(&c);

    const ScalarField u_hi = result.remainder.generator(config.k_hi());
    bool accepted = false;
    for (const CandidateScore* pick : order) {
      if (pick->score < std::max(config.epsilon_stop, config.gamma * top))
        break;
      const Point center = refine_center(m, u_hi, pick->center, pick->level,
                                         config.scan_grid);
      const auto scale =
          anchored_scale_path(pick->level, config.scan_slope, config.k_hi());
      const auto center_path = [center](int) { return center; };
      ProfileEstimate est =
          estimate_profile(m, result.remainder, center_path, scale, config);
      if (est.energy < config.epsilon_stop * config.epsilon_stop) continue;
      if (est.stability > config.stability_limit) continue;

      ExtractedBubble bubble;
      bubble.center = center;
      bubble.level = pick->level;
      bubble.slope = config.scan_slope;
      bubble.k_anchor = config.k_hi();
      bubble.grid = est.grid;
      bubble.profile_samples = est.pullbacks.back();
      bubble.profile_energy = est.energy;
      bubble.stability = est.stability;
      bubble.score = pick->score;
      result.bubbles.push_back(bubble);

      const ManifoldModel model = m;
      const FieldSequence prev = result.remainder;
      const ExtractedBubble sub = bubble;
      result.remainder.generator = [model, prev, sub](int k) {
        return add(prev.generator(k), negate(realize_bubble(model, sub, k)));
      };
      result.residual_energy.push_back(std::pow(
          grad_seminorm(result.remainder.generator(config.k_hi()), q), 2));
      accepted = true;
      break;
    }
    if (!accepted) break;
  }
  return result;
}

// ---------------------------------------------------------------------------
// weak limit

ScalarField estimate_weak_limit(const ManifoldModel& m, const FieldSequence& u,
                                const ExtractionConfig& config,
                                GridSpec* grid_out,
                                Eigen::ArrayXd* samples_out) {
  GridSpec grid;
  grid.dimension = m.dimension;
  grid.points_per_axis = config.limit_grid_points;
  grid.radius = std::min(config.region.radius, 0.55 * m.injectivity_radius());
  const int nk = static_cast<int>(config.k_eval.size());
  std::vector<ScalarField> fields;
  fields.reserve(nk);
  for (int k : config.k_eval) fields.push_back(u.generator(k));

  const ChartFrame chart(m, config.region.center);
  Eigen::ArrayXXd values(grid.total_points(), nk);
  for (int c = 0; c < nk; ++c) {
    const ScalarField& f = fields[c];
    parallel_for(grid.total_points(),
                 [&](long i) { values(i, c) = f.value(m, chart.exp(grid.node(i))); });
  }
  const double scale = values.abs().maxCoeff();
  const double tol = std::max(1e-12, 1e-3 * scale);

  // pointwise stabilization: accept the last value only where the tail of
  // the sequence has settled; transient features have no pointwise limit
  Eigen::ArrayXd limit(grid.total_points());
  for (long i = 0; i < grid.total_points(); ++i) {
    if (nk == 1)
      limit(i) = values(i, 0);
    else
      limit(i) = std::abs(values(i, nk - 1) - values(i, nk - 2)) <= tol
                     ? values(i, nk - 1)
                     : 0.0;
  }
  if (grid_out) *grid_out = grid;
  if (samples_out) *samples_out = limit;

  const double support = trim_radius(grid, limit, std::max(1e-12, 1e-6 * scale));
  return interpolant_field(
      config.region.center, make_interpolant(grid, limit),
      std::min(support, grid.radius * std::sqrt(double(m.dimension))), 0);
}

// ---------------------------------------------------------------------------
// shift scan

ScalarField shift_profile_field(const ManifoldModel& m, const ShiftTerm& s) {
  const double scale = s.profile_samples.abs().maxCoeff();
  const double support =
      trim_radius(s.grid, s.profile_samples, std::max(1e-12, 1e-6 * scale));
  return interpolant_field(
      m.basepoint(), make_interpolant(s.grid, s.profile_samples),
      std::min(support, s.grid.radius * std::sqrt(double(m.dimension))), 0);
}

ScalarField realize_shift(const ManifoldModel& m, const ShiftTerm& s, int k) {
  return transform_field(m, shift_profile_field(m, s),
                         inverse(s.isometry_path(m)(k)));
}

namespace {

struct ShiftProbe {
  ShiftTerm term;
  double grid_h12 = 0.0;
};

Eigen::ArrayXd sample_dragged(const ManifoldModel& m, const ScalarField& f,
                              const Isometry& eta, const GridSpec& grid) {
  // samples of (f o eta^{-1}) in the basepoint chart
  const Isometry eta_inv = inverse(eta);
  const ChartFrame chart(m, m.basepoint());
  Eigen::ArrayXd out(grid.total_points());
  parallel_for(grid.total_points(), [&](long i) {
    out(i) = f.value(m, apply(eta_inv, chart.exp(grid.node(i))));
  });
  return out;
}

std::optional<ShiftProbe> probe_shift(const ManifoldModel& m,
                                      const FieldSequence& u, int axis,
                                      int sign, double speed,
                                      const ExtractionConfig& config) {
  const int n = static_cast<int>(config.k_eval.size());
  if (n < 2) return std::nullopt;
  const int k_hi = config.k_eval[n - 1];
  const int k_prev = config.k_eval[n - 2];
  const auto path = [&](int k) {
    return axis_transvection(m, axis, sign * speed * k);
  };
  const Eigen::ArrayXd last =
      sample_dragged(m, u.generator(k_hi), path(k_hi), config.shift_grid);
  const double h12 = grid_h1_energy(last, config.shift_grid) +
                     grid_lp_pow(last, config.shift_grid, 2.0);
  if (std::sqrt(h12) < config.shift_epsilon) return std::nullopt;
  const Eigen::ArrayXd prev =
      sample_dragged(m, u.generator(k_prev), path(k_prev), config.shift_grid);
  const double base = std::sqrt(grid_lp_pow(last, config.shift_grid, 2.0));
  const double stability =
      base > 1e-14 ? grid_l2_distance(last, prev, config.shift_grid) / base
                   : 0.0;
  if (stability > config.stability_limit) return std::nullopt;

  ShiftProbe probe;
  probe.grid_h12 = h12;
  probe.term.axis = axis;
  probe.term.sign = sign;
  probe.term.speed = speed;
  probe.term.grid = config.shift_grid;
  probe.term.profile_samples = last;
  probe.term.stability = stability;
  return probe;
}

}  // namespace

// ---------------------------------------------------------------------------
// combined pipeline

DecompositionOutcome full_decompose(const ManifoldModel& m,
                                    const FieldSequence& u,
                                    const ExtractionConfig& config) {
  config.validate(m);
  const bool homogeneous = m.kind != ManifoldKind::sphere;
  if (!homogeneous && config.shifts_enabled)
    throw std::invalid_argument(
        "full_decompose: shift scan requires a homogeneous model; disable "
        "shifts on the sphere");

  QuadratureSpec q(m, config.region, config.quad_order);
  const double p_star = critical_exponent(m.dimension);

  DecompositionOutcome out;
  DecompositionReport& rep = out.report;
  rep.manifold_kind = to_string(m.kind);
  rep.dimension = m.dimension;
  rep.curvature = m.curvature;
  rep.chart_radius = m.chart_radius;
  rep.k_eval = config.k_eval;

  // 1) weak limit
  out.weak_limit_field = estimate_weak_limit(m, u, config, &rep.weak_limit_grid,
                                             &rep.weak_limit_samples);
  rep.weak_limit_h12 =
      out.weak_limit_field.is_zero()
          ? 0.0
          : h12_inner(out.weak_limit_field, out.weak_limit_field, q);
  rep.weak_limit_mass =
      out.weak_limit_field.is_zero()
          ? 0.0
          : std::pow(lp_norm(out.weak_limit_field, p_star, q), p_star);

  const ManifoldModel model = m;
  const ScalarField weak_limit = out.weak_limit_field;
  FieldSequence current = u;
  if (!weak_limit.is_zero())
    current.generator = [model, u, weak_limit](int k) {
      return add(u.generator(k), negate(weak_limit));
    };

  // 2) shift concentrations (homogeneous models only)
  if (config.shifts_enabled && homogeneous) {
    for (int round = 0; round < config.max_shifts; ++round) {
      std::optional<ShiftProbe> best;
      for (int axis = 0; axis < m.dimension; ++axis)
        for (int sign : {+1, -1})
          for (double speed : config.shift_speeds) {
            auto probe = probe_shift(m, current, axis, sign, speed, config);
            if (probe && (!best || probe->grid_h12 > best->grid_h12))
              best = probe;
          }
      if (!best) break;
      ShiftTerm term = best->term;
      const ScalarField profile = shift_profile_field(m, term);
      term.h12_energy = h12_inner(profile, profile, q);
      term.mass = std::pow(lp_norm(profile, p_star, q), p_star);
      rep.shifts.push_back(term);
      out.shift_profiles.push_back(profile);

      const FieldSequence prev = current;
      const ShiftTerm sub = term;
      current.generator = [model, prev, sub](int k) {
        return add(prev.generator(k), negate(realize_shift(model, sub, k)));
      };
    }
  }

  // 3) concentrating bubbles on the residue
  ExtractionResult extraction = extract_bubbles(m, current, config);
  rep.bubbles = extraction.bubbles;
  rep.saturated = extraction.saturated;
  rep.residual_energy = extraction.residual_energy;
  out.remainder = extraction.remainder;

  // 4) ledgers
  double shift_h12 = 0.0, shift_mass = 0.0;
  for (const ShiftTerm& s : rep.shifts) {
    shift_h12 += s.h12_energy;
    shift_mass += s.mass;
  }
  double bubble_energy = 0.0, bubble_mass = 0.0;
  for (const ExtractedBubble& b : rep.bubbles) {
    bubble_energy += b.profile_energy;
    bubble_mass += grid_lp_pow(b.profile_samples, b.grid, p_star);
  }
  const std::vector<double> norm_exponents = {3.0, p_star};
  for (double p : norm_exponents) rep.remainder_norms[p] = {};
  for (int k : config.k_eval) {
    const ScalarField u_k = u.generator(k);
    const ScalarField rem_k = out.remainder.generator(k);
    LedgerRow energy;
    energy.k = k;
    energy.total = h12_inner(u_k, u_k, q);
    energy.u_term = rep.weak_limit_h12;
    energy.shift_term = shift_h12;
    energy.bubble_term = bubble_energy;
    energy.slack =
        energy.total - energy.u_term - energy.shift_term - energy.bubble_term;
    rep.energy_ledger.push_back(energy);

    LedgerRow mass;
    mass.k = k;
    mass.total = std::pow(lp_norm(u_k, p_star, q), p_star);
    mass.u_term = rep.weak_limit_mass;
    mass.shift_term = shift_mass;
    mass.bubble_term = bubble_mass;
    mass.slack = mass.total - mass.u_term - mass.shift_term - mass.bubble_term;
    rep.mass_ledger.push_back(mass);

    for (double p : norm_exponents)
      rep.remainder_norms[p].push_back(lp_norm(rem_k, p, q));
  }
  return out;
}

}  // namespace bubbledec
