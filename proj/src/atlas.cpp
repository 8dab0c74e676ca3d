#include "bubbledec/atlas.hpp"

#include <algorithm>
#include <cmath>

namespace bubbledec {

const Point& TrailingFamily::trailing(int k_index, int i) const {
  return net.points[orderings[k_index].order[i]];
}

TrailingFamily trailing_family(const ManifoldModel& m, const Discretization& d,
                               const std::function<Point(int)>& base_path,
                               const std::vector<int>& ks) {
  if (d.points.empty())
    throw std::invalid_argument("trailing_family: empty net");
  TrailingFamily out;
  out.net = d;
  out.ks = ks;
  out.orderings.reserve(ks.size());
  for (int k : ks)
    out.orderings.push_back(trailing_ordering(m, d, base_path(k)));
  return out;
}

TransitionLimit transition_sequence(const ManifoldModel& m,
                                    const TrailingFamily& family, int i, int j,
                                    const GridSpec& grid) {
  TransitionLimit out;
  out.i = i;
  out.j = j;
  out.grid = grid;
  const long nodes = grid.total_points();
  for (size_t kidx = 0; kidx < family.ks.size(); ++kidx) {
    const Point& yi = family.trailing(static_cast<int>(kidx), i);
    const Point& yj = family.trailing(static_cast<int>(kidx), j);
    if (distance(m, yi, yj) + grid.radius >= m.chart_radius)
      throw std::domain_error("transition_sequence: charts do not overlap");
    const ChartFrame ci(m, yi);
    const ChartFrame cj(m, yj);
    Eigen::MatrixXd samples(nodes, m.dimension);
    parallel_for(nodes, [&](long n) {
      samples.row(n) = ci.log(cj.exp(grid.node(n))).transpose();
    });
    out.samples_per_k.push_back(std::move(samples));
  }
  out.limit_samples = out.samples_per_k.back();
  out.gaps.reserve(out.samples_per_k.size());
  for (const Eigen::MatrixXd& s : out.samples_per_k)
    out.gaps.push_back(
        (s - out.limit_samples).rowwise().norm().maxCoeff());
  const size_t nk = out.samples_per_k.size();
  out.cauchy_gap = nk >= 2 ? (out.samples_per_k[nk - 2] - out.limit_samples)
                                 .rowwise()
                                 .norm()
                                 .maxCoeff()
                           : 0.0;
  return out;
}

LimitMetric limit_metric(const ManifoldModel& m, const TrailingFamily& family,
                         int i, const GridSpec& grid) {
  LimitMetric out;
  out.chart = i;
  out.grid = grid;
  const long nodes = grid.total_points();
  const int k_last = static_cast<int>(family.ks.size()) - 1;
  const Point& y = family.trailing(k_last, i);
  out.samples.resize(nodes);
  parallel_for(nodes, [&](long n) {
    out.samples[n] = metric_in_normal_coords_fd(m, y, grid.node(n)).g;
  });
  // cross-k stability probed on a coarse subsample
  if (family.ks.size() >= 2) {
    const Point& y_prev = family.trailing(k_last - 1, i);
    double gap = 0.0;
    const long step = std::max<long>(1, nodes / 16);
    for (long n = 0; n < nodes; n += step) {
      const Matrix prev = metric_in_normal_coords_fd(m, y_prev, grid.node(n)).g;
      gap = std::max(gap, (out.samples[n] - prev).cwiseAbs().maxCoeff());
    }
    out.stability_gap = gap;
  }
  return out;
}

namespace {

Matrix interp_metric(const LimitMetric& g, const Vector& xi) {
  // multilinear interpolation of each component over the sample grid
  const GridSpec& grid = g.grid;
  const int n = grid.dimension;
  const double h = grid.spacing();
  std::vector<long> base(n);
  std::vector<double> frac(n);
  for (int a = 0; a < n; ++a) {
    const double t = (xi(a) + grid.radius) / h;
    long idx = static_cast<long>(std::floor(t));
    idx = std::clamp<long>(idx, 0, grid.points_per_axis - 2);
    base[a] = idx;
    frac[a] = std::clamp(t - idx, 0.0, 1.0);
  }
  Matrix out = Matrix::Zero(n, n);
  for (int corner = 0; corner < (1 << n); ++corner) {
    long idx = 0;
    double w = 1.0;
    for (int a = 0; a < n; ++a) {
      const int bit = (corner >> a) & 1;
      idx = idx * grid.points_per_axis + base[a] + bit;
      w *= bit ? frac[a] : 1.0 - frac[a];
    }
    out += w * g.samples[idx];
  }
  return out;
}

}  // namespace

double compatibility_residual(const LimitMetric& gi, const LimitMetric& gj,
                              const TransitionLimit& psi_ji, int k_index) {
  const GridSpec& grid = psi_ji.grid;
  const int n = grid.dimension;
  const int ppa = grid.points_per_axis;
  const double h = grid.spacing();
  const Eigen::MatrixXd& psi = psi_ji.samples_per_k.at(k_index);

  std::vector<long> strides(n);
  for (int a = 0; a < n; ++a) {
    long s = 1;
    for (int b = a + 1; b < n; ++b) s *= ppa;
    strides[a] = s;
  }
  const double rho = grid.radius;
  double worst = -1.0;
  for (long idx = 0; idx < grid.total_points(); ++idx) {
    bool interior = true;
    for (int a = 0; a < n && interior; ++a) {
      const long i = (idx / strides[a]) % ppa;
      interior = i > 0 && i < ppa - 1;
    }
    if (!interior) continue;
    const Vector xi = grid.node(idx);
    if (xi.norm() > rho - h) continue;
    const Vector image = psi.row(idx).transpose();
    if (image.norm() > rho - h) continue;  // outside the shared overlap

    Matrix dpsi(n, n);  // dpsi(c, a) = d psi^c / d xi_a
    bool ok = true;
    for (int a = 0; a < n && ok; ++a) {
      const Vector fwd = psi.row(idx + strides[a]).transpose();
      const Vector bwd = psi.row(idx - strides[a]).transpose();
      if (fwd.norm() > rho || bwd.norm() > rho) ok = false;
      dpsi.col(a) = (fwd - bwd) / (2.0 * h);
    }
    if (!ok) continue;
    const Matrix gj_at = interp_metric(gj, image);
    const Matrix gi_at = interp_metric(gi, xi);
    const Matrix pulled = dpsi.transpose() * gj_at * dpsi;
    worst = std::max(worst, (gi_at - pulled).cwiseAbs().maxCoeff());
  }
  if (worst < 0.0)
    throw std::domain_error("compatibility_residual: empty chart overlap");
  return worst;
}

std::vector<std::pair<int, int>> atlas_usable_pairs(const ManifoldModel& m,
                                                    const TrailingFamily& family,
                                                    double rho, int max_index) {
  std::vector<std::pair<int, int>> out;
  const int count = std::min<int>(max_index, static_cast<int>(family.net.points.size()));
  for (int i = 0; i < count; ++i)
    for (int j = i + 1; j < count; ++j) {
      bool usable = true;
      for (size_t kidx = 0; kidx < family.ks.size() && usable; ++kidx) {
        const double d = distance(m, family.trailing(static_cast<int>(kidx), i),
                                  family.trailing(static_cast<int>(kidx), j));
        usable = d <= 3.0 * rho && d + rho < m.chart_radius;
      }
      if (usable) out.emplace_back(i, j);
    }
  return out;
}

Discretization orbit_lattice_net(const ManifoldModel& m,
                                 const OrbitNetConfig& config) {
  const Point o = m.basepoint();
  const ManifoldModel flat = ManifoldModel::make_euclidean(m.dimension, 1.0);
  const Discretization tmpl = build_discretization(
      flat, config.template_rho / config.template_radius,
      Ball{flat.basepoint(), 1.0}, /*padding=*/0.0);

  Discretization out;
  out.rho = config.template_rho;
  for (int s = 0; s <= config.slabs; ++s) {
    const Isometry slab = axis_transvection(m, config.axis, config.spacing * s);
    const double dilate = 1.0 + config.dilation * std::pow(2.0, -s);
    for (const Point& p : tmpl.points) {
      const Vector xi = config.template_radius * dilate * p.coords;
      out.points.push_back(apply(slab, exp_map(m, o, xi)));
    }
  }
  const Isometry mid =
      axis_transvection(m, config.axis, config.spacing * config.slabs / 2.0);
  out.region = Ball{apply(mid, o),
                    config.spacing * config.slabs / 2.0 +
                        config.template_radius * (1.0 + config.dilation)};
  return out;
}

std::function<Point(int)> orbit_base_path(const ManifoldModel& m,
                                          const OrbitNetConfig& config) {
  const ManifoldModel model = m;
  const int axis = config.axis;
  const double spacing = config.spacing;
  return [model, axis, spacing](int k) {
    return apply(axis_transvection(model, axis, spacing * k), model.basepoint());
  };
}

}  // namespace bubbledec
