#include "bubbledec/fields.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <thread>

namespace bubbledec {

// ---------------------------------------------------------------------------
// deterministic parallel helpers

namespace {
std::atomic<int> g_max_threads{0};
thread_local bool t_inside_parallel = false;

int effective_threads() {
  int n = g_max_threads.load();
  if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
  return std::max(1, n);
}
}  // namespace

void set_max_threads(int n) { g_max_threads.store(n); }
int max_threads() { return effective_threads(); }

void parallel_for(long n, const std::function<void(long)>& fn) {
  const int threads = t_inside_parallel ? 1 : effective_threads();
  if (threads == 1 || n < 256) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const long per = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const long lo = t * per;
    const long hi = std::min(n, lo + per);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] {
      t_inside_parallel = true;
      for (long i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

double parallel_sum(long n, const std::function<double(long)>& term) {
  // fixed chunking: the reduction order is independent of the thread count
  constexpr long kChunk = 2048;
  const long chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(static_cast<size_t>(std::max<long>(chunks, 0)), 0.0);
  parallel_for(chunks, [&](long c) {
    const long lo = c * kChunk;
    const long hi = std::min(n, lo + kChunk);
    double s = 0.0;
    for (long i = lo; i < hi; ++i) s += term(i);
    partial[c] = s;
  });
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

// ---------------------------------------------------------------------------
// ScalarField

double ScalarField::value(const ManifoldModel& m, const Point& x) const {
  double acc = 0.0;
  for (const FieldComponent& c : components) {
    if (distance(m, c.anchor, x) >= c.support_radius) continue;
    acc += c.value(log_map(m, c.anchor, x));
  }
  return acc;
}

Vector ScalarField::chart_gradient(const ManifoldModel& m, const Point& x) const {
  Vector acc = Vector::Zero(m.dimension);
  for (const FieldComponent& c : components) {
    if (distance(m, c.anchor, x) >= c.support_radius) continue;
    const Vector xi = log_map(m, c.anchor, x);
    acc += gradient_to_own_chart(m, c.anchor, xi, c.gradient(xi));
  }
  return acc;
}

std::vector<Ball> ScalarField::support_hint() const {
  std::vector<Ball> out;
  out.reserve(components.size());
  for (const FieldComponent& c : components)
    out.push_back(Ball{c.anchor, c.support_radius});
  return out;
}

ScalarField add(const ScalarField& a, const ScalarField& b) {
  ScalarField out = a;
  out.components.insert(out.components.end(), b.components.begin(),
                        b.components.end());
  return out;
}

ScalarField negate(const ScalarField& a) { return scale_field(a, -1.0); }

ScalarField scale_field(const ScalarField& a, double factor) {
  ScalarField out;
  out.components.reserve(a.components.size());
  for (const FieldComponent& c : a.components) {
    FieldComponent s = c;
    auto v = c.value;
    auto g = c.gradient;
    s.value = [v, factor](const Vector& xi) { return factor * v(xi); };
    s.gradient = [g, factor](const Vector& xi) { return Vector(factor * g(xi)); };
    out.components.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gauss-Legendre rules

namespace {

struct Rule1D {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;  // sum 2
};

const Rule1D& gauss_legendre(int order) {
  static std::mutex mu;
  static std::map<int, Rule1D> cache;
  std::scoped_lock lock(mu);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;
  // Golub-Welsch: eigendecomposition of the Jacobi matrix
  Matrix jac = Matrix::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jac(k, k - 1) = b;
    jac(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(jac);
  Rule1D rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    rule.nodes[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    rule.weights[i] = 2.0 * v0 * v0;
  }
  return cache.emplace(order, std::move(rule)).first->second;
}

}  // namespace

void QuadratureSpec::cube_rule(double half, std::vector<Vector>& nodes,
                               std::vector<double>& weights) const {
  cube_rule(half, order_, subdivisions_, nodes, weights);
}

void QuadratureSpec::cube_rule(double half, int order, int subdivisions,
                               std::vector<Vector>& nodes,
                               std::vector<double>& weights) const {
  const Rule1D& r1 = gauss_legendre(order);
  const int n = model_.dimension;
  const int per_axis = order * subdivisions;
  // composite 1D rule on [-half, half]
  std::vector<double> x1(per_axis), w1(per_axis);
  const double cell = 2.0 * half / subdivisions;
  for (int c = 0; c < subdivisions; ++c)
    for (int i = 0; i < order; ++i) {
      x1[c * order + i] = -half + cell * (c + 0.5 * (r1.nodes[i] + 1.0));
      w1[c * order + i] = 0.5 * cell * r1.weights[i];
    }
  long total = 1;
  for (int a = 0; a < n; ++a) total *= per_axis;
  nodes.clear();
  weights.clear();
  nodes.reserve(total);
  weights.reserve(total);
  std::vector<int> idx(n, 0);
  while (true) {
    Vector xi(n);
    double w = 1.0;
    for (int a = 0; a < n; ++a) {
      xi(a) = x1[idx[a]];
      w *= w1[idx[a]];
    }
    nodes.push_back(std::move(xi));
    weights.push_back(w);
    int a = n - 1;
    while (a >= 0 && idx[a] == per_axis - 1) idx[a--] = 0;
    if (a < 0) break;
    ++idx[a];
  }
}

void QuadratureSpec::ball_rule(double radius, int order, int subdivisions,
                               std::vector<Vector>& nodes,
                               std::vector<double>& weights,
                               int angular_boost) const {
  if (model_.dimension != 3) {
    cube_rule(radius, order, subdivisions, nodes, weights);
    return;
  }
  const Rule1D& rg = gauss_legendre(order);
  // composite radial rule on [0, radius]
  std::vector<double> rho, wr;
  const double cell = radius / subdivisions;
  for (int c = 0; c < subdivisions; ++c)
    for (int i = 0; i < order; ++i) {
      rho.push_back(cell * (c + 0.5 * (rg.nodes[i] + 1.0)));
      wr.push_back(0.5 * cell * rg.weights[i]);
    }
  const int n_theta = std::max(8, order) * std::max(1, angular_boost);
  const int n_phi = 2 * n_theta;
  const Rule1D& rc = gauss_legendre(n_theta);  // in cos(theta)
  nodes.clear();
  weights.clear();
  nodes.reserve(rho.size() * n_theta * n_phi);
  weights.reserve(rho.size() * n_theta * n_phi);
  for (size_t ir = 0; ir < rho.size(); ++ir)
    for (int it = 0; it < n_theta; ++it) {
      const double cth = rc.nodes[it];
      const double sth = std::sqrt(std::max(0.0, 1.0 - cth * cth));
      for (int ip = 0; ip < n_phi; ++ip) {
        const double phi = 2.0 * M_PI * (ip + 0.5) / n_phi;
        Vector xi(3);
        xi << rho[ir] * sth * std::cos(phi), rho[ir] * sth * std::sin(phi),
            rho[ir] * cth;
        nodes.push_back(std::move(xi));
        weights.push_back(wr[ir] * rho[ir] * rho[ir] * rc.weights[it] * 2.0 *
                          M_PI / n_phi);
      }
    }
}

// ---------------------------------------------------------------------------
// QuadratureSpec: anchor-invariant chart covers

struct QuadratureSpec::Cache {
  std::mutex mu;
  std::map<double, std::shared_ptr<const Cover>> covers;
};

QuadratureSpec::QuadratureSpec(const ManifoldModel& m, const Ball& region,
                               int order, int subdivisions)
    : model_(m),
      region_(region),
      order_(order),
      subdivisions_(subdivisions),
      chart_cutoff_(smooth_cutoff(m.chart_radius)),
      cache_(std::make_shared<Cache>()) {
  if (order_ < 2) throw std::invalid_argument("quadrature order must be >= 2");
  if (subdivisions_ < 1)
    throw std::invalid_argument("quadrature subdivisions must be >= 1");
}

QuadratureSpec make_quadrature(const ManifoldModel& m, const Ball& region,
                               int order, int subdivisions) {
  return QuadratureSpec(m, region, order, subdivisions);
}

namespace {
double bucket_radius(double radius) {
  static const double buckets[] = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0};
  for (double b : buckets)
    if (radius <= b) return b;
  return std::ceil(radius);
}
}  // namespace

std::shared_ptr<const QuadratureSpec::Cover> QuadratureSpec::cover_for_radius(
    double radius) const {
  const double bucket = bucket_radius(radius);
  {
    std::scoped_lock lock(cache_->mu);
    auto it = cache_->covers.find(bucket);
    if (it != cache_->covers.end()) return it->second;
  }
  const Point base = model_.basepoint();
  const double r = model_.chart_radius;
  Discretization net =
      build_discretization(model_, 0.5 * r, Ball{base, bucket});
  auto cover = std::make_shared<Cover>();
  cover->radius = bucket;
  cover->chart_offsets.reserve(net.points.size());
  for (const Point& p : net.points)
    cover->chart_offsets.push_back(log_map(model_, base, p));

  // neighbor lists: chart j can overlap chart i only within 2r
  const int charts = static_cast<int>(net.points.size());
  std::vector<std::vector<int>> neighbors(charts);
  for (int i = 0; i < charts; ++i)
    for (int j = 0; j < charts; ++j)
      if (distance(model_, net.points[i], net.points[j]) < 2.0 * r)
        neighbors[i].push_back(j);

  // the partition-of-unity transition band needs a finer composite rule
  std::vector<Vector> cube_nodes;
  std::vector<double> cube_weights;
  ball_rule(r * (1.0 - 1e-12), std::max(6, 2 * order_ / 3), subdivisions_ + 1,
            cube_nodes, cube_weights);

  std::vector<std::vector<CoverNode>> per_chart(charts);
  parallel_for(charts, [&](long i) {
    std::vector<CoverNode>& local = per_chart[i];
    for (size_t nidx = 0; nidx < cube_nodes.size(); ++nidx) {
      const Vector& xi = cube_nodes[nidx];
      const double rho = xi.norm();
      const double own = chart_cutoff_(rho);
      if (own <= 0.0) continue;
      const Point x = exp_map(model_, net.points[i], xi);
      double denom = 0.0;
      for (int j : neighbors[static_cast<size_t>(i)])
        denom += chart_cutoff_(distance(model_, net.points[j], x));
      CoverNode node;
      node.chart = static_cast<int>(i);
      node.xi = xi;
      node.weight = cube_weights[nidx] * metric_sqrt_det(model_, rho) * own / denom;
      local.push_back(std::move(node));
    }
  });
  for (auto& chunk : per_chart)
    cover->nodes.insert(cover->nodes.end(), chunk.begin(), chunk.end());

  std::scoped_lock lock(cache_->mu);
  cache_->covers[bucket] = cover;
  return cover;
}

std::vector<double> QuadratureSpec::partition_weights(const Cover& cover,
                                                      const Vector& xi) const {
  const Point base = model_.basepoint();
  const Point x = exp_map(model_, base, xi);
  std::vector<double> w(cover.chart_offsets.size(), 0.0);
  double denom = 0.0;
  for (size_t i = 0; i < cover.chart_offsets.size(); ++i) {
    const Point c = exp_map(model_, base, cover.chart_offsets[i]);
    w[i] = chart_cutoff_(distance(model_, c, x));
    denom += w[i];
  }
  if (denom > 0)
    for (double& wi : w) wi /= denom;
  return w;
}

// ---------------------------------------------------------------------------
// multiscale telescoped integration

namespace {

struct CompRef {
  int field = 0;
  int index = 0;
  const FieldComponent* comp = nullptr;
  ChartFrame chart;
};

struct EvalScratch {
  std::vector<double> prev_vals, curr_vals;
  std::vector<Vector> prev_amb, curr_amb;  // accumulated ambient gradients
  std::vector<Vector> prev_grads, curr_grads;
};

/// Evaluates partial sums at x: prev covers comps[0..block_first),
/// curr additionally includes the block comps[block_first..block_last].
void eval_partial(const ManifoldModel& m, const std::vector<CompRef>& comps,
                  size_t block_first, size_t block_last, const Point& x,
                  int nfields, bool needs_grad, EvalScratch& s) {
  s.prev_vals.assign(nfields, 0.0);
  s.curr_vals.assign(nfields, 0.0);
  const int ambient = m.ambient_dimension();
  if (needs_grad) {
    s.prev_amb.assign(nfields, Vector::Zero(ambient));
    s.curr_amb.assign(nfields, Vector::Zero(ambient));
  }
  for (size_t i = 0; i <= block_last; ++i) {
    const FieldComponent& c = *comps[i].comp;
    if (distance(m, c.anchor, x) >= c.support_radius) continue;
    const Vector xi = comps[i].chart.log(x);
    const double v = c.value(xi);
    s.curr_vals[comps[i].field] += v;
    if (i < block_first) s.prev_vals[comps[i].field] += v;
    if (needs_grad) {
      const Vector g = comps[i].chart.ambient_gradient(xi, c.gradient(xi));
      s.curr_amb[comps[i].field] += g;
      if (i < block_first) s.prev_amb[comps[i].field] += g;
    }
  }
  if (needs_grad) {
    const ChartFrame at_point(m, x);
    s.prev_grads.resize(nfields);
    s.curr_grads.resize(nfields);
    for (int f = 0; f < nfields; ++f) {
      s.prev_grads[f] = at_point.coefficients(s.prev_amb[f]);
      s.curr_grads[f] = at_point.coefficients(s.curr_amb[f]);
    }
  }
}

std::vector<CompRef> sorted_components(const ManifoldModel& m,
                                       std::span<const ScalarField* const> fields) {
  std::vector<CompRef> comps;
  for (int f = 0; f < static_cast<int>(fields.size()); ++f) {
    const auto& cs = fields[f]->components;
    for (int i = 0; i < static_cast<int>(cs.size()); ++i)
      if (cs[i].support_radius > 0)
        comps.push_back({f, i, &cs[i], ChartFrame(m, cs[i].anchor)});
  }
  std::stable_sort(comps.begin(), comps.end(),
                   [](const CompRef& a, const CompRef& b) {
                     if (a.comp->level != b.comp->level)
                       return a.comp->level < b.comp->level;
                     if (a.field != b.field) return a.field < b.field;
                     return a.index < b.index;
                   });
  return comps;
}

/// A block of components integrated as one increment. Overlapping
/// components of nearby scales must share a block, otherwise an almost
/// cancelling pair (a bubble minus its estimate) is integrated as two huge
/// terms whose quadrature error swamps the true difference.
struct CompGroup {
  std::vector<size_t> members;  // indices into the sorted component list
  Point center;
  double radius = 0.0;
  int min_level = 0;
  int max_level = 0;
};

std::vector<CompGroup> group_components(const ManifoldModel& m,
                                        const std::vector<CompRef>& comps) {
  std::vector<CompGroup> groups;
  for (size_t i = 0; i < comps.size(); ++i) {
    const FieldComponent& c = *comps[i].comp;
    CompGroup* host = nullptr;
    for (CompGroup& g : groups) {
      if (c.level - g.min_level > 2) continue;
      // only nearly concentric components share a block: those are the
      // cancelling pairs, and off-center merging would misalign the
      // radial rule with the components' own radial structure
      if (distance(m, g.center, c.anchor) <
          0.25 * std::max(g.radius, c.support_radius)) {
        host = &g;
        break;
      }
    }
    if (!host) {
      groups.push_back(
          {{i}, c.anchor, c.support_radius, c.level, c.level});
      continue;
    }
    host->members.push_back(i);
    host->max_level = std::max(host->max_level, c.level);
    const double d = distance(m, host->center, c.anchor);
    if (d + c.support_radius > host->radius) {
      if (d + host->radius <= c.support_radius) {
        host->center = c.anchor;
        host->radius = c.support_radius;
      } else {
        // minimal enclosing ball of two balls along the joining geodesic
        const double new_radius = 0.5 * (d + host->radius + c.support_radius);
        const Vector dir = log_map(m, host->center, c.anchor) / d;
        host->center =
            exp_map(m, host->center, (new_radius - host->radius) * dir);
        host->radius = new_radius * (1.0 + 1e-12);
      }
    }
  }
  return groups;
}

}  // namespace

static double integrate_impl(const ManifoldModel& m, const QuadratureSpec& q,
                             std::span<const ScalarField* const> fields,
                             const Integrand* f, const NodeVisitor* visitor,
                             const IntegrationWindow* window,
                             bool needs_gradients) {
  const std::vector<CompRef> sorted = sorted_components(m, fields);
  const std::vector<CompGroup> groups = group_components(m, sorted);
  // flatten so each group's members are consecutive in the prefix order
  std::vector<CompRef> comps;
  comps.reserve(sorted.size());
  struct Range {
    size_t first = 0, last = 0;
    const CompGroup* group = nullptr;
  };
  std::vector<Range> ranges;
  for (const CompGroup& g : groups) {
    Range rg{comps.size(), 0, &g};
    for (size_t idx : g.members) comps.push_back(sorted[idx]);
    rg.last = comps.size() - 1;
    ranges.push_back(rg);
  }

  const int nfields = static_cast<int>(fields.size());
  const double r = m.chart_radius;
  CutoffSpec window_cut;
  if (window) window_cut = smooth_cutoff(window->ball.radius);

  double total = 0.0;
  for (const Range& range : ranges) {
    const CompGroup& g = *range.group;
    Ball patch{g.center, g.radius};
    if (window) {
      const double gap = distance(m, g.center, window->ball.center);
      if (gap >= g.radius + window->ball.radius) continue;
      if (window->ball.radius < patch.radius) patch = window->ball;
    }

    auto node_term = [&](const Point& x, double weight) {
      // the increment vanishes identically wherever every member does
      bool active = false;
      for (size_t i = range.first; i <= range.last && !active; ++i)
        active = distance(m, comps[i].comp->anchor, x) <
                 comps[i].comp->support_radius;
      if (!active) return 0.0;
      double winfac = 1.0;
      if (window) winfac = window_cut(distance(m, x, window->ball.center));
      if (winfac == 0.0) return 0.0;
      thread_local EvalScratch scratch;
      eval_partial(m, comps, range.first, range.last, x, nfields,
                   needs_gradients, scratch);
      if (visitor) {
        (*visitor)(weight * winfac, scratch.curr_vals, scratch.prev_vals);
        return 0.0;
      }
      const double fcurr = (*f)(scratch.curr_vals, scratch.curr_grads);
      const double fprev = (*f)(scratch.prev_vals, scratch.prev_grads);
      return weight * winfac * (fcurr - fprev);
    };

    // mixed-scale groups need proportionally finer radial resolution
    const int gap_cells = 1 << std::min(2, g.max_level - g.min_level);
    // off-center components of a similar or finer scale crossing this patch
    // put oblique bands in the integrand: resolve them angularly
    int angular_boost = 1;
    for (const CompRef& other : comps) {
      const FieldComponent& oc = *other.comp;
      if (oc.level < g.min_level - 2) continue;
      const double d = distance(m, patch.center, oc.anchor);
      if (d >= patch.radius + oc.support_radius) continue;
      if (d > 0.1 * patch.radius) {
        angular_boost = 4;
        break;
      }
    }
    if (patch.radius < 0.98 * m.injectivity_radius()) {
      // single-chart patch; the radial rule keeps cells at the chart scale
      std::vector<Vector> nodes;
      std::vector<double> weights;
      const int subdiv =
          q.subdivisions() * gap_cells *
          std::max(1, static_cast<int>(std::ceil(patch.radius / r)));
      q.ball_rule(patch.radius, q.order(), subdiv, nodes, weights,
                  angular_boost);
      const ChartFrame patch_chart(m, patch.center);
      if (visitor) {
        for (size_t i = 0; i < nodes.size(); ++i)
          node_term(patch_chart.exp(nodes[i]),
                    weights[i] * metric_sqrt_det(m, nodes[i].norm()));
      } else {
        total += parallel_sum(
            static_cast<long>(nodes.size()), [&](long i) {
              return node_term(patch_chart.exp(nodes[i]),
                               weights[i] * metric_sqrt_det(m, nodes[i].norm()));
            });
      }
    } else {
      // chart-partition cover with partition-of-unity weights
      auto cover = q.cover_for_radius(patch.radius);
      const ChartFrame anchor_chart(m, patch.center);
      std::vector<ChartFrame> centers;
      centers.reserve(cover->chart_offsets.size());
      for (const Vector& off : cover->chart_offsets)
        centers.emplace_back(m, anchor_chart.exp(off));
      if (visitor) {
        for (const auto& node : cover->nodes)
          node_term(centers[node.chart].exp(node.xi), node.weight);
      } else {
        total += parallel_sum(
            static_cast<long>(cover->nodes.size()), [&](long i) {
              const auto& node = cover->nodes[i];
              return node_term(centers[node.chart].exp(node.xi), node.weight);
            });
      }
    }
  }
  return total;
}

double integrate(const ManifoldModel& m, const QuadratureSpec& q,
                 std::span<const ScalarField* const> fields, const Integrand& f,
                 const IntegrationWindow* window, bool needs_gradients) {
  return integrate_impl(m, q, fields, &f, nullptr, window, needs_gradients);
}

void integrate_visit(const ManifoldModel& m, const QuadratureSpec& q,
                     std::span<const ScalarField* const> fields,
                     const NodeVisitor& visitor,
                     const IntegrationWindow* window) {
  integrate_impl(m, q, fields, nullptr, &visitor, window, false);
}

// ---------------------------------------------------------------------------
// norms

double lp_norm(const ScalarField& u, double p, const QuadratureSpec& q) {
  if (p < 1.0) throw std::invalid_argument("lp_norm: requires p >= 1");
  for (const FieldComponent& c : u.components)
    if (!std::isfinite(c.support_radius))
      throw std::invalid_argument("lp_norm: unbounded support");
  const ScalarField* fs[] = {&u};
  const double mass = integrate(
      q.model(), q, fs,
      [p](std::span<const double> v, std::span<const Vector>) {
        return std::pow(std::abs(v[0]), p);
      });
  return std::pow(std::max(0.0, mass), 1.0 / p);
}

double h12_inner(const ScalarField& u, const ScalarField& v,
                 const QuadratureSpec& q) {
  const ScalarField* fs[] = {&u, &v};
  return integrate(
      q.model(), q, fs,
      [](std::span<const double> vals, std::span<const Vector> grads) {
        return vals[0] * vals[1] + grads[0].dot(grads[1]);
      },
      nullptr, true);
}

double h12_norm(const ScalarField& u, const QuadratureSpec& q) {
  return std::sqrt(std::max(0.0, h12_inner(u, u, q)));
}

double grad_seminorm(const ScalarField& u, const QuadratureSpec& q) {
  const ScalarField* fs[] = {&u};
  const double e = integrate(
      q.model(), q, fs,
      [](std::span<const double>, std::span<const Vector> grads) {
        return grads[0].squaredNorm();
      },
      nullptr, true);
  return std::sqrt(std::max(0.0, e));
}

// ---------------------------------------------------------------------------
// reference-grid functionals

Eigen::ArrayXd rescaled_pullback(const ManifoldModel& m, const ScalarField& u,
                                 const Point& y, int j, const GridSpec& grid) {
  const double scale = std::pow(2.0, -j);
  if (scale * grid.radius * std::sqrt(static_cast<double>(grid.dimension)) >=
      m.injectivity_radius())
    throw std::domain_error("rescaled_pullback: grid exceeds the chart");
  const double fac = std::pow(2.0, -j * (m.dimension - 2) / 2.0);
  const ChartFrame ychart(m, y);
  std::vector<std::pair<const FieldComponent*, ChartFrame>> comps;
  for (const FieldComponent& c : u.components)
    if (c.support_radius > 0) comps.emplace_back(&c, ChartFrame(m, c.anchor));
  Eigen::ArrayXd out(grid.total_points());
  parallel_for(grid.total_points(), [&](long i) {
    const Point x = ychart.exp(scale * grid.node(i));
    double acc = 0.0;
    for (const auto& [c, chart] : comps)
      if (distance(m, c->anchor, x) < c->support_radius)
        acc += c->value(chart.log(x));
    out(i) = fac * acc;
  });
  return out;
}

namespace {
long grid_stride(const GridSpec& g, int axis) {
  long s = 1;
  for (int a = axis + 1; a < g.dimension; ++a) s *= g.points_per_axis;
  return s;
}
}  // namespace

double grid_h1_energy(const Eigen::ArrayXd& samples, const GridSpec& grid,
                      int stride) {
  const int n = grid.dimension;
  const int ppa = grid.points_per_axis;
  const double h = grid.spacing() * stride;
  std::vector<long> strides(n);
  for (int a = 0; a < n; ++a) strides[a] = grid_stride(grid, a);
  const double cell = std::pow(h, n);
  return parallel_sum(grid.total_points(), [&](long idx) {
    for (int a = 0; a < n; ++a) {
      const long i = (idx / strides[a]) % ppa;
      if (i % stride != 0) return 0.0;  // subsampled lattice
      if (i < stride || i >= ppa - stride) return 0.0;  // interior nodes only
    }
    double acc = 0.0;
    for (int a = 0; a < n; ++a) {
      const double d = (samples(idx + stride * strides[a]) -
                        samples(idx - stride * strides[a])) /
                       (2.0 * h);
      acc += d * d;
    }
    return acc * cell;
  });
}

double grid_lp_pow(const Eigen::ArrayXd& samples, const GridSpec& grid,
                   double p) {
  const int n = grid.dimension;
  const int ppa = grid.points_per_axis;
  const double h = grid.spacing();
  std::vector<long> strides(n);
  for (int a = 0; a < n; ++a) strides[a] = grid_stride(grid, a);
  const double cell = std::pow(h, n);
  return parallel_sum(grid.total_points(), [&](long idx) {
    double w = 1.0;
    for (int a = 0; a < n; ++a) {
      const long i = (idx / strides[a]) % ppa;
      if (i == 0 || i == ppa - 1) w *= 0.5;
    }
    return w * std::pow(std::abs(samples(idx)), p) * cell;
  });
}

double grid_l2_distance(const Eigen::ArrayXd& a, const Eigen::ArrayXd& b,
                        const GridSpec& grid) {
  Eigen::ArrayXd diff = a - b;
  return std::sqrt(grid_lp_pow(diff, grid, 2.0));
}

}  // namespace bubbledec
