#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bubbledec/config.hpp"
#include "bubbledec/extraction.hpp"
#include "oracles.hpp"

using namespace bubbledec;

namespace {

Vector vec3(double a, double b, double c) {
  Vector v(3);
  v << a, b, c;
  return v;
}

ExtractionConfig fast_config(const ManifoldModel& m, double region_radius = 4.0) {
  ExtractionConfig cfg;
  cfg.region = Ball{m.basepoint(), region_radius};
  cfg.profile_grid.dimension = m.dimension;
  cfg.scan_grid.dimension = m.dimension;
  cfg.shift_grid.dimension = m.dimension;
  return cfg;
}

FieldSequence bubble_sequence(const ManifoldModel& m,
                              const std::vector<BubbleSpec>& bubbles) {
  const ManifoldModel model = m;
  const CutoffSpec cut = smooth_cutoff(m.chart_radius);
  FieldSequence seq;
  seq.k_min = 4;
  seq.k_max = 10;
  seq.generator = [model, bubbles, cut](int k) {
    return synth_sequence(model, bubbles, {}, ScalarField{}, cut, k);
  };
  return seq;
}

/// Grid rendering of the true pullback limit of a synthesized bubble along
/// the extracted path (the oracle for profile fidelity).
Eigen::ArrayXd oracle_profile(const ManifoldModel& m, const BubbleSpec& truth,
                              const ExtractedBubble& found) {
  const CutoffSpec cut = smooth_cutoff(m.chart_radius);
  const int k = found.k_anchor;
  const ScalarField w = synth_bubble(m, truth, cut, k);
  return rescaled_pullback(m, w, found.center, found.scale_path()(k), found.grid);
}

}  // namespace

TEST_CASE("estimate_profile") {
  const auto m = ManifoldModel::make_euclidean(3);
  ExtractionConfig cfg = fast_config(m);
  const auto prof = make_profile("bump", 4.0, 3);
  const Point center = exp_map(m, m.basepoint(), vec3(0.7, -0.4, 0.2));
  const auto truth = make_bubble(prof, center, [](int k) { return k; });
  const FieldSequence seq = bubble_sequence(m, {truth});

  SUBCASE("matched path recovers the cutoff-truncated profile") {
    const auto est = estimate_profile(
        m, seq, [center](int) { return center; }, [](int k) { return k; }, cfg);
    CHECK(est.stability < 1e-9);
    double worst = 0.0;
    const Eigen::ArrayXd& last = est.pullbacks.back();
    for (long i = 0; i < last.size(); ++i)
      worst = std::max(worst,
                       std::abs(last(i) - prof.value(est.grid.node(i))));
    CHECK(worst < 1e-10);
    const double energy_oracle = oracles::radial_integral(
        m, [&](double t) { return std::pow(prof.radial_derivative(t), 2.0); },
        4.0);
    CHECK(est.energy == doctest::Approx(energy_oracle).epsilon(0.05));
  }

  SUBCASE("zero sequence gives a zero profile") {
    FieldSequence zero{[](int) { return ScalarField{}; }, 4, 10};
    const auto est = estimate_profile(
        m, zero, [&](int) { return m.basepoint(); }, [](int k) { return k; },
        cfg);
    CHECK(est.energy == 0.0);
    CHECK(est.pullbacks.back().abs().maxCoeff() == 0.0);
  }

  SUBCASE("a separated path sees a vanishing profile") {
    // same center, twice the dyadic speed: the separation functional
    // diverges and the pullbacks lose the bubble
    const auto est = estimate_profile(
        m, seq, [center](int) { return center; }, [](int k) { return 2 * k; },
        cfg);
    CHECK(est.energy < 5e-3);
  }
}

TEST_CASE("scan_candidates") {
  const auto m = ManifoldModel::make_euclidean(3);
  ExtractionConfig cfg = fast_config(m);
  const auto prof = make_profile("bump", 4.0, 3);
  const Point c1 = exp_map(m, m.basepoint(), vec3(-1.2, 0, 0));
  const Point c2 = exp_map(m, m.basepoint(), vec3(1.2, 0, 0));
  const auto b1 = make_bubble(prof, c1, [](int k) { return k; });
  const auto b2 = make_bubble(prof, c2, [](int k) { return k; });

  SUBCASE("zero field yields no candidates") {
    FieldSequence zero{[](int) { return ScalarField{}; }, 4, 10};
    CHECK(scan_candidates(m, zero, cfg, {}).empty());
  }

  SUBCASE("single bubble is located at the right level and cell") {
    const auto cands = scan_candidates(m, bubble_sequence(m, {b1}), cfg, {});
    REQUIRE(!cands.empty());
    const auto& top = cands.front();
    CHECK(std::abs(top.level - 10) <= 1);
    CHECK(distance(m, top.center, c1) <=
          m.chart_radius * std::pow(2.0, -top.level));
  }

  SUBCASE("excluding one bubble leaves the other on top") {
    ExtractedBubble excl;
    excl.center = c1;
    excl.level = 10;
    excl.slope = 1.0;
    excl.k_anchor = 10;
    const auto cands =
        scan_candidates(m, bubble_sequence(m, {b1, b2}), cfg, {excl});
    REQUIRE(!cands.empty());
    CHECK(distance(m, cands.front().center, c2) < 0.02);
  }
}

TEST_CASE("extract_bubbles on a three-bubble corpus") {
  const auto m = ManifoldModel::make_euclidean(3);
  ExtractionConfig cfg = fast_config(m);
  const auto prof = make_profile("bump", 4.0, 3);
  std::vector<BubbleSpec> truths;
  const std::vector<Vector> centers = {vec3(-1.2, 0, 0), vec3(1.2, 0, 0),
                                       vec3(0, 1.5, 0)};
  for (const Vector& c : centers)
    truths.push_back(
        make_bubble(prof, exp_map(m, m.basepoint(), c), [](int k) { return k; }));
  const FieldSequence seq = bubble_sequence(m, truths);
  const ExtractionResult result = extract_bubbles(m, seq, cfg);

  REQUIRE(result.bubbles.size() == 3);
  CHECK(!result.saturated);

  for (const ExtractedBubble& found : result.bubbles) {
    // match to the nearest truth
    int best = 0;
    for (int i = 1; i < 3; ++i)
      if (distance(m, found.center, truths[i].center_path()(10)) <
          distance(m, found.center, truths[best].center_path()(10)))
        best = i;
    CHECK(std::abs(found.level - 10) <= 1);
    CHECK(distance(m, found.center, truths[best].center_path()(10)) <=
          m.chart_radius * std::pow(2.0, -found.level));
    const Eigen::ArrayXd oracle = oracle_profile(m, truths[best], found);
    const double rel_err =
        grid_l2_distance(found.profile_samples, oracle, found.grid) /
        std::sqrt(grid_lp_pow(oracle, found.grid, 2.0));
    CHECK(rel_err <= 0.05);
  }

  SUBCASE("monotone residual and pairwise separation growth") {
    for (size_t i = 0; i + 1 < result.residual_energy.size(); ++i)
      CHECK(result.residual_energy[i + 1] <=
            result.residual_energy[i] * (1.0 + 1e-9));
    for (size_t i = 0; i < result.bubbles.size(); ++i)
      for (size_t j = i + 1; j < result.bubbles.size(); ++j) {
        const auto& a = result.bubbles[i];
        const auto& b = result.bubbles[j];
        const double lo = separation_functional(
            m, a.center_path()(4), a.scale_path()(4), b.center_path()(4),
            b.scale_path()(4));
        const double hi = separation_functional(
            m, a.center_path()(10), a.scale_path()(10), b.center_path()(10),
            b.scale_path()(10));
        CHECK(hi >= 2.0 * lo);
      }
  }

  SUBCASE("re-running on the remainder finds nothing") {
    const ExtractionResult again = extract_bubbles(m, result.remainder, cfg);
    CHECK(again.bubbles.empty());
  }
}

TEST_CASE("zero input extracts nothing") {
  const auto m = ManifoldModel::make_euclidean(3);
  ExtractionConfig cfg = fast_config(m);
  FieldSequence zero{[](int) { return ScalarField{}; }, 4, 10};
  const ExtractionResult result = extract_bubbles(m, zero, cfg);
  CHECK(result.bubbles.empty());
  CHECK(!result.saturated);
}

TEST_CASE("saturation flag instead of an exception") {
  const auto m = ManifoldModel::make_euclidean(3);
  ExtractionConfig cfg = fast_config(m);
  cfg.max_bubbles = 1;
  const auto prof = make_profile("bump", 4.0, 3);
  std::vector<BubbleSpec> truths;
  for (const Vector& c : {vec3(-1.2, 0, 0), vec3(1.2, 0, 0)})
    truths.push_back(
        make_bubble(prof, exp_map(m, m.basepoint(), c), [](int k) { return k; }));
  const ExtractionResult result =
      extract_bubbles(m, bubble_sequence(m, truths), cfg);
  CHECK(result.bubbles.size() == 1);
  CHECK(result.saturated);
}

TEST_CASE("isometry equivariance of the extraction") {
  const auto m = ManifoldModel::make_euclidean(3);
  ExtractionConfig cfg = fast_config(m);
  const auto prof = make_profile("bump", 4.0, 3);
  const Point c = exp_map(m, m.basepoint(), vec3(0.8, -0.3, 0.5));
  const auto truth = make_bubble(prof, c, [](int k) { return k; });
  const FieldSequence seq = bubble_sequence(m, {truth});
  const Isometry eta = axis_transvection(m, 0, 0.66);

  const ManifoldModel model = m;
  FieldSequence moved = seq;
  moved.generator = [model, seq, eta](int k) {
    return transform_field(model, seq.generator(k), eta);
  };
  const ExtractionResult base = extract_bubbles(m, seq, cfg);
  const ExtractionResult shifted = extract_bubbles(m, moved, cfg);
  REQUIRE(base.bubbles.size() == 1);
  REQUIRE(shifted.bubbles.size() == 1);
  CHECK(shifted.bubbles[0].level == base.bubbles[0].level);
  const double cell = m.chart_radius * std::pow(2.0, -base.bubbles[0].level);
  CHECK(distance(m, shifted.bubbles[0].center,
                 apply(eta, base.bubbles[0].center)) <= cell);
  CHECK(std::abs(shifted.bubbles[0].profile_energy -
                 base.bubbles[0].profile_energy) <=
        1e-9 * base.bubbles[0].profile_energy);
}

TEST_CASE("full decomposition of a mixed corpus") {
  const auto m = ManifoldModel::make_euclidean(3);
  const char* text = R"({
    "manifold": {"kind": "euclidean", "dimension": 3},
    "corpus": {
      "k_eval": [4, 6, 8, 10],
      "region": {"center": [0,0,0], "radius": 4.0},
      "backgrounds": [{"profile": "bump", "support": 2.5, "amplitude": 0.3, "center": [0.3, -0.2, 0]}],
      "bubbles": [{"profile": "bump", "support": 4.0, "amplitude": 1.0, "center": [1.0, 0.5, 0]}],
      "shifts": [{"profile": "bump", "support": 1.0, "amplitude": 0.8, "axis": 0, "sign": 1, "speed": 1.0}]
    }
  })";
  const RunConfig run = parse_run_config(text);
  const Corpus corpus = build_corpus(m, run.corpus);
  const DecompositionOutcome out =
      full_decompose(m, corpus.sequence, run.extraction);

  CHECK(out.report.bubbles.size() == 1);
  REQUIRE(out.report.shifts.size() == 1);
  CHECK(out.report.shifts[0].axis == 0);
  CHECK(out.report.shifts[0].sign == 1);
  CHECK(out.report.shifts[0].speed == doctest::Approx(1.0));

  // mass ledger balances at the largest k
  const LedgerRow& mass = out.report.mass_ledger.back();
  const double sum = mass.u_term + mass.shift_term + mass.bubble_term;
  CHECK(sum == doctest::Approx(mass.total).epsilon(0.02));

  // the combined Plancherel bound
  const LedgerRow& energy = out.report.energy_ledger.back();
  CHECK(energy.u_term + energy.shift_term + energy.bubble_term <=
        1.02 * energy.total);

  // remainder vanishes in the critical norm relative to the input
  QuadratureSpec q(m, run.extraction.region, run.extraction.quad_order);
  const double input_norm = lp_norm(corpus.sequence.generator(10), 6.0, q);
  CHECK(out.report.remainder_norms.at(6.0).back() <= 0.10 * input_norm);
}

TEST_CASE("pure background has a clean weak limit and no structure") {
  const auto m = ManifoldModel::make_euclidean(3);
  ExtractionConfig cfg = fast_config(m);
  const auto prof = make_profile("bump", 2.0, 3);
  FieldComponent c;
  c.anchor = exp_map(m, m.basepoint(), vec3(0.4, 0, 0));
  c.level = 0;
  c.support_radius = 2.0;
  c.value = [prof](const Vector& xi) { return 0.5 * prof.value(xi); };
  c.gradient = [prof](const Vector& xi) { return Vector(0.5 * prof.gradient(xi)); };
  ScalarField bg;
  bg.components.push_back(c);
  FieldSequence seq{[bg](int) { return bg; }, 4, 10};
  const DecompositionOutcome out = full_decompose(m, seq, cfg);
  CHECK(out.report.bubbles.empty());
  CHECK(out.report.shifts.empty());
  // the weak-limit surrogate reproduces the background pointwise
  double worst = 0.0;
  for (double t : {0.0, 0.3, 0.8, 1.4}) {
    const Point x = exp_map(m, c.anchor, vec3(t, 0.1, -0.2));
    worst = std::max(worst,
                     std::abs(out.weak_limit_field.value(m, x) - bg.value(m, x)));
  }
  CHECK(worst < 5e-3);
  // and the remainder is tiny in every reported norm
  for (const auto& [p, norms] : out.report.remainder_norms)
    CHECK(norms.back() < 0.02);
}

TEST_CASE("full_decompose rejects shift scans on the sphere") {
  const auto m = ManifoldModel::make_sphere(3);
  ExtractionConfig cfg = fast_config(m, 1.0);
  cfg.shifts_enabled = true;
  FieldSequence zero{[](int) { return ScalarField{}; }, 4, 10};
  CHECK_THROWS_AS(full_decompose(m, zero, cfg), std::invalid_argument);
  cfg.shifts_enabled = false;
  CHECK_NOTHROW(full_decompose(m, zero, cfg));
}

TEST_CASE("config validation errors") {
  const auto m = ManifoldModel::make_euclidean(3);
  ExtractionConfig cfg = fast_config(m);
  cfg.k_eval = {4, 4};
  CHECK_THROWS_AS(cfg.validate(m), std::invalid_argument);
  cfg = fast_config(m);
  cfg.epsilon_stop = 0.0;
  CHECK_THROWS_AS(cfg.validate(m), std::invalid_argument);
  cfg = fast_config(m);
  cfg.gamma = 1.5;
  CHECK_THROWS_AS(cfg.validate(m), std::invalid_argument);
}
