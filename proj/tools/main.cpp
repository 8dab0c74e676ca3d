#include "bubbledec/atlas.hpp"
#include "bubbledec/config.hpp"
#include "bubbledec/diagnostics.hpp"
#include "bubbledec/extraction.hpp"
#include "bubbledec/report.hpp"
#include "bubbledec/svg.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace bubbledec;
using ordered_json = nlohmann::ordered_json;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  unsigned long long seed = 0;
  bool seed_set = false;
  int threads = 0;
};

RunConfig load_with_overrides(const CommonArgs& args) {
  RunConfig cfg = load_run_config(args.config_path);
  if (!args.out_dir.empty()) cfg.output.dir = args.out_dir;
  if (args.seed_set) cfg.seed = args.seed;
  if (args.threads > 0) set_max_threads(args.threads);
  fs::create_directories(cfg.output.dir);
  return cfg;
}

bool wants(const RunConfig& cfg, const std::string& format) {
  return std::find(cfg.output.formats.begin(), cfg.output.formats.end(),
                   format) != cfg.output.formats.end();
}

std::string path_in(const RunConfig& cfg, const std::string& name) {
  return (fs::path(cfg.output.dir) / name).string();
}

ordered_json manifest_json(const RunConfig& cfg) {
  ordered_json j;
  j["manifold"] = ordered_json{{"kind", to_string(cfg.manifold.kind)},
                               {"dimension", cfg.manifold.dimension},
                               {"curvature", cfg.manifold.curvature},
                               {"chart_radius", cfg.manifold.chart_radius}};
  j["conventions"] = ordered_json{
      {"frame", "parallel transport of the basepoint frame along radial geodesics"},
      {"cutoff",
       "chi(rho) = f(r - rho) / (f(r - rho) + f(rho - r/2)), f(t) = exp(-1/t)+"},
      {"tie_breaking", "net index ascending"}};
  j["seed"] = cfg.seed;
  j["k_eval"] = cfg.corpus.k_eval;
  ordered_json region;
  region["radius"] = cfg.corpus.region_radius;
  region["center"] = std::vector<double>(
      cfg.corpus.region_center.data(),
      cfg.corpus.region_center.data() + cfg.corpus.region_center.size());
  j["region"] = region;
  auto profile_json = [](const ProfileConfig& p) {
    ordered_json out;
    out["profile"] = p.profile;
    out["support"] = p.support;
    out["amplitude"] = p.amplitude;
    out["center"] =
        std::vector<double>(p.center.data(), p.center.data() + p.center.size());
    return out;
  };
  ordered_json bgs = ordered_json::array();
  for (const auto& b : cfg.corpus.backgrounds) bgs.push_back(profile_json(b));
  j["backgrounds"] = bgs;
  ordered_json bubbles = ordered_json::array();
  for (const auto& b : cfg.corpus.bubbles) {
    ordered_json e = profile_json(b);
    e["scale_offset"] = b.scale_offset;
    e["scale_slope"] = b.scale_slope;
    bubbles.push_back(e);
  }
  j["bubbles"] = bubbles;
  ordered_json shifts = ordered_json::array();
  for (const auto& s : cfg.corpus.shifts) {
    ordered_json e = profile_json(s);
    e["axis"] = s.axis;
    e["sign"] = s.sign;
    e["speed"] = s.speed;
    shifts.push_back(e);
  }
  j["shifts"] = shifts;
  ordered_json spreading = ordered_json::array();
  for (const auto& s : cfg.corpus.spreading) {
    ordered_json e = profile_json(s);
    e["exponent"] = s.exponent;
    spreading.push_back(e);
  }
  j["spreading"] = spreading;
  return j;
}

int cmd_synthesize(const CommonArgs& args) {
  const RunConfig cfg = load_with_overrides(args);
  const Corpus corpus = build_corpus(cfg.manifold, cfg.corpus);
  write_text_file(path_in(cfg, "manifest.json"), manifest_json(cfg).dump(2) + "\n");

  if (wants(cfg, "csv")) {
    GridSpec grid{cfg.corpus.region_radius, 17, cfg.manifold.dimension};
    const ChartFrame chart(
        cfg.manifold,
        exp_map(cfg.manifold, cfg.manifold.basepoint(), cfg.corpus.region_center));
    for (int k : cfg.corpus.k_eval) {
      const ScalarField u = corpus.sequence.generator(k);
      std::ostringstream csv;
      for (int a = 0; a < cfg.manifold.dimension; ++a) csv << "xi" << a << ',';
      csv << "value\n";
      for (long i = 0; i < grid.total_points(); ++i) {
        const Vector xi = grid.node(i);
        for (int a = 0; a < cfg.manifold.dimension; ++a)
          csv << format_double(xi(a)) << ',';
        csv << format_double(u.value(cfg.manifold, chart.exp(xi))) << '\n';
      }
      write_text_file(path_in(cfg, "snapshot_k" + std::to_string(k) + ".csv"),
                      csv.str());
    }
  }
  std::cout << "synthesize: manifest and " << cfg.corpus.k_eval.size()
            << " snapshots written to " << cfg.output.dir << "\n";
  return 0;
}

int cmd_decompose(const CommonArgs& args) {
  const RunConfig cfg = load_with_overrides(args);
  const Corpus corpus = build_corpus(cfg.manifold, cfg.corpus);
  DecompositionOutcome outcome =
      full_decompose(cfg.manifold, corpus.sequence, cfg.extraction);
  outcome.report.seed = cfg.seed;
  write_text_file(path_in(cfg, "report.json"), report_to_json(outcome.report));
  if (wants(cfg, "csv")) {
    write_text_file(path_in(cfg, "energy_ledger.csv"),
                    ledger_csv(outcome.report.energy_ledger));
    write_text_file(path_in(cfg, "mass_ledger.csv"),
                    ledger_csv(outcome.report.mass_ledger));
    write_text_file(path_in(cfg, "remainder_norms.csv"),
                    remainder_norms_csv(outcome.report));
  }
  std::cout << "decompose: " << outcome.report.bubbles.size() << " bubbles, "
            << outcome.report.shifts.size() << " shifts"
            << (outcome.report.saturated ? " (saturated)" : "") << "; report in "
            << cfg.output.dir << "\n";
  return 0;
}

int cmd_diagnose(const CommonArgs& args) {
  const RunConfig cfg = load_with_overrides(args);
  const ManifoldModel& m = cfg.manifold;
  const Corpus corpus = build_corpus(m, cfg.corpus);
  const Ball region{exp_map(m, m.basepoint(), cfg.corpus.region_center),
                    cfg.corpus.region_radius};
  QuadratureSpec q(m, region, cfg.extraction.quad_order);
  const std::vector<int>& ks = cfg.corpus.k_eval;
  const CutoffSpec cutoff = smooth_cutoff(m.chart_radius);

  if (cfg.diagnostics.slabs) {
    std::ostringstream csv;
    csv << "k,slab_exponent,slab_lower,mass,sup_mass,total\n";
    std::vector<PlotSeries> series;
    for (int k : ks) {
      const SlabProfile slabs =
          dyadic_slab_profile(corpus.sequence.generator(k), q);
      PlotSeries s;
      s.label = "k=" + std::to_string(k);
      for (size_t i = 0; i < slabs.masses.size(); ++i) {
        csv << k << ',' << slabs.level_exponents[i] << ','
            << format_double(std::pow(slabs.base, slabs.level_exponents[i]))
            << ',' << format_double(slabs.masses[i]) << ','
            << format_double(slabs.sup_mass) << ','
            << format_double(slabs.total) << '\n';
        s.x.push_back(slabs.level_exponents[i]);
        s.y.push_back(slabs.masses[i]);
      }
      series.push_back(std::move(s));
    }
    if (wants(cfg, "csv"))
      write_text_file(path_in(cfg, "slab_profile.csv"), csv.str());
    if (wants(cfg, "svg"))
      write_text_file(path_in(cfg, "slab_profile.svg"),
                      render_line_plot("dyadic slab masses", series));
  }

  if (cfg.diagnostics.noconc) {
    const Point center =
        exp_map(m, m.basepoint(), cfg.diagnostics.noconc_center);
    const double slope = cfg.diagnostics.noconc_slope;
    const int offset = cfg.diagnostics.noconc_offset;
    const auto curve = noconc_curve(
        m, corpus.sequence, [center](int) { return center; },
        [slope, offset](int k) {
          return offset + static_cast<int>(std::llround(slope * k));
        },
        cfg.extraction.scan_grid, ks);
    std::ostringstream csv;
    csv << "k,max_abs_pullback\n";
    PlotSeries s;
    s.label = "max |pullback|";
    for (size_t i = 0; i < ks.size(); ++i) {
      csv << ks[i] << ',' << format_double(curve[i]) << '\n';
      s.x.push_back(ks[i]);
      s.y.push_back(curve[i]);
    }
    csv << "passes," << (noconc_passes(curve) ? 1 : 0) << '\n';
    if (wants(cfg, "csv")) write_text_file(path_in(cfg, "noconc.csv"), csv.str());
    if (wants(cfg, "svg"))
      write_text_file(path_in(cfg, "noconc.svg"),
                      render_line_plot("no-concentration curve", {s}, true));
  }

  if (cfg.diagnostics.ao && !cfg.diagnostics.ao_pairs.empty()) {
    std::ostringstream csv;
    csv << "pair,k,h12_inner,separation\n";
    std::vector<PlotSeries> series;
    int pair_idx = 0;
    for (const auto& [a, b] : cfg.diagnostics.ao_pairs) {
      const auto curve = ao_decay_curve(m, corpus.bubbles[a], corpus.bubbles[b],
                                        cutoff, ks, q);
      PlotSeries s;
      s.label = std::to_string(a) + "-" + std::to_string(b);
      for (size_t i = 0; i < ks.size(); ++i) {
        csv << pair_idx << ',' << ks[i] << ',' << format_double(curve[i]) << ','
            << format_double(separation_functional(m, corpus.bubbles[a],
                                                   corpus.bubbles[b], ks[i]))
            << '\n';
        s.x.push_back(ks[i]);
        s.y.push_back(std::abs(curve[i]));
      }
      series.push_back(std::move(s));
      ++pair_idx;
    }
    if (wants(cfg, "csv"))
      write_text_file(path_in(cfg, "ao_decay.csv"), csv.str());
    if (wants(cfg, "svg"))
      write_text_file(path_in(cfg, "ao_decay.svg"),
                      render_line_plot("asymptotic-orthogonality decay", series,
                                       true));
  }

  if (cfg.diagnostics.vanishing) {
    // interleaved 60/40 calibration split over the per-k corpus fields
    std::vector<ScalarField> fields;
    for (int k : ks) fields.push_back(corpus.sequence.generator(k));
    std::vector<ScalarField> calib, test;
    for (size_t i = 0; i < fields.size(); ++i)
      ((i % 5) < 3 ? calib : test).push_back(fields[i]);
    const double c_hat = cfg.diagnostics.c_hat > 0
                             ? cfg.diagnostics.c_hat
                             : calibrate_slab_constant(calib, q);
    std::ostringstream csv;
    csv << "field,split,lhs,rhs,ratio\n";
    for (size_t i = 0; i < fields.size(); ++i) {
      const VanishingCheck check = vanishing_bound_check(fields[i], q, c_hat);
      csv << "u_k" << ks[i] << ',' << ((i % 5) < 3 ? "calibrate" : "test")
          << ',' << format_double(check.lhs) << ',' << format_double(check.rhs)
          << ',' << format_double(check.ratio) << '\n';
    }
    csv << "c_hat," << format_double(c_hat) << '\n';
    if (wants(cfg, "csv"))
      write_text_file(path_in(cfg, "vanishing_check.csv"), csv.str());
  }

  if (cfg.diagnostics.ledgers) {
    const std::string report_path = path_in(cfg, "report.json");
    if (fs::exists(report_path)) {
      std::ifstream in(report_path);
      std::ostringstream ss;
      ss << in.rdbuf();
      const DecompositionReport rep = report_from_json(ss.str());
      if (wants(cfg, "csv")) {
        write_text_file(path_in(cfg, "energy_ledger.csv"),
                        ledger_csv(rep.energy_ledger));
        write_text_file(path_in(cfg, "mass_ledger.csv"),
                        ledger_csv(rep.mass_ledger));
      }
      if (wants(cfg, "svg")) {
        PlotSeries lhs{"u_k total", {}, {}}, rhs{"decomposition sum", {}, {}};
        for (const LedgerRow& r : rep.mass_ledger) {
          lhs.x.push_back(r.k);
          lhs.y.push_back(r.total);
          rhs.x.push_back(r.k);
          rhs.y.push_back(r.u_term + r.shift_term + r.bubble_term);
        }
        write_text_file(path_in(cfg, "mass_ledger.svg"),
                        render_line_plot("critical-mass ledger", {lhs, rhs}));
      }
    } else {
      std::cout << "diagnose: no report.json in " << cfg.output.dir
                << "; run decompose first for ledger tables\n";
    }
  }
  std::cout << "diagnose: tables written to " << cfg.output.dir << "\n";
  return 0;
}

int cmd_atlas(const CommonArgs& args) {
  const RunConfig cfg = load_with_overrides(args);
  const ManifoldModel& m = cfg.manifold;
  Discretization net;
  std::function<Point(int)> base_path;
  if (cfg.atlas.net_kind == "orbit") {
    net = orbit_lattice_net(m, cfg.atlas.orbit);
    base_path = orbit_base_path(m, cfg.atlas.orbit);
  } else {
    const Ball region{m.basepoint(), cfg.atlas.fps_region_radius};
    net = build_discretization(m, cfg.atlas.fps_rho, region);
    const Point c = region.center;
    base_path = [c](int) { return c; };
  }
  const TrailingFamily family = trailing_family(m, net, base_path, cfg.atlas.ks);
  const GridSpec grid{cfg.atlas.rho, cfg.atlas.grid_points, m.dimension};
  const auto pairs =
      atlas_usable_pairs(m, family, cfg.atlas.rho, cfg.atlas.max_chart_index);

  std::ostringstream trans_csv, resid_csv, metric_csv;
  trans_csv << "i,j,k,gap_vs_limit,cauchy_gap\n";
  resid_csv << "i,j,k,residual\n";
  metric_csv << "chart,stability_gap\n";
  std::map<int, LimitMetric> metrics;
  auto metric_of = [&](int i) -> const LimitMetric& {
    auto it = metrics.find(i);
    if (it == metrics.end())
      it = metrics.emplace(i, limit_metric(m, family, i, grid)).first;
    return it->second;
  };

  std::vector<PlotSeries> gap_series, resid_series;
  // identity rows: psi_ii = id with zero gap and residual
  for (int i = 0; i < std::min<int>(3, cfg.atlas.max_chart_index); ++i) {
    const TransitionLimit self = transition_sequence(m, family, i, i, grid);
    for (size_t kidx = 0; kidx < cfg.atlas.ks.size(); ++kidx) {
      trans_csv << i << ',' << i << ',' << cfg.atlas.ks[kidx] << ','
                << format_double(self.gaps[kidx]) << ','
                << format_double(self.cauchy_gap) << '\n';
      resid_csv << i << ',' << i << ',' << cfg.atlas.ks[kidx] << ','
                << format_double(
                       compatibility_residual(metric_of(i), metric_of(i), self,
                                              static_cast<int>(kidx)))
                << '\n';
    }
  }
  for (const auto& [i, j] : pairs) {
    const TransitionLimit psi = transition_sequence(m, family, j, i, grid);
    PlotSeries gap_s{std::to_string(i) + "-" + std::to_string(j), {}, {}};
    PlotSeries res_s = gap_s;
    for (size_t kidx = 0; kidx < cfg.atlas.ks.size(); ++kidx) {
      const double resid = compatibility_residual(metric_of(i), metric_of(j),
                                                  psi, static_cast<int>(kidx));
      trans_csv << i << ',' << j << ',' << cfg.atlas.ks[kidx] << ','
                << format_double(psi.gaps[kidx]) << ','
                << format_double(psi.cauchy_gap) << '\n';
      resid_csv << i << ',' << j << ',' << cfg.atlas.ks[kidx] << ','
                << format_double(resid) << '\n';
      gap_s.x.push_back(cfg.atlas.ks[kidx]);
      gap_s.y.push_back(psi.gaps[kidx]);
      res_s.x.push_back(cfg.atlas.ks[kidx]);
      res_s.y.push_back(resid);
    }
    gap_series.push_back(std::move(gap_s));
    resid_series.push_back(std::move(res_s));
  }
  for (const auto& [i, metric] : metrics)
    metric_csv << i << ',' << format_double(metric.stability_gap) << '\n';

  if (wants(cfg, "csv")) {
    write_text_file(path_in(cfg, "atlas_transitions.csv"), trans_csv.str());
    write_text_file(path_in(cfg, "atlas_residuals.csv"), resid_csv.str());
    write_text_file(path_in(cfg, "atlas_metric_stability.csv"), metric_csv.str());
  }
  if (wants(cfg, "svg") && !gap_series.empty()) {
    write_text_file(path_in(cfg, "atlas_gaps.svg"),
                    render_line_plot("transition-map gaps", gap_series, true));
    write_text_file(
        path_in(cfg, "atlas_residuals.svg"),
        render_line_plot("gluing compatibility residuals", resid_series, true));
  }
  std::cout << "atlas: " << pairs.size() << " chart pairs written to "
            << cfg.output.dir << "\n";
  return 0;
}

int cmd_verify(const CommonArgs& args) {
  const RunConfig cfg = load_with_overrides(args);
  const std::string report_path = path_in(cfg, "report.json");
  std::ifstream in(report_path);
  if (!in) {
    std::cerr << "verify: missing " << report_path << "\n";
    return 1;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  int failures = 0;
  auto check = [&](const std::string& name, bool ok) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << "\n";
    if (!ok) ++failures;
  };
  const DecompositionReport rep = report_from_json(text);
  check("report round trip",
        reports_equal(rep, report_from_json(report_to_json(rep))));
  check("serialization stable", report_to_json(rep) == text);
  check("ledger internal consistency", ledgers_consistent(rep));
  bool rows_ok = true;
  for (const auto& [p, values] : rep.remainder_norms)
    if (values.size() != rep.k_eval.size()) rows_ok = false;
  check("remainder norm rows match k_eval", rows_ok);
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"profile decomposition workbench for bounded-geometry models"};
  app.require_subcommand(1);
  CommonArgs args;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", args.config_path, "run configuration file")
        ->required();
    sub->add_option("--out", args.out_dir, "output directory override");
    sub->add_option("--seed", args.seed, "seed recorded in manifests/reports")
        ->each([&](const std::string&) { args.seed_set = true; });
    sub->add_option("--threads", args.threads, "worker thread cap");
  };
  CLI::App* synth = app.add_subcommand("synthesize", "write corpus manifest and snapshots");
  CLI::App* dec = app.add_subcommand("decompose", "run the full decomposition pipeline");
  CLI::App* diag = app.add_subcommand("diagnose", "emit diagnostic tables and plots");
  CLI::App* atl = app.add_subcommand("atlas", "emit atlas-at-infinity reports");
  CLI::App* ver = app.add_subcommand("verify", "re-validate a saved report");
  for (CLI::App* sub : {synth, dec, diag, atl, ver}) add_common(sub);

  CLI11_PARSE(app, argc, argv);
  try {
    if (synth->parsed()) return cmd_synthesize(args);
    if (dec->parsed()) return cmd_decompose(args);
    if (diag->parsed()) return cmd_diagnose(args);
    if (atl->parsed()) return cmd_atlas(args);
    if (ver->parsed()) return cmd_verify(args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
