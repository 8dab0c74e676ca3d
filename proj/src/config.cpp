#include "bubbledec/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace bubbledec {

namespace {

using nlohmann::json;

Vector parse_vector(const json& j, const std::string& path, int dimension) {
  if (!j.is_array() || static_cast<int>(j.size()) != dimension)
    throw ConfigError(path, "expected an array of " + std::to_string(dimension) +
                                " coordinates");
  Vector v(dimension);
  for (int i = 0; i < dimension; ++i) {
    if (!j[i].is_number()) throw ConfigError(path, "coordinates must be numbers");
    v(i) = j[i].get<double>();
  }
  return v;
}

template <typename T>
T get_or(const json& j, const std::string& key, const T& fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

void parse_profile_common(const json& j, const std::string& path, int dimension,
                          ProfileConfig& out) {
  out.profile = get_or<std::string>(j, "profile", "bump");
  const auto names = profile_library_names();
  if (std::find(names.begin(), names.end(), out.profile) == names.end())
    throw ConfigError(path + ".profile", "unknown profile name '" + out.profile + "'");
  out.support = get_or(j, "support", 4.0);
  if (!(out.support > 0)) throw ConfigError(path + ".support", "must be positive");
  out.amplitude = get_or(j, "amplitude", 1.0);
  out.center = j.contains("center")
                   ? parse_vector(j.at("center"), path + ".center", dimension)
                   : Vector::Zero(dimension);
}

ManifoldModel parse_manifold(const json& j) {
  if (!j.is_object()) throw ConfigError("manifold", "expected an object");
  ManifoldModel m;
  try {
    m.kind = manifold_kind_from_string(get_or<std::string>(j, "kind", "euclidean"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("manifold.kind", e.what());
  }
  m.dimension = get_or(j, "dimension", 3);
  switch (m.kind) {
    case ManifoldKind::euclidean: m.curvature = get_or(j, "curvature", 0.0); break;
    case ManifoldKind::hyperbolic: m.curvature = get_or(j, "curvature", -1.0); break;
    case ManifoldKind::sphere: m.curvature = get_or(j, "curvature", 1.0); break;
  }
  m.chart_radius = get_or(j, "chart_radius",
                          m.kind == ManifoldKind::sphere ? 0.3 : 1.0);
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("manifold", e.what());
  }
  return m;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("(parse)", e.what());
  }
  RunConfig cfg;
  cfg.manifold = parse_manifold(root.value("manifold", json::object()));
  const int dim = cfg.manifold.dimension;

  const json jc = root.value("corpus", json::object());
  cfg.corpus.k_eval = get_or(jc, "k_eval", std::vector<int>{4, 6, 8, 10});
  if (cfg.corpus.k_eval.empty())
    throw ConfigError("corpus.k_eval", "must be nonempty");
  for (size_t i = 1; i < cfg.corpus.k_eval.size(); ++i)
    if (cfg.corpus.k_eval[i] <= cfg.corpus.k_eval[i - 1])
      throw ConfigError("corpus.k_eval", "must be strictly increasing");
  if (jc.contains("region")) {
    const json jr = jc.at("region");
    cfg.corpus.region_center =
        jr.contains("center")
            ? parse_vector(jr.at("center"), "corpus.region.center", dim)
            : Vector::Zero(dim);
    cfg.corpus.region_radius = get_or(jr, "radius", 4.0);
  } else {
    cfg.corpus.region_center = Vector::Zero(dim);
  }
  if (!(cfg.corpus.region_radius > 0))
    throw ConfigError("corpus.region.radius", "must be positive");

  int idx = 0;
  for (const json& jb : jc.value("backgrounds", json::array())) {
    ProfileConfig p;
    parse_profile_common(jb, "corpus.backgrounds[" + std::to_string(idx) + "]", dim, p);
    cfg.corpus.backgrounds.push_back(p);
    ++idx;
  }
  idx = 0;
  for (const json& jb : jc.value("bubbles", json::array())) {
    BubbleConfig b;
    const std::string path = "corpus.bubbles[" + std::to_string(idx) + "]";
    parse_profile_common(jb, path, dim, b);
    b.scale_offset = get_or(jb, "scale_offset", 0);
    b.scale_slope = get_or(jb, "scale_slope", 1.0);
    if (!(b.scale_slope > 0))
      throw ConfigError(path + ".scale_slope", "must be positive");
    cfg.corpus.bubbles.push_back(b);
    ++idx;
  }
  idx = 0;
  for (const json& jb : jc.value("shifts", json::array())) {
    ShiftConfig s;
    const std::string path = "corpus.shifts[" + std::to_string(idx) + "]";
    parse_profile_common(jb, path, dim, s);
    s.axis = get_or(jb, "axis", 0);
    if (s.axis < 0 || s.axis >= dim)
      throw ConfigError(path + ".axis", "axis out of range");
    s.sign = get_or(jb, "sign", 1);
    if (s.sign != 1 && s.sign != -1)
      throw ConfigError(path + ".sign", "must be +1 or -1");
    s.speed = get_or(jb, "speed", 1.0);
    if (!(s.speed > 0)) throw ConfigError(path + ".speed", "must be positive");
    cfg.corpus.shifts.push_back(s);
    ++idx;
  }
  idx = 0;
  for (const json& jb : jc.value("spreading", json::array())) {
    SpreadingConfig s;
    const std::string path = "corpus.spreading[" + std::to_string(idx) + "]";
    parse_profile_common(jb, path, dim, s);
    s.exponent = get_or(jb, "exponent", 2.0);
    if (!(s.exponent >= 1.0))
      throw ConfigError(path + ".exponent", "must be >= 1");
    cfg.corpus.spreading.push_back(s);
    ++idx;
  }

  const json je = root.value("extraction", json::object());
  ExtractionConfig& ex = cfg.extraction;
  ex.j_max = get_or(je, "j_max", 12);
  ex.epsilon_stop = get_or(je, "epsilon_stop", 0.05);
  ex.gamma = get_or(je, "gamma", 0.5);
  ex.max_bubbles = get_or(je, "max_bubbles", 8);
  ex.k_eval = cfg.corpus.k_eval;
  ex.scan_slope = get_or(je, "scan_slope", 1.0);
  ex.profile_grid = GridSpec{get_or(je, "profile_grid_radius", 8.0),
                             get_or(je, "profile_grid_points", 65), dim};
  ex.scan_grid = GridSpec{get_or(je, "scan_grid_radius", 8.0),
                          get_or(je, "scan_grid_points", 17), dim};
  ex.stability_limit = get_or(je, "stability_limit", 0.10);
  ex.scan_consistency = get_or(je, "scan_consistency", 0.35);
  ex.keep_fraction = get_or(je, "keep_fraction", 0.10);
  ex.max_kept_cells = get_or(je, "max_kept_cells", 16);
  ex.shifts_enabled = get_or(je, "shifts_enabled",
                             cfg.manifold.kind != ManifoldKind::sphere);
  ex.shift_speeds = get_or(je, "shift_speeds", std::vector<double>{0.5, 1.0, 2.0, 4.0});
  ex.shift_epsilon = get_or(je, "shift_epsilon", 0.05);
  ex.max_shifts = get_or(je, "max_shifts", 4);
  ex.shift_grid = GridSpec{get_or(je, "shift_grid_radius", 2.5),
                           get_or(je, "shift_grid_points", 33), dim};
  ex.limit_grid_points = get_or(je, "limit_grid_points", 33);
  ex.quad_order = get_or(je, "quad_order", 12);
  ex.region = Ball{Point{Vector()}, cfg.corpus.region_radius};
  // region center resolved against the manifold below
  try {
    ex.region.center = exp_map(cfg.manifold, cfg.manifold.basepoint(),
                               cfg.corpus.region_center);
    ex.validate(cfg.manifold);
  } catch (const std::exception& e) {
    throw ConfigError("extraction", e.what());
  }

  const json jd = root.value("diagnostics", json::object());
  cfg.diagnostics.slabs = get_or(jd, "slabs", true);
  cfg.diagnostics.noconc = get_or(jd, "noconc", true);
  cfg.diagnostics.ao = get_or(jd, "ao", true);
  cfg.diagnostics.ledgers = get_or(jd, "ledgers", true);
  cfg.diagnostics.vanishing = get_or(jd, "vanishing", true);
  if (jd.contains("ao_pairs")) {
    for (const json& jp : jd.at("ao_pairs")) {
      if (!jp.is_array() || jp.size() != 2)
        throw ConfigError("diagnostics.ao_pairs", "entries must be [i, j] pairs");
      const int a = jp[0].get<int>();
      const int b = jp[1].get<int>();
      const int nb = static_cast<int>(cfg.corpus.bubbles.size());
      if (a < 0 || b < 0 || a >= nb || b >= nb)
        throw ConfigError("diagnostics.ao_pairs", "bubble index out of range");
      cfg.diagnostics.ao_pairs.emplace_back(a, b);
    }
  }
  cfg.diagnostics.noconc_center =
      jd.contains("noconc_center")
          ? parse_vector(jd.at("noconc_center"), "diagnostics.noconc_center", dim)
          : Vector::Zero(dim);
  cfg.diagnostics.noconc_slope = get_or(jd, "noconc_slope", 1.0);
  cfg.diagnostics.noconc_offset = get_or(jd, "noconc_offset", 0);
  cfg.diagnostics.c_hat = get_or(jd, "c_hat", 0.0);

  const json ja = root.value("atlas", json::object());
  cfg.atlas.net_kind = get_or<std::string>(ja, "net", "orbit");
  if (cfg.atlas.net_kind != "orbit" && cfg.atlas.net_kind != "fps")
    throw ConfigError("atlas.net", "must be 'orbit' or 'fps'");
  cfg.atlas.orbit.axis = get_or(ja, "axis", 0);
  if (cfg.atlas.orbit.axis < 0 || cfg.atlas.orbit.axis >= dim)
    throw ConfigError("atlas.axis", "axis out of range");
  cfg.atlas.orbit.spacing = get_or(ja, "spacing", 0.6);
  cfg.atlas.orbit.slabs = get_or(ja, "slabs", 14);
  cfg.atlas.orbit.template_radius = get_or(ja, "template_radius", 0.8);
  cfg.atlas.orbit.template_rho = get_or(ja, "template_rho", 0.5);
  cfg.atlas.orbit.dilation = get_or(ja, "dilation", 0.0);
  cfg.atlas.fps_rho = get_or(ja, "fps_rho", 1.0);
  cfg.atlas.fps_region_radius = get_or(ja, "fps_region_radius", 3.0);
  cfg.atlas.ks = get_or(ja, "ks", cfg.corpus.k_eval);
  cfg.atlas.rho = get_or(ja, "rho", 0.2);
  if (!(cfg.atlas.rho > 0) || cfg.atlas.rho >= cfg.manifold.chart_radius)
    throw ConfigError("atlas.rho", "must lie in (0, chart_radius)");
  cfg.atlas.grid_points = get_or(ja, "grid_points", 33);
  cfg.atlas.max_chart_index = get_or(ja, "max_chart_index", 12);

  const json jo = root.value("output", json::object());
  cfg.output.dir = get_or<std::string>(jo, "dir", "out");
  cfg.output.formats =
      get_or(jo, "formats", std::vector<std::string>{"json", "csv", "svg"});
  cfg.seed = root.value("seed", 0ULL);
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

ScalarField profile_field(const ManifoldModel& m, const ProfileConfig& config) {
  const ProfileSpec prof = make_profile(config.profile, config.support, m.dimension);
  const double amp = config.amplitude;
  FieldComponent c;
  c.anchor = exp_map(m, m.basepoint(), config.center);
  c.level = 0;
  c.support_radius = config.support;
  c.value = [prof, amp](const Vector& xi) { return amp * prof.value(xi); };
  c.gradient = [prof, amp](const Vector& xi) {
    return Vector(amp * prof.gradient(xi));
  };
  ScalarField out;
  out.components.push_back(std::move(c));
  return out;
}

Corpus build_corpus(const ManifoldModel& m, const CorpusConfig& config) {
  Corpus out;
  for (const ProfileConfig& b : config.backgrounds)
    out.background = add(out.background, profile_field(m, b));
  for (const BubbleConfig& b : config.bubbles) {
    const ProfileSpec prof = make_profile(b.profile, b.support, m.dimension);
    const int offset = b.scale_offset;
    const double slope = b.scale_slope;
    BubbleSpec spec = make_bubble(
        prof, exp_map(m, m.basepoint(), b.center),
        [offset, slope](int k) {
          return offset + static_cast<int>(std::llround(slope * k));
        },
        b.amplitude);
    out.bubbles.push_back(std::move(spec));
  }
  for (const ShiftConfig& s : config.shifts) {
    ShiftSpec spec;
    spec.profile = profile_field(m, s);
    const ManifoldModel model = m;
    const int axis = s.axis;
    const double v = s.sign * s.speed;
    spec.isometry_path = [model, axis, v](int k) {
      return axis_transvection(model, axis, v * k);
    };
    out.shifts.push_back(std::move(spec));
  }

  const ManifoldModel model = m;
  const ScalarField background = out.background;
  const std::vector<BubbleSpec> bubbles = out.bubbles;
  const std::vector<ShiftSpec> shifts = out.shifts;
  const std::vector<SpreadingConfig> spreading = config.spreading;
  const CutoffSpec cutoff = smooth_cutoff(m.chart_radius);
  out.sequence.k_min = config.k_eval.front();
  out.sequence.k_max = config.k_eval.back();
  out.sequence.generator = [model, background, bubbles, shifts, spreading,
                            cutoff](int k) {
    ScalarField u = synth_sequence(model, bubbles, shifts, background, cutoff, k);
    for (const SpreadingConfig& s : spreading) {
      const ProfileSpec prof = make_profile(s.profile, s.support, model.dimension);
      const double amp = s.amplitude * std::pow(double(k), -model.dimension / s.exponent);
      const double stretch = double(k);
      FieldComponent c;
      c.anchor = exp_map(model, model.basepoint(), s.center);
      c.level = 0;
      c.support_radius = s.support * stretch;
      c.value = [prof, amp, stretch](const Vector& xi) {
        return amp * prof.value(xi / stretch);
      };
      c.gradient = [prof, amp, stretch](const Vector& xi) {
        return Vector((amp / stretch) * prof.gradient(xi / stretch));
      };
      ScalarField f;
      f.components.push_back(std::move(c));
      u = add(u, f);
    }
    return u;
  };
  return out;
}

}  // namespace bubbledec
