#pragma once

#include "bubbledec/atlas.hpp"
#include "bubbledec/bubbles.hpp"
#include "bubbledec/extraction.hpp"
#include "bubbledec/fields.hpp"

#include <optional>
#include <string>
#include <vector>

namespace bubbledec {

/// Configuration problem, anchored by the offending config path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what) {}
};

struct ProfileConfig {
  std::string profile = "bump";
  double support = 4.0;
  double amplitude = 1.0;
  Vector center;  // chart coordinates at the basepoint
};

struct BubbleConfig : ProfileConfig {
  int scale_offset = 0;
  double scale_slope = 1.0;
};

struct ShiftConfig : ProfileConfig {
  int axis = 0;
  int sign = 1;
  double speed = 1.0;
};

struct SpreadingConfig : ProfileConfig {
  double exponent = 2.0;  // u_k = k^{-N/p} v(.) with p = exponent
};

struct CorpusConfig {
  std::vector<int> k_eval{4, 6, 8, 10};
  Vector region_center;
  double region_radius = 4.0;
  std::vector<ProfileConfig> backgrounds;
  std::vector<BubbleConfig> bubbles;
  std::vector<ShiftConfig> shifts;
  std::vector<SpreadingConfig> spreading;
};

struct DiagnosticsConfig {
  bool slabs = true;
  bool noconc = true;
  bool ao = true;
  bool ledgers = true;
  bool vanishing = true;
  std::vector<std::pair<int, int>> ao_pairs;  // corpus bubble indices
  Vector noconc_center;
  double noconc_slope = 1.0;
  int noconc_offset = 0;
  double c_hat = 0.0;  // 0 -> calibrate on the corpus split
};

struct AtlasRunConfig {
  std::string net_kind = "orbit";  // "orbit" or "fps"
  OrbitNetConfig orbit;
  double fps_rho = 1.0;
  double fps_region_radius = 3.0;
  std::vector<int> ks{4, 6, 8, 10};
  double rho = 0.2;  // coordinate-ball radius of the atlas charts
  int grid_points = 33;
  int max_chart_index = 12;
};

struct OutputConfig {
  std::string dir = "out";
  std::vector<std::string> formats{"json", "csv", "svg"};
};

struct RunConfig {
  ManifoldModel manifold;
  CorpusConfig corpus;
  ExtractionConfig extraction;
  DiagnosticsConfig diagnostics;
  AtlasRunConfig atlas;
  OutputConfig output;
  unsigned long long seed = 0;
};

RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& json_text);

/// The corpus as synthesizable objects.
struct Corpus {
  ScalarField background;
  std::vector<BubbleSpec> bubbles;
  std::vector<ShiftSpec> shifts;
  FieldSequence sequence;  // background + shifts + bubbles + spreading terms
};

Corpus build_corpus(const ManifoldModel& m, const CorpusConfig& config);

/// A localized profile field (one chart component at the given center).
ScalarField profile_field(const ManifoldModel& m, const ProfileConfig& config);

}  // namespace bubbledec
