#include "bubbledec/report.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace bubbledec {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json grid_to_json(const GridSpec& g) {
  return ordered_json{{"radius", g.radius},
                      {"points_per_axis", g.points_per_axis},
                      {"dimension", g.dimension}};
}

GridSpec grid_from_json(const ordered_json& j) {
  return GridSpec{j.at("radius").get<double>(),
                  j.at("points_per_axis").get<int>(),
                  j.at("dimension").get<int>()};
}

ordered_json array_to_json(const Eigen::ArrayXd& a) {
  ordered_json out = ordered_json::array();
  for (long i = 0; i < a.size(); ++i) out.push_back(a(i));
  return out;
}

Eigen::ArrayXd array_from_json(const ordered_json& j) {
  Eigen::ArrayXd out(j.size());
  for (size_t i = 0; i < j.size(); ++i) out(i) = j[i].get<double>();
  return out;
}

ordered_json vector_to_json(const Vector& v) {
  ordered_json out = ordered_json::array();
  for (long i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vector vector_from_json(const ordered_json& j) {
  Vector out(j.size());
  for (size_t i = 0; i < j.size(); ++i) out(i) = j[i].get<double>();
  return out;
}

ordered_json ledger_to_json(const std::vector<LedgerRow>& rows) {
  ordered_json out = ordered_json::array();
  for (const LedgerRow& r : rows)
    out.push_back(ordered_json{{"k", r.k},
                               {"total", r.total},
                               {"u_term", r.u_term},
                               {"shift_term", r.shift_term},
                               {"bubble_term", r.bubble_term},
                               {"slack", r.slack}});
  return out;
}

std::vector<LedgerRow> ledger_from_json(const ordered_json& j) {
  std::vector<LedgerRow> out;
  for (const ordered_json& r : j) {
    LedgerRow row;
    row.k = r.at("k").get<int>();
    row.total = r.at("total").get<double>();
    row.u_term = r.at("u_term").get<double>();
    row.shift_term = r.at("shift_term").get<double>();
    row.bubble_term = r.at("bubble_term").get<double>();
    row.slack = r.at("slack").get<double>();
    out.push_back(row);
  }
  return out;
}

}  // namespace

std::string report_to_json(const DecompositionReport& rep) {
  ordered_json j;
  j["manifold"] = ordered_json{{"kind", rep.manifold_kind},
                               {"dimension", rep.dimension},
                               {"curvature", rep.curvature},
                               {"chart_radius", rep.chart_radius}};
  j["conventions"] = ordered_json{{"frame", rep.frame_convention},
                                  {"tie_breaking", rep.tie_breaking}};
  j["seed"] = rep.seed;
  j["k_eval"] = rep.k_eval;
  j["weak_limit"] = ordered_json{{"grid", grid_to_json(rep.weak_limit_grid)},
                                 {"h12_sq", rep.weak_limit_h12},
                                 {"mass", rep.weak_limit_mass},
                                 {"samples", array_to_json(rep.weak_limit_samples)}};
  ordered_json shifts = ordered_json::array();
  for (const ShiftTerm& s : rep.shifts)
    shifts.push_back(ordered_json{{"axis", s.axis},
                                  {"sign", s.sign},
                                  {"speed", s.speed},
                                  {"h12_sq", s.h12_energy},
                                  {"mass", s.mass},
                                  {"stability", s.stability},
                                  {"grid", grid_to_json(s.grid)},
                                  {"samples", array_to_json(s.profile_samples)}});
  j["shifts"] = shifts;
  ordered_json bubbles = ordered_json::array();
  for (const ExtractedBubble& b : rep.bubbles)
    bubbles.push_back(ordered_json{{"center", vector_to_json(b.center.coords)},
                                   {"level", b.level},
                                   {"slope", b.slope},
                                   {"k_anchor", b.k_anchor},
                                   {"profile_energy", b.profile_energy},
                                   {"stability", b.stability},
                                   {"score", b.score},
                                   {"grid", grid_to_json(b.grid)},
                                   {"samples", array_to_json(b.profile_samples)}});
  j["bubbles"] = bubbles;
  j["saturated"] = rep.saturated;
  j["residual_energy"] = rep.residual_energy;
  ordered_json norms = ordered_json::array();
  for (const auto& [p, values] : rep.remainder_norms)
    norms.push_back(ordered_json{{"p", p}, {"norms", values}});
  j["remainder_norms"] = norms;
  j["energy_ledger"] = ledger_to_json(rep.energy_ledger);
  j["mass_ledger"] = ledger_to_json(rep.mass_ledger);
  return j.dump(2) + "\n";
}

DecompositionReport report_from_json(const std::string& text) {
  const ordered_json j = ordered_json::parse(text);
  DecompositionReport rep;
  rep.manifold_kind = j.at("manifold").at("kind").get<std::string>();
  rep.dimension = j.at("manifold").at("dimension").get<int>();
  rep.curvature = j.at("manifold").at("curvature").get<double>();
  rep.chart_radius = j.at("manifold").at("chart_radius").get<double>();
  rep.frame_convention = j.at("conventions").at("frame").get<std::string>();
  rep.tie_breaking = j.at("conventions").at("tie_breaking").get<std::string>();
  rep.seed = j.at("seed").get<unsigned long long>();
  rep.k_eval = j.at("k_eval").get<std::vector<int>>();
  rep.weak_limit_grid = grid_from_json(j.at("weak_limit").at("grid"));
  rep.weak_limit_h12 = j.at("weak_limit").at("h12_sq").get<double>();
  rep.weak_limit_mass = j.at("weak_limit").at("mass").get<double>();
  rep.weak_limit_samples = array_from_json(j.at("weak_limit").at("samples"));
  for (const ordered_json& js : j.at("shifts")) {
    ShiftTerm s;
    s.axis = js.at("axis").get<int>();
    s.sign = js.at("sign").get<int>();
    s.speed = js.at("speed").get<double>();
    s.h12_energy = js.at("h12_sq").get<double>();
    s.mass = js.at("mass").get<double>();
    s.stability = js.at("stability").get<double>();
    s.grid = grid_from_json(js.at("grid"));
    s.profile_samples = array_from_json(js.at("samples"));
    rep.shifts.push_back(std::move(s));
  }
  for (const ordered_json& jb : j.at("bubbles")) {
    ExtractedBubble b;
    b.center = Point{vector_from_json(jb.at("center"))};
    b.level = jb.at("level").get<int>();
    b.slope = jb.at("slope").get<double>();
    b.k_anchor = jb.at("k_anchor").get<int>();
    b.profile_energy = jb.at("profile_energy").get<double>();
    b.stability = jb.at("stability").get<double>();
    b.score = jb.at("score").get<double>();
    b.grid = grid_from_json(jb.at("grid"));
    b.profile_samples = array_from_json(jb.at("samples"));
    rep.bubbles.push_back(std::move(b));
  }
  rep.saturated = j.at("saturated").get<bool>();
  rep.residual_energy = j.at("residual_energy").get<std::vector<double>>();
  for (const ordered_json& jn : j.at("remainder_norms"))
    rep.remainder_norms[jn.at("p").get<double>()] =
        jn.at("norms").get<std::vector<double>>();
  rep.energy_ledger = ledger_from_json(j.at("energy_ledger"));
  rep.mass_ledger = ledger_from_json(j.at("mass_ledger"));
  return rep;
}

namespace {

bool arrays_equal(const Eigen::ArrayXd& a, const Eigen::ArrayXd& b) {
  return a.size() == b.size() && (a == b).all();
}

bool grids_equal(const GridSpec& a, const GridSpec& b) {
  return a.radius == b.radius && a.points_per_axis == b.points_per_axis &&
         a.dimension == b.dimension;
}

bool ledgers_equal(const std::vector<LedgerRow>& a,
                   const std::vector<LedgerRow>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i].k != b[i].k || a[i].total != b[i].total ||
        a[i].u_term != b[i].u_term || a[i].shift_term != b[i].shift_term ||
        a[i].bubble_term != b[i].bubble_term || a[i].slack != b[i].slack)
      return false;
  return true;
}

}  // namespace

bool reports_equal(const DecompositionReport& a, const DecompositionReport& b) {
  if (a.manifold_kind != b.manifold_kind || a.dimension != b.dimension ||
      a.curvature != b.curvature || a.chart_radius != b.chart_radius ||
      a.frame_convention != b.frame_convention ||
      a.tie_breaking != b.tie_breaking || a.seed != b.seed ||
      a.k_eval != b.k_eval || a.saturated != b.saturated)
    return false;
  if (!grids_equal(a.weak_limit_grid, b.weak_limit_grid) ||
      a.weak_limit_h12 != b.weak_limit_h12 ||
      a.weak_limit_mass != b.weak_limit_mass ||
      !arrays_equal(a.weak_limit_samples, b.weak_limit_samples))
    return false;
  if (a.shifts.size() != b.shifts.size() || a.bubbles.size() != b.bubbles.size())
    return false;
  for (size_t i = 0; i < a.shifts.size(); ++i) {
    const ShiftTerm& sa = a.shifts[i];
    const ShiftTerm& sb = b.shifts[i];
    if (sa.axis != sb.axis || sa.sign != sb.sign || sa.speed != sb.speed ||
        sa.h12_energy != sb.h12_energy || sa.mass != sb.mass ||
        sa.stability != sb.stability || !grids_equal(sa.grid, sb.grid) ||
        !arrays_equal(sa.profile_samples, sb.profile_samples))
      return false;
  }
  for (size_t i = 0; i < a.bubbles.size(); ++i) {
    const ExtractedBubble& ba = a.bubbles[i];
    const ExtractedBubble& bb = b.bubbles[i];
    if (ba.center.coords != bb.center.coords || ba.level != bb.level ||
        ba.slope != bb.slope || ba.k_anchor != bb.k_anchor ||
        ba.profile_energy != bb.profile_energy ||
        ba.stability != bb.stability || ba.score != bb.score ||
        !grids_equal(ba.grid, bb.grid) ||
        !arrays_equal(ba.profile_samples, bb.profile_samples))
      return false;
  }
  return a.residual_energy == b.residual_energy &&
         a.remainder_norms == b.remainder_norms &&
         ledgers_equal(a.energy_ledger, b.energy_ledger) &&
         ledgers_equal(a.mass_ledger, b.mass_ledger);
}

bool ledgers_consistent(const DecompositionReport& report, double tol) {
  auto check = [tol](const std::vector<LedgerRow>& rows) {
    for (const LedgerRow& r : rows) {
      const double recomputed =
          r.total - r.u_term - r.shift_term - r.bubble_term;
      const double scale = std::max(1.0, std::abs(r.total));
      if (std::abs(recomputed - r.slack) > tol * scale) return false;
    }
    return true;
  };
  return check(report.energy_ledger) && check(report.mass_ledger);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

std::string ledger_csv(const std::vector<LedgerRow>& rows) {
  std::ostringstream ss;
  ss << "k,total,u_term,shift_term,bubble_term,slack\n";
  for (const LedgerRow& r : rows)
    ss << r.k << ',' << format_double(r.total) << ',' << format_double(r.u_term)
       << ',' << format_double(r.shift_term) << ','
       << format_double(r.bubble_term) << ',' << format_double(r.slack) << '\n';
  return ss.str();
}

std::string remainder_norms_csv(const DecompositionReport& report) {
  std::ostringstream ss;
  ss << "k";
  for (const auto& [p, values] : report.remainder_norms)
    ss << ",p=" << format_double(p);
  ss << '\n';
  for (size_t i = 0; i < report.k_eval.size(); ++i) {
    ss << report.k_eval[i];
    for (const auto& [p, values] : report.remainder_norms)
      ss << ',' << format_double(i < values.size() ? values[i] : 0.0);
    ss << '\n';
  }
  return ss.str();
}

}  // namespace bubbledec
