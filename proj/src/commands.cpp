#include "hallsim/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hallsim/bands.hpp"
#include "hallsim/disorder.hpp"
#include "hallsim/error.hpp"
#include "hallsim/mourre.hpp"
#include "hallsim/parallel.hpp"
#include "hallsim/resolvent.hpp"
#include "hallsim/strip.hpp"
#include "hallsim/transport.hpp"

namespace hallsim {

namespace {

using json = nlohmann::ordered_json;
constexpr double kPi = std::numbers::pi;

bool is_config_error(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::GridMismatch:
    case ErrorCode::WrongGeometry:
    case ErrorCode::WindowNotInGap:
    case ErrorCode::InvalidCutoff:
    case ErrorCode::DegenerateWall:
    case ErrorCode::WindowAboveWall:
    case ErrorCode::CoincidentPoints:
    case ErrorCode::OnLandauLevel:
    case ErrorCode::OutOfTable:
      return true;
    default:
      return false;
  }
}

// Library validation failures surface with the config section that caused them.
template <class F>
auto guard(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (is_config_error(e.code())) throw ConfigError(key, e.what());
    throw;
  }
}

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) x = 0.0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json jnum(double x) {
  if (std::isfinite(x)) return x;
  return num(x);
}

std::string hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json header(const std::string& command, const Config& config) {
  json j;
  j["schema"] = "hallsim." + command + "/1";
  j["config_hash"] = hex(config.hash());
  return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

class Csv {
 public:
  explicit Csv(std::initializer_list<const char*> columns) {
    bool first = true;
    for (const char* c : columns) {
      out_ << (first ? "" : ",") << c;
      first = false;
    }
    out_ << "\n";
  }
  template <class... T>
  void row(const T&... values) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(values), first = false), ...);
    out_ << "\n";
  }
  std::string str() const { return out_.str(); }

 private:
  static std::string cell(double x) { return num(x); }
  static std::string cell(int x) { return std::to_string(x); }
  static std::string cell(long x) { return std::to_string(x); }
  static std::string cell(long long x) { return std::to_string(x); }
  static std::string cell(unsigned long x) { return std::to_string(x); }
  static std::string cell(unsigned long long x) { return std::to_string(x); }
  std::ostringstream out_;
};

// ---- shared config sections ----

struct Setup {
  Units units{1.0};
  Geometry geometry;
  EdgeProfile edge;
  Grid1D grid;
  double period_radius = 0.0;
};

double ell(const Units& u) { return u.magnetic_length(); }

Units read_units(const Config& c) {
  double B = c.get_double("units.B", 1.0);
  if (!(B > 0.0)) throw ConfigError("units.B", "field must be positive");
  return Units(B);
}

double read_length(const Config& c, const std::string& key) {
  std::string text = c.get_string(key, "inf");
  if (text == "inf") return HUGE_VAL;
  return c.get_double(key);
}

Geometry read_geometry(const Config& c, double& period_radius) {
  std::string kind = c.get_string("geometry.kind");
  Geometry g;
  if (kind == "cylinder") {
    g = Cylinder{c.get_double("geometry.R"), read_length(c, "geometry.L")};
    period_radius = std::get<Cylinder>(g).R;
  } else if (kind == "corbino") {
    g = Corbino{c.get_double("geometry.R")};
    period_radius = std::get<Corbino>(g).R;
  } else if (kind == "halfplane") {
    g = HalfPlaneEdge{};
    period_radius = c.get_double("geometry.R", 10.0);
  } else if (kind == "dirichlet") {
    g = HalfPlaneDirichlet{};
    period_radius = c.get_double("geometry.R", 10.0);
  } else {
    throw ConfigError("geometry.kind", "expected cylinder, halfplane, dirichlet or corbino, got '" + kind + "'");
  }
  guard("geometry", [&] { validate(g); });
  return g;
}

EdgeProfile read_wall(const Config& c, const Geometry& g) {
  std::string fallback = std::holds_alternative<HalfPlaneDirichlet>(g) ? "flat" : "power";
  std::string kind = c.get_string("wall.kind", fallback);
  EdgeProfile e;
  if (kind == "flat") {
    e = EdgeProfile::flat();
  } else if (kind == "power") {
    e = EdgeProfile::power_law(c.get_double("wall.strength", 1.0), c.get_double("wall.scale", 1.0),
                               c.get_double("wall.power", 2.0), c.get_double("wall.foot", 0.0));
  } else if (kind == "exponential") {
    e = EdgeProfile::exponential(c.get_double("wall.strength", 1.0), c.get_double("wall.scale", 1.0),
                                 c.get_double("wall.foot", 0.0));
  } else if (kind == "saturating") {
    e = EdgeProfile::saturating(c.get_double("wall.strength", 1.0), c.get_double("wall.scale", 1.0),
                                c.get_double("wall.power", 2.0), c.get_double("wall.height"),
                                c.get_double("wall.foot", 0.0));
  } else {
    throw ConfigError("wall.kind", "expected flat, power, exponential or saturating, got '" + kind + "'");
  }
  guard("wall", [&] { validate(e); });
  return e;
}

struct GridDefaults {
  double lo, hi;
  std::int64_t n;
};

// Corbino grids are cell-centred on [0, r_max]; the rest are nodal.
Grid1D read_grid(const Config& c, const Setup& s, GridDefaults d) {
  Grid1D grid;
  if (auto* cb = std::get_if<Corbino>(&s.geometry)) {
    double r_max = c.get_double("grid.r_max", cb->R + 6.0 * ell(s.units));
    std::int64_t n = c.get_int("grid.n", d.n);
    if (n < 8) throw ConfigError("grid.n", "need at least 8 points");
    grid = Grid1D::radial(r_max, static_cast<std::size_t>(n));
  } else {
    double lo = c.get_double("grid.lo", d.lo), hi = c.get_double("grid.hi", d.hi);
    std::int64_t n = c.get_int("grid.n", d.n);
    if (n < 8) throw ConfigError("grid.n", "need at least 8 points");
    grid = Grid1D::nodal(lo, hi, static_cast<std::size_t>(n));
  }
  guard("grid", [&] { validate(grid); });
  return grid;
}

GridDefaults default_grid(const Setup& s, double spacing, std::int64_t corbino_points = 4000) {
  double l = ell(s.units);
  double lo = -20.0 * l, hi = 6.0 * l;
  if (std::holds_alternative<HalfPlaneDirichlet>(s.geometry)) hi = 0.0;
  if (auto* cy = std::get_if<Cylinder>(&s.geometry); cy && std::isfinite(cy->L)) {
    lo = -0.5 * cy->L - 5.0 * l;
    hi = 0.5 * cy->L + 5.0 * l;
  }
  if (std::holds_alternative<Corbino>(s.geometry)) return {0.0, 0.0, corbino_points};
  return {lo, hi, static_cast<std::int64_t>(std::llround((hi - lo) / spacing))};
}

Setup read_setup(const Config& c, double spacing) {
  Setup s;
  s.units = read_units(c);
  s.geometry = read_geometry(c, s.period_radius);
  s.edge = read_wall(c, s.geometry);
  s.grid = read_grid(c, s, default_grid(s, spacing));
  return s;
}

SpectralWindow read_window(const Config& c, const Units& u, DisorderBounds b = {}) {
  double center = c.get_double("window.center", 2.0 * u.B);
  double hw = c.get_double("window.half_width", 0.1 * u.B);
  return guard("window", [&] { return SpectralWindow::make(u, center, hw, b); });
}

std::vector<std::uint64_t> read_seeds(const Config& c, const CommandOptions& o) {
  if (c.has("disorder.seeds")) {
    std::string text = c.get_string("disorder.seeds");
    if (!o.seeds.empty()) return o.seeds;
    try {
      return parse_seed_list(text);
    } catch (const ConfigError& e) {
      throw ConfigError("disorder.seeds", e.what());
    }
  }
  return o.seeds;
}

std::size_t positive(const Config& c, const std::string& key, std::int64_t fallback) {
  std::int64_t v = c.get_int(key, fallback);
  if (v <= 0) throw ConfigError(key, "must be positive");
  return static_cast<std::size_t>(v);
}

// Angular momentum range whose guiding centres cover the grid (cylinder) or the disc.
std::pair<std::int64_t, std::int64_t> default_labels(const Setup& s) {
  double l = ell(s.units);
  if (auto* cb = std::get_if<Corbino>(&s.geometry)) {
    double top = 0.5 * s.units.B * std::pow(cb->R + 3.0 * l, 2);
    return {-2, static_cast<std::int64_t>(std::ceil(top))};
  }
  const auto& cy = std::get<Cylinder>(s.geometry);
  double lo = std::isfinite(cy.L) ? -0.5 * cy.L - 3.5 * l : s.grid.lo + 8.0 * l;
  double hi = std::isfinite(cy.L) ? 0.5 * cy.L + 3.5 * l : s.grid.hi;
  auto labels = labels_for_centres(s.units, cy.R, lo, hi);
  if (labels.empty()) throw ConfigError("grid", "no guiding centres inside the grid");
  return {labels.front(), labels.back()};
}

std::pair<std::int64_t, std::int64_t> read_labels(const Config& c, const Setup& s, const std::string& section) {
  auto d = default_labels(s);
  std::int64_t lo = c.get_int(section + ".l_min", d.first), hi = c.get_int(section + ".l_max", d.second);
  if (hi < lo) throw ConfigError(section + ".l_max", "must not be below l_min");
  return {lo, hi};
}

void require_flow_geometry(const Setup& s) {
  if (!std::holds_alternative<Cylinder>(s.geometry) && !std::holds_alternative<Corbino>(s.geometry))
    throw ConfigError("geometry.kind", "this command needs a cylinder or corbino geometry");
}

void say(std::ostream* log, const CommandOptions& o, const std::string& text) {
  if (log && o.verbose) *log << text << "\n";
}

// ---- commands ----

Outputs bands(const Config& c, const CommandOptions& o, std::ostream* log) {
  Setup s = read_setup(c, 0.025);
  double l = ell(s.units), B = s.units.B;
  double kmin, kmax;
  if (auto* cy = std::get_if<Cylinder>(&s.geometry)) {
    kmin = -B * cy->R * s.grid.hi;
    kmax = -B * cy->R * (s.grid.lo + 8.0 * l);
  } else if (auto* cb = std::get_if<Corbino>(&s.geometry)) {
    kmin = 0.0;
    kmax = 0.5 * B * std::pow(cb->R + 2.0 * l, 2);
  } else {
    kmin = -B * s.grid.hi;
    kmax = -B * (s.grid.lo + 8.0 * l);
  }
  kmin = c.get_double("bands.kappa_min", kmin);
  kmax = c.get_double("bands.kappa_max", kmax);
  std::size_t count = positive(c, "bands.kappa_count", 41);
  std::size_t nb = positive(c, "bands.count", 3);
  c.reject_unused();

  std::vector<double> kappa(count);
  for (std::size_t k = 0; k < count; ++k)
    kappa[k] = count == 1 ? kmin : kmin + (kmax - kmin) * static_cast<double>(k) / static_cast<double>(count - 1);
  say(log, o, "bands: " + std::to_string(count) + " kappa values, " + std::to_string(nb) + " bands");
  auto table = guard("grid", [&] { return dispersion(s.geometry, s.units, s.edge, kappa, s.grid, nb, o.threads); });

  Csv csv{"kappa", "band", "energy", "residual", "guiding_center"};
  for (std::size_t k = 0; k < table.kappa.size(); ++k)
    for (std::size_t j = 0; j < table.energy[k].size(); ++j)
      csv.row(table.kappa[k], table.band[k][j], table.energy[k][j], table.residual[k][j], table.guiding_center[k]);

  json j = header("bands", c);
  j["geometry"] = geometry_name(s.geometry);
  j["wall"] = s.edge.name();
  j["B"] = B;
  j["grid"] = {{"lo", s.grid.lo}, {"hi", s.grid.hi}, {"n", s.grid.n}};
  j["kappa"] = {{"min", kmin}, {"max", kmax}, {"count", count}};
  j["bands"] = nb;
  j["rows"] = count * nb;
  j["files"] = {"bands.csv"};
  return {{"bands.csv", csv.str()}, {"bands.json", dump(j)}};
}

Outputs flow(const Config& c, const CommandOptions& o, std::ostream* log) {
  Setup s = read_setup(c, 0.05);
  require_flow_geometry(s);
  auto [l_lo, l_hi] = read_labels(c, s, "flow");
  std::size_t nodes = positive(c, "flow.nodes", 16);
  std::int64_t periods = static_cast<std::int64_t>(positive(c, "flow.periods", 1));
  std::size_t nb = positive(c, "flow.bands", 3);
  double width = c.get_double("flow.edge_width", 4.0);
  c.reject_unused();

  say(log, o, "flow: l in [" + std::to_string(l_lo) + ", " + std::to_string(l_hi) + "], " +
                  std::to_string(nodes * static_cast<std::size_t>(periods)) + " flux nodes");
  auto fluxes = uniform_fluxes(nodes, periods);
  auto t = guard("grid", [&] {
    return spectral_flow(s.geometry, s.units, s.edge, s.grid, fluxes, l_lo, l_hi, nb, o.threads, width);
  });
  Csv csv{"flux_index", "flux_quanta", "n", "l", "kappa", "energy", "current", "mean_position", "edge_weight",
          "residual"};
  for (const auto& e : t.entries)
    csv.row(e.flux_index, t.fluxes[e.flux_index].in_quanta(), e.n, static_cast<long long>(e.l), e.kappa, e.energy,
            e.current, e.mean_position, e.edge_weight, e.residual);
  return {{"flow.csv", csv.str()}};
}

Outputs current(const Config& c, const CommandOptions& o, std::ostream* log) {
  Setup s = read_setup(c, 0.05);
  require_flow_geometry(s);
  auto [l_lo, l_hi] = read_labels(c, s, "current");
  std::size_t nb = positive(c, "current.bands", 3);
  Flux flux = Flux::from_quanta(c.get_double("current.flux", 0.0));
  double step = c.get_double("current.step", 1e-4);
  if (!(step > 0.0)) throw ConfigError("current.step", "must be positive");
  double center = c.get_double("window.center", 2.0 * s.units.B);
  double hw = c.get_double("window.half_width", 0.5 * s.units.B);
  c.reject_unused();

  double q = flux.in_quanta(), dq = step / (2.0 * kPi);
  std::vector<Flux> fluxes{flux, Flux::from_quanta(q - dq), Flux::from_quanta(q + dq)};
  auto t = guard("grid", [&] {
    return spectral_flow(s.geometry, s.units, s.edge, s.grid, fluxes, l_lo, l_hi, nb, o.threads);
  });
  std::vector<const FlowEntry*> picked;
  for (const auto& e : t.entries)
    if (e.flux_index == 0 && std::abs(e.energy - center) <= hw) picked.push_back(&e);
  say(log, o, "current: " + std::to_string(picked.size()) + " states in the window");

  std::vector<CurrentReport> rows(picked.size());
  parallel_for(picked.size(), o.threads, [&](std::size_t i) {
    const FlowEntry& e = *picked[i];
    CurrentReport& r = rows[i];
    r.n = e.n;
    r.l = e.l;
    r.flux = flux.phase();
    r.energy = e.energy;
    r.current_fh = edge_current_fh(t, e.n, e.l, flux, step);
    ChannelHamiltonian ch = channel_hamiltonian(s.geometry, s.units, s.edge, e.kappa, s.grid);
    auto pairs = solve_channel(ch, static_cast<std::size_t>(e.n) + 1);
    const EigenPair& p = pairs[static_cast<std::size_t>(e.n)];
    if (std::holds_alternative<Corbino>(s.geometry)) {
      auto d = corbino_current_decomposition(ch, p.vector, s.units, s.edge);
      r.current_commutator = d.total;
      r.virial = std::abs(d.total - d.direct);
    } else {
      r.current_commutator = edge_current_commutator(ch, p.vector, s.units, s.edge);
      r.virial = virial_residual(ch, p, s.units, s.edge);
    }
    r.discrepancy = std::abs(r.current_fh - r.current_commutator);
  });

  Csv csv{"n", "l", "flux", "energy", "current_fh", "current_commutator", "discrepancy", "virial_residual"};
  for (const auto& r : rows)
    csv.row(r.n, static_cast<long long>(r.l), r.flux, r.energy, r.current_fh, r.current_commutator, r.discrepancy,
            r.virial);
  return {{"current.csv", csv.str()}};
}

Outputs hall(const Config& c, const CommandOptions& o, std::ostream* log) {
  Setup s;
  s.units = read_units(c);
  s.geometry = read_geometry(c, s.period_radius);
  auto* cy = std::get_if<Cylinder>(&s.geometry);
  if (!cy || !std::isfinite(cy->L)) throw ConfigError("geometry.L", "hall needs a cylinder of finite length");
  s.edge = read_wall(c, s.geometry);
  s.grid = read_grid(c, s, default_grid(s, 0.1));
  double B = s.units.B;
  double mu_l = c.get_double("hall.mu_l", 1.5 * B), mu_r = c.get_double("hall.mu_r", 2.5 * B);
  if (!(mu_l < mu_r)) throw ConfigError("hall.mu_r", "must exceed hall.mu_l");
  auto filled = static_cast<std::int64_t>(std::ceil(0.5 * (mu_r / B - 1.0)));
  std::size_t nb = positive(c, "hall.bands", std::max<std::int64_t>(3, filled + 2));
  std::size_t nodes = positive(c, "hall.nodes", 64);
  auto [l_lo, l_hi] = read_labels(c, s, "hall");
  c.reject_unused();

  say(log, o, "hall: " + std::to_string(l_hi - l_lo + 1) + " channels x " + std::to_string(nodes) + " nodes");
  auto t = guard("grid", [&] {
    return spectral_flow(s.geometry, s.units, s.edge, s.grid, uniform_fluxes(nodes), l_lo, l_hi, nb, o.threads);
  });
  auto r = guard("hall", [&] { return hall_conductivity(t, s.units, mu_l, mu_r); });

  json j = header("hall", c);
  j["R"] = cy->R;
  j["L"] = cy->L;
  j["B"] = B;
  j["mu_l"] = mu_l;
  j["mu_r"] = mu_r;
  j["nodes"] = r.nodes;
  j["channels"] = l_hi - l_lo + 1;
  j["bands"] = nb;
  j["sigma"] = r.sigma;
  j["nu_estimate"] = r.nu_estimate;
  j["error"] = r.error;
  j["bias"] = r.bias;
  j["sigma_fixed_labels"] = r.sigma_fixed_labels;
  j["mean_current"] = r.mean_current;
  j["residuals"] = {{"max", r.max_residual}};
  return {{"hall.json", dump(j)}};
}

json ledger_json(const ConstantsLedger& L) {
  return {{"C1", jnum(L.C1)},         {"C2", jnum(L.C2)},
          {"C3", jnum(L.C3)},         {"C4", jnum(L.C4)},
          {"D1", jnum(L.D1)},         {"D2", jnum(L.D2)},
          {"D3", jnum(L.D3)},         {"lambda", jnum(L.lambda)},
          {"alpha_tilde", jnum(L.alpha_tilde)}, {"numerator", jnum(L.numerator)},
          {"eta", L.eta},             {"eps", L.eps},
          {"width", L.width},         {"delta", L.delta},
          {"energy", L.energy},       {"cutoff", {{"b", L.cutoff.b}, {"width", L.cutoff.width}}}};
}

Outputs mourre(const Config& c, const CommandOptions& o, std::ostream* log) {
  Setup s;
  s.units = read_units(c);
  s.geometry = read_geometry(c, s.period_radius);
  s.edge = read_wall(c, s.geometry);
  double l = ell(s.units);
  s.grid = read_grid(c, s, {-15.0 * l, 6.0 * l, 128});
  if (!std::holds_alternative<Cylinder>(s.geometry) && !std::holds_alternative<HalfPlaneEdge>(s.geometry))
    throw ConfigError("geometry.kind", "mourre needs a cylinder or halfplane geometry");
  std::size_t M = positive(c, "strip.channels", 64);
  auto all = labels_for_centres(s.units, s.period_radius, s.grid.lo + 8.5 * l, s.grid.hi - 2.0 * l);
  std::int64_t first = c.get_int("strip.first_label", all.empty() ? 0 : all.front());
  auto labels = consecutive_labels(first, M);
  bool bounded = c.get_bool("mourre.bounded", false);
  double center = c.get_double("window.center", 2.0 * s.units.B);
  double hw = c.get_double("window.half_width", 0.1 * s.units.B);
  auto seeds = read_seeds(c, o);
  bool absolute = c.has("disorder.delta");
  double delta_abs = c.get_double("disorder.delta", 0.0);
  double fraction = c.get_double("disorder.delta_fraction", 0.5);
  double corr = c.get_double("disorder.corr", 1.0);
  std::size_t max_pairs = positive(c, "mourre.max_pairs", 200);
  c.reject_unused();
  if (bounded && !s.edge.bounded()) throw ConfigError("mourre.bounded", "needs a saturating wall");
  if (!(corr > 0.0)) throw ConfigError("disorder.corr", "must be positive");

  // Threshold from the clean ledger; unbounded walls use the Landau gap.
  SpectralWindow clean = guard("window", [&] {
    if (!bounded) return SpectralWindow::make(s.units, center, hw);
    double eta = std::min(s.units.gap_distance(center), s.edge.height - center);
    if (!(eta > hw)) fail(ErrorCode::WindowAboveWall, "window reaches the wall height");
    return SpectralWindow::with_gap(center, hw, eta);
  });
  ConstantsLedger L0 = guard("wall", [&] {
    if (!bounded) return constants_ledger(s.edge, clean);
    double eps = default_epsilon(clean);
    double saturation = s.edge.unbounded().level_crossing(s.edge.height);
    return constants_ledger(s.edge, CutoffSpec::for_wall(s.edge, eps), clean, eps, 10000,
                            std::nextafter(saturation, -HUGE_VAL));
  });
  double threshold = disorder_threshold(L0, center, clean.width());
  double delta = seeds.empty() ? 0.0 : (absolute ? delta_abs : fraction * threshold);
  if (!(delta >= 0.0)) throw ConfigError("disorder.delta", "must be nonnegative");

  struct Run {
    std::uint64_t seed = 0;
    MourreReport report;
  };
  std::vector<Run> runs(seeds.empty() ? 1 : seeds.size());
  auto run_one = [&](std::size_t i) {
    std::shared_ptr<const DisorderField> field;
    DisorderBounds b;
    if (!seeds.empty()) {
      runs[i].seed = seeds[i];
      Grid2D g2{2.0 * kPi * s.period_radius, M, s.grid};
      auto f = std::make_shared<DisorderField>(generate(seeds[i], delta, corr, g2));
      b = {delta, f->sup_gradient(), f->sup_curvature()};
      field = f;
    }
    StripOperator strip = build_strip(s.geometry, s.units, s.edge, s.grid, labels, {}, field, s.period_radius);
    if (bounded) {
      runs[i].report = bounded_wall_positivity(strip, center, hw, b, max_pairs);
    } else {
      SpectralWindow w = SpectralWindow::make(s.units, center, hw, b);
      runs[i].report = commutator_positivity(strip, w, constants_ledger(s.edge, w), max_pairs);
    }
  };
  guard("disorder", [&] { parallel_for(runs.size(), o.threads, run_one); });

  json j = header("mourre", c);
  j["window"] = {{"E", center}, {"halfwidth", hw}};
  j["eta"] = runs.front().report.window.eta;
  j["eta_branch"] = runs.front().report.eta_branch;
  j["delta"] = delta;
  j["strip"] = {{"channels", M}, {"grid", s.grid.n}, {"first_label", first}};
  double amin = HUGE_VAL;
  bool pass = true;
  std::set<std::string> warnings;
  json per = json::array();
  for (const auto& r : runs) {
    const MourreReport& m = r.report;
    amin = std::min(amin, m.alpha_emp);
    pass = pass && m.pass;
    warnings.insert(m.warnings.begin(), m.warnings.end());
    double max_res = 0.0, max_vir = 0.0;
    for (const auto& st : m.states) {
      max_res = std::max(max_res, st.residual);
      max_vir = std::max(max_vir, std::abs(st.virial_residual));
    }
    json e;
    if (!seeds.empty()) e["seed"] = r.seed;
    e["alpha_emp"] = jnum(m.alpha_emp);
    e["alpha_emp_edge"] = jnum(m.alpha_emp_edge);
    e["alpha_min_state"] = jnum(m.alpha_min_state);
    e["alpha_tilde"] = jnum(m.alpha_tilde);
    e["states"] = m.states.size();
    e["pass"] = m.pass;
    e["max_residual"] = max_res;
    e["max_virial_residual"] = max_vir;
    e["warnings"] = m.warnings;
    per.push_back(e);
  }
  if (delta > threshold) warnings.insert("disorder bound exceeds threshold");
  j["alpha_emp"] = jnum(amin);
  j["alpha_tilde"] = jnum(runs.front().report.alpha_tilde);
  j["delta_threshold"] = threshold;
  j["seeds"] = per;
  j["pass"] = pass;
  j["warnings"] = std::vector<std::string>(warnings.begin(), warnings.end());
  j["ledger"] = ledger_json(runs.front().report.ledger);
  say(log, o, std::string("mourre: pass=") + (pass ? "true" : "false"));
  return {{"mourre.json", dump(j)}};
}

Outputs resolvent(const Config& c, const CommandOptions& o, std::ostream* log) {
  Units u = read_units(c);
  double energy = c.get_double("resolvent.energy", 2.0 * u.B);
  double l = ell(u);
  double dmin = c.get_double("resolvent.d_min", 0.1 * l), dmax = c.get_double("resolvent.d_max", 8.0 * l);
  std::size_t count = positive(c, "resolvent.count", 80);
  Point2 src{c.get_double("resolvent.x0", 0.0), c.get_double("resolvent.y0", 0.0)};
  c.reject_unused();
  if (!(dmin > 0.0 && dmax > dmin)) throw ConfigError("resolvent.d_max", "need 0 < d_min < d_max");
  auto p = guard("resolvent.energy", [&] { return ResolventParams::make(energy, u.B); });

  std::vector<double> d(count);
  for (std::size_t i = 0; i < count; ++i)
    d[i] = count == 1 ? dmin : dmin + (dmax - dmin) * static_cast<double>(i) / static_cast<double>(count - 1);
  say(log, o, "resolvent: " + std::to_string(count) + " distances");
  EnvelopeFit fit = decay_bound_check(p, d);
  Csv csv{"distance", "re", "im", "abs", "envelope"};
  for (double di : d) {
    cplx k = free_resolvent_kernel(Point2{src.x + di, src.y}, src, p);
    csv.row(di, k.real(), k.imag(), std::abs(k), envelope_value(di, fit));
  }
  json j = header("resolvent", c);
  j["energy"] = energy;
  j["B"] = u.B;
  j["envelope"] = {{"C", fit.C}, {"xi", fit.xi}, {"violations", fit.violations}, {"mean_log_gap", fit.mean_log_gap}};
  j["files"] = {"resolvent.csv"};
  return {{"resolvent.csv", csv.str()}, {"resolvent.json", dump(j)}};
}

Outputs decay(const Config& c, const CommandOptions& o, std::ostream* log) {
  Setup s;
  s.units = read_units(c);
  s.geometry = read_geometry(c, s.period_radius);
  auto* cb = std::get_if<Corbino>(&s.geometry);
  if (!cb) throw ConfigError("geometry.kind", "decay needs a corbino geometry");
  s.edge = read_wall(c, s.geometry);
  s.grid = read_grid(c, s, default_grid(s, 0.0));
  double R = cb->R, B = s.units.B;
  double a = c.get_double("decay.a", 0.5 * R);
  int band = static_cast<int>(c.get_int("decay.band", 0));
  double target = c.get_double("window.center", 2.0 * B);
  bool fixed = c.has("decay.l");
  std::int64_t l_fixed = c.get_int("decay.l", 0);
  int polish = static_cast<int>(c.get_int("decay.polish", 20));
  c.reject_unused();
  if (band < 0) throw ConfigError("decay.band", "must be nonnegative");

  SolverOptions so;
  so.polish = polish;
  auto solve = [&](std::int64_t l) {
    auto ch = channel_hamiltonian(s.geometry, s.units, s.edge, static_cast<double>(l), s.grid);
    auto pairs = solve_channel(ch, static_cast<std::size_t>(band) + 1, so);
    return std::make_pair(ch, pairs[static_cast<std::size_t>(band)]);
  };
  // Default state: the channel whose energy sits closest to the window centre.
  std::int64_t l = l_fixed;
  if (!fixed) {
    auto mid = static_cast<std::int64_t>(std::llround(0.5 * B * R * R));
    auto span = static_cast<std::int64_t>(std::ceil(2.0 * R * std::sqrt(B)));
    double best = HUGE_VAL;
    for (std::int64_t k = std::max<std::int64_t>(0, mid - span); k <= mid + span; ++k) {
      auto ch = channel_hamiltonian(s.geometry, s.units, s.edge, static_cast<double>(k), s.grid);
      double e = tridiagonal_eigenvalues(ch.op, static_cast<std::size_t>(band), 1)[0];
      if (std::abs(e - target) < best) {
        best = std::abs(e - target);
        l = k;
      }
    }
  }
  say(log, o, "decay: l=" + std::to_string(l));
  auto [ch, pair] = guard("grid", [&] { return solve(l); });
  DecayFit f = guard("decay.a", [&] { return eigenfunction_decay_fit(ch, pair.vector, a, R); });
  json j = header("decay", c);
  j["R"] = R;
  j["a"] = a;
  j["l"] = l;
  j["band"] = band;
  j["energy"] = pair.energy;
  j["gap_distance"] = s.units.gap_distance(pair.energy);
  j["lambda"] = f.lambda;
  j["C"] = f.C;
  j["r_lo"] = f.r_lo;
  j["r_hi"] = f.r_hi;
  j["fit_residual"] = f.residual;
  j["points"] = f.points;
  return {{"decay.json", dump(j)}};
}

Outputs disorder(const Config& c, const CommandOptions& o, std::ostream* log) {
  Setup s;
  s.units = read_units(c);
  s.geometry = read_geometry(c, s.period_radius);
  if (!std::holds_alternative<Cylinder>(s.geometry) && !std::holds_alternative<HalfPlaneEdge>(s.geometry))
    throw ConfigError("geometry.kind", "disorder needs a cylinder or halfplane geometry");
  s.edge = read_wall(c, s.geometry);
  double l = ell(s.units);
  s.grid = read_grid(c, s, {-10.0 * l, 4.0 * l, 32});
  std::size_t M = positive(c, "strip.channels", 16);
  auto all = labels_for_centres(s.units, s.period_radius, s.grid.lo + 4.0 * l, s.grid.hi - 1.0 * l);
  std::int64_t first = c.get_int("strip.first_label", all.empty() ? 0 : all.front());
  auto seeds = read_seeds(c, o);
  double delta = c.get_double("disorder.delta", 0.1 * s.units.B);
  double corr = c.get_double("disorder.corr", 1.0);
  double eps = c.get_double("disorder.eps", delta);
  bool fields = c.get_bool("disorder.write_fields", false);
  c.reject_unused();
  if (seeds.empty()) throw ConfigError("disorder.seeds", "missing required key");
  if (!(delta > 0.0)) throw ConfigError("disorder.delta", "must be positive");
  if (!(corr > 0.0)) throw ConfigError("disorder.corr", "must be positive");
  if (M * s.grid.n > 4096) throw ConfigError("strip.channels", "dense comparison limited to 4096 unknowns");

  auto labels = consecutive_labels(first, M);
  StripOperator clean =
      guard("grid", [&] { return build_strip(s.geometry, s.units, s.edge, s.grid, labels, {}, nullptr, s.period_radius); });
  auto clean_values = eig_dense_values(clean.op);
  Grid2D g2{2.0 * kPi * s.period_radius, M, s.grid};

  struct Run {
    InclusionReport report;
    std::shared_ptr<DisorderField> field;
  };
  std::vector<Run> runs(seeds.size());
  parallel_for(seeds.size(), o.threads, [&](std::size_t i) {
    auto f = std::make_shared<DisorderField>(generate(seeds[i], delta, corr, g2));
    StripOperator st = build_strip(s.geometry, s.units, s.edge, s.grid, labels, {}, f, s.period_radius);
    runs[i].report = compare_spectra(clean_values, eig_dense_values(st.op), delta, eps);
    runs[i].field = f;
  });
  say(log, o, "disorder: " + std::to_string(seeds.size()) + " seeds");

  Outputs out;
  json j = header("disorder", c);
  j["delta"] = delta;
  j["corr"] = corr;
  j["eps"] = eps;
  j["dimension"] = clean.dimension();
  std::size_t total = 0;
  json per = json::array();
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const auto& r = runs[i].report;
    const auto& f = *runs[i].field;
    total += r.violations;
    json e;
    e["seed"] = seeds[i];
    e["eigenvalues"] = r.eigenvalues;
    e["violations"] = r.violations;
    e["max_distance"] = r.max_distance;
    e["max_matched_shift"] = r.max_matched_shift;
    e["first_inclusion_fraction"] = r.first_inclusion_fraction;
    e["field"] = {{"bumps", f.bump_count()},         {"sup_abs", f.sup_abs()},
                  {"sup_gradient", f.sup_gradient()}, {"variance", f.variance()},
                  {"clipped_fraction", f.clipped_fraction()}};
    per.push_back(e);
    if (fields) {
      std::ostringstream bin(std::ios::binary);
      write_field(bin, f);
      out.emplace_back("field_" + std::to_string(seeds[i]) + ".bin", bin.str());
    }
  }
  j["seeds"] = per;
  j["violations"] = total;
  j["pass"] = total == 0;
  out.insert(out.begin(), {"disorder.json", dump(j)});
  return out;
}

Outputs constants(const Config& c, const CommandOptions& o, std::ostream* log) {
  Units u = read_units(c);
  Geometry g = HalfPlaneEdge{};
  EdgeProfile edge = read_wall(c, g);
  double delta = c.get_double("disorder.delta", 0.0);
  SpectralWindow w = read_window(c, u, {delta, 0.0, 0.0});
  double eps = c.get_double("constants.eps", default_epsilon(w));
  double level = c.get_double("constants.cutoff_level", eps - delta);
  std::size_t samples = positive(c, "constants.samples", 10000);
  auto scales = c.get_doubles("constants.scales", {1.0, 0.5, 0.25, 0.125});
  c.reject_unused();
  for (double sc : scales)
    if (!(sc > 0.0)) throw ConfigError("constants.scales", "scales must be positive");

  auto L = guard("constants", [&] {
    return constants_ledger(edge, CutoffSpec::for_wall(edge, level), w, eps, samples);
  });
  double thr = disorder_threshold(L, w.center, w.width());
  say(log, o, "constants: alpha_tilde=" + num(L.alpha_tilde));

  Outputs out;
  json j = header("constants", c);
  j["wall"] = edge.name();
  j["ledger"] = ledger_json(L);
  j["delta_threshold"] = thr;
  if (scales.size() >= 2) {
    auto study = guard("constants.scales", [&] { return scaling_study(edge, scales, w, eps); });
    Csv csv{"scale", "C1", "C2", "C3", "C4", "D1", "D2", "D3", "lambda", "alpha_tilde"};
    for (std::size_t i = 0; i < study.scales.size(); ++i) {
      const auto& s = study.ledgers[i];
      csv.row(study.scales[i], s.C1, s.C2, s.C3, s.C4, s.D1, s.D2, s.D3, s.lambda, s.alpha_tilde);
    }
    j["scaling"] = {{"scales", scales},
                    {"slope_C1", study.slope_C1},
                    {"slope_C2", study.slope_C2},
                    {"slope_C3", study.slope_C3},
                    {"slope_C4", study.slope_C4},
                    {"slope_alpha_tilde", study.slope_alpha}};
    j["files"] = {"constants_scaling.csv"};
    out.emplace_back("constants_scaling.csv", csv.str());
  }
  out.insert(out.begin(), {"constants.json", dump(j)});
  return out;
}

using Handler = Outputs (*)(const Config&, const CommandOptions&, std::ostream*);

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> m{
      {"bands", bands},         {"flow", flow},     {"current", current},   {"hall", hall},
      {"mourre", mourre},       {"resolvent", resolvent}, {"decay", decay}, {"disorder", disorder},
      {"constants", constants},
  };
  return m;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"bands",     "flow",  "current",  "hall",     "mourre",
                                              "resolvent", "decay", "disorder", "constants"};
  return names;
}

Outputs run_command(const std::string& name, const Config& config, const CommandOptions& options,
                    std::ostream* log) {
  auto it = handlers().find(name);
  if (it == handlers().end()) throw ConfigError("", "unknown command '" + name + "'");
  return it->second(config, options, log);
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (auto* err = dynamic_cast<const Error*>(&e)) return is_config_error(err->code()) ? 2 : 3;
  return 3;
}

void write_outputs(const Outputs& outputs, const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  for (const auto& [name, content] : outputs) {
    std::ofstream f(fs::path(directory) / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (fs::path(directory) / name).string());
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
  }
}

}  // namespace hallsim
