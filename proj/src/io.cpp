#include "dfatoms/io.hpp"

#include <chrono>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "dfatoms/error.hpp"
#include "dfatoms/projector.hpp"

namespace dfatoms {

// ---------------------------------------------------------------- oracle

double oracle_sommerfeld_shifted(double z, int kappa, int n, double c) {
  if (!(c > 0.0) || !(z >= 0.0)) fail(ErrorCode::invalid_argument, "oracle_sommerfeld: need c > 0 and Z >= 0");
  if (kappa == 0) fail(ErrorCode::invalid_argument, "oracle_sommerfeld: kappa = 0");
  const int ak = std::abs(kappa);
  const int radial = n - ak;  // radial quantum number
  if (radial < 0 || (kappa > 0 && radial < 1)) {
    fail(ErrorCode::invalid_argument, "oracle_sommerfeld: n = " + std::to_string(n) + " impossible for kappa = " +
                                          std::to_string(kappa));
  }
  const double za = z / c;
  if (za >= ak) fail(ErrorCode::domain_error, "oracle_sommerfeld: Z/c >= |kappa| (supercritical channel)");
  const double gamma = std::sqrt(static_cast<double>(ak) * ak - za * za);
  const double x = za / (radial + gamma);
  const double q = std::sqrt(1.0 + x * x);
  return -c * c * x * x / (q * (1.0 + q));
}

double oracle_sommerfeld(double z, int kappa, int n, double c) {
  return c * c + oracle_sommerfeld_shifted(z, kappa, n, c);
}

// ---------------------------------------------------------------- conditions

bool HypothesisReport::all_hold() const {
  for (const auto& f : flags) {
    if (!f.holds) return false;
  }
  return true;
}

HypothesisReport validate_conditions(double z, double n, double c) {
  if (!(z > 0.0) || !(n >= 0.0) || !(c > 0.0)) {
    fail(ErrorCode::invalid_argument, "validate_conditions: need Z > 0, N >= 0, c > 0");
  }
  if (!(n < z + 1.0)) {
    fail(ErrorCode::invalid_config, "N < Z+1 violated: N = " + std::to_string(n) + ", Z = " + std::to_string(z));
  }
  HypothesisReport r;
  r.constant = 2.0 / (0.5 * std::numbers::pi + 2.0 / std::numbers::pi);
  r.threshold = r.constant * c;
  r.literal_threshold = r.constant * c * c;
  const double worst = std::max(z, 3.0 * n - 1.0);
  r.flags.push_back({"theorem1", "max(Z, 3N-1) < 2c/(pi/2+2/pi)", worst, r.threshold, worst < r.threshold});
  r.flags.push_back({"paturel_z", "Z < 2c/(pi/2+2/pi)", z, r.threshold, z < r.threshold});
  r.flags.push_back({"paturel_n", "N < 2c/(pi/2+2/pi)", n, r.threshold, n < r.threshold});
  r.flags.push_back({"binding", "N < Z+1", n, z + 1.0, true});
  r.flags.push_back({"theorem1_literal", "max(Z, 3N-1) < 2c^2/(pi/2+2/pi)", worst, r.literal_threshold,
                     worst < r.literal_threshold});
  return r;
}

// ---------------------------------------------------------------- config

namespace {

const std::map<RunMode, std::string> kModeNames = {
    {RunMode::solve, "solve"},
    {RunMode::hf, "hf"},
    {RunMode::limit_study, "limit-study"},
    {RunMode::projected, "projected"},
    {RunMode::maxmin, "maxmin"},
    {RunMode::fock_min, "fock-min"},
    {RunMode::projector_iteration, "projector-iteration"},
    {RunMode::oracle_sommerfeld, "oracle-sommerfeld"},
    {RunMode::conditions, "conditions"},
};

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  fail(ErrorCode::invalid_config, (path.empty() ? "/" : path) + ": " + what);
}

// Walks one JSON object, remembering which keys were read so the rest can be
// rejected.
class Fields {
 public:
  Fields(const Json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) bad(path_, "must be an object");
  }

  std::string at(const std::string& key) const { return path_ + "/" + key; }
  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key);
  }
  const Json& get(const std::string& key) {
    seen_.insert(key);
    return obj_.at(key);
  }

  void number(const std::string& key, double& out) {
    if (!has(key)) return;
    const Json& v = obj_.at(key);
    if (!v.is_number()) bad(at(key), "must be a number");
    out = v.get<double>();
  }
  void integer(const std::string& key, int& out) {
    if (!has(key)) return;
    const Json& v = obj_.at(key);
    if (!v.is_number_integer()) bad(at(key), "must be an integer");
    out = v.get<int>();
  }
  void size(const std::string& key, std::size_t& out) {
    int v = static_cast<int>(out);
    integer(key, v);
    if (v < 0) bad(at(key), "must be non-negative");
    out = static_cast<std::size_t>(v);
  }
  void boolean(const std::string& key, bool& out) {
    if (!has(key)) return;
    const Json& v = obj_.at(key);
    if (!v.is_boolean()) bad(at(key), "must be true or false");
    out = v.get<bool>();
  }
  void string(const std::string& key, std::string& out) {
    if (!has(key)) return;
    const Json& v = obj_.at(key);
    if (!v.is_string()) bad(at(key), "must be a string");
    out = v.get<std::string>();
  }
  template <class E>
  void choice(const std::string& key, E& out, const std::map<std::string, E>& options) {
    std::string name;
    if (!has(key)) return;
    string(key, name);
    auto it = options.find(name);
    if (it == options.end()) {
      std::string list;
      for (const auto& [k, v] : options) list += (list.empty() ? "" : ", ") + k;
      bad(at(key), "must be one of " + list);
    }
    out = it->second;
  }
  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) bad(at(it.key()), "unknown key");
    }
  }

 private:
  const Json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

const std::map<std::string, NuclearShape> kShapes = {{"point", NuclearShape::point},
                                                     {"uniform_sphere", NuclearShape::uniform_sphere}};
const std::map<std::string, EigenMethod> kMethods = {
    {"automatic", EigenMethod::automatic}, {"dense", EigenMethod::dense}, {"iterative", EigenMethod::iterative}};
const std::map<std::string, LambdaCheck> kLambda = {
    {"automatic", LambdaCheck::automatic}, {"always", LambdaCheck::always}, {"never", LambdaCheck::never}};
const std::map<std::string, ProjectorSource> kSources = {
    {"free", ProjectorSource::free}, {"mean_field", ProjectorSource::mean_field}, {"file", ProjectorSource::file}};

template <class E>
std::string name_of(E value, const std::map<std::string, E>& options) {
  for (const auto& [k, v] : options) {
    if (v == value) return k;
  }
  return "?";
}

std::vector<ShellSpec> parse_shells(Fields& f, const std::string& key, const char* channel) {
  std::vector<ShellSpec> out;
  if (!f.has(key)) return out;
  const Json& list = f.get(key);
  if (!list.is_array()) bad(f.at(key), "must be an array");
  for (std::size_t i = 0; i < list.size(); ++i) {
    Fields s(list[i], f.at(key) + "/" + std::to_string(i));
    ShellSpec shell;
    if (!s.has("n") || !s.has(channel) || !s.has("w")) bad(s.at(""), std::string("needs n, ") + channel + " and w");
    s.integer("n", shell.n);
    s.integer(channel, shell.channel);
    s.number("w", shell.occupation);
    s.finish();
    out.push_back(shell);
  }
  return out;
}

ProblemSpec make_problem(const RunConfig& c, Model model) {
  ProblemSpec p;
  p.model = model;
  p.nuclear = c.nucleus;
  p.speed_of_light = c.c;
  p.grid = c.grid;
  p.shells = model == Model::dirac ? c.shells : c.nr_shells;
  return p;
}

bool needs_shells(RunMode m) { return m != RunMode::oracle_sommerfeld; }

}  // namespace

std::string to_string(RunMode mode) { return kModeNames.at(mode); }

RunMode parse_mode(const std::string& name) {
  for (const auto& [m, n] : kModeNames) {
    if (n == name) return m;
  }
  fail(ErrorCode::invalid_config, "unknown mode '" + name + "'");
}

ProblemSpec RunConfig::problem() const {
  if (mode == RunMode::hf) {
    if (!nr_shells.empty()) return make_problem(*this, Model::schrodinger);
    return nonrelativistic_partner(make_problem(*this, Model::dirac));
  }
  return make_problem(*this, Model::dirac);
}

RunConfig parse_config(const Json& doc) {
  RunConfig c;
  Fields top(doc, "");
  if (top.has("schema")) {
    std::string schema;
    top.string("schema", schema);
    if (schema != kConfigSchema) bad("/schema", "expected \"" + std::string(kConfigSchema) + "\"");
  }
  if (top.has("mode")) {
    std::string mode;
    top.string("mode", mode);
    try {
      c.mode = parse_mode(mode);
    } catch (const Error&) {
      bad("/mode", "unknown mode '" + mode + "'");
    }
  }
  if (!top.has("Z")) bad("/Z", "required");
  top.number("Z", c.nucleus.charge);
  if (top.has("nucleus")) {
    Fields nuc(top.get("nucleus"), "/nucleus");
    nuc.choice("model", c.nucleus.shape, kShapes);
    nuc.number("radius", c.nucleus.radius);
    nuc.finish();
  }
  c.shells = parse_shells(top, "shells", "kappa");
  c.nr_shells = parse_shells(top, "nr_shells", "l");
  top.number("c", c.c);
  if (top.has("grid")) {
    Fields g(top.get("grid"), "/grid");
    g.number("r_min", c.grid.r_min);
    g.number("r_max", c.grid.r_max);
    g.size("M", c.grid.size);
    g.finish();
  }
  if (top.has("scf")) {
    Fields s(top.get("scf"), "/scf");
    s.number("mixing", c.scf.mixing);
    s.number("energy_tolerance", c.scf.energy_tolerance);
    s.number("residual_tolerance", c.scf.residual_tolerance);
    s.integer("max_iter", c.scf.max_iter);
    s.number("level_shift", c.scf.level_shift);
    s.choice("method", c.scf.method, kMethods);
    s.choice("lambda_check", c.scf.lambda_check, kLambda);
    s.finish();
  }
  if (top.has("projector")) {
    Fields p(top.get("projector"), "/projector");
    p.choice("source", c.projector, kSources);
    p.string("path", c.projector_path);
    p.boolean("export", c.export_projectors);
    p.finish();
    if (c.projector == ProjectorSource::file && c.projector_path.empty()) bad("/projector/path", "required for source file");
  }
  if (top.has("c_factors")) {
    const Json& list = top.get("c_factors");
    if (!list.is_array() || list.empty()) bad("/c_factors", "must be a non-empty array");
    c.c_factors.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (!list[i].is_number()) bad("/c_factors/" + std::to_string(i), "must be a number");
      c.c_factors.push_back(list[i].get<double>());
    }
  }
  if (top.has("minmax")) {
    Fields m(top.get("minmax"), "/minmax");
    m.number("gradient_tolerance", c.minmax.gradient_tolerance);
    m.number("inner_tolerance", c.minmax.inner_tolerance);
    m.integer("max_outer", c.minmax.max_outer);
    m.integer("max_inner", c.minmax.max_inner);
    m.size("max_grid", c.minmax.max_grid);
    m.finish();
  }
  if (top.has("fock")) {
    Fields f(top.get("fock"), "/fock");
    f.number("energy_tolerance", c.fock.energy_tolerance);
    f.number("idempotency_tolerance", c.fock.idempotency_tolerance);
    f.integer("max_iter", c.fock.max_iter);
    f.finish();
  }
  if (top.has("iteration")) {
    Fields it(top.get("iteration"), "/iteration");
    it.number("distance_tolerance", c.iteration.distance_tolerance);
    it.integer("max_iter", c.iteration.max_iter);
    it.integer("oscillation_window", c.iteration.oscillation_window);
    it.boolean("open_shell_experiment", c.iteration.open_shell_experiment);
    it.finish();
  }
  top.integer("kappa", c.oracle_kappa);
  top.integer("n", c.oracle_n);
  if (top.has("output")) {
    Fields o(top.get("output"), "/output");
    o.string("format", c.output_format);
    o.string("path", c.output_path);
    o.finish();
    if (c.output_format != "json" && c.output_format != "csv") bad("/output/format", "must be json or csv");
  }
  top.finish();

  // physics checks that need the whole document
  if (!(c.c > 0.0)) bad("/c", "must be positive");
  try {
    c.nucleus.validate();
  } catch (const Error& e) {
    bad("/Z", e.what());
  }
  try {
    (void)c.grid.build(c.nucleus.charge);
  } catch (const Error& e) {
    bad("/grid", e.what());
  }
  if (needs_shells(c.mode) && c.shells.empty() && !(c.mode == RunMode::hf && !c.nr_shells.empty())) {
    bad("/shells", "at least one shell is required for mode " + to_string(c.mode));
  }
  const bool open = c.mode == RunMode::projector_iteration && c.iteration.open_shell_experiment;
  for (auto [key, model] : {std::pair{"/shells", Model::dirac}, std::pair{"/nr_shells", Model::schrodinger}}) {
    const ProblemSpec p = make_problem(c, model);
    if (p.shells.empty()) continue;
    try {
      if (open) {
        if (!(p.electron_count() < p.nuclear.charge + 1.0)) fail(ErrorCode::invalid_config, "N < Z+1 violated");
      } else {
        p.validate();
      }
    } catch (const Error& e) {
      bad(key, e.what());
    }
  }
  if (c.mode == RunMode::oracle_sommerfeld) {
    try {
      (void)oracle_sommerfeld_shifted(c.nucleus.charge, c.oracle_kappa, c.oracle_n, c.c);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::domain_error) bad("/n", e.what());
    }
  }
  return c;
}

RunConfig parse_config_text(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::invalid_config, std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

Json serialize_config(const RunConfig& c) {
  Json j;
  j["schema"] = kConfigSchema;
  j["mode"] = to_string(c.mode);
  j["Z"] = c.nucleus.charge;
  j["nucleus"] = {{"model", name_of(c.nucleus.shape, kShapes)}, {"radius", c.nucleus.radius}};
  auto shells = [](const std::vector<ShellSpec>& list, const char* channel) {
    Json a = Json::array();
    for (const auto& s : list) a.push_back({{"n", s.n}, {channel, s.channel}, {"w", s.occupation}});
    return a;
  };
  j["shells"] = shells(c.shells, "kappa");
  j["nr_shells"] = shells(c.nr_shells, "l");
  j["c"] = c.c;
  j["grid"] = {{"r_min", c.grid.r_min}, {"r_max", c.grid.r_max}, {"M", c.grid.size}};
  j["scf"] = {{"mixing", c.scf.mixing},
              {"energy_tolerance", c.scf.energy_tolerance},
              {"residual_tolerance", c.scf.residual_tolerance},
              {"max_iter", c.scf.max_iter},
              {"level_shift", c.scf.level_shift},
              {"method", name_of(c.scf.method, kMethods)},
              {"lambda_check", name_of(c.scf.lambda_check, kLambda)}};
  j["projector"] = {
      {"source", name_of(c.projector, kSources)}, {"path", c.projector_path}, {"export", c.export_projectors}};
  j["c_factors"] = c.c_factors;
  j["minmax"] = {{"gradient_tolerance", c.minmax.gradient_tolerance},
                 {"inner_tolerance", c.minmax.inner_tolerance},
                 {"max_outer", c.minmax.max_outer},
                 {"max_inner", c.minmax.max_inner},
                 {"max_grid", c.minmax.max_grid}};
  j["fock"] = {{"energy_tolerance", c.fock.energy_tolerance},
               {"idempotency_tolerance", c.fock.idempotency_tolerance},
               {"max_iter", c.fock.max_iter}};
  j["iteration"] = {{"distance_tolerance", c.iteration.distance_tolerance},
                    {"max_iter", c.iteration.max_iter},
                    {"oscillation_window", c.iteration.oscillation_window},
                    {"open_shell_experiment", c.iteration.open_shell_experiment}};
  j["kappa"] = c.oracle_kappa;
  j["n"] = c.oracle_n;
  j["output"] = {{"format", c.output_format}, {"path", c.output_path}};
  return j;
}

// ---------------------------------------------------------------- JSON text

namespace {

void write_json(std::string& out, const Json& v, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + Json(it.key()).dump() + ": ";
        write_json(out, it.value(), indent, depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      bool flat = true;
      for (const auto& e : v) flat = flat && (e.is_primitive());
      if (flat) {
        // numeric series stay on one line
        out += "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (i) out += ", ";
          write_json(out, v[i], indent, depth + 1);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        write_json(out, v[i], indent, depth + 1);
      }
      out += "\n" + close + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double x = v.get<double>();
      if (!std::isfinite(x)) {
        out += "null";
        return;
      }
      // shortest text that reads back to the same double
      char buf[40];
      const auto end = std::to_chars(buf, buf + sizeof buf, x).ptr;
      out.append(buf, end);
      return;
    }
    default:
      out += v.dump();
  }
}

}  // namespace

std::string dump_json(const Json& value, int indent) {
  std::string out;
  write_json(out, value, indent, 0);
  out += "\n";
  return out;
}

// ---------------------------------------------------------------- projectors

Json projectors_to_json(const ProjectorMap& projectors, const GridSpec& grid, double c) {
  Json j;
  j["format"] = kProjectorFormat;
  j["c"] = c;
  j["grid"] = {{"r_min", grid.r_min}, {"r_max", grid.r_max}, {"M", grid.size}};
  Json list = Json::array();
  for (const auto& [ch, p] : projectors) {
    Json cols = Json::array();
    for (Eigen::Index k = 0; k < p.rank(); ++k) {
      const Vector col = p.basis->col(k);
      cols.push_back(std::vector<double>(col.data(), col.data() + col.size()));
    }
    list.push_back({{"kappa", ch}, {"dimension", p.dimension()}, {"rank", p.rank()}, {"basis", cols}});
  }
  j["projectors"] = list;
  return j;
}

ProjectorMap projectors_from_json(const Json& doc) {
  // a report that exported its projectors is accepted as well
  if (doc.is_object() && doc.value("format", "") == kReportFormat) {
    if (!doc.contains("results") || !doc["results"].contains("projectors")) {
      bad("/results/projectors", "report carries no projectors");
    }
    return projectors_from_json(doc["results"]["projectors"]);
  }
  if (!doc.is_object() || doc.value("format", "") != kProjectorFormat) {
    bad("/format", "expected \"" + std::string(kProjectorFormat) + "\"");
  }
  ProjectorMap out;
  const Json& list = doc.at("projectors");
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string path = "/projectors/" + std::to_string(i);
    const Json& e = list[i];
    const int kappa = e.at("kappa").get<int>();
    const auto dim = e.at("dimension").get<Eigen::Index>();
    const Json& cols = e.at("basis");
    auto u = std::make_shared<Matrix>(dim, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (!cols[k].is_array() || static_cast<Eigen::Index>(cols[k].size()) != dim) {
        bad(path + "/basis/" + std::to_string(k), "column length differs from dimension");
      }
      for (Eigen::Index r = 0; r < dim; ++r) (*u)(r, static_cast<Eigen::Index>(k)) = cols[k][r].get<double>();
    }
    const Eigen::Index rank = u->cols();
    const double err = (u->transpose() * (*u) - Matrix::Identity(rank, rank)).cwiseAbs().maxCoeff();
    if (err > 1e-10) fail(ErrorCode::constraint_violation, path + ": basis is not orthonormal (" + std::to_string(err) + ")");
    out.insert_or_assign(kappa, Projector{kappa, ProjectorSource::file, u});
  }
  return out;
}

// ---------------------------------------------------------------- run

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::not_converged: return 2;
    case ErrorCode::invalid_config:
    case ErrorCode::invalid_argument: return 3;
    default: return 4;
  }
}

namespace {

Json vec(const std::vector<double>& v) { return Json(v); }

Json energy_json(const EnergyBreakdown& e) {
  return {{"total", e.total},
          {"shifted", e.shifted},
          {"one_body", e.one_body},
          {"direct", e.direct},
          {"exchange", e.exchange},
          {"eigenvalue_sum", e.eigenvalue_sum},
          {"eigenvalue_sum_shifted", e.eigenvalue_sum_shifted}};
}

Json hypotheses_json(const HypothesisReport& h) {
  Json flags = Json::array();
  for (const auto& f : h.flags) {
    flags.push_back({{"name", f.name}, {"inequality", f.inequality}, {"lhs", f.lhs}, {"rhs", f.rhs}, {"holds", f.holds}});
  }
  return {{"constant", h.constant},
          {"threshold", h.threshold},
          {"literal_threshold", h.literal_threshold},
          {"reference_z", h.reference_z},
          {"reference_n", h.reference_n},
          {"flags", flags}};
}

Json scf_json(const SCFReport& r) {
  const ElectronicConfiguration& psi = r.configuration;
  const double c2 = psi.relativistic() ? psi.speed_of_light * psi.speed_of_light : 0.0;
  Json shells = Json::array();
  for (std::size_t a = 0; a < psi.shells.size(); ++a) {
    const Shell& s = psi.shells[a];
    Json j = {{"n", s.n},
              {psi.relativistic() ? "kappa" : "l", s.channel},
              {"w", s.occupation},
              {"energy", s.energy},
              {"energy_shifted", s.energy - c2},
              {"residual", r.orbital_residuals.at(a)},
              {"residual_floor", r.residual_floors.at(a)}};
    if (!r.lambda_minus_residuals.empty()) j["lambda_minus"] = r.lambda_minus_residuals[a];
    shells.push_back(j);
  }
  return {{"converged", r.converged},
          {"iterations", r.iterations},
          {"energy", energy_json(r.energy)},
          {"double_counting_defect", r.energy.double_counting_defect()},
          {"gram_error", psi.gram_error()},
          {"shells", shells},
          {"history", {{"energy", vec(r.energy_history)}, {"residual", vec(r.residual_history)}}}};
}

std::string history_csv(const SCFReport& r) {
  std::string out = "iteration,energy_shifted,max_residual\n";
  char buf[40];
  auto put = [&](double x) { out.append(buf, std::to_chars(buf, buf + sizeof buf, x).ptr); };
  for (std::size_t i = 0; i < r.energy_history.size(); ++i) {
    out += std::to_string(i + 1) + ",";
    put(r.energy_history[i]);
    out += ",";
    put(r.residual_history[i]);
    out += "\n";
  }
  return out;
}

Json limit_json(const LimitTable& t) {
  Json rows = Json::array();
  for (const auto& r : t.rows) {
    rows.push_back({{"c", r.c},
                    {"energy_shifted", r.energy_shifted},
                    {"eigenvalues_shifted", vec(r.eigenvalues_shifted)},
                    {"kb_residual", vec(r.kb_residual)},
                    {"small_norm", vec(r.small_norm)},
                    {"large_distance", vec(r.large_distance)},
                    {"iterations", r.iterations}});
  }
  return {{"rows", rows},
          {"e_hf", t.e_hf},
          {"hf_multipliers", vec(t.hf_multipliers)},
          {"shell_n", t.shell_n},
          {"shell_kappa", t.shell_kappa},
          {"energy_slope", t.energy_slope},
          {"multiplier_slopes", vec(t.multiplier_slopes)},
          {"kb_slopes", vec(t.kb_slopes)},
          {"small_norm_slopes", vec(t.small_norm_slopes)},
          {"energy_monotone", t.energy_monotone},
          {"large_monotone", t.large_monotone}};
}

Json density_json(const DensityMatrix& g) {
  Json channels = Json::array();
  for (const auto& cd : g.density.channels) {
    std::vector<double> occ;
    Json orbitals = Json::array();
    for (Eigen::Index j = 0; j < cd.weights.size(); ++j) {
      occ.push_back(occupation_number(g.density, cd.channel, cd.weights[j]));
      const Vector v = cd.vectors.col(j);
      orbitals.push_back(std::vector<double>(v.data(), v.data() + v.size()));
    }
    channels.push_back({{"kappa", cd.channel},
                        {"weights", std::vector<double>(cd.weights.data(), cd.weights.data() + cd.weights.size())},
                        {"occupations", occ},
                        {"orbitals", orbitals}});
  }
  return {{"trace", g.trace()}, {"channels", channels}};
}

Json fixed_json(const FixedProjectorResult& r) {
  const NoPairCertificate& c = r.certificate;
  return {{"energy", r.energy},
          {"converged", r.converged},
          {"iterations", r.iterations},
          {"monotone", r.monotone},
          {"energy_history", vec(r.energy_history)},
          {"damping", vec(r.damping)},
          {"certificate",
           {{"no_pair", c.no_pair},
            {"idempotency", c.idempotency},
            {"rank", c.rank},
            {"trace", c.trace},
            {"negative_block", c.negative_block},
            {"binding_gain", c.binding_gain},
            {"reason", c.reason}}},
          {"density", density_json(r.gamma)}};
}

ProjectorMap load_projector_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::invalid_config, "/projector/path: cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  Json doc;
  try {
    doc = Json::parse(ss.str());
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::invalid_config, "/projector/path: not JSON: " + std::string(e.what()));
  }
  return projectors_from_json(doc);
}

struct ModeResult {
  Json results;
  bool ok = true;
  std::map<std::string, std::string> csv;
};

ModeResult dispatch(const RunConfig& cfg) {
  ModeResult out;
  switch (cfg.mode) {
    case RunMode::oracle_sommerfeld: {
      const double shifted = oracle_sommerfeld_shifted(cfg.nucleus.charge, cfg.oracle_kappa, cfg.oracle_n, cfg.c);
      out.results = {{"Z", cfg.nucleus.charge},
                     {"kappa", cfg.oracle_kappa},
                     {"n", cfg.oracle_n},
                     {"c", cfg.c},
                     {"energy", cfg.c * cfg.c + shifted},
                     {"energy_shifted", shifted}};
      return out;
    }
    case RunMode::conditions:
      out.results = Json::object();
      return out;
    case RunMode::solve:
    case RunMode::hf: {
      const SCFReport r = scf_solve(cfg.problem(), cfg.scf);
      out.results = scf_json(r);
      out.ok = r.converged;
      out.csv["history"] = history_csv(r);
      return out;
    }
    case RunMode::limit_study: {
      const LimitTable t = limit_study(cfg.problem(), cfg.c_factors, cfg.scf);
      out.results = limit_json(t);
      out.csv["limit"] = t.csv();
      return out;
    }
    case RunMode::projected: {
      ProjectorMap file;
      if (cfg.projector == ProjectorSource::file) file = load_projector_file(cfg.projector_path);
      const ProjectedReport r = projected_scf(cfg.problem(), cfg.projector, cfg.scf, &file);
      out.results = scf_json(r.scf);
      out.results["source"] = name_of(r.source, kSources);
      out.results["range_residuals"] = vec(r.range_residuals);
      if (cfg.export_projectors) out.results["projectors"] = projectors_to_json(r.projectors, cfg.grid, cfg.c);
      out.ok = r.scf.converged;
      out.csv["history"] = history_csv(r.scf);
      return out;
    }
    case RunMode::maxmin: {
      ProjectorMap file;
      if (cfg.projector == ProjectorSource::file) file = load_projector_file(cfg.projector_path);
      const MinMaxReport r = maxmin_energy(cfg.problem(), cfg.projector, cfg.minmax, &file);
      out.results = {{"e_outer", r.e_outer},
                     {"e_scf", r.e_scf},
                     {"gap_to_scf", r.gap_to_scf},
                     {"projector_source", name_of(r.projector_source, kSources)},
                     {"gradient_norm", r.gradient_norm},
                     {"converged", r.converged},
                     {"inner_iterations", r.inner_iterations},
                     {"inner_monotone", r.inner_monotone},
                     {"outer_iterates", vec(r.outer_iterates)},
                     {"inner_sup_values", vec(r.inner_sup_values)}};
      out.ok = r.converged;
      return out;
    }
    case RunMode::fock_min: {
      const ProblemSpec spec = cfg.problem();
      ProjectorMap projectors;
      if (cfg.projector == ProjectorSource::file) {
        projectors = load_projector_file(cfg.projector_path);
      } else if (cfg.projector == ProjectorSource::mean_field) {
        const SCFReport scf = scf_solve(spec, cfg.scf);
        if (!scf.converged) fail(ErrorCode::not_converged, "fock-min: the SCF run behind the mean-field projector did not converge");
        projectors = mean_field_projectors(scf.configuration);
      } else {
        projectors = positive_projectors(spec, ProjectorSource::free);
      }
      const FixedProjectorResult r = minimize_fc_fixed_projector(spec, projectors, cfg.fock);
      out.results = fixed_json(r);
      out.results["source"] = name_of(cfg.projector, kSources);
      if (cfg.export_projectors) out.results["projectors"] = projectors_to_json(projectors, cfg.grid, cfg.c);
      out.ok = r.converged && r.certificate.no_pair;
      return out;
    }
    case RunMode::projector_iteration: {
      ProjectorIterationControls controls = cfg.iteration;
      controls.inner = cfg.fock;
      const ProjectorIterationResult r = maxmin_projector_iteration(cfg.problem(), controls);
      out.results = {{"converged", r.converged},
                     {"oscillating", r.oscillating},
                     {"certified", r.certified},
                     {"certificate_distance", r.certificate_distance},
                     {"updates", r.updates},
                     {"distances", vec(r.distances)},
                     {"energies", vec(r.energies)},
                     {"last", fixed_json(r.last)}};
      if (cfg.export_projectors) out.results["projectors"] = projectors_to_json(r.projectors, cfg.grid, cfg.c);
      out.ok = r.certified;
      return out;
    }
  }
  return out;
}

}  // namespace

RunOutcome run(const RunConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  RunOutcome outcome;
  Json& rep = outcome.report;
  rep["format"] = kReportFormat;
  rep["mode"] = to_string(config.mode);
  rep["config"] = serialize_config(config);
  double electrons = 0.0;
  if (config.mode != RunMode::oracle_sommerfeld) {
    const ProblemSpec p = config.problem();
    electrons = p.electron_count();
  }
  try {
    if (config.mode != RunMode::oracle_sommerfeld) {
      rep["hypotheses"] = hypotheses_json(validate_conditions(config.nucleus.charge, electrons, config.c));
    }
    ModeResult r = dispatch(config);
    rep["status"] = r.ok ? "ok" : "not_converged";
    rep["results"] = std::move(r.results);
    outcome.csv = std::move(r.csv);
    outcome.exit_code = r.ok ? 0 : 2;
  } catch (const Error& e) {
    rep["status"] = "error";
    rep["error"] = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
    outcome.exit_code = exit_code_for(e.code());
  }
  rep["wall_clock_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return outcome;
}

void write_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::invalid_argument, "cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) fail(ErrorCode::invalid_argument, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(ErrorCode::invalid_argument, "cannot rename onto " + path);
  }
}

}  // namespace dfatoms
