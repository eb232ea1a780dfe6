#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include "doctest.h"
#include "dfatoms/error.hpp"
#include "dfatoms/io.hpp"
#include "dfatoms/projector.hpp"
#include "oracles/sommerfeld.hpp"

using namespace dfatoms;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::invalid_argument;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

Json he_doc() { return Json::parse(R"({"Z": 2, "shells": [{"n": 1, "kappa": -1, "w": 2}], "mode": "solve"})"); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / ("dfatoms_cli_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

int cli(const std::string& args) {
  const int status = std::system((std::string(DFATOMS_CLI) + " " + args + " 2>/dev/null").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("closed-form Dirac-Coulomb levels") {
  CHECK(std::abs(oracle_sommerfeld_shifted(1, -1, 1) + 0.5000066566) < 1e-9);
  CHECK(std::abs(oracle_sommerfeld_shifted(92, -1, 1) + 4861.198) < 1e-3);
  const double c2 = kSpeedOfLight * kSpeedOfLight;
  CHECK(oracle_sommerfeld(1e-8, -1, 1) == doctest::Approx(c2).epsilon(1e-15));
  CHECK(code_of([] { oracle_sommerfeld(137.1, -1, 1); }) == ErrorCode::domain_error);
  CHECK(code_of([] { oracle_sommerfeld(1, 1, 1); }) == ErrorCode::invalid_argument);
  CHECK(code_of([] { oracle_sommerfeld(1, -2, 1); }) == ErrorCode::invalid_argument);
  // the library and the test oracle are written separately
  for (auto [z, kappa, n] : {std::tuple{20.0, -1, 1}, {92.0, -1, 2}, {92.0, 1, 2}, {50.0, -2, 3}, {80.0, 2, 3}}) {
    CHECK(oracle_sommerfeld_shifted(z, kappa, n) ==
          doctest::Approx(oracle::dirac_coulomb_binding(z, kappa, n, kSpeedOfLight)).epsilon(1e-12));
  }
}

TEST_CASE("existence conditions") {
  const auto edge = validate_conditions(124, 41);
  CHECK(edge.all_hold());
  CHECK(edge.constant == doctest::Approx(2.0 / (M_PI / 2.0 + 2.0 / M_PI)).epsilon(1e-15));
  CHECK(validate_conditions(2, 2).all_hold());

  const auto heavy = validate_conditions(130, 2);
  CHECK_FALSE(heavy.all_hold());
  bool theorem1 = true, paturel = true;
  for (const auto& f : heavy.flags) {
    if (f.name == "theorem1") theorem1 = f.holds;
    if (f.name == "paturel_z") paturel = f.holds;
  }
  CHECK_FALSE(theorem1);
  CHECK_FALSE(paturel);
  CHECK(code_of([] { validate_conditions(2, 3); }) == ErrorCode::invalid_config);
}

TEST_CASE("config parsing") {
  const RunConfig cfg = parse_config(he_doc());
  CHECK(cfg.mode == RunMode::solve);
  CHECK(cfg.nucleus.charge == 2.0);
  CHECK(cfg.c == kSpeedOfLight);
  CHECK(cfg.grid == GridSpec{});
  CHECK(cfg.scf == ScfControls{});

  SUBCASE("occupation rule") {
    Json d = he_doc();
    d["shells"][0]["w"] = 3;
    CHECK(message_of([&] { parse_config(d); }).find("occupation must equal 2|kappa|") != std::string::npos);
  }
  SUBCASE("too many electrons") {
    Json d = he_doc();
    d["shells"].push_back({{"n", 2}, {"kappa", -1}, {"w", 1}});
    CHECK(code_of([&] { parse_config(d); }) == ErrorCode::invalid_config);
  }
  SUBCASE("unknown key names its path") {
    Json d = he_doc();
    d["grid"] = {{"M", 100}, {"rmax", 30}};
    const std::string what = message_of([&] { parse_config(d); });
    CHECK(what.find("/grid/rmax") != std::string::npos);
  }
  SUBCASE("wrong type") {
    Json d = he_doc();
    d["Z"] = "two";
    CHECK(message_of([&] { parse_config(d); }).find("/Z") != std::string::npos);
  }
  SUBCASE("unknown mode") {
    Json d = he_doc();
    d["mode"] = "dance";
    CHECK(code_of([&] { parse_config(d); }) == ErrorCode::invalid_config);
  }
  SUBCASE("foreign schema") {
    Json d = he_doc();
    d["schema"] = "other/2";
    CHECK(code_of([&] { parse_config(d); }) == ErrorCode::invalid_config);
  }
}

TEST_CASE("config round trip") {
  Json d = he_doc();
  d["mode"] = "projector-iteration";
  d["c"] = 1370.35999084;
  d["grid"] = {{"M", 321}, {"r_min", 3e-7}, {"r_max", 35.5}};
  d["scf"] = {{"mixing", 0.3}, {"lambda_check", "always"}, {"method", "dense"}};
  d["projector"] = {{"source", "mean_field"}, {"export", true}};
  d["iteration"] = {{"open_shell_experiment", true}, {"max_iter", 7}};
  d["c_factors"] = {1, 3, 9};
  const RunConfig a = parse_config(d);
  const Json text = Json::parse(dump_json(serialize_config(a)));
  const RunConfig b = parse_config(text);
  CHECK(a == b);
  CHECK(serialize_config(b) == serialize_config(a));
}

TEST_CASE("numbers survive the text form") {
  const double values[] = {0.1, 1.0 / 3.0, -4861.1979043697, 1e-300, 6.02214076e23, 137.035999084};
  for (double v : values) {
    const Json parsed = Json::parse(dump_json(Json{{"x", v}}));
    CHECK(parsed["x"].get<double>() == v);
  }
  CHECK(dump_json(Json{{"x", std::nan("")}}).find("null") != std::string::npos);
}

TEST_CASE("projector documents round trip") {
  const GridSpec grid{0.0, 40.0, 60};
  const auto g = std::make_shared<const RadialGrid>(grid.build(2.0));
  ProjectorMap map;
  map.emplace(-1, free_positive_projector(-1, kSpeedOfLight, g));
  map.emplace(1, free_positive_projector(1, kSpeedOfLight, g));
  const Json doc = Json::parse(dump_json(projectors_to_json(map, grid, kSpeedOfLight)));
  CHECK(doc["format"] == kProjectorFormat);
  const ProjectorMap back = projectors_from_json(doc);
  REQUIRE(back.size() == 2);
  for (const auto& [ch, p] : map) {
    CHECK((back.at(ch).matrix() - p.matrix()).cwiseAbs().maxCoeff() < 1e-14);
  }
  Json broken = doc;
  broken["format"] = "nope";
  CHECK(code_of([&] { projectors_from_json(broken); }) == ErrorCode::invalid_config);
}

TEST_CASE("run dispatch") {
  SUBCASE("solve") {
    Json d = he_doc();
    d["grid"] = {{"M", 300}};
    const RunOutcome out = run(parse_config(d));
    CHECK(out.exit_code == 0);
    const Json& r = out.report;
    CHECK(r["format"] == kReportFormat);
    CHECK(r["status"] == "ok");
    CHECK(r["results"]["converged"] == true);
    CHECK(r["results"]["energy"]["shifted"].get<double>() < -2.8);
    CHECK(r["results"]["shells"][0].contains("lambda_minus"));
    CHECK(r["results"]["shells"][0].contains("energy"));
    CHECK(r.contains("hypotheses"));
    CHECK(out.csv.count("history") == 1);
  }
  SUBCASE("limit study") {
    Json d = he_doc();
    d["mode"] = "limit-study";
    d["grid"] = {{"M", 300}};
    d["c_factors"] = {1, 2, 4};
    const RunOutcome out = run(parse_config(d));
    CHECK(out.exit_code == 0);
    CHECK(out.report["results"]["rows"].size() == 3);
    REQUIRE(out.csv.count("limit") == 1);
    std::size_t lines = 0;
    for (char ch : out.csv.at("limit")) lines += ch == '\n';
    CHECK(lines == 4);
  }
  SUBCASE("oracle") {
    const Json d = Json::parse(R"({"mode": "oracle-sommerfeld", "Z": 92, "kappa": -1, "n": 1})");
    const RunOutcome out = run(parse_config(d));
    CHECK(out.exit_code == 0);
    CHECK(std::abs(out.report["results"]["energy_shifted"].get<double>() + 4861.198) < 1e-3);
  }
  SUBCASE("solver domain error becomes a report") {
    const Json d = Json::parse(R"({"mode": "oracle-sommerfeld", "Z": 140, "kappa": -1, "n": 1})");
    const RunOutcome out = run(parse_config(d));
    CHECK(out.exit_code == 4);
    CHECK(out.report["status"] == "error");
    CHECK(out.report["error"]["code"] == "domain_error");
  }
  SUBCASE("not converged") {
    Json d = he_doc();
    d["grid"] = {{"M", 200}};
    d["scf"] = {{"max_iter", 2}};
    const RunOutcome out = run(parse_config(d));
    CHECK(out.exit_code == 2);
    CHECK(out.report["status"] == "not_converged");
  }
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ErrorCode::not_converged) == 2);
  CHECK(exit_code_for(ErrorCode::invalid_config) == 3);
  CHECK(exit_code_for(ErrorCode::invalid_argument) == 3);
  CHECK(exit_code_for(ErrorCode::domain_error) == 4);
}

TEST_CASE("atomic writes replace whole files") {
  const fs::path dir = scratch();
  const fs::path p = dir / "a.json";
  write_atomic(p.string(), "first");
  write_atomic(p.string(), "second");
  CHECK(slurp(p) == "second");
  std::size_t entries = 0;
  for (const auto& e : fs::directory_iterator(dir)) entries += e.is_regular_file();
  CHECK(entries == 1);
  fs::remove_all(dir);
}

TEST_CASE("command line") {
  const fs::path dir = scratch();
  const fs::path cfg = dir / "he.json";
  {
    std::ofstream o(cfg);
    o << R"({"Z": 2, "shells": [{"n": 1, "kappa": -1, "w": 2}], "grid": {"M": 200}})";
  }
  const fs::path out = dir / "he_report.json";
  CHECK(cli("solve --config " + cfg.string() + " --out " + out.string() + " --format csv") == 0);
  const Json report = Json::parse(slurp(out));
  CHECK(report["mode"] == "solve");
  CHECK(fs::exists(dir / "he_report.history.csv"));

  const fs::path limit = dir / "limit.json";
  CHECK(cli("limit-study --config " + cfg.string() + " --out " + limit.string() + " --c-factors 1,2") == 0);
  CHECK(fs::exists(dir / "limit.limit.csv"));
  CHECK(Json::parse(slurp(limit))["results"]["rows"].size() == 2);

  CHECK(cli("solve --config " + cfg.string() + " --format csv") == 3);
  CHECK(cli("solve --config " + (dir / "missing.json").string()) == 3);
  CHECK(cli("limit-study --config " + cfg.string() + " --c-factors 1,x") == 3);
  {
    std::ofstream o(dir / "bad.json");
    o << R"({"Z": 2, "shells": [{"n": 1, "kappa": -1, "w": 2}], "gird": {}})";
  }
  CHECK(cli("solve --config " + (dir / "bad.json").string()) == 3);
  fs::remove_all(dir);
}
