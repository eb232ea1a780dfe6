// df-atoms: command-line front end.  Exit codes: 0 converged, 2 not
// converged, 3 invalid config, 4 solver domain error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dfatoms/error.hpp"
#include "dfatoms/io.hpp"

namespace {

std::vector<double> parse_factors(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) {
      dfatoms::fail(dfatoms::ErrorCode::invalid_config, "--c-factors: '" + item + "' is not a number");
    }
    out.push_back(v);
  }
  if (out.empty()) dfatoms::fail(dfatoms::ErrorCode::invalid_config, "--c-factors: empty list");
  return out;
}

std::string sidecar_path(const std::string& out, const std::string& name) {
  std::filesystem::path p(out);
  p.replace_extension();
  return p.string() + "." + name + ".csv";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-shell Dirac-Fock atoms on a radial grid"};
  std::string mode, config_path, out_path, format, factors;
  app.add_option("mode", mode,
                 "solve | hf | limit-study | projected | maxmin | fock-min | projector-iteration | "
                 "oracle-sommerfeld | conditions")
      ->required();
  app.add_option("--config", config_path, "run configuration (JSON, dfatoms-config/1)")->required();
  app.add_option("--out", out_path, "report path; stdout when absent");
  app.add_option("--format", format, "json or csv (csv adds table sidecars, needs --out)")
      ->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--c-factors", factors, "comma-separated c multipliers for limit-study");
  CLI11_PARSE(app, argc, argv);

  using namespace dfatoms;
  RunConfig config;
  try {
    std::ifstream in(config_path);
    if (!in) fail(ErrorCode::invalid_config, "cannot read " + config_path);
    std::stringstream text;
    text << in.rdbuf();
    Json doc;
    try {
      doc = Json::parse(text.str());
    } catch (const Json::parse_error& e) {
      fail(ErrorCode::invalid_config, std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) fail(ErrorCode::invalid_config, "/: must be an object");
    // the command line wins over the document
    doc["mode"] = mode;
    if (!factors.empty()) doc["c_factors"] = parse_factors(factors);
    if (!format.empty() || !out_path.empty()) {
      Json& o = doc["output"];
      if (!o.is_object()) o = Json::object();
      if (!format.empty()) o["format"] = format;
      if (!out_path.empty()) o["path"] = out_path;
    }
    config = parse_config(doc);
    if (config.output_format == "csv" && config.output_path.empty()) {
      fail(ErrorCode::invalid_config, "--format csv needs --out");
    }
  } catch (const Error& e) {
    std::cerr << "df-atoms: " << e.what() << "\n";
    return exit_code_for(e.code());
  }

  const RunOutcome outcome = run(config);
  try {
    const std::string text = dump_json(outcome.report);
    if (config.output_path.empty()) {
      std::cout << text;
    } else {
      write_atomic(config.output_path, text);
      for (const auto& [name, csv] : outcome.csv) {
        // the limit table is always written; histories only on request
        if (name == "limit" || config.output_format == "csv") write_atomic(sidecar_path(config.output_path, name), csv);
      }
    }
  } catch (const Error& e) {
    std::cerr << "df-atoms: " << e.what() << "\n";
    return 4;
  }
  if (outcome.report.contains("error")) {
    std::cerr << "df-atoms: " << outcome.report["error"]["code"].get<std::string>() << ": "
              << outcome.report["error"]["message"].get<std::string>() << "\n";
  }
  return outcome.exit_code;
}
