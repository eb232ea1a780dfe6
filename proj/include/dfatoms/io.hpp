#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "dfatoms/error.hpp"
#include "dfatoms/fock_space.hpp"
#include "dfatoms/nonrel_limit.hpp"
#include "dfatoms/scf.hpp"
#include "dfatoms/variational.hpp"

namespace dfatoms {

using Json = nlohmann::ordered_json;

inline constexpr const char* kConfigSchema = "dfatoms-config/1";
inline constexpr const char* kReportFormat = "dfatoms-report/1";
inline constexpr const char* kProjectorFormat = "dfatoms-projectors/1";

/// E of the Dirac-Coulomb level (n, kappa) for a point nucleus, closed form.
/// Throws domain_error when Z/c >= |kappa|, invalid_argument for impossible n.
double oracle_sommerfeld(double z, int kappa, int n, double c = kSpeedOfLight);
/// The same level as E - c^2, without the cancellation.
double oracle_sommerfeld_shifted(double z, int kappa, int n, double c = kSpeedOfLight);

struct HypothesisFlag {
  std::string name;
  std::string inequality;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// Advisory evaluation of the existence conditions.  Only N < Z+1 is binding.
struct HypothesisReport {
  double constant = 0.0;           // 2 / (pi/2 + 2/pi)
  double threshold = 0.0;          // constant * c (atomic units, used for the flags)
  double literal_threshold = 0.0;  // constant * c^2, the expression as printed
  double reference_z = 124.0;      // values quoted for the physical c
  double reference_n = 41.0;
  std::vector<HypothesisFlag> flags;

  bool all_hold() const;
};

/// Throws invalid_config when N >= Z+1.
HypothesisReport validate_conditions(double z, double n, double c = kSpeedOfLight);

enum class RunMode {
  solve,
  hf,
  limit_study,
  projected,
  maxmin,
  fock_min,
  projector_iteration,
  oracle_sommerfeld,
  conditions,
};

std::string to_string(RunMode mode);
RunMode parse_mode(const std::string& name);

struct RunConfig {
  RunMode mode = RunMode::solve;
  NuclearModel nucleus;
  std::vector<ShellSpec> shells;     // kappa
  std::vector<ShellSpec> nr_shells;  // l
  double c = kSpeedOfLight;
  GridSpec grid;
  ScfControls scf;
  ProjectorSource projector = ProjectorSource::free;
  std::string projector_path;  // source = file
  bool export_projectors = false;
  std::vector<double> c_factors{1.0, 2.0, 4.0, 8.0};
  MinMaxControls minmax;
  FockControls fock;
  ProjectorIterationControls iteration;
  int oracle_kappa = -1;
  int oracle_n = 1;
  std::string output_format = "json";
  std::string output_path;

  bool operator==(const RunConfig&) const = default;

  /// Relativistic problem, or the nonrelativistic one for mode hf.
  ProblemSpec problem() const;
};

/// Strict parse: unknown keys, wrong types and N >= Z+1 are rejected with the
/// JSON path of the offending value.
RunConfig parse_config(const Json& document);
RunConfig parse_config_text(const std::string& text);
/// Every field, defaults included; parse_config(serialize_config(x)) == x.
Json serialize_config(const RunConfig& config);

/// JSON text with every double printed to 17 significant digits.
std::string dump_json(const Json& value, int indent = 2);

Json projectors_to_json(const ProjectorMap& projectors, const GridSpec& grid, double c);
ProjectorMap projectors_from_json(const Json& document);

struct RunOutcome {
  Json report;
  std::map<std::string, std::string> csv;  // sidecar name -> contents
  int exit_code = 0;                        // 0 ok, 2 not converged, 3 bad config, 4 solver domain error
};

/// Dispatches on config.mode; solver errors become an "error" block with a
/// machine-readable code rather than an exception.
RunOutcome run(const RunConfig& config);

/// Exit code for a library error.
int exit_code_for(ErrorCode code);

/// Writes through a temporary file in the same directory and renames it.
void write_atomic(const std::string& path, const std::string& contents);

}  // namespace dfatoms
