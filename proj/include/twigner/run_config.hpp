#pragma once

// JSON run configuration for the command-line tool.

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "twigner/errors.hpp"
#include "twigner/model.hpp"
#include "twigner/wigner_engine.hpp"

namespace twigner {

struct OracleSettings {
  bool enabled = false;
  int cutoff = 8;
};

/// Two-point pair <A_k^+(t) A_k'(t')> for the reorder command.
struct PairSpec {
  int k = 0;
  double t = 0.0;
  int k_prime = 0;
  double t_prime = 0.0;
  double epsilon = 0.0;  // <= 0: engine default
};

struct RunConfig {
  BHParams model;
  InitialStateSpec initial;
  EnsembleConfig ensemble;
  TimeGrid grid;
  std::vector<CorrelatorRequest> requests;
  SourceProfile kicks;
  OracleSettings oracle;
  std::optional<PairSpec> reorder;

  SimulationConfig simulation() const;
};

/// Validates and converts; throws ConfigError naming the offending field.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

/// Canonical form; parse_run_config(to_json(c)) reproduces c exactly.
nlohmann::json to_json(const RunConfig& c);

/// "k,t,k',t'" as used by --pair. Throws ConfigError.
PairSpec parse_pair(const std::string& text);

/// Checks a pair against the sites and grid of c.
void validate_pair(const RunConfig& c, const PairSpec& p, const std::string& path);

}  // namespace twigner
