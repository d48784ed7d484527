#pragma once

// Subcommands of the twigner tool. Each returns a table of rows plus the echo
// (command, seed, effective config) needed to reproduce it.

#include <cstdint>
#include <json.hpp>
#include <ostream>
#include <string>
#include <vector>

#include "twigner/run_config.hpp"

namespace twigner {

struct Report {
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::json>> rows;
  bool ok = true;  // false if any check failed
  nlohmann::json echo;

  /// Value of `column` in row i; throws std::out_of_range.
  const nlohmann::json& cell(std::size_t i, const std::string& column) const;
};

enum class OutputFormat { Csv, Records };

/// Csv: '#' echo lines, a header, one line per row.
/// Records: one JSON object per line, the echo first.
void write_report(const Report& r, std::ostream& out, OutputFormat format);

/// Random single-mode double-time-ordered products of 1..max_factors factors,
/// times in [0, 5], w0 in {0, 1, 2.7}: Wick expansion against the literal
/// product, both in normal form. Throws ConfigError unless 1 <= max_factors <= 6.
Report cmd_verify_wick(int max_factors, int n_cases, std::uint64_t seed);

/// Kernel identities on a 1001-point grid and the causal regularization.
Report cmd_verify_contractions();

/// One row per request: mean, standard error and, with the oracle enabled,
/// the exact value and the distance in standard errors.
Report cmd_simulate(const RunConfig& config);

/// Time-normal two-point value assembled from symmetric estimate and response.
/// Throws EqualTime.
Report cmd_reorder(const RunConfig& config, const PairSpec& pair);

/// Exact values of every request at the configured cutoff, with the change
/// seen at cutoff + 2 when that still fits.
Report cmd_oracle(const RunConfig& config);

}  // namespace twigner
