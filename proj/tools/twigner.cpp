#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>

#include "twigner/commands.hpp"

using namespace twigner;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "csv";
  int max_factors = 6;
  int cases = 500;
  std::string pair;
};

RunConfig load(const Options& o) {
  if (o.config.empty()) throw ConfigError("--config", "required for this command");
  RunConfig c = load_run_config(o.config);
  if (o.seed) c.ensemble.master_seed = *o.seed;
  return c;
}

int emit(const Report& r, const Options& o) {
  const OutputFormat f = o.format == "records" ? OutputFormat::Records : OutputFormat::Csv;
  if (o.out.empty()) {
    write_report(r, std::cout, f);
  } else {
    std::ofstream file(o.out);
    if (!file) throw ConfigError("--out", "cannot write " + o.out);
    write_report(r, file, f);
  }
  return r.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-symmetric operator algebra and truncated-Wigner simulation of a Bose-Hubbard ring"};
  app.require_subcommand(1);
  Options o;

  auto output_flags = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "Output file (default: stdout)");
    sub->add_option("--format", o.format, "csv or records (JSON lines)")->check(CLI::IsMember({"csv", "records"}));
  };
  auto config_flags = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON run configuration")->required();
    sub->add_option("--seed", o.seed, "Override ensemble.master_seed");
  };

  auto* wick = app.add_subcommand("verify-wick", "Random Wick-expansion checks");
  wick->add_option("--max-factors", o.max_factors, "Largest product size (<= 6)");
  wick->add_option("--cases", o.cases, "Number of random products");
  std::uint64_t wick_seed = 1;
  wick->add_option("--seed", wick_seed, "Random seed");
  output_flags(wick);

  auto* contr = app.add_subcommand("verify-contractions", "Kernel identities and regularization");
  output_flags(contr);

  auto* sim = app.add_subcommand("simulate", "Truncated-Wigner estimates of the configured requests");
  config_flags(sim);
  output_flags(sim);

  auto* reorder = app.add_subcommand("reorder", "Time-normal two-point value from symmetric estimate and response");
  config_flags(reorder);
  reorder->add_option("--pair", o.pair, "k,t,k',t' (default: the config's reorder entry)");
  output_flags(reorder);

  auto* orc = app.add_subcommand("oracle", "Exact values of the configured requests");
  config_flags(orc);
  output_flags(orc);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*wick) return emit(cmd_verify_wick(o.max_factors, o.cases, wick_seed), o);
    if (*contr) return emit(cmd_verify_contractions(), o);
    if (*sim) return emit(cmd_simulate(load(o)), o);
    if (*orc) return emit(cmd_oracle(load(o)), o);
    if (*reorder) {
      const RunConfig c = load(o);
      PairSpec p;
      if (!o.pair.empty()) {
        p = parse_pair(o.pair);
        if (c.reorder) p.epsilon = c.reorder->epsilon;
      } else if (c.reorder) {
        p = *c.reorder;
      } else {
        throw ConfigError("--pair", "no pair given and the config has no reorder entry");
      }
      return emit(cmd_reorder(c, p), o);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
