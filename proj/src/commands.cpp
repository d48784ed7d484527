#include "twigner/commands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "twigner/contractions.hpp"
#include "twigner/fock_oracle.hpp"
#include "twigner/operator_algebra.hpp"

namespace twigner {

using nlohmann::json;

namespace {

// Non-finite doubles have no JSON form; they travel as strings.
json num(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

double sigma(double estimate, double se, double exact) {
  const double d = std::abs(estimate - exact);
  if (se > 0.0) return d / se;
  // an exactly real estimate against an exact value carrying roundoff
  return d < 1e-12 * std::max(1.0, std::abs(exact)) ? 0.0 : std::numeric_limits<double>::infinity();
}

std::string csv_cell(const json& v) {
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  }
  if (v.is_null()) return "";
  return v.dump();
}

FactorList ladder_factors(const CorrelatorRequest& req) {
  FactorList f;
  for (const auto& p : req.factors) f.push_back(p.dagger ? cre(p.site, p.time) : ann(p.site, p.time));
  return f;
}

std::string factors_text(const CorrelatorRequest& req) {
  std::string s;
  for (const auto& f : ladder_factors(req)) {
    if (!s.empty()) s += ' ';
    s += to_text(f);
  }
  return s;
}

const char* ordering_name(RequestOrdering o) {
  return o == RequestOrdering::TimeSymmetric ? "time_symmetric" : "time_normal";
}

cplx exact_value(const FockOracle& o, const CorrelatorRequest& req) {
  const FactorList f = ladder_factors(req);
  if (req.ordering == RequestOrdering::TimeNormalTwoPoint) return o.multitime_average(f, Arrangement::TimeNormal);
  return o.multitime_average(f, Arrangement::TimeSymmetric, CoincidentTimes::ContinuityLimit);
}

json echo_for(const std::string& command, const RunConfig& c) {
  return {{"command", command}, {"seed", c.ensemble.master_seed}, {"config", to_json(c)}};
}

// Same-branch and mixed-branch kernels against the retarded decomposition.
double decomposition_deviation(double t, double w0) {
  const cplx i_unit(0.0, 1.0);
  const ContractionKernel r{KernelKind::Retarded, w0, std::nullopt};
  const cplx gr = retarded_green(t, r);
  const cplx gr_rev = std::conj(retarded_green(-t, r));
  const cplx same = 0.5 * (gr + gr_rev);
  const cplx mixed = t == 0.0 ? cplx(0.0, 0.5) : 0.5 * (gr - gr_rev);
  auto g = [&](KernelKind k) { return i_unit * symmetric_contraction(t, ContractionKernel{k, w0, std::nullopt}); };
  return std::max({std::abs(g(KernelKind::PP) - same), std::abs(g(KernelKind::MM) + same),
                   std::abs(g(KernelKind::MP) - mixed), std::abs(g(KernelKind::PM) + mixed)});
}

double conjugation_deviation(double t, double w0) {
  auto g = [&](KernelKind k, double x) { return symmetric_contraction(x, ContractionKernel{k, w0, std::nullopt}); };
  return std::max({std::abs(g(KernelKind::MM, t) - std::conj(g(KernelKind::PP, -t))),
                   std::abs(g(KernelKind::PP, t) - std::conj(g(KernelKind::MM, -t))),
                   std::abs(g(KernelKind::MP, t) - std::conj(g(KernelKind::MP, -t))),
                   std::abs(g(KernelKind::PM, t) - std::conj(g(KernelKind::PM, -t)))});
}

}  // namespace

const json& Report::cell(std::size_t i, const std::string& column) const {
  const auto it = std::find(columns.begin(), columns.end(), column);
  if (it == columns.end()) throw std::out_of_range("no column " + column);
  return rows.at(i).at(static_cast<std::size_t>(it - columns.begin()));
}

void write_report(const Report& r, std::ostream& out, OutputFormat format) {
  if (format == OutputFormat::Csv) {
    for (const auto& [key, value] : r.echo.items()) out << "# " << key << ": " << value.dump() << '\n';
    for (std::size_t c = 0; c < r.columns.size(); ++c) out << (c ? "," : "") << r.columns[c];
    out << '\n';
    for (const auto& row : r.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv_cell(row[c]);
      out << '\n';
    }
    return;
  }
  out << json{{"echo", r.echo}}.dump() << '\n';
  for (const auto& row : r.rows) {
    json rec = json::object();
    for (std::size_t c = 0; c < row.size(); ++c) rec[r.columns[c]] = row[c];
    out << rec.dump() << '\n';
  }
}

Report cmd_verify_wick(int max_factors, int n_cases, std::uint64_t seed) {
  if (max_factors < 1 || max_factors > 6) throw ConfigError("--max-factors", "must be in 1..6");
  if (n_cases < 0) throw ConfigError("--cases", "must be >= 0");
  constexpr double tol = 1e-12;
  Report r;
  r.columns = {"case", "n_factors", "omega0", "minus", "plus", "max_deviation", "pass"};
  r.echo = {{"command", "verify-wick"}, {"seed", seed}, {"max_factors", max_factors}, {"cases", n_cases}};

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> un(1, max_factors), coin(0, 1), pick_w(0, 2);
  std::uniform_real_distribution<double> ut(0.0, 5.0);
  const double omegas[] = {0.0, 1.0, 2.7};
  for (int c = 0; c < n_cases; ++c) {
    const int n = un(rng);
    const double w0 = omegas[pick_w(rng)];
    std::vector<double> times;
    while (static_cast<int>(times.size()) < n) {
      const double t = ut(rng);
      if (std::find(times.begin(), times.end(), t) == times.end()) times.push_back(t);
    }
    const int split = std::uniform_int_distribution<int>(0, n)(rng);
    FactorList minus, plus;
    for (int i = 0; i < n; ++i) {
      LadderFactor f = coin(rng) ? cre(0, times[static_cast<std::size_t>(i)]) : ann(0, times[static_cast<std::size_t>(i)]);
      if (i < split) minus.push_back(with_branch(f, Branch::Reverse));
      else plus.push_back(with_branch(f, Branch::Forward));
    }
    const FreeFieldConvention conv{w0, {}};
    const OperatorSum lhs = normal_form(wick_expand(minus, plus, free_field_contractions(w0)), conv);
    const OperatorSum rhs = normal_form(double_time_ordered(minus, plus), conv);
    const double dev = max_coeff_deviation(lhs, rhs);
    const bool pass = dev < tol;
    r.ok = r.ok && pass;
    auto text = [](const FactorList& l) {
      std::string s;
      for (const auto& f : l) s += (s.empty() ? "" : " ") + to_text(f);
      return s;
    };
    r.rows.push_back({c, n, w0, text(minus), text(plus), dev, pass});
  }
  return r;
}

Report cmd_verify_contractions() {
  Report r;
  r.columns = {"check", "omega0", "max_deviation", "tolerance", "pass"};
  r.echo = {{"command", "verify-contractions"}, {"grid_points", 1001}, {"t_range", json::array({-10.0, 10.0})}};
  auto row = [&](const std::string& name, json w0, double dev, double tol) {
    const bool pass = dev < tol;
    r.ok = r.ok && pass;
    r.rows.push_back({name, w0, num(dev), tol, pass});
  };

  for (double w0 : {0.0, 1.0, 2.7}) {
    double dec = 0.0, conj = 0.0;
    for (int i = 0; i <= 1000; ++i) {
      const double t = -10.0 + 0.02 * i;
      dec = std::max(dec, decomposition_deviation(t, w0));
      conj = std::max(conj, conjugation_deviation(t, w0));
    }
    dec = std::max(dec, decomposition_deviation(0.0, w0));
    conj = std::max(conj, conjugation_deviation(0.0, w0));
    row("decomposition", w0, dec, 1e-14);
    row("conjugation", w0, conj, 1e-14);
  }

  // Regularized G_R vanishes at 0 and converges pointwise as gamma grows:
  // 1 - (1 - e^{-x})^m <= m e^{-x}.
  const double probe[] = {0.05, 0.1, 0.5, 1.0, 2.0};
  double previous = std::numeric_limits<double>::infinity();
  for (double gamma : {10.0, 100.0, 1000.0}) {
    const Regularization reg{gamma, 2};
    const double at_zero = std::abs(retarded_green(0.0, ContractionKernel{KernelKind::Retarded, 1.0, reg}));
    row("regularized_zero gamma=" + json(gamma).dump(), 1.0, at_zero, 1e-300);
    double gap = 0.0;
    for (double t : probe) {
      gap = std::max(gap, std::abs(retarded_green(t, ContractionKernel{KernelKind::Retarded, 1.0, reg}) -
                                   retarded_green(t, ContractionKernel{KernelKind::Retarded, 1.0, std::nullopt})));
    }
    const double bound = reg.m * std::exp(-gamma * probe[0]) * (1.0 + 1e-12);
    row("regularized_gap gamma=" + json(gamma).dump(), 1.0, gap, gap < previous ? bound : 0.0);
    previous = gap;
  }

  // Away from t = 0 the same-branch kernels do not depend on (gamma, m).
  double spread = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double t = -10.0 + 0.02 * i;
    if (std::abs(t) < 0.05) continue;
    for (auto kind : {KernelKind::PP, KernelKind::MM}) {
      const cplx bare = symmetric_contraction(t, ContractionKernel{kind, 1.0, std::nullopt});
      for (double gamma : {1e3, 1e4}) {
        for (int m : {2, 3}) {
          spread = std::max(spread, std::abs(symmetric_contraction(t, ContractionKernel{kind, 1.0, Regularization{gamma, m}}) - bare));
        }
      }
    }
  }
  row("regularization_insensitivity", 1.0, spread, 1e-14);
  return r;
}

Report cmd_simulate(const RunConfig& config) {
  Report r;
  r.columns = {"request", "ordering", "factors", "mean_re", "mean_im", "se_re", "se_im"};
  if (config.oracle.enabled) {
    for (const char* c : {"exact_re", "exact_im", "sigma_re", "sigma_im"}) r.columns.push_back(c);
  }
  r.echo = echo_for("simulate", config);
  if (config.requests.empty()) return r;

  const SimulationConfig sim = config.simulation();
  std::unique_ptr<FockOracle> oracle;
  if (config.oracle.enabled) oracle = std::make_unique<FockOracle>(config.model, config.initial, config.kicks);
  const bool any_symmetric = std::any_of(config.requests.begin(), config.requests.end(), [](const auto& q) {
    return q.ordering == RequestOrdering::TimeSymmetric;
  });
  TrajectoryEnsemble ens;
  if (any_symmetric) ens = run_ensemble(sim);

  for (std::size_t i = 0; i < config.requests.size(); ++i) {
    const auto& req = config.requests[i];
    EstimatorResult est;
    if (req.ordering == RequestOrdering::TimeSymmetric) {
      est = estimate_time_symmetric(ens, req);
    } else {
      const Probe& c = req.factors[0];
      const Probe& a = req.factors[1];
      est = time_normal_two_point(c.site, c.time, a.site, a.time, sim).time_normal;
    }
    std::vector<json> row = {i, ordering_name(req.ordering), factors_text(req), est.mean.real(), est.mean.imag(),
                             est.std_error.real(), est.std_error.imag()};
    if (oracle) {
      const cplx ex = exact_value(*oracle, req);
      row.insert(row.end(), {ex.real(), ex.imag(), num(sigma(est.mean.real(), est.std_error.real(), ex.real())),
                             num(sigma(est.mean.imag(), est.std_error.imag(), ex.imag()))});
    }
    r.rows.push_back(std::move(row));
  }
  return r;
}

Report cmd_reorder(const RunConfig& config, const PairSpec& pair) {
  validate_pair(config, pair, "pair");
  Report r;
  r.columns = {"k", "t", "k_prime", "t_prime", "symmetric_re", "symmetric_im", "symmetric_se_re",
               "symmetric_se_im", "correction_re", "correction_im", "correction_se_re", "correction_se_im",
               "time_normal_re", "time_normal_im", "time_normal_se_re", "time_normal_se_im", "epsilon",
               "bias_estimate"};
  if (config.oracle.enabled) {
    for (const char* c : {"oracle_re", "oracle_im", "sigma_re", "sigma_im"}) r.columns.push_back(c);
  }
  r.echo = echo_for("reorder", config);
  r.echo["pair"] = {{"k", pair.k}, {"t", pair.t}, {"k_prime", pair.k_prime}, {"t_prime", pair.t_prime},
                    {"epsilon", pair.epsilon}};

  const TimeNormalResult tn = time_normal_two_point(pair.k, pair.t, pair.k_prime, pair.t_prime,
                                                    config.simulation(), pair.epsilon);
  std::vector<json> row = {pair.k, pair.t, pair.k_prime, pair.t_prime};
  for (const auto* e : {&tn.symmetric, &tn.correction, &tn.time_normal}) {
    row.insert(row.end(), {e->mean.real(), e->mean.imag(), e->std_error.real(), e->std_error.imag()});
  }
  row.insert(row.end(), {tn.response.epsilon, tn.bias_estimate});
  if (config.oracle.enabled) {
    const FockOracle oracle(config.model, config.initial, config.kicks);
    const cplx ex = oracle.multitime_average({cre(pair.k, pair.t), ann(pair.k_prime, pair.t_prime)},
                                             Arrangement::TimeNormal);
    const auto& m = tn.time_normal;
    row.insert(row.end(), {ex.real(), ex.imag(), num(sigma(m.mean.real(), m.std_error.real(), ex.real())),
                           num(sigma(m.mean.imag(), m.std_error.imag(), ex.imag()))});
  }
  r.rows.push_back(std::move(row));
  return r;
}

Report cmd_oracle(const RunConfig& config) {
  Report r;
  r.columns = {"request", "ordering", "factors", "exact_re", "exact_im", "check_cutoff", "cutoff_change"};
  r.echo = echo_for("oracle", config);
  if (config.requests.empty()) return r;

  const FockOracle oracle(config.model, config.initial, config.kicks);
  BHParams finer = config.model;
  finer.cutoff += 2;
  std::unique_ptr<FockOracle> check;
  try {
    check = std::make_unique<FockOracle>(finer, config.initial, config.kicks);
  } catch (const DimensionLimit&) {
  }
  for (std::size_t i = 0; i < config.requests.size(); ++i) {
    const auto& req = config.requests[i];
    const cplx ex = exact_value(oracle, req);
    std::vector<json> row = {i, ordering_name(req.ordering), factors_text(req), ex.real(), ex.imag()};
    if (check) {
      row.insert(row.end(), {finer.cutoff, std::abs(exact_value(*check, req) - ex)});
    } else {
      row.insert(row.end(), {nullptr, nullptr});
    }
    r.rows.push_back(std::move(row));
  }
  return r;
}

}  // namespace twigner
