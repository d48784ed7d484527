#include "twigner/run_config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace twigner {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string index_path(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

void require_object(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) throw ConfigError(join(path, key), "unknown field");
  }
}

const json* find(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

const json& need(const json& j, const std::string& path, const char* key) {
  const json* v = find(j, key);
  if (!v) throw ConfigError(join(path, key), "missing field");
  return *v;
}

double as_real(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path, "must be finite");
  return x;
}

long long as_int(const json& v, const std::string& path) {
  if (v.is_number_integer() || v.is_number_unsigned()) return v.get<long long>();
  throw ConfigError(path, "expected an integer");
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw ConfigError(path, "expected true or false");
  return v.get<bool>();
}

std::uint64_t as_u64(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
  throw ConfigError(path, "expected a non-negative integer");
}

cplx as_complex(const json& v, const std::string& path) {
  if (v.is_number()) return {as_real(v, path), 0.0};
  if (v.is_array() && v.size() == 2) return {as_real(v[0], path + "[0]"), as_real(v[1], path + "[1]")};
  throw ConfigError(path, "expected a number or [re, im]");
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

bool is_multiple(double x, double step) {
  const double r = x / step;
  return std::abs(r - std::round(r)) < 1e-9 * std::max(1.0, std::abs(r));
}

void check_site(int site, const RunConfig& c, const std::string& path) {
  if (site < 0 || site >= c.model.n_sites) {
    throw ConfigError(path, "site " + std::to_string(site) + " outside 0.." + std::to_string(c.model.n_sites - 1));
  }
}

void check_on_grid(double t, const RunConfig& c, const std::string& path) {
  try {
    c.grid.index_of(t);
  } catch (const TimeOffGrid&) {
    throw ConfigError(path, "time is not a grid point");
  }
}

void parse_model(const json& j, RunConfig& c) {
  const std::string path = "model";
  require_object(j, path, {"n_sites", "omega0", "kappa", "hop_J"});
  const long long n = as_int(need(j, path, "n_sites"), join(path, "n_sites"));
  if (n < 1 || n > 64) throw ConfigError(join(path, "n_sites"), "must be in 1..64");
  c.model.n_sites = static_cast<int>(n);
  if (const json* v = find(j, "omega0")) c.model.omega0 = as_real(*v, join(path, "omega0"));
  if (const json* v = find(j, "kappa")) c.model.kappa = as_real(*v, join(path, "kappa"));
  if (const json* v = find(j, "hop_J")) c.model.hop_J = as_real(*v, join(path, "hop_J"));
}

SiteState parse_site(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  const json& type = need(j, path, "type");
  if (!type.is_string()) throw ConfigError(join(path, "type"), "expected a string");
  const std::string t = type.get<std::string>();
  if (t == "coherent") {
    require_object(j, path, {"type", "alpha"});
    return Coherent{as_complex(need(j, path, "alpha"), join(path, "alpha"))};
  }
  if (t == "thermal") {
    require_object(j, path, {"type", "nbar"});
    const double nbar = as_real(need(j, path, "nbar"), join(path, "nbar"));
    if (nbar < 0.0) throw ConfigError(join(path, "nbar"), "must be >= 0");
    return Thermal{nbar};
  }
  if (t == "vacuum") {
    require_object(j, path, {"type"});
    return Vacuum{};
  }
  if (t == "fock") {
    throw ConfigError(join(path, "type"), "Fock states have no positive Wigner function");
  }
  throw ConfigError(join(path, "type"), "unknown state '" + t + "'");
}

void parse_initial(const json& j, RunConfig& c) {
  if (!j.is_array()) throw ConfigError("initial", "expected one entry per site");
  if (j.size() != static_cast<std::size_t>(c.model.n_sites)) {
    throw ConfigError("initial", "has " + std::to_string(j.size()) + " entries for " +
                                     std::to_string(c.model.n_sites) + " sites");
  }
  for (std::size_t i = 0; i < j.size(); ++i) c.initial.push_back(parse_site(j[i], index_path("initial", i)));
}

void parse_ensemble(const json& j, RunConfig& c) {
  const std::string path = "ensemble";
  require_object(j, path, {"n_traj", "master_seed", "dt", "threads"});
  if (const json* v = find(j, "n_traj")) {
    const long long n = as_int(*v, join(path, "n_traj"));
    if (n < 2 || n > std::numeric_limits<int>::max()) throw ConfigError(join(path, "n_traj"), "must be >= 2");
    c.ensemble.n_traj = static_cast<int>(n);
  }
  if (const json* v = find(j, "master_seed")) c.ensemble.master_seed = as_u64(*v, join(path, "master_seed"));
  if (const json* v = find(j, "dt")) {
    c.ensemble.dt = as_real(*v, join(path, "dt"));
    if (c.ensemble.dt <= 0.0) throw ConfigError(join(path, "dt"), "must be > 0");
  }
  if (const json* v = find(j, "threads")) {
    const long long n = as_int(*v, join(path, "threads"));
    if (n < 0 || n > 4096) throw ConfigError(join(path, "threads"), "must be in 0..4096");
    c.ensemble.threads = static_cast<int>(n);
  }
}

void parse_grid(const json& j, RunConfig& c) {
  const std::string path = "grid";
  require_object(j, path, {"t_max", "n_points"});
  c.grid.t_max = as_real(need(j, path, "t_max"), join(path, "t_max"));
  if (c.grid.t_max <= 0.0) throw ConfigError(join(path, "t_max"), "must be > 0");
  const long long n = as_int(need(j, path, "n_points"), join(path, "n_points"));
  if (n < 2 || n > 1000000) throw ConfigError(join(path, "n_points"), "must be in 2..1000000");
  c.grid.n_points = static_cast<int>(n);
}

void parse_requests(const json& j, RunConfig& c) {
  if (!j.is_array()) throw ConfigError("requests", "expected a list");
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string path = index_path("requests", i);
    require_object(j[i], path, {"factors", "ordering"});
    CorrelatorRequest req;
    if (const json* o = find(j[i], "ordering")) {
      if (!o->is_string()) throw ConfigError(join(path, "ordering"), "expected a string");
      const std::string s = o->get<std::string>();
      if (s == "time_symmetric") req.ordering = RequestOrdering::TimeSymmetric;
      else if (s == "time_normal") req.ordering = RequestOrdering::TimeNormalTwoPoint;
      else throw ConfigError(join(path, "ordering"), "expected time_symmetric or time_normal");
    }
    const json& fs = need(j[i], path, "factors");
    const std::string fpath = join(path, "factors");
    if (!fs.is_array() || fs.empty()) throw ConfigError(fpath, "expected a non-empty list");
    for (std::size_t m = 0; m < fs.size(); ++m) {
      const std::string p = index_path(fpath, m);
      require_object(fs[m], p, {"site", "dagger", "time"});
      Probe pr;
      pr.site = static_cast<int>(as_int(need(fs[m], p, "site"), join(p, "site")));
      check_site(pr.site, c, join(p, "site"));
      if (const json* d = find(fs[m], "dagger")) pr.dagger = as_bool(*d, join(p, "dagger"));
      pr.time = as_real(need(fs[m], p, "time"), join(p, "time"));
      check_on_grid(pr.time, c, join(p, "time"));
      req.factors.push_back(pr);
    }
    if (req.ordering == RequestOrdering::TimeNormalTwoPoint) {
      if (req.factors.size() != 2 || !req.factors[0].dagger || req.factors[1].dagger) {
        throw ConfigError(fpath, "time_normal needs exactly [creator, annihilator]");
      }
      if (c.grid.index_of(req.factors[0].time) == c.grid.index_of(req.factors[1].time)) {
        throw ConfigError(fpath, "time_normal needs distinct times");
      }
    }
    c.requests.push_back(std::move(req));
  }
}

void parse_kicks(const json& j, RunConfig& c) {
  if (!j.is_array()) throw ConfigError("kicks", "expected a list");
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string path = index_path("kicks", i);
    require_object(j[i], path, {"site", "time", "amplitude"});
    Kick k;
    k.site = static_cast<int>(as_int(need(j[i], path, "site"), join(path, "site")));
    check_site(k.site, c, join(path, "site"));
    k.time = as_real(need(j[i], path, "time"), join(path, "time"));
    if (k.time < 0.0 || k.time > c.grid.t_max) throw ConfigError(join(path, "time"), "outside [0, t_max]");
    if (!is_multiple(k.time, c.ensemble.dt)) throw ConfigError(join(path, "time"), "not a multiple of dt");
    k.amplitude = as_complex(need(j[i], path, "amplitude"), join(path, "amplitude"));
    c.kicks.kicks.push_back(k);
  }
}

void parse_oracle(const json& j, RunConfig& c) {
  const std::string path = "oracle";
  require_object(j, path, {"enabled", "cutoff"});
  if (const json* v = find(j, "enabled")) c.oracle.enabled = as_bool(*v, join(path, "enabled"));
  if (const json* v = find(j, "cutoff")) {
    const long long n = as_int(*v, join(path, "cutoff"));
    if (n < 1 || n > 4095) throw ConfigError(join(path, "cutoff"), "must be in 1..4095");
    c.oracle.cutoff = static_cast<int>(n);
  }
  c.model.cutoff = c.oracle.cutoff;
  if (c.oracle.enabled) {
    double dim = 1.0;
    for (int i = 0; i < c.model.n_sites; ++i) dim *= c.oracle.cutoff + 1;
    if (dim > static_cast<double>(c.model.dimension_limit)) {
      throw ConfigError(join(path, "cutoff"), "Fock dimension exceeds " + std::to_string(c.model.dimension_limit));
    }
  }
}

PairSpec parse_pair_json(const json& j, const std::string& path) {
  require_object(j, path, {"k", "t", "k_prime", "t_prime", "epsilon"});
  PairSpec p;
  p.k = static_cast<int>(as_int(need(j, path, "k"), join(path, "k")));
  p.t = as_real(need(j, path, "t"), join(path, "t"));
  p.k_prime = static_cast<int>(as_int(need(j, path, "k_prime"), join(path, "k_prime")));
  p.t_prime = as_real(need(j, path, "t_prime"), join(path, "t_prime"));
  if (const json* v = find(j, "epsilon")) p.epsilon = as_real(*v, join(path, "epsilon"));
  return p;
}

json site_json(const SiteState& s) {
  if (const auto* c = std::get_if<Coherent>(&s)) return {{"type", "coherent"}, {"alpha", complex_json(c->alpha0)}};
  if (const auto* t = std::get_if<Thermal>(&s)) return {{"type", "thermal"}, {"nbar", t->nbar}};
  return {{"type", "vacuum"}};
}

}  // namespace

SimulationConfig RunConfig::simulation() const {
  SimulationConfig s;
  s.params = model;
  s.initial = initial;
  s.src = kicks;
  s.grid = grid;
  s.ensemble = ensemble;
  return s;
}

void validate_pair(const RunConfig& c, const PairSpec& p, const std::string& path) {
  check_site(p.k, c, join(path, "k"));
  check_site(p.k_prime, c, join(path, "k_prime"));
  check_on_grid(p.t, c, join(path, "t"));
  check_on_grid(p.t_prime, c, join(path, "t_prime"));
  if (p.epsilon < 0.0) throw ConfigError(join(path, "epsilon"), "must be >= 0");
}

RunConfig parse_run_config(const json& j) {
  require_object(j, "", {"model", "initial", "ensemble", "grid", "requests", "kicks", "oracle", "reorder"});
  RunConfig c;
  parse_model(need(j, "", "model"), c);
  parse_initial(need(j, "", "initial"), c);
  if (const json* v = find(j, "ensemble")) parse_ensemble(*v, c);
  parse_grid(need(j, "", "grid"), c);
  if (!is_multiple(c.grid.spacing(), c.ensemble.dt)) {
    throw ConfigError("ensemble.dt", "does not divide the grid spacing");
  }
  if (const json* v = find(j, "oracle")) parse_oracle(*v, c);
  c.model.cutoff = c.oracle.cutoff;
  if (const json* v = find(j, "requests")) parse_requests(*v, c);
  if (const json* v = find(j, "kicks")) parse_kicks(*v, c);
  if (const json* v = find(j, "reorder")) {
    c.reorder = parse_pair_json(*v, "reorder");
    validate_pair(c, *c.reorder, "reorder");
  }
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
  }
  return parse_run_config(j);
}

json to_json(const RunConfig& c) {
  json j;
  j["model"] = {{"n_sites", c.model.n_sites}, {"omega0", c.model.omega0}, {"kappa", c.model.kappa},
                {"hop_J", c.model.hop_J}};
  j["initial"] = json::array();
  for (const auto& s : c.initial) j["initial"].push_back(site_json(s));
  j["ensemble"] = {{"n_traj", c.ensemble.n_traj}, {"master_seed", c.ensemble.master_seed},
                   {"dt", c.ensemble.dt}, {"threads", c.ensemble.threads}};
  j["grid"] = {{"t_max", c.grid.t_max}, {"n_points", c.grid.n_points}};
  j["requests"] = json::array();
  for (const auto& r : c.requests) {
    json fs = json::array();
    for (const auto& f : r.factors) fs.push_back({{"site", f.site}, {"dagger", f.dagger}, {"time", f.time}});
    j["requests"].push_back(
        {{"ordering", r.ordering == RequestOrdering::TimeSymmetric ? "time_symmetric" : "time_normal"},
         {"factors", fs}});
  }
  j["kicks"] = json::array();
  for (const auto& k : c.kicks.kicks) {
    j["kicks"].push_back({{"site", k.site}, {"time", k.time}, {"amplitude", complex_json(k.amplitude)}});
  }
  j["oracle"] = {{"enabled", c.oracle.enabled}, {"cutoff", c.oracle.cutoff}};
  if (c.reorder) {
    j["reorder"] = {{"k", c.reorder->k}, {"t", c.reorder->t}, {"k_prime", c.reorder->k_prime},
                    {"t_prime", c.reorder->t_prime}, {"epsilon", c.reorder->epsilon}};
  }
  return j;
}

PairSpec parse_pair(const std::string& text) {
  std::stringstream ss(text);
  std::string item;
  std::vector<std::string> parts;
  while (std::getline(ss, item, ',')) parts.push_back(item);
  if (parts.size() != 4) throw ConfigError("--pair", "expected k,t,k',t'");
  PairSpec p;
  try {
    std::size_t used = 0;
    auto whole = [&](const std::string& s) {
      if (used != s.size()) throw std::invalid_argument(s);
    };
    p.k = std::stoi(parts[0], &used);
    whole(parts[0]);
    p.t = std::stod(parts[1], &used);
    whole(parts[1]);
    p.k_prime = std::stoi(parts[2], &used);
    whole(parts[2]);
    p.t_prime = std::stod(parts[3], &used);
    whole(parts[3]);
  } catch (const std::logic_error&) {
    throw ConfigError("--pair", "expected k,t,k',t' with integer sites and real times");
  }
  return p;
}

}  // namespace twigner
