#include "detmart/io.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>

namespace detmart::io {

ConfigError::ConfigError(std::string field, const std::string& message)
    : std::invalid_argument("config error at " + field + ": " + message), field_(std::move(field)) {}

namespace {

const std::vector<std::string> kCommands = {"kernel", "simulate", "estimate", "fredholm", "oconnell"};
const std::vector<std::string> kVariants = {"auto",     "general",  "rw",   "multipoint", "extended_hermite",
                                            "extended_laguerre", "sine", "bessel", "lattice", "besselzero"};

std::string at(const std::string& path, const std::string& key) { return path + "/" + key; }
std::string at(const std::string& path, std::size_t i) { return path + "/" + std::to_string(i); }

void allow(const json& o, const std::string& path, std::initializer_list<const char*> keys) {
  if (!o.is_object()) throw ConfigError(path.empty() ? "/" : path, "expected an object");
  for (auto it = o.begin(); it != o.end(); ++it)
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; }))
      throw ConfigError(at(path, it.key()), "unknown field");
}

const json& need(const json& o, const char* key, const std::string& path) {
  if (!o.contains(key)) throw ConfigError(at(path, key), "missing");
  return o.at(key);
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(path, "expected a finite number");
  return d;
}

long integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  return v.get<long>();
}

bool boolean(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw ConfigError(path, "expected true or false");
  return v.get<bool>();
}

std::string text(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path, "expected a string");
  return v.get<std::string>();
}

std::string choice(const json& v, const std::string& path, const std::vector<std::string>& options) {
  const std::string s = text(v, path);
  if (std::find(options.begin(), options.end(), s) == options.end()) {
    std::string list;
    for (const auto& o : options) list += (list.empty() ? "" : ", ") + o;
    throw ConfigError(path, "'" + s + "' is not one of " + list);
  }
  return s;
}

std::vector<double> numbers(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], at(path, i)));
  return out;
}

// runs f and reports library validation failures against the given field
template <typename F>
auto guarded(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  } catch (const std::domain_error& e) {
    throw ConfigError(path, e.what());
  } catch (const std::length_error& e) {
    throw ConfigError(path, e.what());
  }
}

ProcessKind parse_process(const json& j, const std::string& path) {
  allow(j, path, {"kind", "nu"});
  const std::string kind = choice(need(j, "kind", path), at(path, "kind"), {"BM", "BESQ", "BES", "RW"});
  const double nu = j.contains("nu") ? number(j["nu"], at(path, "nu")) : 0.0;
  return guarded(path, [&] { return ProcessKind::parse(kind, nu); });
}

json process_json(const ProcessKind& k) {
  json j = {{"kind", k.name()}};
  if (k.tag == ProcessKind::Tag::BESQ || k.tag == ProcessKind::Tag::BES) j["nu"] = k.nu;
  return j;
}

std::vector<std::array<double, 4>> parse_points(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of [s, x, t, y]");
  std::vector<std::array<double, 4>> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::vector<double> v = numbers(j[i], at(path, i));
    if (v.size() != 4) throw ConfigError(at(path, i), "expected [s, x, t, y]");
    out.push_back({v[0], v[1], v[2], v[3]});
  }
  return out;
}

std::vector<std::array<double, 4>> parse_grid(const json& j, const std::string& path) {
  allow(j, path, {"s", "x", "t", "y"});
  const auto s = numbers(need(j, "s", path), at(path, "s")), x = numbers(need(j, "x", path), at(path, "x"));
  const auto t = numbers(need(j, "t", path), at(path, "t")), y = numbers(need(j, "y", path), at(path, "y"));
  std::vector<std::array<double, 4>> out;
  for (double a : s)
    for (double b : x)
      for (double c : t)
        for (double d : y) out.push_back({a, b, c, d});
  return out;
}

FunctionalSpec parse_functional(const json& j, const std::string& path) {
  allow(j, path, {"kind", "time", "level", "spec"});
  FunctionalSpec f;
  f.kind = choice(need(j, "kind", path), at(path, "kind"), {"one", "all_above", "mgf"});
  if (f.kind == "mgf") {
    f.spec = parse_spec(need(j, "spec", path), at(path, "spec"));
    f.time = f.spec.times.back();
  } else {
    f.time = number(need(j, "time", path), at(path, "time"));
    if (!(f.time > 0)) throw ConfigError(at(path, "time"), "must be positive");
    if (f.kind == "all_above") f.level = number(need(j, "level", path), at(path, "level"));
  }
  return f;
}

json functional_json(const FunctionalSpec& f) {
  if (f.kind == "mgf") return {{"kind", f.kind}, {"spec", to_json(f.spec)}};
  json j = {{"kind", f.kind}, {"time", f.time}};
  if (f.kind == "all_above") j["level"] = f.level;
  return j;
}

bool needs_xi(const RunConfig& c) {
  if (c.command == "oconnell") return false;
  if (c.command == "kernel" || c.command == "fredholm")
    return c.kernel.variant == "auto" || c.kernel.variant == "general" || c.kernel.variant == "rw" ||
           c.kernel.variant == "multipoint";
  return true;
}

}  // namespace

PointConfiguration parse_xi(const json& in, const std::string& outer) {
  // {"atoms": [...]} or the bare list
  std::string path = outer;
  const json* src = &in;
  if (in.is_object()) {
    allow(in, outer, {"atoms"});
    path = at(outer, "atoms");
    src = &need(in, "atoms", outer);
  }
  const json& j = *src;
  if (!j.is_array()) throw ConfigError(path, "expected an array of locations or [location, multiplicity]");
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i].is_array()) {
      if (j[i].size() != 2) throw ConfigError(at(path, i), "expected [location, multiplicity]");
      const long m = integer(j[i][1], at(at(path, i), 1));
      if (m < 1) throw ConfigError(at(at(path, i), 1), "multiplicity must be at least 1");
      atoms.push_back({number(j[i][0], at(at(path, i), 0)), int(m)});
    } else {
      atoms.push_back({number(j[i], at(path, i)), 1});
    }
  }
  return guarded(path, [&] { return PointConfiguration(atoms); });
}

json to_json(const PointConfiguration& xi) {
  json j = json::array();
  for (const Atom& a : xi.atoms()) j.push_back({a.location, a.multiplicity});
  return {{"atoms", j}};
}

TestFunctionSpec parse_spec(const json& j, const std::string& path) {
  allow(j, path, {"times", "chi"});
  TestFunctionSpec s;
  s.times = numbers(need(j, "times", path), at(path, "times"));
  const json& chi = need(j, "chi", path);
  const std::string cp = at(path, "chi");
  if (!chi.is_array()) throw ConfigError(cp, "expected an array");
  for (std::size_t i = 0; i < chi.size(); ++i) {
    const std::string p = at(cp, i);
    allow(chi[i], p, {"kind", "support", "scale", "sites"});
    const std::string kind = chi[i].contains("kind") ? choice(chi[i]["kind"], at(p, "kind"), {"indicator", "sites"})
                             : chi[i].contains("sites") ? "sites"
                                                        : "indicator";
    if (kind == "sites") {
      const json& sites = need(chi[i], "sites", p);
      if (!sites.is_array()) throw ConfigError(at(p, "sites"), "expected an array of [x, value]");
      std::vector<std::pair<double, double>> v;
      for (std::size_t k = 0; k < sites.size(); ++k) {
        const auto xv = numbers(sites[k], at(at(p, "sites"), k));
        if (xv.size() != 2) throw ConfigError(at(at(p, "sites"), k), "expected [x, value]");
        v.push_back({xv[0], xv[1]});
      }
      s.chi.push_back(guarded(p, [&] { return ChiFunction::sites(v); }));
    } else {
      const auto ab = numbers(need(chi[i], "support", p), at(p, "support"));
      if (ab.size() != 2) throw ConfigError(at(p, "support"), "expected [a, b]");
      const double scale = number(need(chi[i], "scale", p), at(p, "scale"));
      s.chi.push_back(guarded(p, [&] { return ChiFunction::indicator(ab[0], ab[1], scale); }));
    }
  }
  guarded(path, [&] {
    s.validate();
    return 0;
  });
  return s;
}

json to_json(const TestFunctionSpec& spec) {
  json chi = json::array();
  for (const ChiFunction& c : spec.chi) {
    switch (c.kind()) {
      case ChiFunction::Kind::indicator:
        chi.push_back({{"kind", "indicator"}, {"support", {c.lower(), c.upper()}}, {"scale", c.scale()}});
        break;
      case ChiFunction::Kind::sites: {
        json v = json::array();
        for (const auto& [x, val] : c.site_values()) v.push_back({x, val});
        chi.push_back({{"kind", "sites"}, {"sites", v}});
        break;
      }
      case ChiFunction::Kind::callable: throw std::invalid_argument("a callable chi has no JSON form");
    }
  }
  return {{"times", spec.times}, {"chi", chi}};
}

LiftParams parse_lift(const json& j, const std::string& path) {
  allow(j, path, {"a", "nu_hat", "t", "h"});
  LiftParams p;
  p.a = number(need(j, "a", path), at(path, "a"));
  const auto nu = numbers(need(j, "nu_hat", path), at(path, "nu_hat"));
  p.nu_hat = PointConfiguration::from_locations(std::span<const double>(nu));
  if (j.contains("t")) p.t = number(j["t"], at(path, "t"));
  if (j.contains("h")) p.h = number(j["h"], at(path, "h"));
  guarded(path, [&] {
    p.validate();
    return 0;
  });
  return p;
}

json to_json(const LiftParams& p) {
  const Eigen::VectorXd v = p.nu_hat.support();
  return {{"a", p.a}, {"nu_hat", std::vector<double>(v.data(), v.data() + v.size())}, {"t", p.t}, {"h", p.h}};
}

json to_json(const Estimate& e) { return {{"mean", e.mean}, {"std_error", e.std_error}, {"n", e.n}}; }

json to_json(const ComplexEstimate& e) {
  return {{"mean", e.mean.real()},
          {"std_error", e.std_error_re},
          {"mean_imag", e.mean.imag()},
          {"std_error_imag", e.std_error_im},
          {"n", e.n}};
}

RunConfig parse_config(const json& j) {
  allow(j, "", {"schema", "command", "process", "xi", "kernel", "points", "grid", "times", "sampler", "companions",
                "estimator", "functional", "horizon", "spec", "quad_order", "excess_block", "monte_carlo", "lift",
                "route", "mc", "sde", "output"});
  if (text(need(j, "schema", ""), "/schema") != kSchema)
    throw ConfigError("/schema", std::string("unsupported schema, expected \"") + kSchema + "\"");
  RunConfig c;
  c.command = choice(need(j, "command", ""), "/command", kCommands);
  if (j.contains("process")) c.process = parse_process(j["process"], "/process");
  if (j.contains("xi")) c.xi = parse_xi(j["xi"], "/xi");
  if (j.contains("kernel")) {
    const json& k = j["kernel"];
    allow(k, "/kernel", {"variant", "N", "nu"});
    if (k.contains("variant")) c.kernel.variant = choice(k["variant"], "/kernel/variant", kVariants);
    if (k.contains("N")) c.kernel.order = int(integer(k["N"], "/kernel/N"));
    if (k.contains("nu")) c.kernel.nu = number(k["nu"], "/kernel/nu");
  }
  if (j.contains("points") && j.contains("grid")) throw ConfigError("/grid", "give either points or grid");
  if (j.contains("points")) c.points = parse_points(j["points"], "/points");
  if (j.contains("grid")) c.points = parse_grid(j["grid"], "/grid");
  if (j.contains("times")) c.times = numbers(j["times"], "/times");
  if (j.contains("sampler")) c.sampler = choice(j["sampler"], "/sampler", {"free", "noncolliding"});
  if (j.contains("companions")) c.companions = boolean(j["companions"], "/companions");
  if (j.contains("estimator")) c.estimator = choice(j["estimator"], "/estimator", {"dmr", "cpr", "direct"});
  if (j.contains("functional")) c.functional = parse_functional(j["functional"], "/functional");
  if (j.contains("horizon")) c.horizon = number(j["horizon"], "/horizon");
  if (j.contains("spec")) c.spec = parse_spec(j["spec"], "/spec");
  if (j.contains("quad_order")) {
    c.quad_order = int(integer(j["quad_order"], "/quad_order"));
    if (c.quad_order < 2) throw ConfigError("/quad_order", "must be at least 2");
  }
  if (j.contains("excess_block")) c.excess_block = boolean(j["excess_block"], "/excess_block");
  if (j.contains("monte_carlo")) c.monte_carlo = boolean(j["monte_carlo"], "/monte_carlo");
  if (j.contains("lift")) c.lift = parse_lift(j["lift"], "/lift");
  if (j.contains("route"))
    c.route = choice(j["route"], "/route", {"cpr", "dmr", "reciprocal_reference", "reciprocal_cpr"});
  if (j.contains("mc")) {
    const json& m = j["mc"];
    allow(m, "/mc", {"n_paths", "seed"});
    if (m.contains("n_paths")) c.n_paths = integer(m["n_paths"], "/mc/n_paths");
    if (m.contains("seed")) {
      if (!m["seed"].is_number_integer() || (m["seed"].is_number_integer() && !m["seed"].is_number_unsigned() &&
                                             m["seed"].get<long long>() < 0))
        throw ConfigError("/mc/seed", "expected a non-negative integer");
      c.seed = m["seed"].get<std::uint64_t>();
    }
  }
  if (j.contains("sde")) {
    const json& s = j["sde"];
    allow(s, "/sde", {"dt", "max_halvings", "rejection_budget"});
    if (s.contains("dt")) c.sde.dt = number(s["dt"], "/sde/dt");
    if (s.contains("max_halvings")) c.sde.max_halvings = int(integer(s["max_halvings"], "/sde/max_halvings"));
    if (s.contains("rejection_budget")) c.sde.rejection_budget = number(s["rejection_budget"], "/sde/rejection_budget");
    if (!(c.sde.dt > 0)) throw ConfigError("/sde/dt", "must be positive");
    if (c.sde.max_halvings < 0) throw ConfigError("/sde/max_halvings", "must be non-negative");
  }
  if (j.contains("output")) {
    const json& o = j["output"];
    allow(o, "/output", {"path", "format"});
    if (o.contains("path")) c.output_path = text(o["path"], "/output/path");
    if (o.contains("format")) c.output_format = choice(o["format"], "/output/format", {"csv", "json"});
  }

  // command-specific requirements and defaults
  const bool tabular = c.command == "kernel" || c.command == "simulate";
  if (c.output_format.empty()) c.output_format = tabular ? "csv" : "json";
  if (tabular && c.output_format != "csv") throw ConfigError("/output/format", c.command + " writes csv");
  if (!tabular && c.output_format != "json") throw ConfigError("/output/format", c.command + " writes json");
  if (needs_xi(c) && c.xi.empty()) throw ConfigError("/xi", "missing");
  if (c.command == "simulate" && c.times.empty()) throw ConfigError("/times", "missing");
  if (c.command == "estimate" && !j.contains("functional")) throw ConfigError("/functional", "missing");
  if (c.command == "fredholm" && !j.contains("spec")) throw ConfigError("/spec", "missing");
  if (c.command == "oconnell" && !j.contains("lift")) throw ConfigError("/lift", "missing");
  if (c.quad_order == 0) c.quad_order = c.command == "oconnell" ? 128 : 64;
  if (c.command == "kernel" || c.command == "fredholm") guarded("/kernel", [&] { return make_kernel(c); });
  return c;
}

RunConfig parse_config_text(const std::string& s) {
  json j;
  try {
    j = json::parse(s);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, s.size());
    const long line = 1 + std::count(s.begin(), s.begin() + long(upto), '\n');
    throw ConfigError("line " + std::to_string(line), "invalid JSON");
  }
  return parse_config(j);
}

void finalize(RunConfig& c) {
  if (c.n_paths < 1) throw ConfigError("/mc/n_paths", "must be at least 1");
  if (!c.seed) throw ConfigError("/mc/seed", "missing; set mc.seed or pass --seed");
}

json to_json(const RunConfig& c) {
  json j = {{"schema", kSchema}, {"command", c.command}};
  const bool closed = !needs_xi(c);
  if (c.command != "oconnell") {
    j["process"] = process_json(c.process);
    if (!closed || !c.xi.empty()) j["xi"] = to_json(c.xi);
  }
  if (c.command == "kernel" || c.command == "fredholm")
    j["kernel"] = {{"variant", c.kernel.variant}, {"N", c.kernel.order}, {"nu", c.kernel.nu}};
  if (c.command == "kernel") {
    json pts = json::array();
    for (const auto& p : c.points) pts.push_back(p);
    j["points"] = pts;
  }
  if (c.command == "simulate") {
    j["times"] = c.times;
    j["sampler"] = c.sampler;
    j["companions"] = c.companions;
  }
  if (c.command == "estimate") {
    j["estimator"] = c.estimator;
    j["functional"] = functional_json(c.functional);
    j["horizon"] = c.horizon;
  }
  if (c.command == "fredholm") {
    j["spec"] = to_json(c.spec);
    j["excess_block"] = c.excess_block;
    j["monte_carlo"] = c.monte_carlo;
  }
  if (c.command == "oconnell") {
    j["lift"] = to_json(c.lift);
    j["route"] = c.route;
  }
  if (c.command == "fredholm" || c.command == "oconnell") j["quad_order"] = c.quad_order;
  if (c.command != "kernel" && c.command != "fredholm")
    j["sde"] = {{"dt", c.sde.dt}, {"max_halvings", c.sde.max_halvings}, {"rejection_budget", c.sde.rejection_budget}};
  j["mc"] = {{"n_paths", c.n_paths}};
  if (c.seed) j["mc"]["seed"] = *c.seed;
  j["output"] = {{"format", c.output_format}};
  if (!c.output_path.empty()) j["output"]["path"] = c.output_path;
  return j;
}

CorrelationKernel make_kernel(const RunConfig& c) {
  const std::string& v = c.kernel.variant;
  if (v == "auto") return CorrelationKernel::make(c.process, c.xi);
  if (v == "general") return CorrelationKernel::general(c.process, c.xi);
  if (v == "rw") return CorrelationKernel::rw(c.xi);
  if (v == "multipoint") return CorrelationKernel::multipoint(c.process, c.xi);
  if (v == "extended_hermite") return CorrelationKernel::extended_hermite(c.kernel.order);
  if (v == "extended_laguerre") return CorrelationKernel::extended_laguerre(c.kernel.order, c.kernel.nu);
  if (v == "sine") return CorrelationKernel::sine();
  if (v == "bessel") return CorrelationKernel::bessel(c.kernel.nu);
  if (v == "lattice") return CorrelationKernel::lattice();
  if (v == "besselzero") return CorrelationKernel::besselzero(c.kernel.nu);
  throw std::invalid_argument("unknown kernel variant '" + v + "'");
}

PathFunctional make_functional(const FunctionalSpec& f) {
  if (f.kind == "mgf") return mgf_functional(f.spec);
  if (f.kind == "all_above")
    return {{f.time}, [level = f.level](const Eigen::MatrixXd& x) { return (x.row(0).array() >= level).all() ? 1.0 : 0.0; }};
  return {{f.time}, [](const Eigen::MatrixXd&) { return 1.0; }};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace detmart::io
