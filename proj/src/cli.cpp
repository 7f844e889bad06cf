#include "detmart/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "detmart/errors.hpp"
#include "detmart/io.hpp"
#include "detmart/verify.hpp"

namespace detmart::cli {

namespace {

using io::json;

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<long> n_paths;
  std::string output;
  int workers = 0;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f || !(f << data) || !f.flush()) throw IoError("cannot write " + path);
}

io::RunConfig load(const std::string& command, const Overrides& o) {
  io::RunConfig c = io::parse_config_text(read_file(o.config_path));
  if (c.command != command)
    throw io::ConfigError("/command", "config is for '" + c.command + "', not '" + command + "'");
  if (o.seed) c.seed = o.seed;
  if (o.n_paths) c.n_paths = *o.n_paths;
  if (!o.output.empty()) c.output_path = o.output;
  io::finalize(c);
  if ((command == "kernel" || command == "simulate") && c.output_path.empty())
    throw io::ConfigError("/output/path", "missing; " + command + " writes a csv file");
  return c;
}

McOptions mc(const io::RunConfig& c, int workers) { return {c.n_paths, *c.seed, workers}; }

// json results go to the output path, or to out when none is set
void emit(const io::RunConfig& c, const json& result, std::ostream& out) {
  const json doc = {{"schema", io::kSchema}, {"config", io::to_json(c)}, {"seed", *c.seed}, {"result", result}};
  if (c.output_path.empty())
    out << io::dump(doc);
  else
    write_file(c.output_path, io::dump(doc));
}

int run_kernel(const Overrides& o) {
  const io::RunConfig c = load("kernel", o);
  const CorrelationKernel k = io::make_kernel(c);
  std::ostringstream csv;
  write_kernel_csv(csv, k, c.points);
  json side = {{"schema", io::kSchema},
               {"config", io::to_json(c)},
               {"variant", to_string(k.variant())},
               {"rows", c.points.size()}};
  if (!c.xi.empty()) side["xi"] = io::to_json(c.xi);
  if (k.variant() == KernelVariant::lattice || k.variant() == KernelVariant::besselzero) {
    int window = 0;
    double change = 0;
    for (const auto& p : c.points) {
      const TruncatedValue v = k.variant() == KernelVariant::lattice
                                   ? lattice_kernel(p[0], p[1], p[2], p[3])
                                   : besselzero_kernel(c.kernel.nu, p[0], p[1], p[2], p[3]);
      window = std::max(window, v.window);
      change = std::max(change, v.doubling_change);
    }
    side["truncation"] = {{"max_window", window}, {"max_doubling_change", change}};
    side["tolerances"] = {{"truncation", 1e-10}};
  } else {
    side["truncation"] = nullptr;
    side["tolerances"] = json::object();
  }
  write_file(c.output_path, csv.str());
  write_file(c.output_path + ".json", io::dump(side));
  return kOk;
}

int run_simulate(const Overrides& o) {
  const io::RunConfig c = load("simulate", o);
  const McOptions opts = mc(c, o.workers);
  PathEnsemble ens;
  if (c.sampler == "free")
    ens = sample_free(c.process, c.xi.expanded(), c.times, opts);
  else if (c.process.discrete_time())
    ens = sample_noncolliding_rw(c.xi, c.times, opts);
  else
    ens = sample_noncolliding(c.process, c.xi, c.times, opts, c.sde);
  if (c.companions) ens = attach_companions(std::move(ens), *c.seed + 1, o.workers);
  std::ostringstream csv;
  write_ensemble_csv(csv, ens);
  const auto [mean, var] = ensemble_moments(ens);
  auto rows = [](const Eigen::MatrixXd& m) {
    json a = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      json r = json::array();
      for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
      a.push_back(r);
    }
    return a;
  };
  const json side = {{"schema", io::kSchema}, {"config", io::to_json(c)},   {"steps", ens.steps},
                     {"halvings", ens.halvings},  {"rejections", ens.rejections}, {"mean", rows(mean)},
                     {"variance", rows(var)}};
  write_file(c.output_path, csv.str());
  write_file(c.output_path + ".json", io::dump(side));
  return kOk;
}

int run_estimate(const Overrides& o, std::ostream& out) {
  const io::RunConfig c = load("estimate", o);
  const McOptions opts = mc(c, o.workers);
  const PathFunctional F = io::make_functional(c.functional);
  json result;
  if (c.estimator == "dmr") {
    result = io::to_json(dmr_expectation(c.process, c.xi, F, opts, c.horizon));
  } else if (c.estimator == "cpr") {
    result = io::to_json(cpr_expectation(c.process, c.xi, F, opts, c.horizon));
  } else {
    const PathEnsemble ens = c.process.discrete_time() ? sample_noncolliding_rw(c.xi, F.times, opts)
                                                       : sample_noncolliding(c.process, c.xi, F.times, opts, c.sde);
    result = io::to_json(ensemble_expectation(ens, F));
    result["rejections"] = ens.rejections;
    result["halvings"] = ens.halvings;
  }
  emit(c, result, out);
  return kOk;
}

int run_fredholm(const Overrides& o, std::ostream& out) {
  const io::RunConfig c = load("fredholm", o);
  const CorrelationKernel k = io::make_kernel(c);
  FredholmOptions fo;
  fo.quad_order = c.quad_order;
  fo.excess_block = c.excess_block;
  const FredholmResult r = fredholm_expansion(k, c.spec, fo);
  json result = {{"value", r.value},         {"order_change", r.order_change}, {"excess", r.excess},
                 {"truncation", r.truncation}, {"terms", r.terms},              {"variant", to_string(k.variant())}};
  const bool finite = k.variant() == KernelVariant::general || k.variant() == KernelVariant::rw ||
                      k.variant() == KernelVariant::multipoint;
  if (finite && c.spec.times.size() == 1) result["finite_rank"] = finite_rank_det(k, c.spec, c.quad_order);
  if (c.monte_carlo) {
    if (!finite) throw io::ConfigError("/monte_carlo", "needs a finite-rank kernel with a process and xi");
    result["monte_carlo"] = io::to_json(mgf_monte_carlo(c.process, c.xi, c.spec, mc(c, o.workers)));
  }
  emit(c, result, out);
  return kOk;
}

int run_oconnell(const Overrides& o, std::ostream& out) {
  const io::RunConfig c = load("oconnell", o);
  const McOptions opts = mc(c, o.workers);
  json result;
  if (c.route == "cpr" || c.route == "dmr") {
    const OconnellResult r =
        c.route == "cpr" ? oconnell_theta_cpr(c.lift, opts) : oconnell_theta_dmr(c.lift, opts, c.quad_order);
    result = io::to_json(r.estimate);
    result["rejections"] = r.rejections;
    if (c.route == "dmr") result["quad_order"] = r.quad_order;
  } else if (c.route == "reciprocal_reference") {
    result = io::to_json(reciprocal_reference(c.lift.nu_hat, c.lift.t, c.lift.h, opts, c.sde));
  } else {
    result = io::to_json(reciprocal_cpr(c.lift.nu_hat, c.lift.t, c.lift.h, opts));
  }
  emit(c, result, out);
  return kOk;
}

int run_verify(const std::string& suite, const Overrides& o, std::ostream& out) {
  verify::Options vo;
  vo.workers = o.workers;
  const std::vector<verify::Check> checks = verify::run_suite(suite, vo);
  const bool pass = verify::all_pass(checks);
  json list = json::array();
  for (const auto& ch : checks)
    list.push_back({{"check", ch.name},
                    {"status", ch.pass ? "pass" : "fail"},
                    {"measured", ch.measured},
                    {"tolerance", ch.tolerance}});
  const json doc = {{"schema", io::kSchema}, {"suite", suite}, {"status", pass ? "pass" : "fail"}, {"checks", list}};
  if (o.output.empty())
    out << io::dump(doc);
  else
    write_file(o.output, io::dump(doc));
  return pass ? kOk : kVerifyFailed;
}

}  // namespace

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Determinantal martingale toolkit", "detmart"};
  app.require_subcommand(1);
  Overrides o;
  std::string suite;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"kernel", "evaluate a correlation kernel on a point list or grid (csv)"},
      {"simulate", "sample free or noncolliding paths (csv)"},
      {"estimate", "expectation of a functional by DMR, CPR or direct sampling"},
      {"fredholm", "Fredholm determinant expansion of the moment generating functional"},
      {"oconnell", "lifted observable by the CPR, DMR or reciprocal routes"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", o.config_path, "JSON run configuration")->required();
    sub->add_option("--seed", o.seed, "overrides mc.seed");
    sub->add_option("--n-paths", o.n_paths, "overrides mc.n_paths");
    sub->add_option("-o,--output", o.output, "overrides output.path");
    sub->add_option("--workers", o.workers, "worker threads, 0 for all cores")->check(CLI::NonNegativeNumber);
  }
  CLI::App* ver = app.add_subcommand("verify", "run a named verification suite");
  std::string suites;
  for (const auto& s : verify::suite_names()) suites += (suites.empty() ? "" : ", ") + s;
  ver->add_option("suite", suite, "one of " + suites)->required();
  ver->add_option("--workers", o.workers, "worker threads, 0 for all cores")->check(CLI::NonNegativeNumber);
  ver->add_option("-o,--output", o.output, "report path; stdout when absent");

  std::vector<std::string> argv_s{"detmart"};
  argv_s.insert(argv_s.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_s) argv.push_back(s.c_str());
  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kBadInput;
  }

  try {
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "kernel") return run_kernel(o);
    if (cmd == "simulate") return run_simulate(o);
    if (cmd == "estimate") return run_estimate(o, out);
    if (cmd == "fredholm") return run_fredholm(o, out);
    if (cmd == "oconnell") return run_oconnell(o, out);
    return run_verify(suite, o, out);
  } catch (const NumericError& e) {
    err << "detmart: numerical failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const io::ConfigError& e) {
    err << "detmart: " << e.what() << '\n';
    return kBadInput;
  } catch (const CapacityError& e) {
    err << "detmart: capacity exceeded: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::invalid_argument& e) {
    err << "detmart: invalid input: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::domain_error& e) {
    err << "detmart: outside the domain: " << e.what() << '\n';
    return kBadInput;
  } catch (const IoError& e) {
    err << "detmart: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::exception& e) {
    err << "detmart: " << e.what() << '\n';
    return kNumeric;
  }
}

}  // namespace detmart::cli
