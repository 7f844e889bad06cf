#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "detmart/config.hpp"
#include "detmart/fredholm.hpp"
#include "detmart/kernels.hpp"
#include "detmart/oconnell.hpp"
#include "detmart/simulate.hpp"

namespace detmart::io {

using json = nlohmann::json;

inline constexpr const char* kSchema = "detmart/1";

// field is a JSON pointer such as /mc/n_paths, or "line N" for syntax errors
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message);
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct KernelSpec {
  std::string variant = "auto";  // auto picks general, rw or multipoint from process and xi
  int order = 0;                 // N for the extended kernels
  double nu = 0.0;               // extended_laguerre, bessel, besselzero
};

struct FunctionalSpec {
  std::string kind = "one";  // one | all_above | mgf
  double time = 1.0;
  double level = 0.0;
  TestFunctionSpec spec;     // mgf only
};

struct RunConfig {
  std::string command;  // kernel | simulate | estimate | fredholm | oconnell
  ProcessKind process = ProcessKind::bm();
  PointConfiguration xi;
  // kernel, fredholm
  KernelSpec kernel;
  std::vector<std::array<double, 4>> points;  // (s, x, t, y)
  // simulate
  std::vector<double> times;
  std::string sampler = "noncolliding";  // free | noncolliding
  bool companions = false;
  // estimate
  std::string estimator = "dmr";  // dmr | cpr | direct
  FunctionalSpec functional;
  double horizon = -1.0;
  // fredholm
  TestFunctionSpec spec;
  int quad_order = 0;  // 0: 64 for fredholm, 128 for oconnell
  bool excess_block = false;
  bool monte_carlo = false;
  // oconnell
  LiftParams lift;
  std::string route = "cpr";  // cpr | dmr | reciprocal_reference | reciprocal_cpr
  // shared
  long n_paths = 100000;
  std::optional<std::uint64_t> seed;
  SdeOptions sde;
  std::string output_path;
  std::string output_format;  // csv for kernel and simulate, json otherwise
};

// Parse and validate; defaults are filled in, so to_json(parse_config(j)) is the resolved config.
RunConfig parse_config(const json& j);
RunConfig parse_config_text(const std::string& text);
// checks that need the command-line overrides applied first (seed present, n_paths positive)
void finalize(RunConfig& c);
json to_json(const RunConfig& c);

PointConfiguration parse_xi(const json& j, const std::string& path);
json to_json(const PointConfiguration& xi);
TestFunctionSpec parse_spec(const json& j, const std::string& path);
json to_json(const TestFunctionSpec& spec);  // indicator and lattice chi only
LiftParams parse_lift(const json& j, const std::string& path);
json to_json(const LiftParams& p);
json to_json(const Estimate& e);
json to_json(const ComplexEstimate& e);

CorrelationKernel make_kernel(const RunConfig& c);
PathFunctional make_functional(const FunctionalSpec& f);

// two-space indent, trailing newline
std::string dump(const json& j);

}  // namespace detmart::io
