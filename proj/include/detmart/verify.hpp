#pragma once

#include <string>
#include <vector>

#include "detmart/config.hpp"

namespace detmart::verify {

struct Check {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct Options {
  int workers = 0;
  // replaces phi_simple in the determinant identity; empty means phi_simple
  PhiEvaluator phi;
};

struct Criterion {
  int id;
  std::string title;
  double runtime_limit;  // seconds
};

const std::vector<Criterion>& criteria();
std::vector<Check> run_criterion(int id, const Options& opts = {});

// identities, martingales, dmr_rw, dmr_bm, fredholm, relaxation, oconnell
const std::vector<std::string>& suite_names();
// throws std::invalid_argument for an unknown suite
std::vector<Check> run_suite(const std::string& suite, const Options& opts = {});

bool all_pass(const std::vector<Check>& checks);

}  // namespace detmart::verify
