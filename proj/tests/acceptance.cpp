// One line per acceptance criterion; the runtime limit is part of each criterion.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>

#include "detmart/verify.hpp"

using namespace detmart;

int main(int argc, char** argv) {
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;
  bool ok = true;
  for (const verify::Criterion& c : verify::criteria()) {
    if (only && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<verify::Check> checks;
    std::string error;
    try {
      checks = verify::run_criterion(c.id);
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = error.empty() && verify::all_pass(checks) && secs < c.runtime_limit;
    ok = ok && pass;
    std::printf("%s criterion %d: %s (%.1f s, limit %.0f s)\n", pass ? "PASS" : "FAIL", c.id, c.title.c_str(), secs,
                c.runtime_limit);
    for (const auto& k : checks)
      std::printf("    %-4s %-44s measured %.3e  tolerance %.3e\n", k.pass ? "ok" : "FAIL", k.name.c_str(), k.measured,
                  k.tolerance);
    if (!error.empty()) std::printf("    error: %s\n", error.c_str());
    std::fflush(stdout);
  }
  return ok ? 0 : 1;
}
