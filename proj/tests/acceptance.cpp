// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
// Optional arguments select criterion ids.
#include <cstdio>
#include <cstdlib>
#include <string>

#include "calibr/acceptance.hpp"

int main(int argc, char** argv) {
  calibr::AcceptanceOptions opts;
  for (int i = 1; i < argc; ++i) opts.only.push_back(std::atoi(argv[i]));
  int failed = 0;
  calibr::run_acceptance(opts, [&](const calibr::CriterionResult& r) {
    failed += !r.passed;
    std::printf("[%s] criterion %2d %s: %s (%.1f s)\n", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(),
                r.detail.c_str(), r.seconds);
    std::fflush(stdout);
  });
  std::printf("%s: %d failed\n", failed ? "ACCEPTANCE FAILED" : "ACCEPTANCE PASSED", failed);
  return failed ? 1 : 0;
}
