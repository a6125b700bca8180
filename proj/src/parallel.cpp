#include "calibr/parallel.hpp"

#include <cstdlib>
#include <string>

namespace calibr {

namespace {

std::atomic<int>& configured_threads() {
  static std::atomic<int> value{0};
  return value;
}

}  // namespace

int default_threads() {
  const int configured = configured_threads().load();
  if (configured > 0) return configured;
  if (const char* env = std::getenv("CALIBR_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
  }
  return 1;
}

void set_default_threads(int threads) { configured_threads().store(threads > 0 ? threads : 0); }

}  // namespace calibr
