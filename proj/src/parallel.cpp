#include "fracheat/parallel.hpp"

#include <cstdlib>
#include <string>

namespace fracheat {

int worker_count() {
  if (const char* env = std::getenv("FRACHEAT_WORKERS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace fracheat
