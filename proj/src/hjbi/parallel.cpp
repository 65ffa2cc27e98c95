#include "hjbi/parallel.hpp"

#include <atomic>
#include <cstdlib>

namespace hjbi {

namespace {
std::atomic<int> g_threads{0};

int env_threads() {
  if (const char* env = std::getenv("HJBI_THREADS")) {
    const int value = std::atoi(env);
    if (value > 0) return value;
  }
  return 1;
}
}  // namespace

void set_thread_count(int threads) { g_threads.store(std::max(0, threads)); }

int thread_count() {
  const int configured = g_threads.load();
  return configured > 0 ? configured : env_threads();
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace hjbi
