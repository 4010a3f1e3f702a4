#pragma once

#include <cstddef>
#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace malgpro {

/// Worker count: MALGPRO_THREADS if set and positive, else hardware concurrency.
std::size_t thread_count();

/// Paths per reduction chunk. Fixed so results do not depend on thread count.
inline constexpr std::size_t kChunkSize = 32;

/// Calls body(chunk_index, begin, end) for each chunk of [0, count), spread over
/// thread_count() workers. Exceptions are rethrown in chunk order.
template <class Body>
void for_each_chunk(std::size_t count, Body&& body) {
  const std::size_t chunks = (count + kChunkSize - 1) / kChunkSize;
  const std::size_t workers = std::min(thread_count(), chunks);
  std::vector<std::exception_ptr> errors(chunks);
  auto run = [&](std::size_t worker) {
    for (std::size_t c = worker; c < chunks; c += workers) {
      try {
        body(c, c * kChunkSize, std::min(count, (c + 1) * kChunkSize));
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace malgpro
