#pragma once

// Deterministic parallel execution of independent runs. Each run draws only
// from its own addressed random stream, so results depend on the run index
// alone and are returned in index order for any worker count.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

#include "erasure/protocol.hpp"

namespace erasure {

inline unsigned default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Calls fn(i) for i in [0, n) on up to `jobs` threads. If any call throws,
/// the exception of the lowest failing index is rethrown after all workers stop.
template <class Fn>
auto parallel_indexed(std::size_t n, unsigned jobs, Fn&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using Result = decltype(fn(std::size_t{}));
  std::vector<std::optional<Result>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
        failed.store(true);
      }
    }
  };

  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, jobs), std::max<std::size_t>(n, 1)));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<Result> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

struct EnsembleRequest {
  ProtocolKind kind = ProtocolKind::feedback;
  ProtocolSchedule schedule;
  SimConfig sim;
  PotentialParams potential;
  SensorModel sensor;
  InitWell init = InitWell::random;
  std::size_t n_runs = 300;
  std::uint64_t first_stream = 0;
};

/// Runs n_runs erasures with stream ids first_stream, first_stream+1, ...
inline std::vector<ErasureRun> run_ensemble(const EnsembleRequest& req, unsigned jobs) {
  req.potential.validate();
  req.sim.validate(req.potential);
  req.schedule.validate();
  req.sensor.validate();
  return parallel_indexed(req.n_runs, jobs, [&req](std::size_t i) {
    const std::uint64_t stream = req.first_stream + i;
    return req.kind == ProtocolKind::feedback
               ? run_feedback_erasure(req.schedule, req.sim, req.potential, req.sensor, req.init, stream)
               : run_openloop_erasure(req.schedule, req.sim, req.potential, req.init, stream);
  });
}

}  // namespace erasure
