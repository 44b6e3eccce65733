#include "mlmc_seis/sampling.hpp"

#include <omp.h>

#include <chrono>
#include <ctime>
#include <exception>
#include <sstream>
#include <vector>

#include "mlmc_seis/error.hpp"

namespace mlmcseis {

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

CorrectionSample evaluate_sample(const ForwardModel& model, const SampleKey& key, SampleKind kind) {
  if (kind == SampleKind::kCoupled && key.level < 1)
    throw ConfigError("coupled samples need level >= 1");
  CorrectionSample s;
  s.qoi_kind = model.qoi_kind();
  s.run = key.run;
  s.level = key.level;
  s.index = key.index;
  s.seed = key.digest();
  try {
    const auto fine = model.evaluate(key, key.level);
    s.fine = fine.value;
    s.fine_work_s = fine.work_s;
    s.work_s = fine.work_s;
    if (kind == SampleKind::kCoupled) {
      const auto coarse = model.evaluate(key, key.level - 1);
      s.coarse = coarse.value;
      s.work_s += coarse.work_s;
    }
  } catch (const SolverFailure& e) {
    std::ostringstream msg;
    msg << e.what() << " [run=" << key.run << " level=" << key.level << " index=" << key.index
        << " seed=" << key.digest() << "]";
    throw SolverFailure(msg.str());
  }
  s.timestamp = utc_now();
  return s;
}

std::size_t run_samples(const ForwardModel& model, int level, SampleKind kind, std::uint64_t run,
                        std::uint64_t first, std::uint64_t count, SamplePool& pool,
                        const SamplingOptions& opts) {
  std::vector<std::uint64_t> todo;
  for (std::uint64_t i = first; i < first + count; ++i)
    if (!pool.contains(run, level, i)) todo.push_back(i);
  if (todo.empty()) return 0;

  const int workers = std::max(1, opts.workers);
  if (opts.serial || workers == 1) {
    for (auto i : todo) pool.append(evaluate_sample(model, {run, level, i}, kind));
    return todo.size();
  }

  // Chunks of a few samples per worker: evaluated concurrently, appended in
  // index order, so the pool file is independent of scheduling and an
  // interrupted run loses at most one chunk.
  const std::size_t chunk = static_cast<std::size_t>(workers) * 4;
  for (std::size_t start = 0; start < todo.size(); start += chunk) {
    const std::size_t stop = std::min(todo.size(), start + chunk);
    std::vector<CorrectionSample> batch(stop - start);
    std::vector<std::exception_ptr> errors(stop - start);
#pragma omp parallel for num_threads(workers) schedule(dynamic, 1)
    for (std::size_t k = start; k < stop; ++k) {
      try {
        batch[k - start] = evaluate_sample(model, {run, level, todo[k]}, kind);
      } catch (...) {
        errors[k - start] = std::current_exception();
      }
    }
    for (std::size_t k = 0; k < batch.size(); ++k) {
      if (errors[k]) std::rethrow_exception(errors[k]);
      pool.append(batch[k]);
    }
  }
  return todo.size();
}

}  // namespace mlmcseis
