#pragma once

#include <cstdint>

#include "mlmc_seis/model.hpp"
#include "mlmc_seis/pool.hpp"

namespace mlmcseis {

enum class SampleKind { kFineOnly, kCoupled };

struct SamplingOptions {
  int workers = 1;
  // Force the single-threaded reference path.
  bool serial = false;
};

// Evaluates samples (run, level, index) for index in [first, first + count)
// that the pool does not hold yet and appends them in ascending index order.
// Coupled samples evaluate the same key at `level` and `level - 1`.
// Returns the number of newly computed samples.
std::size_t run_samples(const ForwardModel& model, int level, SampleKind kind, std::uint64_t run,
                        std::uint64_t first, std::uint64_t count, SamplePool& pool,
                        const SamplingOptions& opts = {});

// Single evaluation, as stored in the pool.
CorrectionSample evaluate_sample(const ForwardModel& model, const SampleKey& key, SampleKind kind);

}  // namespace mlmcseis
