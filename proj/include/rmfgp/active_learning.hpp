#pragma once

#include <cstdint>
#include <vector>

#include "rmfgp/multifidelity.hpp"

namespace rmfgp {

struct AcquisitionRecord {
  int iteration = 0;
  std::vector<std::size_t> chosen;  // indices into the low-fidelity dataset
  double test_relative_error = 0.0;
};

// Bookkeeping for the variance-maximizing acquisition loop. pool_indices are
// low-fidelity rows not yet labeled high-fidelity; they never overlap the
// current high set.
struct AcquisitionState {
  std::vector<std::size_t> pool_indices;
  double eta = 0.0;  // stop when test relative error < eta (0 disables)
  int max_iters = 0;
  std::vector<int> batch_sizes;
  std::vector<AcquisitionRecord> history;
};

// Indices (into pool_X rows) of the k largest NARGP predictive variances,
// ties broken by lowest index. One variance pass, no refit inside a batch.
std::vector<std::size_t> acquire(const NARGPModel& model, const Matrix& pool_X,
                                 std::size_t k, int n_mc, std::uint64_t seed);

// True when the error threshold is met or the iteration budget is exhausted.
bool should_stop(double test_relative_error, const AcquisitionState& state,
                 int iteration);

}  // namespace rmfgp
