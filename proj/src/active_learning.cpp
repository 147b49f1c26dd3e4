#include "rmfgp/active_learning.hpp"

#include <algorithm>
#include <numeric>

namespace rmfgp {

std::vector<std::size_t> acquire(const NARGPModel& model, const Matrix& pool_X,
                                 std::size_t k, int n_mc, std::uint64_t seed) {
  const auto m = static_cast<std::size_t>(pool_X.rows());
  if (m == 0) throw EmptyPool("acquisition pool is empty");
  if (k > m) throw InvalidArgument("batch size exceeds pool size");

  const PredictResult pred = predict_nargp(model, pool_X, n_mc, seed);

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  // descending variance, lowest index on ties
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pred.variance(static_cast<Eigen::Index>(a)) >
           pred.variance(static_cast<Eigen::Index>(b));
  });
  order.resize(k);
  return order;
}

bool should_stop(double test_relative_error, const AcquisitionState& state,
                 int iteration) {
  if (state.eta > 0.0 && test_relative_error < state.eta) return true;
  return iteration >= state.max_iters;
}

}  // namespace rmfgp
