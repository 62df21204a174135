#include "odekernel/grid.hpp"

#include <cmath>
#include <string>

#include "odekernel/errors.hpp"

namespace odekernel {

TimeGrid::TimeGrid(Eigen::VectorXd times) : times_(std::move(times)) {
  if (times_.size() < 3) {
    throw InvalidGridError("time grid needs at least 3 points, got " +
                           std::to_string(times_.size()));
  }
  for (Eigen::Index i = 0; i < times_.size(); ++i) {
    if (!std::isfinite(times_[i])) {
      throw InvalidGridError("time grid contains a non-finite value at index " +
                             std::to_string(i));
    }
    if (i > 0 && !(times_[i] > times_[i - 1])) {
      throw InvalidGridError("time grid is not strictly increasing at index " +
                             std::to_string(i));
    }
  }
}

TimeGrid::TimeGrid(const std::vector<double>& times)
    : TimeGrid(Eigen::Map<const Eigen::VectorXd>(times.data(),
                                                 static_cast<Eigen::Index>(times.size()))) {}

TimeGrid TimeGrid::uniform(double start, double end, int n) {
  if (n < 3) throw InvalidGridError("uniform grid needs n >= 3");
  if (!(end > start)) throw InvalidGridError("uniform grid needs end > start");
  Eigen::VectorXd t(n);
  for (int i = 0; i < n; ++i) t[i] = start + (end - start) * i / (n - 1);
  t[n - 1] = end;
  return TimeGrid(std::move(t));
}

}  // namespace odekernel
