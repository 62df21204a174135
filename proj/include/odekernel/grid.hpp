#ifndef ODEKERNEL_GRID_HPP
#define ODEKERNEL_GRID_HPP

#include <Eigen/Dense>
#include <vector>

namespace odekernel {

/// Strictly increasing observation times, at least three of them.
class TimeGrid {
 public:
  explicit TimeGrid(Eigen::VectorXd times);
  explicit TimeGrid(const std::vector<double>& times);

  /// n equally spaced points on [start, end].
  static TimeGrid uniform(double start, double end, int n);

  Eigen::Index size() const { return times_.size(); }
  double operator[](Eigen::Index i) const { return times_[i]; }
  double front() const { return times_[0]; }
  double back() const { return times_[times_.size() - 1]; }
  const Eigen::VectorXd& times() const { return times_; }

 private:
  Eigen::VectorXd times_;
};

}  // namespace odekernel

#endif  // ODEKERNEL_GRID_HPP
