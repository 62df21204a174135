#ifndef ODEKERNEL_OBSERVATIONS_HPP
#define ODEKERNEL_OBSERVATIONS_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "odekernel/grid.hpp"

namespace odekernel {

/// Noisy state measurements y_j(t_i) (m x n) plus optional exogenous inputs (p x n).
struct ObservationSet {
  ObservationSet(TimeGrid grid, Eigen::MatrixXd states, Eigen::MatrixXd inputs = {});

  TimeGrid grid;
  Eigen::MatrixXd states;
  Eigen::MatrixXd inputs;
  std::vector<std::string> state_names;
  std::vector<std::string> input_names;

  Eigen::Index num_states() const { return states.rows(); }
  Eigen::Index num_inputs() const { return inputs.rows(); }
  Eigen::Index num_times() const { return grid.size(); }
};

}  // namespace odekernel

#endif  // ODEKERNEL_OBSERVATIONS_HPP
