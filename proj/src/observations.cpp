#include "odekernel/observations.hpp"

#include "odekernel/errors.hpp"

namespace odekernel {

ObservationSet::ObservationSet(TimeGrid grid_, Eigen::MatrixXd states_, Eigen::MatrixXd inputs_)
    : grid(std::move(grid_)), states(std::move(states_)), inputs(std::move(inputs_)) {
  if (states.cols() != grid.size()) {
    throw SchemaError("state matrix has " + std::to_string(states.cols()) + " columns for " +
                      std::to_string(grid.size()) + " observation times");
  }
  if (inputs.size() == 0) inputs.resize(0, grid.size());
  if (inputs.cols() != grid.size()) throw SchemaError("input matrix does not match the grid");
  if (!states.allFinite() || !inputs.allFinite()) throw SchemaError("observations must be finite");
  for (Eigen::Index j = 0; j < states.rows(); ++j) state_names.push_back("state_" + std::to_string(j + 1));
  for (Eigen::Index j = 0; j < inputs.rows(); ++j) input_names.push_back("input_" + std::to_string(j + 1));
}

}  // namespace odekernel
