#ifndef GNNLAB_TYPES_HPP
#define GNNLAB_TYPES_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace gnnlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using IndexList = std::vector<std::size_t>;

} // namespace gnnlab

#endif // GNNLAB_TYPES_HPP
