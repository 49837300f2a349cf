#pragma once

#include <Eigen/Dense>

namespace funcdist {

// Feature matrix (rows = observations) plus scalar target.
struct Dataset {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;

    Eigen::Index rows() const { return X.rows(); }
};

}  // namespace funcdist
