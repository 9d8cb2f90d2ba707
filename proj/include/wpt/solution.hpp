#pragma once

#include <Eigen/Dense>

#include <string>

namespace wpt {

struct SolveStats {
    long nodes_explored = 0;
    long lps_solved = 0;
    double wall_time_s = 0.0;
};

// A certified allocation: tone powers x (= s^2), amplitudes s, the KKT
// multipliers, and the maximization value as evaluated by qp::objective.
struct Solution {
    Eigen::VectorXd x;
    Eigen::VectorXd s;
    Eigen::VectorXd mu;
    Eigen::VectorXd lambda;
    double objective = 0.0;
    double kkt_residual = 0.0;
    SolveStats stats;
    std::string method;
};

}  // namespace wpt
