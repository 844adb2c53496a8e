#pragma once

#include <complex>

#include <Eigen/Dense>

namespace qbatt {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Hard cap on lattice size: dense storage grows as 4^L.
inline constexpr int kMaxSites = 14;

// Relative asymmetry accepted (and symmetrized away) at construction.
inline constexpr double kHermitianTol = 1e-12;

// Absolute slack applied to proved inequalities before flagging a violation.
inline constexpr double kBoundSlack = 1e-9;

}  // namespace qbatt
