#pragma once

namespace kflow {

/// Numerical thresholds shared by every module. Relative entries are scaled
/// by max(1, ||operator||) (or 1 + ||operator|| for projection checks) at the
/// point of use.
struct Tolerances {
    double proj_rel = 1e-8;      // ||P^2 - P||, ||P - P*||
    double kernel_rel = 1e-10;   // singular values counted as zero
    double zero_rel = 1e-10;     // eigenvalues in [-eps, 0) still count as >= 0
    double intersection = 1e-8;  // eigenvalue-2 window of p + q
    double gap = 1e-8;           // quotient invertibility / Fredholm witness
    double partition_margin = 0.05;
    int max_depth = 20;
};

}  // namespace kflow
