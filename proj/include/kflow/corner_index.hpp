#pragma once

#include "kflow/vn_model.hpp"

namespace kflow {

struct FredholmReport {
    bool fredholm = false;
    /// Smallest singular value of the corner restriction over the non-ideal
    /// blocks; +inf when there is nothing to check (N/J = 0 or empty corners).
    double min_gap = 0.0;
    /// First block that failed, if any.
    long failing_block = -1;
};

/// Decides whether S ∈ qNp is invertible modulo J as a map range(p) → range(q).
FredholmReport is_corner_fredholm(const BlockOperator& s, const BlockOperator& p, const BlockOperator& q,
                                  const VnAlgebra& alg, const Tolerances& tol = {});

/// (q-p)-index [N(S) ∩ p] - [N(S*) ∩ q] in K0(J).
K0Class corner_index(const BlockOperator& s, const BlockOperator& p, const BlockOperator& q,
                     const VnAlgebra& alg, const Tolerances& tol = {});

/// ∂[π(S)] = [N(S)] - [N(S*)] for S whose image in N/J is unitary.
K0Class boundary_map(const BlockOperator& s, const VnAlgebra& alg, const Tolerances& tol = {});

}  // namespace kflow
