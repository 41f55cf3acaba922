#pragma once

#include "kflow/vn_model.hpp"

namespace kflow {

/// Nonnegative spectral projection χ_[0,∞)(T), blockwise. Eigenvalues in
/// [-eps_zero, 0) are treated as 0 and land in the range.
BlockOperator chi(const BlockOperator& t, const Tolerances& tol = {});

/// Partial isometry of the polar decomposition S = u|S|.
BlockOperator polar_phase(const BlockOperator& s, const Tolerances& tol = {});

/// Projection N(S) onto the kernel of S.
BlockOperator null_projection(const BlockOperator& s, const Tolerances& tol = {});

/// Projection R(S) onto the closed range of S.
BlockOperator range_projection(const BlockOperator& s, const Tolerances& tol = {});

/// p ∩ q: projection onto range(p) ∩ range(q), i.e. the eigenvalue-2
/// eigenspace of p + q.
BlockOperator proj_intersection(const BlockOperator& p, const BlockOperator& q, const Tolerances& tol = {});

/// χ_(1/2,∞)(e) for selfadjoint e with ||e² - e|| < 1/4.
BlockOperator nearest_projection(const BlockOperator& e, const Tolerances& tol = {});

/// 1 - p.
BlockOperator complement(const BlockOperator& p);

}  // namespace kflow
