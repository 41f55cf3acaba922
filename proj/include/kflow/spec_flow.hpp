#pragma once

#include "kflow/vn_model.hpp"

#include <vector>

namespace kflow {

struct PathCertificate {
    /// min |eigenvalue| of π(B_t) over all samples; +inf when N/J = 0.
    double min_gap = 0.0;
    /// max over keyframe segments of ||π(B_{k+1} - B_k)|| / (t_{k+1} - t_k).
    double max_lipschitz = 0.0;
    std::vector<double> samples;
};

/// Verifies that every B_t is J-Fredholm (0 ∉ spec π(B_t)). Each segment is
/// refined until Weyl's inequality certifies the gap between samples.
/// Throws PreconditionError("path leaves F_sa at t = ...") otherwise.
PathCertificate certify_path(const OperatorPath& path, const VnAlgebra& alg, const Tolerances& tol = {});

/// ||π(χ(B_t)) - π(χ(B_s))||.
double quotient_chi_distance(const BlockOperator& bt, const BlockOperator& bs, const VnAlgebra& alg,
                             const Tolerances& tol = {});

/// Partition 0 = t_0 < ... < t_n = 1 with quotient χ-distance < 1/2 - margin
/// on each subinterval.
std::vector<double> find_partition(const OperatorPath& path, const VnAlgebra& alg, const Tolerances& tol = {});

struct SpectralFlowTrace {
    K0Class value;
    K0Class closed_form;
    std::vector<double> partition;
    std::vector<double> gaps;              // quotient gap at each t_i
    std::vector<K0Class> contributions;    // per-subinterval term
    double min_quotient_gap = 0.0;
};

/// Σ_i [(1-p_i) ∩ p_{i-1}] - [(1-p_{i-1}) ∩ p_i] over the given partition,
/// cross-checked against Ind_{(p_n-p_0)}(p_n ⋯ p_0). The partition must
/// start at 0, end at 1 and satisfy the 1/2 bound at its points.
SpectralFlowTrace spectral_flow_on_partition(const OperatorPath& path, const VnAlgebra& alg,
                                             const std::vector<double>& partition, const Tolerances& tol = {});

SpectralFlowTrace spectral_flow_trace(const OperatorPath& path, const VnAlgebra& alg, const Tolerances& tol = {});

K0Class spectral_flow(const OperatorPath& path, const VnAlgebra& alg, const Tolerances& tol = {});

/// τ*(sf).
double numeric_spectral_flow(const OperatorPath& path, const VnAlgebra& alg, const Tolerances& tol = {});

}  // namespace kflow
