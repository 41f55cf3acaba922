#pragma once

#include "kflow/vn_model.hpp"

#include <string>
#include <utility>
#include <vector>

namespace kflow {

/// F_D = D(1 + D²)^{-1/2}.
BlockOperator bounded_transform(const BlockOperator& d, const Tolerances& tol = {});

/// Finite-dimensional stand-in for a unital von Neumann spectral triple
/// (A, H, D) relative to (N, J). D is a truncation; the ideal-resolvent
/// condition a(i - D)^{-1} ∈ J is checked on construction.
class VnTriple {
public:
    using Generator = std::pair<std::string, BlockOperator>;

    VnTriple(VnAlgebra alg, std::vector<Generator> generators, BlockOperator d, const Tolerances& tol = {});

    const VnAlgebra& algebra() const { return alg_; }
    const std::vector<Generator>& generators() const { return gens_; }
    const BlockOperator& generator(const std::string& name) const;
    const BlockOperator& dirac() const { return d_; }
    const BlockOperator& bounded() const { return f_; }
    /// p_F = (F_D + 1)/2.
    const BlockOperator& p_f() const { return pf_; }
    /// p = χ(F_D).
    const BlockOperator& positive_projection() const { return p_; }
    /// max over generators of ||[D, a]||.
    double max_commutator_norm() const { return max_comm_; }

private:
    VnAlgebra alg_;
    std::vector<Generator> gens_;
    BlockOperator d_, f_, pf_, p_;
    double max_comm_ = 0.0;
};

struct KasparovEntry {
    std::string name;
    double commutator = 0.0;         // ||π([F_D, a])||
    double resolvent_defect = 0.0;   // ||π(a(1 - F_D²))||
    double selfadjoint_defect = 0.0; // ||π(a(F_D - F_D*))||
};

struct KasparovReport {
    bool passed = true;
    std::vector<KasparovEntry> entries;
    std::vector<std::string> failures;
};

KasparovReport check_kasparov_module(const VnTriple& triple, const Tolerances& tol = {});

struct IntegralReport {
    double residual = 0.0;           // ||integral - direct|| (spectral norm)
    double relative_residual = 0.0;  // residual / ||direct||
    double direct_norm = 0.0;
    double tail_bound = 0.0;         // certified bound on the truncated tail
    double theta_max = 0.0;          // integration cut in θ (λ = tan²θ)
    long evaluations = 0;
};

/// Compares D[(1+D²)^{-1/2}, a]b computed by eigendecomposition with
/// (1/π)∫_0^∞ λ^{-1/2} D[R(λ), a]b dλ, R(λ) = (1 + D² + λ)^{-1}, evaluated by
/// adaptive Simpson quadrature on λ = tan²θ.
IntegralReport resolvent_integral_check(const VnTriple& triple, const BlockOperator& a, const BlockOperator& b,
                                        const Tolerances& tol = {});

struct UnitaryFlowReport {
    K0Class value;           // ∂[π(pup + 1 - p)]
    K0Class via_p_f;         // ∂[π(p_F u p_F + 1 - p_F)]
    K0Class via_index;       // Ind_(p-p)(pup)
    double commutator = 0.0; // ||π([u, p])||
};

UnitaryFlowReport sf_unitary_report(const VnTriple& triple, const BlockOperator& u, const Tolerances& tol = {});

/// sf(D, u*Du).
K0Class sf_unitary(const VnTriple& triple, const BlockOperator& u, const Tolerances& tol = {});

struct UnboundedFlowReport {
    K0Class value;
    double max_quotient_drift = 0.0;  // max_t ||π(F_{D+A_t}) - π(F_{D+A_0})||
};

/// Spectral flow of t ↦ D + A_t through the bounded transform; depends only
/// on the endpoints.
UnboundedFlowReport sf_unbounded_report(const VnTriple& triple, const OperatorPath& perturbations,
                                        const Tolerances& tol = {});
K0Class sf_unbounded(const VnTriple& triple, const OperatorPath& perturbations, const Tolerances& tol = {});

/// Path A_t = t(u*Du - D), i.e. D_t = (1-t)D + t u*Du.
OperatorPath conjugation_perturbation_path(const VnTriple& triple, const BlockOperator& u, int segments = 1);

struct Pushforward {
    K0Class sub;   // indexed by the blocks of the sub-ideal
    K0Class full;  // indexed by the ideal blocks of the triple's algebra
};

/// C*-spectral flow over the sub-ideal B ⊆ J given by sub_mask (one flag per
/// block) and its image under the inclusion B → J.
Pushforward pushforward_sf(const VnTriple& triple, const BlockOperator& u, const std::vector<bool>& sub_mask,
                           const Tolerances& tol = {});

/// Zero-pads a class over sub_mask's blocks to the ideal blocks of alg.
K0Class include_class(const K0Class& sub, const std::vector<bool>& sub_mask, const VnAlgebra& alg);

}  // namespace kflow
