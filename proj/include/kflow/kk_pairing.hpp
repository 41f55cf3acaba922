#pragma once

#include "kflow/vn_model.hpp"

#include <functional>
#include <string>
#include <vector>

namespace kflow {

/// A block-respecting unital *-map ψ: N → N.
struct BlockMap {
    std::string name;
    std::function<BlockOperator(const BlockOperator&)> apply;

    BlockOperator operator()(const BlockOperator& x) const { return apply(x); }

    static BlockMap identity();
    /// x ↦ V x V* for a unitary V.
    static BlockMap conjugation(BlockOperator v);
};

/// Checks ψ(1) = 1 and ψ(ab) = ψ(a)ψ(b) on all pairs of generators to tol.
/// Returns the worst defect; throws PreconditionError above tol.
double verify_multiplicative(const BlockMap& psi, const std::vector<BlockOperator>& generators,
                             const VnAlgebra& alg, double tol = 1e-10);

/// Selfadjoint q with spectrum in [0, 1) and u = exp(2πi q).
BlockOperator unitary_log(const BlockOperator& u, const Tolerances& tol = {});

/// exp(2πi q) for selfadjoint q.
BlockOperator unitary_exp(const BlockOperator& q);

/// ||π(cos(πq) + 2q - 1)|| for q with π(q² - q) ≈ 0.
double cos_identity_check(const BlockOperator& q, const VnAlgebra& alg, const Tolerances& tol = {});

struct PairingData {
    VnAlgebra alg;
    BlockMap psi;
    BlockOperator p;  // projection modulo J
    BlockOperator u;  // unitary
    BlockOperator q;  // selfadjoint, u = exp(2πi q)
};

/// Validates the hypotheses and computes q = unitary_log(u).
PairingData make_pairing_data(VnAlgebra alg, BlockOperator p, BlockOperator u, BlockMap psi = BlockMap::identity(),
                              const Tolerances& tol = {});

struct IntermediateOperator {
    BlockOperator w;
    double residual_left = 0.0;   // ||π(W*W - 1)||
    double residual_right = 0.0;  // ||π(WW* - 1)||
};

/// W = -iψ(cos πq) + ψ(sin πq)(2p - 1), with π(W) unitary.
IntermediateOperator intermediate_operator(const PairingData& data, const Tolerances& tol = {});

struct PairingReport {
    K0Class value;             // ∂[π(pψ(u)p + 1 - p)]
    K0Class via_intermediate;  // ∂[π(W)]
    double commutator = 0.0;   // ||π([p, ψ(u)])||
    double cos_residual = 0.0;
    double w_residual = 0.0;
    bool snapped = false;      // p was replaced by its nearest projection
};

PairingReport pairing_report(const PairingData& data, const Tolerances& tol = {});
K0Class pairing_via_boundary(const PairingData& data, const Tolerances& tol = {});

}  // namespace kflow
