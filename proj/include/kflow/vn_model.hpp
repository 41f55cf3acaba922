#pragma once

#include "kflow/linalg.hpp"
#include "kflow/tolerances.hpp"

#include <cstddef>
#include <initializer_list>
#include <utility>
#include <vector>

namespace kflow {

struct Block {
    int dim = 1;
    double weight = 1.0;  // trace weight
    bool in_ideal = false;
};

/// Finite model of a von Neumann algebra with a distinguished ideal and a
/// faithful trace: N = ⊕ M_{dim_i}(C), J = sum of the blocks flagged
/// in_ideal, tau = Σ weight_i · Tr_i. The quotient N/J is obtained by
/// dropping the ideal blocks.
class VnAlgebra {
public:
    explicit VnAlgebra(std::vector<Block> blocks);

    const std::vector<Block>& blocks() const { return blocks_; }
    std::size_t size() const { return blocks_.size(); }
    const Block& operator[](std::size_t i) const { return blocks_[i]; }

    /// Positions (in block order) of the ideal blocks; K0 classes are indexed by these.
    const std::vector<std::size_t>& ideal_blocks() const { return ideal_; }
    std::size_t ideal_count() const { return ideal_.size(); }
    bool all_ideal() const { return ideal_.size() == blocks_.size(); }

    /// Same blocks with a different ideal mask.
    VnAlgebra with_ideal_mask(const std::vector<bool>& mask) const;

    friend bool operator==(const VnAlgebra&, const VnAlgebra&);

private:
    std::vector<Block> blocks_;
    std::vector<std::size_t> ideal_;
};

/// An element of N: one square complex matrix per block.
class BlockOperator {
public:
    BlockOperator() = default;
    explicit BlockOperator(std::vector<Mat> blocks) : blocks_(std::move(blocks)) {}

    static BlockOperator zero(const VnAlgebra& alg);
    static BlockOperator identity(const VnAlgebra& alg);

    std::size_t size() const { return blocks_.size(); }
    const Mat& block(std::size_t i) const { return blocks_[i]; }
    Mat& block(std::size_t i) { return blocks_[i]; }
    const std::vector<Mat>& blocks() const { return blocks_; }

    BlockOperator adjoint() const;
    double norm() const;  // max spectral norm over blocks

    /// Throws ModelError unless block count and shapes match alg.
    void check_conforms(const VnAlgebra& alg) const;
    bool conforms(const VnAlgebra& alg) const;

    // Predicates use eps = tol.proj_rel · (1 + ||·||).
    bool is_selfadjoint(const Tolerances& tol = {}) const;
    bool is_projection(const Tolerances& tol = {}) const;
    bool is_unitary(const Tolerances& tol = {}) const;

    /// Blockwise f(T) for selfadjoint T.
    BlockOperator apply(const std::function<double(double)>& f) const;

    BlockOperator& operator+=(const BlockOperator& o);
    BlockOperator& operator-=(const BlockOperator& o);
    BlockOperator& operator*=(cplx s);

    friend BlockOperator operator+(BlockOperator a, const BlockOperator& b) { return a += b; }
    friend BlockOperator operator-(BlockOperator a, const BlockOperator& b) { return a -= b; }
    friend BlockOperator operator*(BlockOperator a, cplx s) { return a *= s; }
    friend BlockOperator operator*(cplx s, BlockOperator a) { return a *= s; }
    friend BlockOperator operator*(double s, BlockOperator a) { return a *= cplx(s, 0.0); }
    friend BlockOperator operator-(BlockOperator a) { return a *= cplx(-1.0, 0.0); }
    friend BlockOperator operator*(const BlockOperator& a, const BlockOperator& b);

private:
    std::vector<Mat> blocks_;
};

/// Build a block-diagonal operator from per-block matrices.
BlockOperator make_operator(std::initializer_list<Mat> blocks);

/// Element of K0(J) ≅ Z^{#ideal blocks}: per-ideal-block rank differences.
class K0Class {
public:
    K0Class() = default;
    explicit K0Class(std::vector<long> ranks) : ranks_(std::move(ranks)) {}
    static K0Class zero(const VnAlgebra& alg) { return K0Class(std::vector<long>(alg.ideal_count(), 0)); }

    const std::vector<long>& ranks() const { return ranks_; }
    std::size_t size() const { return ranks_.size(); }
    long operator[](std::size_t i) const { return ranks_[i]; }
    bool is_zero() const;

    K0Class& operator+=(const K0Class& o);
    K0Class& operator-=(const K0Class& o);
    friend K0Class operator+(K0Class a, const K0Class& b) { return a += b; }
    friend K0Class operator-(K0Class a, const K0Class& b) { return a -= b; }
    friend K0Class operator-(const K0Class& a);
    friend K0Class operator*(long k, const K0Class& a);
    friend bool operator==(const K0Class&, const K0Class&) = default;

private:
    std::vector<long> ranks_;
};

/// Piecewise-linear path t ∈ [0,1] ↦ BlockOperator through keyframes.
class OperatorPath {
public:
    struct Keyframe {
        double t;
        BlockOperator op;
    };

    explicit OperatorPath(std::vector<Keyframe> keyframes);

    /// Linear path from a (t=0) to b (t=1).
    static OperatorPath linear(BlockOperator a, BlockOperator b);
    static OperatorPath constant(BlockOperator a);
    /// Samples f at n+1 equispaced points as keyframes.
    static OperatorPath sampled(const std::function<BlockOperator(double)>& f, int n);

    BlockOperator at(double t) const;
    const std::vector<Keyframe>& keyframes() const { return keys_; }
    /// Index k of the segment [t_k, t_{k+1}] containing t.
    std::size_t segment_of(double t) const;

    OperatorPath reversed() const;
    /// Keyframe-wise image under f.
    OperatorPath map(const std::function<BlockOperator(const BlockOperator&)>& f) const;
    /// Runs a on [0,1/2] and b on [1/2,1]; a(1) must equal b(0).
    static OperatorPath concatenate(const OperatorPath& a, const OperatorPath& b, double tol = 1e-12);

    void check_conforms(const VnAlgebra& alg) const;

private:
    std::vector<Keyframe> keys_;
};

/// ||π(T)||: max spectral norm over the non-ideal blocks, 0 when J = N.
double quotient_norm(const BlockOperator& t, const VnAlgebra& alg);

/// Projection rank per block, counted by eigenvalues above 1/2.
std::vector<long> block_ranks(const BlockOperator& p);

/// Σ weight_i · rank(p_i).
double tau(const BlockOperator& p, const VnAlgebra& alg, const Tolerances& tol = {});

/// Σ over ideal blocks of weight_i · ranks_i.
double tau_star(const K0Class& c, const VnAlgebra& alg);

/// [p] - [q] as a K0(J) class; p - q must vanish on non-ideal blocks.
K0Class k0_of_difference(const BlockOperator& p, const BlockOperator& q, const VnAlgebra& alg,
                         const Tolerances& tol = {});

/// True when every non-ideal block of t has spectral norm <= eps.
bool vanishes_off_ideal(const BlockOperator& t, const VnAlgebra& alg, double eps);

}  // namespace kflow
