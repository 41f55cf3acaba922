#include "kflow/vn_model.hpp"

#include "kflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kflow {

VnAlgebra::VnAlgebra(std::vector<Block> blocks) : blocks_(std::move(blocks)) {
    if (blocks_.empty()) throw ModelError("algebra needs at least one block");
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        const auto& b = blocks_[i];
        if (b.dim < 1) throw ModelError("block " + std::to_string(i) + ": dim must be >= 1");
        if (!(b.weight > 0.0) || !std::isfinite(b.weight))
            throw ModelError("block " + std::to_string(i) + ": weight must be positive");
        if (b.in_ideal) ideal_.push_back(i);
    }
}

VnAlgebra VnAlgebra::with_ideal_mask(const std::vector<bool>& mask) const {
    if (mask.size() != blocks_.size()) throw ModelError("ideal mask length does not match block count");
    auto blocks = blocks_;
    for (std::size_t i = 0; i < blocks.size(); ++i) blocks[i].in_ideal = mask[i];
    return VnAlgebra(std::move(blocks));
}

bool operator==(const VnAlgebra& a, const VnAlgebra& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].dim != b[i].dim || a[i].weight != b[i].weight || a[i].in_ideal != b[i].in_ideal) return false;
    }
    return true;
}

// ---- BlockOperator ---------------------------------------------------------

BlockOperator BlockOperator::zero(const VnAlgebra& alg) {
    std::vector<Mat> bs;
    bs.reserve(alg.size());
    for (const auto& b : alg.blocks()) bs.push_back(Mat::Zero(b.dim, b.dim));
    return BlockOperator(std::move(bs));
}

BlockOperator BlockOperator::identity(const VnAlgebra& alg) {
    std::vector<Mat> bs;
    bs.reserve(alg.size());
    for (const auto& b : alg.blocks()) bs.push_back(Mat::Identity(b.dim, b.dim));
    return BlockOperator(std::move(bs));
}

BlockOperator make_operator(std::initializer_list<Mat> blocks) { return BlockOperator(std::vector<Mat>(blocks)); }

BlockOperator BlockOperator::adjoint() const {
    std::vector<Mat> bs;
    bs.reserve(blocks_.size());
    for (const auto& m : blocks_) bs.push_back(m.adjoint());
    return BlockOperator(std::move(bs));
}

double BlockOperator::norm() const {
    double n = 0.0;
    for (const auto& m : blocks_) n = std::max(n, la::spectral_norm(m));
    return n;
}

bool BlockOperator::conforms(const VnAlgebra& alg) const {
    if (blocks_.size() != alg.size()) return false;
    for (std::size_t i = 0; i < alg.size(); ++i) {
        if (blocks_[i].rows() != alg[i].dim || blocks_[i].cols() != alg[i].dim) return false;
    }
    return true;
}

void BlockOperator::check_conforms(const VnAlgebra& alg) const {
    if (blocks_.size() != alg.size()) {
        std::ostringstream os;
        os << "shape mismatch: operator has " << blocks_.size() << " blocks, algebra has " << alg.size();
        throw ModelError(os.str());
    }
    for (std::size_t i = 0; i < alg.size(); ++i) {
        if (blocks_[i].rows() != alg[i].dim || blocks_[i].cols() != alg[i].dim) {
            std::ostringstream os;
            os << "shape mismatch in block " << i << ": " << blocks_[i].rows() << "x" << blocks_[i].cols()
               << ", expected " << alg[i].dim << "x" << alg[i].dim;
            throw ModelError(os.str());
        }
    }
}

bool BlockOperator::is_selfadjoint(const Tolerances& tol) const {
    for (const auto& m : blocks_) {
        if (m.rows() != m.cols()) return false;
        const double eps = tol.proj_rel * (1.0 + la::spectral_norm(m));
        if (la::spectral_norm(m - m.adjoint()) > eps) return false;
    }
    return true;
}

bool BlockOperator::is_projection(const Tolerances& tol) const {
    for (const auto& m : blocks_) {
        if (m.rows() != m.cols()) return false;
        const double eps = tol.proj_rel * (1.0 + la::spectral_norm(m));
        if (la::spectral_norm(m - m.adjoint()) > eps) return false;
        if (la::spectral_norm(m * m - m) > eps) return false;
    }
    return true;
}

bool BlockOperator::is_unitary(const Tolerances& tol) const {
    for (const auto& m : blocks_) {
        if (m.rows() != m.cols()) return false;
        const Mat id = Mat::Identity(m.rows(), m.cols());
        const double eps = tol.proj_rel * (1.0 + la::spectral_norm(m));
        if (la::spectral_norm(m.adjoint() * m - id) > eps) return false;
        if (la::spectral_norm(m * m.adjoint() - id) > eps) return false;
    }
    return true;
}

BlockOperator BlockOperator::apply(const std::function<double(double)>& f) const {
    std::vector<Mat> bs;
    bs.reserve(blocks_.size());
    for (const auto& m : blocks_) bs.push_back(la::apply(m, f));
    return BlockOperator(std::move(bs));
}

namespace {
void require_same_shape(const BlockOperator& a, const BlockOperator& b) {
    if (a.size() != b.size()) throw ModelError("shape mismatch: block counts differ");
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.block(i).rows() != b.block(i).rows() || a.block(i).cols() != b.block(i).cols())
            throw ModelError("shape mismatch in block " + std::to_string(i));
    }
}
}  // namespace

BlockOperator& BlockOperator::operator+=(const BlockOperator& o) {
    require_same_shape(*this, o);
    for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i] += o.blocks_[i];
    return *this;
}

BlockOperator& BlockOperator::operator-=(const BlockOperator& o) {
    require_same_shape(*this, o);
    for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i] -= o.blocks_[i];
    return *this;
}

BlockOperator& BlockOperator::operator*=(cplx s) {
    for (auto& m : blocks_) m *= s;
    return *this;
}

BlockOperator operator*(const BlockOperator& a, const BlockOperator& b) {
    require_same_shape(a, b);
    std::vector<Mat> bs;
    bs.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) bs.push_back(a.block(i) * b.block(i));
    return BlockOperator(std::move(bs));
}

// ---- K0Class ---------------------------------------------------------------

bool K0Class::is_zero() const {
    return std::all_of(ranks_.begin(), ranks_.end(), [](long r) { return r == 0; });
}

K0Class& K0Class::operator+=(const K0Class& o) {
    if (o.size() != size()) throw ModelError("K0 class index mismatch");
    for (std::size_t i = 0; i < ranks_.size(); ++i) ranks_[i] += o.ranks_[i];
    return *this;
}

K0Class& K0Class::operator-=(const K0Class& o) {
    if (o.size() != size()) throw ModelError("K0 class index mismatch");
    for (std::size_t i = 0; i < ranks_.size(); ++i) ranks_[i] -= o.ranks_[i];
    return *this;
}

K0Class operator-(const K0Class& a) {
    auto r = a.ranks_;
    for (auto& x : r) x = -x;
    return K0Class(std::move(r));
}

K0Class operator*(long k, const K0Class& a) {
    auto r = a.ranks_;
    for (auto& x : r) x *= k;
    return K0Class(std::move(r));
}

// ---- OperatorPath ----------------------------------------------------------

OperatorPath::OperatorPath(std::vector<Keyframe> keyframes) : keys_(std::move(keyframes)) {
    if (keys_.size() < 2) throw ModelError("path needs at least two keyframes");
    if (keys_.front().t != 0.0 || keys_.back().t != 1.0) throw ModelError("path keyframes must start at t=0 and end at t=1");
    for (std::size_t k = 1; k < keys_.size(); ++k) {
        if (!(keys_[k].t > keys_[k - 1].t)) throw ModelError("path keyframe times must be strictly increasing");
        require_same_shape(keys_[k].op, keys_[0].op);
    }
}

OperatorPath OperatorPath::linear(BlockOperator a, BlockOperator b) {
    return OperatorPath({{0.0, std::move(a)}, {1.0, std::move(b)}});
}

OperatorPath OperatorPath::constant(BlockOperator a) { return linear(a, a); }

OperatorPath OperatorPath::sampled(const std::function<BlockOperator(double)>& f, int n) {
    if (n < 1) throw ModelError("sampled path needs n >= 1");
    std::vector<Keyframe> ks;
    ks.reserve(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        const double t = (k == n) ? 1.0 : static_cast<double>(k) / n;
        ks.push_back({t, f(t)});
    }
    return OperatorPath(std::move(ks));
}

std::size_t OperatorPath::segment_of(double t) const {
    if (t <= 0.0) return 0;
    if (t >= 1.0) return keys_.size() - 2;
    auto it = std::upper_bound(keys_.begin(), keys_.end(), t, [](double v, const Keyframe& k) { return v < k.t; });
    return static_cast<std::size_t>(std::distance(keys_.begin(), it)) - 1;
}

BlockOperator OperatorPath::at(double t) const {
    if (t < 0.0 || t > 1.0 || std::isnan(t)) throw ModelError("path parameter outside [0,1]");
    const std::size_t k = segment_of(t);
    const auto& a = keys_[k];
    const auto& b = keys_[k + 1];
    if (t == a.t) return a.op;
    if (t == b.t) return b.op;
    const double s = (t - a.t) / (b.t - a.t);
    return (1.0 - s) * a.op + s * b.op;
}

OperatorPath OperatorPath::reversed() const {
    std::vector<Keyframe> ks;
    ks.reserve(keys_.size());
    for (auto it = keys_.rbegin(); it != keys_.rend(); ++it) ks.push_back({1.0 - it->t, it->op});
    ks.front().t = 0.0;
    ks.back().t = 1.0;
    return OperatorPath(std::move(ks));
}

OperatorPath OperatorPath::map(const std::function<BlockOperator(const BlockOperator&)>& f) const {
    std::vector<Keyframe> ks;
    ks.reserve(keys_.size());
    for (const auto& k : keys_) ks.push_back({k.t, f(k.op)});
    return OperatorPath(std::move(ks));
}

OperatorPath OperatorPath::concatenate(const OperatorPath& a, const OperatorPath& b, double tol) {
    if ((a.keys_.back().op - b.keys_.front().op).norm() > tol)
        throw ModelError("concatenation point mismatch");
    std::vector<Keyframe> ks;
    for (const auto& k : a.keys_) ks.push_back({0.5 * k.t, k.op});
    for (std::size_t i = 1; i < b.keys_.size(); ++i) ks.push_back({0.5 + 0.5 * b.keys_[i].t, b.keys_[i].op});
    ks.back().t = 1.0;
    return OperatorPath(std::move(ks));
}

void OperatorPath::check_conforms(const VnAlgebra& alg) const {
    for (const auto& k : keys_) k.op.check_conforms(alg);
}

// ---- trace and K0 ------------------------------------------------------------

double quotient_norm(const BlockOperator& t, const VnAlgebra& alg) {
    t.check_conforms(alg);
    double n = 0.0;
    for (std::size_t i = 0; i < alg.size(); ++i) {
        if (!alg[i].in_ideal) n = std::max(n, la::spectral_norm(t.block(i)));
    }
    return n;
}

bool vanishes_off_ideal(const BlockOperator& t, const VnAlgebra& alg, double eps) {
    return quotient_norm(t, alg) <= eps;
}

std::vector<long> block_ranks(const BlockOperator& p) {
    std::vector<long> r;
    r.reserve(p.size());
    for (const auto& m : p.blocks()) {
        if (m.rows() == 0) {
            r.push_back(0);
            continue;
        }
        const auto e = la::eigh(m);
        r.push_back(static_cast<long>((e.values.array() > 0.5).count()));
    }
    return r;
}

double tau(const BlockOperator& p, const VnAlgebra& alg, const Tolerances& tol) {
    p.check_conforms(alg);
    if (!p.is_projection(tol)) throw PreconditionError("tau: input is not a projection");
    const auto r = block_ranks(p);
    double s = 0.0;
    for (std::size_t i = 0; i < alg.size(); ++i) s += alg[i].weight * static_cast<double>(r[i]);
    return s;
}

double tau_star(const K0Class& c, const VnAlgebra& alg) {
    if (c.size() != alg.ideal_count())
        throw ModelError("K0 class has " + std::to_string(c.size()) + " entries, algebra has " +
                         std::to_string(alg.ideal_count()) + " ideal blocks");
    double s = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) s += alg[alg.ideal_blocks()[j]].weight * static_cast<double>(c[j]);
    return s;
}

K0Class k0_of_difference(const BlockOperator& p, const BlockOperator& q, const VnAlgebra& alg,
                         const Tolerances& tol) {
    p.check_conforms(alg);
    q.check_conforms(alg);
    if (!p.is_projection(tol) || !q.is_projection(tol)) throw PreconditionError("k0_of_difference: inputs must be projections");
    for (std::size_t i = 0; i < alg.size(); ++i) {
        if (alg[i].in_ideal) continue;
        const double eps = tol.proj_rel * (1.0 + std::max(la::spectral_norm(p.block(i)), la::spectral_norm(q.block(i))));
        if (la::spectral_norm(p.block(i) - q.block(i)) > eps) {
            std::ostringstream os;
            os << "class not in K0(J): p - q is nonzero on non-ideal block " << i;
            throw PreconditionError(os.str());
        }
    }
    const auto rp = block_ranks(p);
    const auto rq = block_ranks(q);
    std::vector<long> out;
    out.reserve(alg.ideal_count());
    for (auto i : alg.ideal_blocks()) out.push_back(rp[i] - rq[i]);
    return K0Class(std::move(out));
}

}  // namespace kflow
