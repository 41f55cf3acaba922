#include "kflow/proj_calc.hpp"

#include "kflow/errors.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <sstream>

namespace kflow {

namespace {

struct BlockSvd {
    Mat u;
    Vec s;
    Mat v;
};

BlockSvd full_svd(const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

Eigen::Index count_above(const Vec& s, double eps) {
    Eigen::Index r = 0;
    while (r < s.size() && s(r) > eps) ++r;
    return r;
}

double kernel_eps(const BlockOperator& s, const Tolerances& tol) {
    return tol.kernel_rel * std::max(1.0, s.norm());
}

}  // namespace

BlockOperator complement(const BlockOperator& p) {
    std::vector<Mat> bs;
    bs.reserve(p.size());
    for (const auto& m : p.blocks()) bs.push_back(Mat::Identity(m.rows(), m.cols()) - m);
    return BlockOperator(std::move(bs));
}

BlockOperator chi(const BlockOperator& t, const Tolerances& tol) {
    if (!t.is_selfadjoint(tol)) throw PreconditionError("chi: operator is not selfadjoint");
    const double eps = tol.zero_rel * std::max(1.0, t.norm());
    std::vector<Mat> bs;
    bs.reserve(t.size());
    for (const auto& m : t.blocks()) {
        const auto e = la::eigh(m);
        Eigen::Index first = 0;
        while (first < e.values.size() && e.values(first) < -eps) ++first;
        bs.push_back(la::projector(e.vectors.rightCols(e.values.size() - first)));
    }
    return BlockOperator(std::move(bs));
}

BlockOperator polar_phase(const BlockOperator& s, const Tolerances& tol) {
    const double eps = kernel_eps(s, tol);
    std::vector<Mat> bs;
    bs.reserve(s.size());
    for (const auto& m : s.blocks()) {
        const auto d = full_svd(m);
        const Eigen::Index r = count_above(d.s, eps);
        bs.push_back(d.u.leftCols(r) * d.v.leftCols(r).adjoint());
    }
    return BlockOperator(std::move(bs));
}

BlockOperator null_projection(const BlockOperator& s, const Tolerances& tol) {
    const double eps = kernel_eps(s, tol);
    std::vector<Mat> bs;
    bs.reserve(s.size());
    for (const auto& m : s.blocks()) {
        const auto d = full_svd(m);
        const Eigen::Index r = count_above(d.s, eps);
        bs.push_back(la::projector(d.v.rightCols(d.v.cols() - r)));
    }
    return BlockOperator(std::move(bs));
}

BlockOperator range_projection(const BlockOperator& s, const Tolerances& tol) {
    const double eps = kernel_eps(s, tol);
    std::vector<Mat> bs;
    bs.reserve(s.size());
    for (const auto& m : s.blocks()) {
        const auto d = full_svd(m);
        const Eigen::Index r = count_above(d.s, eps);
        bs.push_back(la::projector(d.u.leftCols(r)));
    }
    return BlockOperator(std::move(bs));
}

BlockOperator proj_intersection(const BlockOperator& p, const BlockOperator& q, const Tolerances& tol) {
    if (!p.is_projection(tol) || !q.is_projection(tol))
        throw PreconditionError("proj_intersection: inputs must be projections");
    const BlockOperator sum = p + q;
    std::vector<Mat> bs;
    bs.reserve(p.size());
    for (const auto& m : sum.blocks()) {
        const auto e = la::eigh(m);
        Eigen::Index first = e.values.size();
        while (first > 0 && e.values(first - 1) > 2.0 - tol.intersection) --first;
        bs.push_back(la::projector(e.vectors.rightCols(e.values.size() - first)));
    }
    return BlockOperator(std::move(bs));
}

BlockOperator nearest_projection(const BlockOperator& e, const Tolerances& tol) {
    if (!e.is_selfadjoint(tol)) throw PreconditionError("nearest_projection: operator is not selfadjoint");
    std::vector<Mat> bs;
    bs.reserve(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
        const Mat& m = e.block(i);
        const auto d = la::eigh(m);
        for (Eigen::Index k = 0; k < d.values.size(); ++k) {
            if (std::abs(d.values(k) - 0.5) <= 1e-12) {
                std::ostringstream os;
                os << "no spectral gap: eigenvalue " << d.values(k) << " at 1/2 in block " << i;
                throw PreconditionError(os.str());
            }
        }
        // λ² - λ is the spectrum of e² - e for selfadjoint e.
        for (Eigen::Index k = 0; k < d.values.size(); ++k) {
            const double l = d.values(k);
            if (std::abs(l * l - l) >= 0.25) {
                std::ostringstream os;
                os << "no spectral gap: ||e^2 - e|| >= 1/4 in block " << i;
                throw PreconditionError(os.str());
            }
        }
        Eigen::Index first = 0;
        while (first < d.values.size() && d.values(first) < 0.5) ++first;
        bs.push_back(la::projector(d.vectors.rightCols(d.values.size() - first)));
    }
    return BlockOperator(std::move(bs));
}

}  // namespace kflow
