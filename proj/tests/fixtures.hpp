#pragma once

// Seeded random models shared by the unit tests and the acceptance suite.

#include "oracles.hpp"

#include "kflow/vn_model.hpp"

#include <Eigen/Eigenvalues>

#include <vector>

namespace fixtures {

using kflow::BlockOperator;
using kflow::cplx;
using kflow::Mat;
using kflow::OperatorPath;
using kflow::VnAlgebra;

// exp(i x h) for Hermitian h.
inline Mat expi(const Mat& h, double x) {
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    const Eigen::VectorXcd ph = (es.eigenvalues().cast<cplx>() * cplx(0, x)).array().exp();
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

inline Mat unit_hermitian(int n, std::mt19937_64& rng) {
    Mat h = oracle::hermitian(n, rng);
    return h / oracle::norm(h);
}

// A two-parameter family H(t, s) of selfadjoint operators. The non-ideal blocks
// rotate a fixed invertible diagonal, so every H(t, s) is J-Fredholm with the
// same quotient gap; the ideal blocks move freely. The s-deformation vanishes
// at t = 0 and t = 1, so H(0, s) and H(1, s) do not depend on s.
struct RandomFamily {
    VnAlgebra alg;
    std::vector<Mat> spectra;     // per non-ideal block
    std::vector<Mat> rot, bend;   // per non-ideal block
    std::vector<double> angle;
    std::vector<Mat> a0, a1, kick; // per ideal block

    BlockOperator at(double t, double s) const {
        const double w = 4.0 * t * (1.0 - t) * s;
        std::vector<Mat> blocks;
        std::size_t ni = 0, id = 0;
        for (const auto& b : alg.blocks()) {
            if (b.in_ideal) {
                Mat m = (1.0 - t) * a0[id] + t * a1[id] + w * kick[id];
                blocks.push_back(0.5 * (m + m.adjoint()));
                ++id;
            } else {
                const Mat h = t * angle[ni] * rot[ni] + w * bend[ni];
                const Mat v = expi(h, 1.0);
                Mat m = v * spectra[ni] * v.adjoint();
                blocks.push_back(0.5 * (m + m.adjoint()));
                ++ni;
            }
        }
        return BlockOperator(std::move(blocks));
    }

    OperatorPath path(double s, int segments) const {
        return OperatorPath::sampled([&](double t) { return at(t, s); }, segments);
    }
};

inline RandomFamily random_family(std::mt19937_64& rng, int max_total = 32) {
    std::uniform_int_distribution<int> nblocks(1, 3), ndim(2, 8), nsmall(2, 6);
    std::uniform_real_distribution<double> weight(0.25, 2.0), level(0.4, 1.5), ang(0.5, 4.0);
    std::vector<kflow::Block> blocks;
    int total = 0;
    const int nn = nblocks(rng), ni = nblocks(rng);
    for (int i = 0; i < nn + ni; ++i) {
        const bool ideal = i >= nn;
        int d = ideal ? ndim(rng) : nsmall(rng);
        d = std::min(d, max_total - total - (nn + ni - i - 1));
        if (d < 1) d = 1;
        total += d;
        blocks.push_back({d, weight(rng), ideal});
    }
    RandomFamily f{VnAlgebra(blocks), {}, {}, {}, {}, {}, {}, {}};
    for (const auto& b : f.alg.blocks()) {
        if (b.in_ideal) {
            f.a0.push_back(oracle::hermitian(b.dim, rng));
            f.a1.push_back(oracle::hermitian(b.dim, rng));
            f.kick.push_back(oracle::hermitian(b.dim, rng));
        } else {
            Mat d = Mat::Zero(b.dim, b.dim);
            for (int j = 0; j < b.dim; ++j) d(j, j) = ((rng() % 2) ? 1.0 : -1.0) * level(rng);
            f.spectra.push_back(d);
            f.rot.push_back(unit_hermitian(b.dim, rng));
            f.bend.push_back(unit_hermitian(b.dim, rng));
            f.angle.push_back(ang(rng));
        }
    }
    return f;
}

}  // namespace fixtures
