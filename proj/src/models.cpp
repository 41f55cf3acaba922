#include "kflow/models.hpp"

#include "kflow/errors.hpp"
#include "kflow/proj_calc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace kflow::models {

Mat random_matrix(int n, int m, Rng& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Mat a(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) a(i, j) = cplx(g(rng), g(rng));
    return a;
}

Mat random_hermitian(int n, Rng& rng) {
    const Mat a = random_matrix(n, n, rng);
    return 0.5 * (a + a.adjoint());
}

Mat random_unitary(int n, Rng& rng) {
    const Mat a = random_matrix(n, n, rng);
    Eigen::HouseholderQR<Mat> qr(a);
    Mat q = qr.householderQ();
    const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    // Fix column phases so the distribution is Haar.
    for (int j = 0; j < n; ++j) {
        const cplx d = r(j, j);
        if (std::abs(d) > 0.0) q.col(j) *= d / std::abs(d);
    }
    return q;
}

Mat random_projection(int n, int r, Rng& rng) {
    const Mat u = random_unitary(n, rng);
    return la::projector(u.leftCols(r));
}

VnAlgebra weighted_model(const std::vector<int>& dims, const std::vector<double>& weights,
                         const std::vector<bool>& ideal_mask) {
    if (dims.size() != weights.size() || dims.size() != ideal_mask.size())
        throw ModelError("weighted_model: dims, weights and mask must have equal length");
    std::vector<Block> blocks;
    for (std::size_t i = 0; i < dims.size(); ++i) blocks.push_back({dims[i], weights[i], ideal_mask[i]});
    return VnAlgebra(std::move(blocks));
}

// ---- Dirac circle ------------------------------------------------------------

namespace {

Mat cyclic_shift(int m, int k) {
    const int n = 2 * m + 1;
    Mat u = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) u(((i + k) % n + n) % n, i) = 1.0;
    return u;
}

}  // namespace

DiracModel dirac_circle(int m, int k) {
    if (m < 2) throw PreconditionError("dirac_circle: window radius m must be >= 2");
    if (std::abs(k) > m - 1) throw PreconditionError("dirac_circle: |k| too large for the window");
    const int n = 2 * m + 1;
    VnAlgebra alg({{n, 1.0, true}});
    Mat d = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) d(i, i) = static_cast<double>(i - m);
    const BlockOperator u({cyclic_shift(m, k)});
    std::vector<VnTriple::Generator> gens{{"1", BlockOperator::identity(alg)}, {"u", u}, {"u*", u.adjoint()}};
    VnTriple triple(alg, std::move(gens), BlockOperator({d}));
    return {m, k, std::move(triple), u};
}

ToeplitzKernels toeplitz_kernels(int m, int k) {
    const auto model = dirac_circle(m, k);
    const BlockOperator& p = model.triple.positive_projection();
    const BlockOperator one = BlockOperator::identity(model.triple.algebra());
    const BlockOperator& u = model.u;
    const Mat ker = null_projection(p * u * p + one - p).block(0);
    const Mat coker = null_projection(p * u.adjoint() * p + one - p).block(0);

    const int n = 2 * m + 1;
    Vec interior = Vec::Zero(n);
    for (int i = 0; i < n; ++i) interior(i) = (std::abs(i - m) < m - std::abs(k)) ? 1.0 : 0.0;
    auto weight = [&](const Mat& proj) { return std::lround((proj.diagonal().real().array() * interior.array()).sum()); };

    ToeplitzKernels out;
    out.kernel = block_ranks(BlockOperator({ker}))[0];
    out.cokernel = block_ranks(BlockOperator({coker}))[0];
    out.interior_kernel = weight(ker);
    out.interior_cokernel = weight(coker);
    return out;
}

// ---- crossing paths and oracle ---------------------------------------------------

OperatorPath random_crossing_path(int n, const std::vector<int>& crossings, std::uint64_t seed, int segments) {
    const int c = static_cast<int>(crossings.size());
    if (n < c + 1) throw PreconditionError("random_crossing_path: need n >= #crossings + 1");
    for (int s : crossings)
        if (s != 1 && s != -1) throw PreconditionError("random_crossing_path: crossings must be +1 or -1");
    if (c > 8) throw PreconditionError("random_crossing_path: at most 8 crossings can be separated");

    Rng rng(seed);
    std::uniform_real_distribution<double> jitter(-0.02, 0.02);
    std::vector<double> times;
    for (int j = 0; j < c; ++j) {
        const double base = (c == 1) ? 0.5 : 0.15 + 0.7 * j / (c - 1);
        times.push_back(base + jitter(rng));
    }

    Mat h = random_hermitian(n, rng);
    h *= 3.0 / std::max(1.0, la::spectral_norm(h));
    const auto he = la::eigh(h);

    // Fixed levels stay in |x| >= 1; crossing curves stay in |x| <= 0.87.
    std::vector<double> levels;
    for (int j = 0; j < n - c; ++j) levels.push_back(((j % 2 == 0) ? 1.0 : -1.0) * (1.0 + 0.25 * j));

    auto at = [&](double t) {
        Vec diag(n);
        for (int j = 0; j < n - c; ++j) diag(j) = levels[j];
        for (int j = 0; j < c; ++j) diag(n - c + j) = crossings[j] * (t - times[j]);
        Eigen::VectorXcd phase(n);
        for (int j = 0; j < n; ++j) phase(j) = std::exp(cplx(0.0, t * he.values(j)));
        const Mat v = he.vectors * phase.asDiagonal() * he.vectors.adjoint();
        Mat b = v * diag.cast<cplx>().asDiagonal() * v.adjoint();
        b = 0.5 * (b + b.adjoint());
        return BlockOperator({b});
    };
    return OperatorPath::sampled(at, segments);
}

std::vector<long> crossing_oracle_blocks(const OperatorPath& path, int samples) {
    if (samples < 1000) throw PreconditionError("crossing_oracle: need at least 1000 samples");
    const std::size_t nb = path.keyframes().front().op.size();
    std::vector<long> counts(nb, 0);
    for (std::size_t b = 0; b < nb; ++b) {
        auto eig = [&](double t) { return la::eigh(path.at(t).block(b)).values; };
        Vec prev = eig(0.0);
        const Vec last = eig(1.0);
        if (prev.size() > 0 && (prev.cwiseAbs().minCoeff() < 1e-12 || last.cwiseAbs().minCoeff() < 1e-12))
            throw PreconditionError("crossing_oracle: zero eigenvalue at an endpoint");
        auto spacing = [](const Vec& v, Eigen::Index k) {
            double g = std::numeric_limits<double>::infinity();
            if (k > 0) g = std::min(g, v(k) - v(k - 1));
            if (k + 1 < v.size()) g = std::min(g, v(k + 1) - v(k));
            return g;
        };
        for (int s = 1; s <= samples; ++s) {
            const double t = (s == samples) ? 1.0 : static_cast<double>(s) / samples;
            const Vec cur = eig(t);
            for (Eigen::Index k = 0; k < cur.size(); ++k) {
                const bool was_neg = prev(k) < 0.0;
                const bool is_neg = cur(k) < 0.0;
                if (was_neg == is_neg) continue;
                const double step = std::abs(cur(k) - prev(k));
                const double room = std::min(spacing(prev, k), spacing(cur, k));
                if (!(step < 0.5 * room)) {
                    std::ostringstream os;
                    os << "crossing_oracle: ambiguous eigenvalue matching near t = " << t << "; increase samples";
                    throw NumericalError(os.str());
                }
                counts[b] += was_neg ? kUpwardCrossingSign : -kUpwardCrossingSign;
            }
            prev = cur;
        }
    }
    return counts;
}

long crossing_oracle(const OperatorPath& path, int samples) {
    long total = 0;
    for (long c : crossing_oracle_blocks(path, samples)) total += c;
    return total;
}

}  // namespace kflow::models
