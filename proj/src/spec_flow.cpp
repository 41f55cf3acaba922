#include "kflow/spec_flow.hpp"

#include "kflow/corner_index.hpp"
#include "kflow/errors.hpp"
#include "kflow/proj_calc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace kflow {

namespace {

constexpr int kCertifyDepth = 50;
constexpr int kGridDepth = 3;  // 2^3 + 1 points per subinterval

double inf() { return std::numeric_limits<double>::infinity(); }

// min |λ| over the spectra of the non-ideal blocks.
double quotient_gap(const BlockOperator& b, const VnAlgebra& alg) {
    double g = inf();
    for (std::size_t i = 0; i < alg.size(); ++i) {
        if (alg[i].in_ideal) continue;
        const auto e = la::eigh(b.block(i));
        g = std::min(g, e.values.cwiseAbs().minCoeff());
    }
    return g;
}

// π(χ(B)) as a list of non-ideal blocks.
std::vector<Mat> quotient_chi(const BlockOperator& b, const VnAlgebra& alg, const Tolerances& tol) {
    const double eps = tol.zero_rel * std::max(1.0, quotient_norm(b, alg));
    std::vector<Mat> out;
    for (std::size_t i = 0; i < alg.size(); ++i) {
        if (alg[i].in_ideal) continue;
        const auto e = la::eigh(b.block(i));
        Eigen::Index first = 0;
        while (first < e.values.size() && e.values(first) < -eps) ++first;
        out.push_back(la::projector(e.vectors.rightCols(e.values.size() - first)));
    }
    return out;
}

double distance(const std::vector<Mat>& a, const std::vector<Mat>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, la::spectral_norm(a[i] - b[i]));
    return d;
}

[[noreturn]] void leaves_fredholm(double t, double gap) {
    std::ostringstream os;
    os.precision(17);
    os << "path leaves F_sa at t = " << t << " (quotient gap " << gap << ")";
    throw PreconditionError(os.str());
}

struct Certifier {
    const OperatorPath& path;
    const VnAlgebra& alg;
    const Tolerances& tol;
    PathCertificate cert;

    double sample(double t) {
        const double g = quotient_gap(path.at(t), alg);
        cert.samples.push_back(t);
        cert.min_gap = std::min(cert.min_gap, g);
        if (!(g > tol.gap)) leaves_fredholm(t, g);
        return g;
    }

    // Weyl: |λ_k(B_s) - λ_k(B_a)| <= L |s - a| on a linear segment.
    void refine(double a, double b, double ga, double gb, double lip, int depth) {
        if (std::min(ga, gb) > lip * (b - a) / 2.0 + tol.gap) return;
        const double m = 0.5 * (a + b);
        const double gm = sample(m);
        if (depth >= kCertifyDepth) leaves_fredholm(m, gm);
        refine(a, m, ga, gm, lip, depth + 1);
        refine(m, b, gm, gb, lip, depth + 1);
    }
};

}  // namespace

PathCertificate certify_path(const OperatorPath& path, const VnAlgebra& alg, const Tolerances& tol) {
    path.check_conforms(alg);
    for (const auto& k : path.keyframes()) {
        if (!k.op.is_selfadjoint(tol)) {
            std::ostringstream os;
            os << "certify_path: keyframe at t = " << k.t << " is not selfadjoint";
            throw PreconditionError(os.str());
        }
    }
    Certifier c{path, alg, tol, {inf(), 0.0, {}}};
    if (alg.all_ideal()) {
        c.cert.samples = {0.0, 1.0};
        return c.cert;
    }
    const auto& ks = path.keyframes();
    std::vector<double> gaps;
    gaps.reserve(ks.size());
    for (const auto& k : ks) gaps.push_back(c.sample(k.t));
    for (std::size_t k = 0; k + 1 < ks.size(); ++k) {
        const double dt = ks[k + 1].t - ks[k].t;
        const double lip = quotient_norm(ks[k + 1].op - ks[k].op, alg) / dt;
        c.cert.max_lipschitz = std::max(c.cert.max_lipschitz, lip);
        c.refine(ks[k].t, ks[k + 1].t, gaps[k], gaps[k + 1], lip, 0);
    }
    std::sort(c.cert.samples.begin(), c.cert.samples.end());
    return c.cert;
}

double quotient_chi_distance(const BlockOperator& bt, const BlockOperator& bs, const VnAlgebra& alg,
                             const Tolerances& tol) {
    return distance(quotient_chi(bt, alg, tol), quotient_chi(bs, alg, tol));
}

std::vector<double> find_partition(const OperatorPath& path, const VnAlgebra& alg, const Tolerances& tol) {
    path.check_conforms(alg);
    if (alg.all_ideal()) return {0.0, 1.0};

    std::map<double, std::vector<Mat>> cache;
    auto proj_at = [&](double t) -> const std::vector<Mat>& {
        auto it = cache.find(t);
        if (it == cache.end()) it = cache.emplace(t, quotient_chi(path.at(t), alg, tol)).first;
        return it->second;
    };
    const double bound = 0.5 - tol.partition_margin;
    const int n = 1 << kGridDepth;

    std::vector<double> out{0.0};
    // Depth-first, left to right, so `out` stays sorted.
    std::vector<std::tuple<double, double, int>> stack{{0.0, 1.0, 0}};
    while (!stack.empty()) {
        auto [a, b, depth] = stack.back();
        stack.pop_back();
        std::vector<const std::vector<Mat>*> grid;
        for (int k = 0; k <= n; ++k) {
            const double t = (k == n) ? b : a + (b - a) * k / n;
            grid.push_back(&proj_at(t));
        }
        double worst = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i)
            for (std::size_t j = i + 1; j < grid.size(); ++j) worst = std::max(worst, distance(*grid[i], *grid[j]));
        if (worst < bound) {
            out.push_back(b);
            continue;
        }
        if (depth >= tol.max_depth) {
            std::ostringstream os;
            os.precision(17);
            os << "cannot certify partition on [" << a << ", " << b << "] (quotient distance " << worst << ")";
            throw NumericalError(os.str());
        }
        const double m = 0.5 * (a + b);
        stack.emplace_back(m, b, depth + 1);
        stack.emplace_back(a, m, depth + 1);
    }
    return out;
}

SpectralFlowTrace spectral_flow_on_partition(const OperatorPath& path, const VnAlgebra& alg,
                                             const std::vector<double>& partition, const Tolerances& tol) {
    if (partition.size() < 2 || partition.front() != 0.0 || partition.back() != 1.0)
        throw ModelError("partition must run from 0 to 1");
    for (std::size_t i = 1; i < partition.size(); ++i)
        if (!(partition[i] > partition[i - 1])) throw ModelError("partition must be strictly increasing");

    SpectralFlowTrace tr;
    tr.partition = partition;
    tr.value = K0Class::zero(alg);
    tr.min_quotient_gap = inf();

    std::vector<BlockOperator> ps;
    ps.reserve(partition.size());
    for (double t : partition) {
        const BlockOperator b = path.at(t);
        const double g = quotient_gap(b, alg);
        if (!(g > tol.gap)) leaves_fredholm(t, g);
        tr.gaps.push_back(g);
        tr.min_quotient_gap = std::min(tr.min_quotient_gap, g);
        ps.push_back(chi(b, tol));
    }

    for (std::size_t i = 1; i < ps.size(); ++i) {
        const double d = quotient_norm(ps[i] - ps[i - 1], alg);
        if (!(d < 0.5)) {
            std::ostringstream os;
            os.precision(17);
            os << "partition step [" << partition[i - 1] << ", " << partition[i] << "] has quotient distance " << d
               << " >= 1/2";
            throw PreconditionError(os.str());
        }
        const BlockOperator down = proj_intersection(complement(ps[i]), ps[i - 1], tol);
        const BlockOperator up = proj_intersection(complement(ps[i - 1]), ps[i], tol);
        K0Class term = k0_of_difference(down, up, alg, tol);
        tr.value += term;
        tr.contributions.push_back(std::move(term));
    }

    BlockOperator prod = ps.front();
    for (std::size_t i = 1; i < ps.size(); ++i) prod = ps[i] * prod;
    tr.closed_form = corner_index(prod, ps.front(), ps.back(), alg, tol);
    if (!(tr.closed_form == tr.value))
        throw ConsistencyError("spectral flow: partition sum and closed-form index disagree");
    return tr;
}

SpectralFlowTrace spectral_flow_trace(const OperatorPath& path, const VnAlgebra& alg, const Tolerances& tol) {
    const auto cert = certify_path(path, alg, tol);
    auto tr = spectral_flow_on_partition(path, alg, find_partition(path, alg, tol), tol);
    tr.min_quotient_gap = cert.min_gap;
    return tr;
}

K0Class spectral_flow(const OperatorPath& path, const VnAlgebra& alg, const Tolerances& tol) {
    return spectral_flow_trace(path, alg, tol).value;
}

double numeric_spectral_flow(const OperatorPath& path, const VnAlgebra& alg, const Tolerances& tol) {
    return tau_star(spectral_flow(path, alg, tol), alg);
}

}  // namespace kflow
