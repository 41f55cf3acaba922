#include "kflow/spectral_triple.hpp"

#include "kflow/corner_index.hpp"
#include "kflow/errors.hpp"
#include "kflow/proj_calc.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace kflow {

BlockOperator bounded_transform(const BlockOperator& d, const Tolerances& tol) {
    if (!d.is_selfadjoint(tol)) throw PreconditionError("bounded_transform: D is not selfadjoint");
    return d.apply([](double x) { return x / std::sqrt(1.0 + x * x); });
}

namespace {

BlockOperator commutator(const BlockOperator& a, const BlockOperator& b) { return a * b - b * a; }

// Blockwise (z - D)^{-1} for selfadjoint D and non-real z.
BlockOperator resolvent(const BlockOperator& d, cplx z) {
    std::vector<Mat> bs;
    bs.reserve(d.size());
    for (const auto& m : d.blocks()) bs.push_back(la::apply_complex(m, [z](double x) { return 1.0 / (z - x); }));
    return BlockOperator(std::move(bs));
}

}  // namespace

VnTriple::VnTriple(VnAlgebra alg, std::vector<Generator> generators, BlockOperator d, const Tolerances& tol)
    : alg_(std::move(alg)), gens_(std::move(generators)), d_(std::move(d)) {
    d_.check_conforms(alg_);
    if (!d_.is_selfadjoint(tol)) throw PreconditionError("triple: D is not selfadjoint");
    const BlockOperator one = BlockOperator::identity(alg_);
    bool has_unit = false;
    const BlockOperator res = resolvent(d_, cplx(0.0, 1.0));
    for (const auto& [name, a] : gens_) {
        a.check_conforms(alg_);
        if ((a - one).norm() <= tol.proj_rel * 2.0) has_unit = true;
        max_comm_ = std::max(max_comm_, commutator(d_, a).norm());
        const double leak = quotient_norm(a * res, alg_);
        if (leak > tol.proj_rel * (1.0 + a.norm())) {
            std::ostringstream os;
            os << "triple: a(i - D)^{-1} is not in J for generator '" << name << "' (quotient norm " << leak << ")";
            throw PreconditionError(os.str());
        }
    }
    if (!has_unit) throw PreconditionError("triple: the unit must be among the generators");
    f_ = bounded_transform(d_, tol);
    pf_ = 0.5 * (f_ + one);
    p_ = chi(f_, tol);
}

const BlockOperator& VnTriple::generator(const std::string& name) const {
    for (const auto& g : gens_)
        if (g.first == name) return g.second;
    throw ModelError("triple: no generator named '" + name + "'");
}

KasparovReport check_kasparov_module(const VnTriple& triple, const Tolerances& tol) {
    const auto& alg = triple.algebra();
    const BlockOperator& f = triple.bounded();
    const BlockOperator one = BlockOperator::identity(alg);
    KasparovReport rep;
    for (const auto& [name, a] : triple.generators()) {
        KasparovEntry e;
        e.name = name;
        e.commutator = quotient_norm(commutator(f, a), alg);
        e.resolvent_defect = quotient_norm(a * (one - f * f), alg);
        e.selfadjoint_defect = quotient_norm(a * (f - f.adjoint()), alg);
        auto fail = [&](const char* what, double v) {
            std::ostringstream os;
            os << name << ": " << what << " = " << v << " exceeds " << tol.gap;
            rep.failures.push_back(os.str());
            rep.passed = false;
        };
        if (e.commutator > tol.gap) fail("||pi([F_D, a])||", e.commutator);
        if (e.resolvent_defect > tol.gap) fail("||pi(a(1 - F_D^2))||", e.resolvent_defect);
        if (e.selfadjoint_defect > tol.gap) fail("||pi(a(F_D - F_D*))||", e.selfadjoint_defect);
        rep.entries.push_back(std::move(e));
    }
    return rep;
}

// ---- resolvent integral ------------------------------------------------------

namespace {

constexpr double kTailTarget = 1e-8;
constexpr int kInitialPanels = 16;
constexpr int kMaxSimpsonDepth = 40;

struct MatrixSimpson {
    std::function<Mat(double)> f;
    long evals = 0;
    bool converged = true;
    double worst = 0.0;

    Mat eval(double x) {
        ++evals;
        return f(x);
    }

    Mat refine(double a, double b, const Mat& fa, const Mat& fm, const Mat& fb, const Mat& whole, double eps,
               int depth) {
        const double m = 0.5 * (a + b);
        const Mat flm = eval(0.5 * (a + m));
        const Mat frm = eval(0.5 * (m + b));
        const Mat left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        const Mat right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        const Mat delta = left + right - whole;
        const double err = delta.norm();
        if (err <= 15.0 * eps) return left + right + delta / 15.0;
        if (depth >= kMaxSimpsonDepth) {
            converged = false;
            worst = std::max(worst, err / 15.0);
            return left + right + delta / 15.0;
        }
        return refine(a, m, fa, flm, fm, left, 0.5 * eps, depth + 1) +
               refine(m, b, fm, frm, fb, right, 0.5 * eps, depth + 1);
    }

    Mat integrate(double a, double b, double eps) {
        Mat total;
        const double h = (b - a) / kInitialPanels;
        for (int k = 0; k < kInitialPanels; ++k) {
            const double x0 = a + k * h;
            const double x1 = (k + 1 == kInitialPanels) ? b : x0 + h;
            const Mat f0 = eval(x0);
            const Mat fm = eval(0.5 * (x0 + x1));
            const Mat f1 = eval(x1);
            const Mat whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
            const Mat part = refine(x0, x1, f0, fm, f1, whole, eps / kInitialPanels, 0);
            if (k == 0) total = part;
            else total += part;
        }
        return total;
    }
};

}  // namespace

IntegralReport resolvent_integral_check(const VnTriple& triple, const BlockOperator& a, const BlockOperator& b,
                                        const Tolerances&) {
    const auto& alg = triple.algebra();
    const BlockOperator& d = triple.dirac();
    a.check_conforms(alg);
    b.check_conforms(alg);

    // Direct side through the eigendecomposition of D.
    const BlockOperator g = d.apply([](double x) { return 1.0 / std::sqrt(1.0 + x * x); });
    const BlockOperator direct = d * commutator(g, a) * b;

    // Tail estimate: ||D[R(λ),a]b|| <= (5/4)||[a,D]|| ||b|| / (1+λ), so the
    // tail beyond Λ is at most (5/(2π)) ||[a,D]|| ||b|| / √Λ.
    const double scale = commutator(a, d).norm() * b.norm();
    const double sqrt_lambda = std::max(1.0, 5.0 / (2.0 * std::numbers::pi) * scale / kTailTarget);
    IntegralReport rep;
    rep.theta_max = std::atan(sqrt_lambda);
    rep.tail_bound = 5.0 / (2.0 * std::numbers::pi) * scale / sqrt_lambda;

    double residual = 0.0;
    for (std::size_t i = 0; i < alg.size(); ++i) {
        const Mat& dm = d.block(i);
        const Mat& am = a.block(i);
        const Mat& bm = b.block(i);
        const Eigen::Index n = dm.rows();
        const Mat d2 = dm * dm;
        const Mat x = am * d2 - d2 * am;  // [a, D²]
        const Mat id = Mat::Identity(n, n);
        // With λ = tan²θ: (1/π) λ^{-1/2} dλ = (2/π) sec²θ dθ and
        // sec²θ · R X R = c · M^{-1} X M^{-1}, M = c(1 + D²) + (1 - c), c = cos²θ.
        MatrixSimpson simpson{[&](double theta) -> Mat {
            const double c = std::cos(theta) * std::cos(theta);
            const Mat m = c * (id + d2) + (1.0 - c) * id;
            const auto lu = m.partialPivLu();
            const Mat left = lu.solve(x);
            const Mat right = lu.solve(bm);
            return (2.0 / std::numbers::pi) * c * dm * left * right;
        }};
        const double eps = 1e-12 * std::max(1.0, scale);
        const Mat integral = simpson.integrate(0.0, rep.theta_max, eps);
        rep.evaluations += simpson.evals;
        if (!simpson.converged) {
            std::ostringstream os;
            os << "resolvent_integral_check: quadrature did not converge in block " << i << " (error estimate "
               << simpson.worst << ")";
            throw NumericalError(os.str());
        }
        residual = std::max(residual, la::spectral_norm(integral - direct.block(i)));
    }
    rep.residual = residual;
    rep.direct_norm = direct.norm();
    rep.relative_residual = rep.direct_norm > 0.0 ? residual / rep.direct_norm : residual;
    return rep;
}

// ---- spectral flow of D -> u*Du ------------------------------------------------

UnitaryFlowReport sf_unitary_report(const VnTriple& triple, const BlockOperator& u, const Tolerances& tol) {
    const auto& alg = triple.algebra();
    u.check_conforms(alg);
    if (!u.is_unitary(tol)) throw PreconditionError("sf_unitary: u is not unitary");
    const BlockOperator& p = triple.positive_projection();
    const BlockOperator& pf = triple.p_f();
    const BlockOperator one = BlockOperator::identity(alg);

    UnitaryFlowReport rep;
    rep.commutator = quotient_norm(commutator(u, p), alg);
    if (rep.commutator > tol.gap) {
        std::ostringstream os;
        os << "sf_unitary: [u, p] is not in J (quotient norm " << rep.commutator << ")";
        throw PreconditionError(os.str());
    }
    rep.value = boundary_map(p * u * p + one - p, alg, tol);
    rep.via_p_f = boundary_map(pf * u * pf + one - pf, alg, tol);
    rep.via_index = corner_index(p * u * p, p, p, alg, tol);
    if (!(rep.value == rep.via_p_f) || !(rep.value == rep.via_index))
        throw ConsistencyError("sf_unitary: boundary formulas and corner index disagree");
    return rep;
}

K0Class sf_unitary(const VnTriple& triple, const BlockOperator& u, const Tolerances& tol) {
    return sf_unitary_report(triple, u, tol).value;
}

UnboundedFlowReport sf_unbounded_report(const VnTriple& triple, const OperatorPath& perturbations,
                                        const Tolerances& tol) {
    const auto& alg = triple.algebra();
    perturbations.check_conforms(alg);
    const auto& ks = perturbations.keyframes();
    for (const auto& k : ks)
        if (!k.op.is_selfadjoint(tol)) throw PreconditionError("sf_unbounded: perturbation is not selfadjoint");

    const BlockOperator& d = triple.dirac();
    const BlockOperator f0 = bounded_transform(d + ks.front().op, tol);
    const BlockOperator f1 = bounded_transform(d + ks.back().op, tol);

    UnboundedFlowReport rep;
    auto drift_at = [&](double t) {
        const double dr = quotient_norm(bounded_transform(d + perturbations.at(t), tol) - f0, alg);
        rep.max_quotient_drift = std::max(rep.max_quotient_drift, dr);
        if (dr > tol.gap) {
            std::ostringstream os;
            os << "model violation: pi(F_{D_t}) drifts from pi(F_{D_0}) by " << dr << " at t = " << t;
            throw PreconditionError(os.str());
        }
    };
    if (!alg.all_ideal()) {
        for (std::size_t k = 0; k < ks.size(); ++k) {
            drift_at(ks[k].t);
            if (k + 1 < ks.size()) drift_at(0.5 * (ks[k].t + ks[k + 1].t));
        }
    }

    const BlockOperator p0 = chi(f0, tol);
    const BlockOperator p1 = chi(f1, tol);
    rep.value = k0_of_difference(proj_intersection(complement(p1), p0, tol),
                                 proj_intersection(complement(p0), p1, tol), alg, tol);
    return rep;
}

K0Class sf_unbounded(const VnTriple& triple, const OperatorPath& perturbations, const Tolerances& tol) {
    return sf_unbounded_report(triple, perturbations, tol).value;
}

OperatorPath conjugation_perturbation_path(const VnTriple& triple, const BlockOperator& u, int segments) {
    const BlockOperator& d = triple.dirac();
    const BlockOperator diff = u.adjoint() * d * u - d;
    return OperatorPath::sampled([&](double t) { return t * diff; }, segments);
}

// ---- pushforward to a sub-ideal --------------------------------------------------

K0Class include_class(const K0Class& sub, const std::vector<bool>& sub_mask, const VnAlgebra& alg) {
    if (sub_mask.size() != alg.size()) throw ModelError("sub-ideal mask length does not match block count");
    std::vector<long> out;
    std::size_t j = 0;
    for (auto i : alg.ideal_blocks()) {
        if (sub_mask[i]) {
            if (j >= sub.size()) throw ModelError("sub-ideal class has too few entries");
            out.push_back(sub[j++]);
        } else {
            out.push_back(0);
        }
    }
    if (j != sub.size()) throw ModelError("sub-ideal class has too many entries");
    return K0Class(std::move(out));
}

Pushforward pushforward_sf(const VnTriple& triple, const BlockOperator& u, const std::vector<bool>& sub_mask,
                           const Tolerances& tol) {
    const auto& alg = triple.algebra();
    if (sub_mask.size() != alg.size()) throw ModelError("sub-ideal mask length does not match block count");
    for (std::size_t i = 0; i < alg.size(); ++i)
        if (sub_mask[i] && !alg[i].in_ideal) throw ModelError("sub-ideal mask selects a block outside J");

    const BlockOperator& d = triple.dirac();
    const BlockOperator& f = triple.bounded();
    const BlockOperator compact = d.apply([](double x) { return 1.0 / (1.0 + x * x); });
    for (std::size_t i = 0; i < alg.size(); ++i) {
        if (!alg[i].in_ideal || sub_mask[i]) continue;
        auto too_small = [&](const std::string& what, double v) {
            std::ostringstream os;
            os << "B too small: " << what << " has norm " << v << " on block " << i << " outside the sub-ideal";
            throw PreconditionError(os.str());
        };
        const double r = la::spectral_norm(compact.block(i));
        if (r > tol.gap) too_small("(1 + D^2)^{-1}", r);
        for (const auto& [name, a] : triple.generators()) {
            const double c = la::spectral_norm(f.block(i) * a.block(i) - a.block(i) * f.block(i));
            if (c > tol.gap) too_small("[F_D, " + name + "]", c);
        }
    }

    const VnAlgebra sub_alg = alg.with_ideal_mask(sub_mask);
    const BlockOperator& pf = triple.p_f();
    const BlockOperator one = BlockOperator::identity(alg);
    // On J \ B the lift p_F u p_F + 1 - p_F is unitary only up to a few
    // multiples of ||(1 + D²)^{-1}||.
    Tolerances relaxed = tol;
    relaxed.gap = 10.0 * tol.gap;

    Pushforward out;
    out.sub = boundary_map(pf * u * pf + one - pf, sub_alg, relaxed);
    out.full = include_class(out.sub, sub_mask, alg);
    const K0Class direct = boundary_map(pf * u * pf + one - pf, alg, tol);
    if (!(out.full == direct)) throw ConsistencyError("pushforward: i_*(sf_B) differs from sf");
    return out;
}

}  // namespace kflow
