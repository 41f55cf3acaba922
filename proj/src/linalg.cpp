#include "kflow/linalg.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <vector>

namespace kflow::la {

Mat adjoint(const Mat& m) { return m.adjoint(); }

HermitianEig eigh(const Mat& m) {
    if (m.rows() == 0) return {Vec(0), Mat(0, 0)};
    const Mat h = (m + m.adjoint()) * 0.5;
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    return {es.eigenvalues(), es.eigenvectors()};
}

Vec singular_values(const Mat& m) {
    if (m.size() == 0) return Vec(0);
    Eigen::BDCSVD<Mat> svd(m);
    return svd.singularValues();
}

double spectral_norm(const Mat& m) {
    if (m.size() == 0) return 0.0;
    return singular_values(m)(0);
}

Mat apply(const Mat& m, const std::function<double(double)>& f) {
    const auto e = eigh(m);
    Vec fv(e.values.size());
    for (Eigen::Index i = 0; i < e.values.size(); ++i) fv(i) = f(e.values(i));
    return e.vectors * fv.cast<cplx>().asDiagonal() * e.vectors.adjoint();
}

Mat apply_complex(const Mat& m, const std::function<cplx(double)>& f) {
    const auto e = eigh(m);
    Eigen::VectorXcd fv(e.values.size());
    for (Eigen::Index i = 0; i < e.values.size(); ++i) fv(i) = f(e.values(i));
    return e.vectors * fv.asDiagonal() * e.vectors.adjoint();
}

Mat projector(const Mat& v) { return v * v.adjoint(); }

Mat range_basis(const Mat& p) {
    const auto e = eigh(p);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < e.values.size(); ++i)
        if (e.values(i) > 0.5) keep.push_back(i);
    Mat basis(p.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j)
        basis.col(static_cast<Eigen::Index>(j)) = e.vectors.col(keep[j]);
    return basis;
}

Mat snap_projection(const Mat& p) {
    if (p.rows() == 0) return p;
    return projector(range_basis(p));
}

}  // namespace kflow::la
