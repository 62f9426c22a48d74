#include "linalg.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "glycast/errors.hpp"

namespace glycast::linalg {

ScaleStats column_stats(const Matrix& X, const std::vector<int>& rows,
                        const std::vector<int>& cols) {
    const std::size_t k = cols.size();
    ScaleStats st;
    st.mean.assign(k, 0.0);
    st.sd.assign(k, 1.0);
    if (rows.empty()) return st;
    const double m = static_cast<double>(rows.size());
    for (int r : rows) {
        const double* row = X.row(static_cast<std::size_t>(r));
        for (std::size_t j = 0; j < k; ++j) st.mean[j] += row[cols[j]];
    }
    for (std::size_t j = 0; j < k; ++j) st.mean[j] /= m;
    std::vector<double> ss(k, 0.0);
    for (int r : rows) {
        const double* row = X.row(static_cast<std::size_t>(r));
        for (std::size_t j = 0; j < k; ++j) {
            const double d = row[cols[j]] - st.mean[j];
            ss[j] += d * d;
        }
    }
    for (std::size_t j = 0; j < k; ++j) {
        const double var = ss[j] / m;
        st.sd[j] = var > 1e-24 ? std::sqrt(var) : 1.0;
    }
    return st;
}

double mean_of(const std::vector<double>& y, const std::vector<int>& rows) {
    if (rows.empty()) return 0.0;
    double s = 0.0;
    for (int r : rows) s += y[static_cast<std::size_t>(r)];
    return s / static_cast<double>(rows.size());
}

std::vector<double> ridge_standardized(const Matrix& X,
                                       const std::vector<double>& y,
                                       const std::vector<int>& rows,
                                       const std::vector<int>& cols,
                                       const ScaleStats& stats, double y_mean,
                                       double lambda) {
    const std::size_t m = rows.size();
    const std::size_t k = cols.size();
    Eigen::MatrixXd Xs(m, k);
    Eigen::VectorXd yc(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double* row = X.row(static_cast<std::size_t>(rows[i]));
        for (std::size_t j = 0; j < k; ++j) {
            Xs(i, j) = (row[cols[j]] - stats.mean[j]) / stats.sd[j];
        }
        yc(i) = y[static_cast<std::size_t>(rows[i])] - y_mean;
    }

    Eigen::MatrixXd G = Xs.transpose() * Xs;
    if (lambda > 0.0) {
        G.diagonal().array() += lambda;
        const Eigen::VectorXd rhs = Xs.transpose() * yc;
        const Eigen::VectorXd w = G.ldlt().solve(rhs);
        return {w.data(), w.data() + w.size()};
    }

    // Pure OLS path: explicit rank check.
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xs);
    qr.setThreshold(1e-10);
    if (qr.rank() < static_cast<Eigen::Index>(k)) {
        throw DegenerateInputError("OLS design is rank deficient (rank " +
                                   std::to_string(qr.rank()) + " < " +
                                   std::to_string(k) + ")");
    }
    const Eigen::VectorXd w = qr.solve(yc);
    return {w.data(), w.data() + w.size()};
}

double predict_standardized(const double* row, const std::vector<int>& cols,
                            const ScaleStats& stats, double y_mean,
                            const std::vector<double>& w) {
    double acc = y_mean;
    for (std::size_t j = 0; j < cols.size(); ++j) {
        acc += w[j] * (row[cols[j]] - stats.mean[j]) / stats.sd[j];
    }
    return acc;
}

std::vector<double> lstsq(const Matrix& A, const std::vector<double>& b) {
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>
        Am(A.data.data(), A.rows, A.cols);
    Eigen::Map<const Eigen::VectorXd> bm(b.data(), b.size());
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Am);
    qr.setThreshold(1e-12);
    if (qr.rank() < static_cast<Eigen::Index>(A.cols)) {
        throw DegenerateInputError("least squares design is rank deficient");
    }
    const Eigen::VectorXd x = qr.solve(bm);
    return {x.data(), x.data() + x.size()};
}

bool poly_roots_outside(const std::vector<double>& coeffs, double bound) {
    // Roots of 1 - c1 z - ... - cp z^p. Strip trailing zeros first.
    std::size_t p = coeffs.size();
    while (p > 0 && coeffs[p - 1] == 0.0) --p;
    if (p == 0) return true;

    // Companion matrix of the reversed monic polynomial in u = 1/z:
    // u^p - c1 u^(p-1) - ... - cp = 0; roots u_i = 1/z_i must satisfy
    // |u_i| < 1/bound.
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(p, p);
    for (std::size_t j = 0; j < p; ++j) C(0, j) = coeffs[j];
    for (std::size_t i = 1; i < p; ++i) C(i, i - 1) = 1.0;
    const Eigen::VectorXcd eig = C.eigenvalues();
    for (Eigen::Index i = 0; i < eig.size(); ++i) {
        if (std::abs(eig(i)) >= 1.0 / bound) return false;
    }
    return true;
}

} // namespace glycast::linalg
