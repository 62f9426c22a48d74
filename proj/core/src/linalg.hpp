#ifndef GLYCAST_SRC_LINALG_HPP
#define GLYCAST_SRC_LINALG_HPP

// Internal dense helpers shared by the ridge model, SISAL's inner estimator
// and ARIMA. Not installed.

#include <cstdint>
#include <vector>

#include "glycast/series_ops.hpp"

namespace glycast::linalg {

struct ScaleStats {
    std::vector<double> mean;
    std::vector<double> sd;  // constant columns get sd = 1
};

/// Column stats over the selected rows (subset of X's rows) for the selected
/// columns. Population sd.
ScaleStats column_stats(const Matrix& X, const std::vector<int>& rows,
                        const std::vector<int>& cols);

double mean_of(const std::vector<double>& y, const std::vector<int>& rows);

/// Ridge weights in standardized space: solves (Xs^T Xs + lambda I) w = Xs^T yc
/// where Xs = standardized X[rows, cols] and yc = y[rows] - y_mean.
/// lambda == 0 performs an explicit rank check and throws
/// DegenerateInputError when the standardized design is rank deficient.
std::vector<double> ridge_standardized(const Matrix& X,
                                       const std::vector<double>& y,
                                       const std::vector<int>& rows,
                                       const std::vector<int>& cols,
                                       const ScaleStats& stats, double y_mean,
                                       double lambda);

/// Prediction for one raw row given standardized-space weights.
double predict_standardized(const double* row, const std::vector<int>& cols,
                            const ScaleStats& stats, double y_mean,
                            const std::vector<double>& w);

/// Least squares solve of A x = b (A row-major m x n, m >= n) via column-
/// pivoted QR; throws DegenerateInputError when A is rank deficient.
std::vector<double> lstsq(const Matrix& A, const std::vector<double>& b);

/// Largest-magnitude reciprocal root check: true when every root of
/// 1 - c1 z - c2 z^2 - ... lies strictly outside |z| = bound.
bool poly_roots_outside(const std::vector<double>& coeffs, double bound);

} // namespace glycast::linalg

#endif
