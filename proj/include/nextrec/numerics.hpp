#pragma once

// Dense/sparse storage and the small set of linear-algebra kernels the
// models need.

#include <filesystem>
#include <span>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace nextrec {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// W = (G^T G + lambda I)^-1 G^T R via Cholesky. When G has more columns than
// rows and lambda > 0 the equivalent dual system G^T (G G^T + lambda I)^-1 R
// is solved instead. Throws InputError on non-finite input or lambda < 0 and
// SingularError when lambda = 0 and G^T G is rank deficient.
Matrix ridge_solve(const Matrix& g, const Matrix& r, double lambda);
Matrix ridge_solve(const SparseMatrix& g, const Matrix& r, double lambda);

// Solves (A + lambda I) x = b for SPD A in place of b. Used for the d x d
// systems of the ALS row updates.
void solve_spd_inplace(Matrix& a, Vector& b, double lambda);

// U.X + U.Y + X.Y
double score(std::span<const double> user, std::span<const double> last,
             std::span<const double> next);

// 1 - cos(a, b), or 1 when either vector is zero.
double cosine_distance(std::span<const double> a, std::span<const double> b);
double cosine_distance(const SparseMatrix& rows, Eigen::Index a, Eigen::Index b);

inline std::span<const double> row_span(const Matrix& m, Eigen::Index row) {
  return {m.data() + row * m.cols(), static_cast<std::size_t>(m.cols())};
}
inline std::span<double> row_span(Matrix& m, Eigen::Index row) {
  return {m.data() + row * m.cols(), static_cast<std::size_t>(m.cols())};
}

bool all_finite(const Matrix& m);

// Binary format: "CRMX", u64 rows, u64 cols (little-endian), row-major f64.
void save_matrix(const Matrix& m, const std::filesystem::path& path);
Matrix load_matrix(const std::filesystem::path& path);

}  // namespace nextrec
