#include "nextrec/numerics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "nextrec/error.hpp"

namespace nextrec {

namespace {

constexpr double kMinReciprocalCondition = 1e-13;
constexpr double kJitterScale = 1e-10;

bool finite(const Matrix& m) { return m.allFinite(); }

bool finite(const SparseMatrix& m) {
  for (Eigen::Index k = 0; k < m.nonZeros(); ++k) {
    if (!std::isfinite(m.valuePtr()[k])) return false;
  }
  return true;
}

// Solves (gram + lambda I) W = rhs. gram is SPD (or PSD when lambda = 0).
Matrix solve_regularized(Matrix gram, const Matrix& rhs, double lambda) {
  const Eigen::Index n = gram.rows();
  gram.diagonal().array() += lambda;
  Eigen::LLT<Matrix> llt(gram);
  auto ok = [&] { return llt.info() == Eigen::Success && llt.rcond() >= kMinReciprocalCondition; };
  if (!ok()) {
    if (lambda == 0.0) {
      throw SingularError("ridge system is singular at lambda = 0");
    }
    const double jitter = kJitterScale * std::max(gram.trace(), 1.0) / static_cast<double>(n);
    gram.diagonal().array() += jitter;
    llt.compute(gram);
    if (llt.info() != Eigen::Success) {
      throw SingularError("ridge system could not be factorized after jitter");
    }
  }
  return llt.solve(rhs);
}

void check_ridge_inputs(Eigen::Index g_rows, Eigen::Index r_rows, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw InputError("ridge lambda must be finite and non-negative");
  }
  if (g_rows != r_rows) throw InputError("ridge_solve: G and R row counts differ");
}

}  // namespace

Matrix ridge_solve(const Matrix& g, const Matrix& r, double lambda) {
  check_ridge_inputs(g.rows(), r.rows(), lambda);
  if (!finite(g) || !finite(r)) throw InputError("ridge_solve: non-finite input");
  if (lambda > 0.0 && g.cols() > g.rows()) {
    Matrix kernel = g * g.transpose();
    return g.transpose() * solve_regularized(std::move(kernel), r, lambda);
  }
  Matrix gram = g.transpose() * g;
  return solve_regularized(std::move(gram), g.transpose() * r, lambda);
}

Matrix ridge_solve(const SparseMatrix& g, const Matrix& r, double lambda) {
  check_ridge_inputs(g.rows(), r.rows(), lambda);
  if (!finite(g) || !finite(r)) throw InputError("ridge_solve: non-finite input");
  if (lambda > 0.0 && g.cols() > g.rows()) {
    const SparseMatrix kernel = g * SparseMatrix(g.transpose());
    Matrix z = solve_regularized(Matrix(kernel), r, lambda);
    return g.transpose() * z;
  }
  const SparseMatrix gram = SparseMatrix(g.transpose()) * g;
  Matrix rhs = g.transpose() * r;
  return solve_regularized(Matrix(gram), rhs, lambda);
}

void solve_spd_inplace(Matrix& a, Vector& b, double lambda) {
  a.diagonal().array() += lambda;
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() == Eigen::Success && llt.rcond() >= kMinReciprocalCondition) {
    llt.solveInPlace(b);
    return;
  }
  // Rank-deficient row system: any minimizer keeps ALS monotone, take the
  // minimum-norm one.
  b = a.completeOrthogonalDecomposition().solve(b);
}

double score(std::span<const double> user, std::span<const double> last,
             std::span<const double> next) {
  if (user.size() != last.size() || user.size() != next.size()) {
    throw InputError("score: dimension mismatch");
  }
  double ux = 0.0, uy = 0.0, xy = 0.0;
  for (std::size_t k = 0; k < user.size(); ++k) {
    ux += user[k] * last[k];
    uy += user[k] * next[k];
    xy += last[k] * next[k];
  }
  return ux + uy + xy;
}

namespace {

double distance_from(double dot, double norm_a, double norm_b) {
  if (norm_a == 0.0 || norm_b == 0.0) return 1.0;
  return std::clamp(1.0 - dot / (norm_a * norm_b), 0.0, 2.0);
}

}  // namespace

double cosine_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InputError("cosine_distance: dimension mismatch");
  double dot = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    aa += a[k] * a[k];
    bb += b[k] * b[k];
  }
  return distance_from(dot, std::sqrt(aa), std::sqrt(bb));
}

double cosine_distance(const SparseMatrix& rows, Eigen::Index a, Eigen::Index b) {
  const double dot = rows.row(a).dot(rows.row(b));
  return distance_from(dot, rows.row(a).norm(), rows.row(b).norm());
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

namespace {

constexpr char kMagic[4] = {'C', 'R', 'M', 'X'};

template <typename T>
void write_le(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
bool read_le(std::istream& in, T& value) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) return false;
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  std::memcpy(&value, bytes, sizeof(T));
  return true;
}

}  // namespace

void save_matrix(const Matrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(kMagic, 4);
  write_le(out, static_cast<std::uint64_t>(m.rows()));
  write_le(out, static_cast<std::uint64_t>(m.cols()));
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(m.size() * sizeof(double)));
  } else {
    for (Eigen::Index k = 0; k < m.size(); ++k) write_le(out, m.data()[k]);
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Matrix load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  char magic[4];
  std::uint64_t rows = 0, cols = 0;
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError(path.string() + ": bad matrix magic");
  }
  if (!read_le(in, rows) || !read_le(in, cols)) {
    throw FormatError(path.string() + ": truncated matrix header");
  }
  const auto expected = rows * cols * sizeof(double);
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::uint64_t>(in.tellg());
  if (size != 20 + expected) throw FormatError(path.string() + ": matrix payload size mismatch");
  in.seekg(20);
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    if (!read_le(in, m.data()[k])) throw FormatError(path.string() + ": truncated matrix data");
  }
  return m;
}

}  // namespace nextrec
