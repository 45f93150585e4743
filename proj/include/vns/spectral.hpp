#pragma once

// Dense symmetric linear algebra over l2-normalized embeddings: density
// matrices, eigendecomposition (full, and top-r by block power iteration)
// and the Vendi Score family.

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <vector>

namespace vns {

using Matrix = Eigen::MatrixXd;
using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kNormTolerance = 1e-9;
inline constexpr double kZeroRowNorm = 1e-12;

// N x D embedding matrix. When `normalized()` holds, every row has unit norm.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  // Throws kDomainError on an empty shape, kNotNormalized when `normalized`
  // is claimed but some row norm is off by more than kNormTolerance.
  explicit FeatureMatrix(RowMatrix data, bool normalized = false);

  Index rows() const { return data_.rows(); }
  Index cols() const { return data_.cols(); }
  bool normalized() const { return normalized_; }
  const RowMatrix& data() const { return data_; }
  auto row(Index i) const { return data_.row(i); }

 private:
  RowMatrix data_;
  bool normalized_ = false;
};

// Symmetric D x D matrix; for features it is X^T X / N (trace 1, PSD).
class DensityMatrix {
 public:
  DensityMatrix() = default;
  // Throws kDomainError if not square or asymmetric beyond 1e-12.
  explicit DensityMatrix(Matrix data);

  Index dim() const { return data_.rows(); }
  const Matrix& data() const { return data_; }

 private:
  Matrix data_;
};

// Eigenpairs sorted by descending eigenvalue; eigenvectors are the columns of
// a D x rank matrix, each unit norm.
struct EigenSpectrum {
  std::vector<double> eigenvalues;
  Matrix eigenvectors;

  Index rank() const { return static_cast<Index>(eigenvalues.size()); }
  Index dim() const { return eigenvectors.rows(); }
};

struct PowerIterationOptions {
  double tol = 1e-10;           // relative eigenvalue change
  double residual_tol = 1e-8;   // ||A u - lambda u||
  int max_iter = 5000;
};

// v -> A v for a symmetric PSD operator of known dimension.
using LinearOperator = std::function<void(const Vector& in, Vector& out)>;

FeatureMatrix l2_normalize_rows(const FeatureMatrix& x);

DensityMatrix density_matrix(const FeatureMatrix& x);

// Backed by Eigen's self-adjoint solver; used as the reference path.
EigenSpectrum full_eigendecomposition(const DensityMatrix& a);

// Top-r eigenpairs of `a`, started from the normalized mean of its rows.
EigenSpectrum top_eigenpairs(const DensityMatrix& a, int r,
                             const PowerIterationOptions& opts = {});

// Matrix-free variant. `start` seeds the first column of the iteration block
// (e1 when it is zero); ConvergenceFailure names the first unconverged pair.
EigenSpectrum top_eigenpairs(const LinearOperator& op, Index dim, int r,
                             const Vector& start,
                             const PowerIterationOptions& opts = {});

// exp(log(sum lambda^q) / (1 - q)); q = +inf returns 1 / lambda_max.
double vendi_score(const EigenSpectrum& spectrum, double q);
double vendi_score(const std::vector<double>& eigenvalues, double q);

// 1 / Tr(A^2) computed as 1 / ||A||_F^2.
double vendi_score_q2_from_density(const DensityMatrix& a);

double vendi_score_inf(double lambda_max);

inline constexpr double kInfiniteOrder =
    std::numeric_limits<double>::infinity();

}  // namespace vns
