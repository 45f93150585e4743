#include "vns/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "vns/error.hpp"

namespace vns {
namespace {

constexpr const char* kModule = "spectral";

[[noreturn]] void Fail(ErrorCode code, const std::string& detail) {
  throw Error(code, kModule, detail);
}

// Deterministic, non-degenerate fill for the guard columns of the block so
// that structured inputs (diagonal matrices, coordinate-aligned data) do not
// start orthogonal to a wanted eigenvector.
Vector JitterVector(Index dim, int column) {
  // mt19937_64 output is fixed by the standard, so this is portable.
  std::mt19937_64 engine(0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(column));
  Vector v(dim);
  for (Index i = 0; i < dim; ++i) {
    v[i] = static_cast<double>(engine() >> 11) * 0x1.0p-53 - 0.5;
  }
  return v;
}

template <class Col>
void Orthogonalize(Col&& v, const Matrix& basis, Index count) {
  // Two passes of classical Gram-Schmidt.
  for (int pass = 0; pass < 2; ++pass) {
    for (Index j = 0; j < count; ++j) {
      v -= basis.col(j).dot(v) * basis.col(j);
    }
  }
}

}  // namespace

FeatureMatrix::FeatureMatrix(RowMatrix data, bool normalized)
    : data_(std::move(data)), normalized_(normalized) {
  if (data_.rows() < 1 || data_.cols() < 1) {
    Fail(ErrorCode::kDomainError, "feature matrix must be at least 1x1");
  }
  if (normalized_) {
    for (Index i = 0; i < data_.rows(); ++i) {
      const double n = data_.row(i).norm();
      if (std::abs(n - 1.0) > kNormTolerance) {
        Fail(ErrorCode::kNotNormalized,
             "row " + std::to_string(i) + " has norm " + std::to_string(n));
      }
    }
  }
}

DensityMatrix::DensityMatrix(Matrix data) : data_(std::move(data)) {
  if (data_.rows() != data_.cols() || data_.rows() < 1) {
    Fail(ErrorCode::kDomainError, "density matrix must be square");
  }
  const double asym = (data_ - data_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12) {
    Fail(ErrorCode::kDomainError,
         "matrix is not symmetric (max deviation " + std::to_string(asym) + ")");
  }
}

FeatureMatrix l2_normalize_rows(const FeatureMatrix& x) {
  RowMatrix out = x.data();
  for (Index i = 0; i < out.rows(); ++i) {
    const double n = out.row(i).norm();
    if (!(n > kZeroRowNorm)) {
      Fail(ErrorCode::kZeroRow, "row " + std::to_string(i));
    }
    out.row(i) /= n;
  }
  return FeatureMatrix(std::move(out), true);
}

DensityMatrix density_matrix(const FeatureMatrix& x) {
  if (!x.normalized()) {
    Fail(ErrorCode::kNotNormalized, "density matrix requires unit rows");
  }
  Matrix rho = x.data().transpose() * x.data();
  rho /= static_cast<double>(x.rows());
  // The product is symmetric up to rounding; make it exactly so.
  rho = 0.5 * (rho + rho.transpose()).eval();
  return DensityMatrix(std::move(rho));
}

EigenSpectrum full_eigendecomposition(const DensityMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.data());
  if (solver.info() != Eigen::Success) {
    Fail(ErrorCode::kConvergenceFailure, "self-adjoint solver did not converge");
  }
  const Index d = a.dim();
  EigenSpectrum out;
  out.eigenvalues.resize(static_cast<size_t>(d));
  out.eigenvectors.resize(d, d);
  // Eigen returns ascending order.
  for (Index i = 0; i < d; ++i) {
    out.eigenvalues[static_cast<size_t>(i)] = solver.eigenvalues()[d - 1 - i];
    out.eigenvectors.col(i) = solver.eigenvectors().col(d - 1 - i);
  }
  return out;
}

EigenSpectrum top_eigenpairs(const DensityMatrix& a, int r,
                             const PowerIterationOptions& opts) {
  const Matrix& m = a.data();
  Vector start = m.colwise().mean().transpose();
  return top_eigenpairs([&m](const Vector& in, Vector& out) { out.noalias() = m * in; },
                        a.dim(), r, start, opts);
}

EigenSpectrum top_eigenpairs(const LinearOperator& op, Index dim, int r,
                             const Vector& start,
                             const PowerIterationOptions& opts) {
  if (r < 1 || r > dim) {
    Fail(ErrorCode::kDomainError,
         "rank " + std::to_string(r) + " outside [1, " + std::to_string(dim) + "]");
  }
  if (start.size() != dim) {
    Fail(ErrorCode::kDimensionMismatch, "start vector dimension");
  }

  // Block power iteration: a few guard vectors beyond r make the rate for
  // pair k roughly lambda_{p+1} / lambda_k instead of lambda_{k+1} / lambda_k,
  // and Rayleigh-Ritz on the block separates clustered pairs. Leading pairs
  // that meet the criterion are kept as converged (soft deflation).
  const Index p = std::min<Index>(dim, 2 * static_cast<Index>(r) + 4);
  Matrix v(dim, p);
  v.col(0) = start;
  if (start.norm() <= kZeroRowNorm) v.col(0) = Vector::Unit(dim, 0);
  for (Index j = 1; j < p; ++j) v.col(j) = JitterVector(dim, static_cast<int>(j));
  for (Index j = 0; j < p; ++j) {
    Orthogonalize(v.col(j), v, j);
    if (v.col(j).norm() <= 1e-8) {
      // Structured start (e.g. coordinate-aligned); use the first free axis.
      for (Index e = 0; e < dim && v.col(j).norm() <= 1e-8; ++e) {
        v.col(j) = Vector::Unit(dim, e);
        Orthogonalize(v.col(j), v, j);
      }
    }
    v.col(j).normalize();
  }

  Matrix w(dim, p);
  Vector in(dim), out(dim);
  auto apply_block = [&] {
    for (Index j = 0; j < p; ++j) {
      in = v.col(j);
      op(in, out);
      w.col(j) = out;
    }
  };

  Vector theta_prev = Vector::Constant(p, std::numeric_limits<double>::quiet_NaN());
  Vector theta(p);
  Index converged = 0;
  for (int it = 0; it < opts.max_iter; ++it) {
    apply_block();
    // Rayleigh-Ritz on span(v).
    Matrix h = v.transpose() * w;
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> small(h);
    const Matrix s = small.eigenvectors().rowwise().reverse();
    theta = small.eigenvalues().reverse();
    v = (v * s).eval();
    w = (w * s).eval();

    converged = 0;
    while (converged < r) {
      const Index k = converged;
      const double residual = (w.col(k) - theta[k] * v.col(k)).norm();
      const double change = std::abs(theta[k] - theta_prev[k]);
      if (!(residual < opts.residual_tol &&
            change <= opts.tol * std::max(std::abs(theta[k]), 1e-5))) {
        break;
      }
      ++converged;
    }
    if (converged == r) break;
    theta_prev = theta;

    // Next block: A v, re-orthonormalized. Converged columns stay put.
    for (Index j = converged; j < p; ++j) v.col(j) = w.col(j);
    for (Index j = converged; j < p; ++j) {
      Orthogonalize(v.col(j), v, j);
      double norm = v.col(j).norm();
      if (norm <= 1e-14 * std::max(1.0, std::abs(theta[0]))) {
        // Direction annihilated (null space of A); refill deterministically.
        v.col(j) = JitterVector(dim, static_cast<int>(j + p * (it + 1)));
        Orthogonalize(v.col(j), v, j);
        norm = v.col(j).norm();
      }
      v.col(j) /= norm;
    }
  }
  if (converged < r) {
    Fail(ErrorCode::kConvergenceFailure,
         "eigenpair " + std::to_string(converged) + " after " +
             std::to_string(opts.max_iter) + " iterations");
  }

  EigenSpectrum result;
  result.eigenvalues.assign(theta.data(), theta.data() + r);
  result.eigenvectors = v.leftCols(r);
  for (Index k = 0; k < r; ++k) result.eigenvectors.col(k).normalize();
  return result;
}

double vendi_score(const std::vector<double>& eigenvalues, double q) {
  if (!(q >= 0.0) || q == 1.0) {
    Fail(ErrorCode::kDomainError, "order q must be >= 0 and != 1");
  }
  if (eigenvalues.empty()) {
    Fail(ErrorCode::kUnnormalizedSpectrum, "empty spectrum");
  }
  const double total = std::accumulate(eigenvalues.begin(), eigenvalues.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-6) {
    Fail(ErrorCode::kUnnormalizedSpectrum,
         "eigenvalues sum to " + std::to_string(total));
  }
  if (std::isinf(q)) {
    return vendi_score_inf(*std::max_element(eigenvalues.begin(), eigenvalues.end()));
  }
  double s = 0.0;
  for (double l : eigenvalues) {
    // Zero (or rounding-negative) eigenvalues carry no mass for any order.
    if (l > 1e-12) s += std::pow(l, q);
  }
  return std::exp(std::log(s) / (1.0 - q));
}

double vendi_score(const EigenSpectrum& spectrum, double q) {
  return vendi_score(spectrum.eigenvalues, q);
}

double vendi_score_q2_from_density(const DensityMatrix& a) {
  const double trace = a.data().trace();
  if (std::abs(trace - 1.0) > 1e-6) {
    Fail(ErrorCode::kUnnormalizedSpectrum, "trace is " + std::to_string(trace));
  }
  return 1.0 / a.data().squaredNorm();
}

double vendi_score_inf(double lambda_max) {
  if (!(lambda_max > 0.0) || lambda_max > 1.0 + 1e-9) {
    Fail(ErrorCode::kDomainError,
         "lambda_max " + std::to_string(lambda_max) + " outside (0, 1]");
  }
  return 1.0 / lambda_max;
}

}  // namespace vns
