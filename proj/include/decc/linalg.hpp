#pragma once

// Dense symmetric linear algebra on Eigen storage: cyclic Jacobi
// eigendecomposition, principal square root, PSD repair and masked Pearson
// correlation.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace decc::linalg {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Mask = Eigen::Array<bool, Eigen::Dynamic, 1>;

class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Real symmetric matrix. Construction checks finiteness and symmetry to
/// 1e-12 relative to the Frobenius norm, then stores the exact average of the
/// two triangles.
template <typename Scalar>
class SymmetricMatrix {
public:
  SymmetricMatrix() = default;

  template <typename Derived>
  SymmetricMatrix(const Eigen::MatrixBase<Derived>& a)  // NOLINT(google-explicit-constructor)
      : data_(a) {
    if (data_.rows() != data_.cols()) {
      throw std::invalid_argument("symmetric matrix must be square");
    }
    if (!data_.allFinite()) {
      throw std::invalid_argument("symmetric matrix has non-finite entries");
    }
    const Scalar scale = data_.norm();
    const Scalar asym = (data_ - data_.transpose()).norm();
    if (asym > Scalar(1e-12) * scale) {
      std::ostringstream os;
      os << "matrix is not symmetric (asymmetry " << asym << ", norm " << scale << ")";
      throw std::invalid_argument(os.str());
    }
    data_ = (data_ + data_.transpose()) / Scalar(2);
  }

  static SymmetricMatrix identity(Eigen::Index n) {
    return SymmetricMatrix(Matrix<Scalar>::Identity(n, n));
  }

  const Matrix<Scalar>& matrix() const { return data_; }
  Eigen::Index dim() const { return data_.rows(); }
  Scalar operator()(Eigen::Index r, Eigen::Index c) const { return data_(r, c); }

  bool is_identity() const {
    return data_ == Matrix<Scalar>::Identity(data_.rows(), data_.cols());
  }

private:
  Matrix<Scalar> data_;
};

template <typename Derived>
SymmetricMatrix(const Eigen::MatrixBase<Derived>&) -> SymmetricMatrix<typename Derived::Scalar>;

template <typename Scalar>
struct SymmetricEigen {
  Matrix<Scalar> vectors;  ///< orthogonal; column k pairs with values(k)
  Vector<Scalar> values;   ///< ascending
  int sweeps = 0;
};

struct JacobiOptions {
  double relative_tolerance = 1e-12;
  int max_sweeps = 100;
};

/// Cyclic Jacobi eigendecomposition A = U diag(lambda) U^T.
/// Converges when the off-diagonal Frobenius norm drops below
/// tolerance * ||A||_F; throws NumericalError after max_sweeps.
template <typename Scalar>
SymmetricEigen<Scalar> eigh(const SymmetricMatrix<Scalar>& input, JacobiOptions options = {}) {
  using std::abs;
  using std::sqrt;
  const Eigen::Index n = input.dim();
  Matrix<Scalar> a = input.matrix();
  Matrix<Scalar> v = Matrix<Scalar>::Identity(n, n);
  const Scalar threshold = Scalar(options.relative_tolerance) * a.norm();

  auto off_norm = [&]() {
    Scalar s(0);
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) s += Scalar(2) * a(p, q) * a(p, q);
    }
    return sqrt(s);
  };

  int sweep = 0;
  Scalar off = off_norm();
  while (off > threshold) {
    if (sweep == options.max_sweeps) {
      std::ostringstream os;
      os << "Jacobi eigensolver did not converge after " << sweep
         << " sweeps (off-diagonal residual " << off << ")";
      throw NumericalError(os.str());
    }
    ++sweep;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Scalar apq = a(p, q);
        if (apq == Scalar(0)) continue;
        const Scalar theta = (a(q, q) - a(p, p)) / (Scalar(2) * apq);
        const Scalar t = (theta >= Scalar(0) ? Scalar(1) : Scalar(-1)) /
                         (abs(theta) + sqrt(theta * theta + Scalar(1)));
        const Scalar c = Scalar(1) / sqrt(t * t + Scalar(1));
        const Scalar s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar akp = a(k, p);
          const Scalar akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar apk = a(p, k);
          const Scalar aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = Scalar(0);
        a(q, p) = Scalar(0);
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar vkp = v(k, p);
          const Scalar vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
    off = off_norm();
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });
  SymmetricEigen<Scalar> out{Matrix<Scalar>(n, n), Vector<Scalar>(n), sweep};
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto src = order[static_cast<std::size_t>(k)];
    out.values(k) = a(src, src);
    out.vectors.col(k) = v.col(src);
  }
  return out;
}

inline constexpr double kNegativeEigenvalueTolerance = 1e-8;

/// Principal square root S = U Lambda^{1/2} U^T of a PSD matrix. Eigenvalues in
/// [-1e-8, 0) are clipped to zero; anything more negative is rejected. The
/// identity maps to the identity exactly.
template <typename Scalar>
SymmetricMatrix<Scalar> sqrt_psd(const SymmetricMatrix<Scalar>& a) {
  if (a.is_identity()) return a;
  const auto eig = eigh(a);
  if (eig.values.size() > 0 && eig.values(0) < Scalar(-kNegativeEigenvalueTolerance)) {
    std::ostringstream os;
    os << "matrix is not positive semidefinite (smallest eigenvalue " << eig.values(0) << ")";
    throw std::domain_error(os.str());
  }
  const Vector<Scalar> root = eig.values.cwiseMax(Scalar(0)).cwiseSqrt();
  const Matrix<Scalar> s = eig.vectors * root.asDiagonal() * eig.vectors.transpose();
  return SymmetricMatrix<Scalar>(((s + s.transpose()) / Scalar(2)).eval());
}

struct PsdRepair {
  double eigenvalue_floor = 1e-8;
};

/// Clips eigenvalues of a correlation-like matrix at the floor and rescales to
/// unit diagonal. Matrices whose smallest eigenvalue already reaches the floor
/// are returned unchanged. The bool reports whether a repair happened.
template <typename Scalar>
std::pair<SymmetricMatrix<Scalar>, bool> repair_correlation(const SymmetricMatrix<Scalar>& a,
                                                            PsdRepair options = {}) {
  const auto eig = eigh(a);
  const Scalar floor(options.eigenvalue_floor);
  if (eig.values.size() == 0 || eig.values(0) >= floor) return {a, false};
  const Vector<Scalar> clipped = eig.values.cwiseMax(floor);
  Matrix<Scalar> r = eig.vectors * clipped.asDiagonal() * eig.vectors.transpose();
  const Vector<Scalar> inv_sd = r.diagonal().cwiseSqrt().cwiseInverse();
  r = inv_sd.asDiagonal() * r * inv_sd.asDiagonal();
  r = ((r + r.transpose()) / Scalar(2)).eval();
  r.diagonal().setOnes();
  return {SymmetricMatrix<Scalar>(r), true};
}

/// Product-moment correlation over the pairs where `valid` is set, clamped to
/// [-1, 1]. Returns nullopt when fewer than two pairs remain or either side
/// has zero variance.
template <typename DerivedU, typename DerivedV>
std::optional<typename DerivedU::Scalar> pearson(const Eigen::MatrixBase<DerivedU>& u,
                                                 const Eigen::MatrixBase<DerivedV>& v,
                                                 const Mask& valid) {
  using Scalar = typename DerivedU::Scalar;
  if (u.size() != v.size() || u.size() != valid.size()) {
    throw std::invalid_argument("pearson: length mismatch");
  }
  Eigen::Index count = 0;
  Scalar su(0);
  Scalar sv(0);
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (!valid(i)) continue;
    ++count;
    su += u(i);
    sv += v(i);
  }
  if (count < 2) return std::nullopt;
  const Scalar mu = su / Scalar(count);
  const Scalar mv = sv / Scalar(count);
  Scalar suu(0);
  Scalar svv(0);
  Scalar suv(0);
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (!valid(i)) continue;
    const Scalar du = u(i) - mu;
    const Scalar dv = v(i) - mv;
    suu += du * du;
    svv += dv * dv;
    suv += du * dv;
  }
  if (suu <= Scalar(0) || svv <= Scalar(0)) return std::nullopt;
  const Scalar r = suv / (std::sqrt(suu) * std::sqrt(svv));
  return std::clamp(r, Scalar(-1), Scalar(1));
}

template <typename DerivedU, typename DerivedV>
std::optional<typename DerivedU::Scalar> pearson(const Eigen::MatrixBase<DerivedU>& u,
                                                 const Eigen::MatrixBase<DerivedV>& v) {
  return pearson(u, v, Mask::Constant(u.size(), true));
}

}  // namespace decc::linalg
