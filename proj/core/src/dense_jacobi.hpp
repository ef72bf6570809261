#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Core>

#include "steklov/errors.hpp"

namespace steklov::detail {

/// Cyclic Jacobi rotations on a symmetric matrix.  On return `a` is diagonal
/// up to `tol` times its Frobenius norm and `v` holds the accumulated
/// rotations (columns are eigenvectors).  Deterministic sweep order.
inline void cyclic_jacobi(Eigen::MatrixXd& a, Eigen::MatrixXd& v,
                          double tol = 1e-14, int max_sweeps = 50) {
  const Eigen::Index n = a.rows();
  v = Eigen::MatrixXd::Identity(n, n);
  if (n <= 1) return;
  const double fro = std::max(a.norm(), 1e-300);

  const auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) s += 2.0 * a(p, q) * a(p, q);
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (off_norm() <= tol * fro) return;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t =
            (theta >= 0.0 ? 1.0 : -1.0) /
            (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (off_norm() > 1e-8 * fro)
    throw Error("Jacobi eigensolver did not converge within " +
                std::to_string(max_sweeps) + " sweeps");
}

/// Eigenvalues (ascending) and matching eigenvectors of a symmetric matrix.
inline void symmetric_eigen(const Eigen::MatrixXd& m,
                            Eigen::VectorXd& eigenvalues,
                            Eigen::MatrixXd& eigenvectors) {
  Eigen::MatrixXd a = 0.5 * (m + m.transpose());
  Eigen::MatrixXd v;
  cyclic_jacobi(a, v);
  const Eigen::Index n = a.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index l, Eigen::Index r) {
                     return a(l, l) < a(r, r);
                   });
  eigenvalues.resize(n);
  eigenvectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    eigenvalues[i] = a(order[i], order[i]);
    eigenvectors.col(i) = v.col(order[i]);
  }
}

}  // namespace steklov::detail
