#pragma once

// Shared fixtures for the test suites: an independent Bessel-series reference
// for the unit-disk eigenvalues, a brute-force dense solver for the boundary
// eigenvalue pencil, random-function helpers, and a scratch-directory guard.

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "steklov/assembly.hpp"
#include "steklov/mesh.hpp"
#include "steklov/spectrum.hpp"

namespace testhelp {

/// Modified Bessel function of the first kind by its power series,
/// I_n(x) = sum_m (x/2)^{2m+n} / (m! (m+n)!).  Converges in a handful of
/// terms for the |x| <= 1 arguments used here.
inline double bessel_I(int n, double x) {
  double term = 1.0;
  for (int j = 1; j <= n; ++j) term *= (x / 2.0) / static_cast<double>(j);
  double sum = term;
  for (int m = 1; m <= 40; ++m) {
    term *= (x / 2.0) * (x / 2.0) /
            (static_cast<double>(m) * static_cast<double>(m + n));
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

/// Eigenvalue of the angular mode n for the unit disk with unit coefficient:
/// separable solutions I_n(r) e^{i n theta} give mu_n = I_n'(1) / I_n(1),
/// with I_n' = (I_{n-1} + I_{n+1}) / 2 and I_0' = I_1.
inline double disk_mu_mode(int n) {
  const double deriv =
      n == 0 ? bessel_I(1, 1.0)
             : 0.5 * (bessel_I(n - 1, 1.0) + bessel_I(n + 1, 1.0));
  return deriv / bessel_I(n, 1.0);
}

/// Reference values frozen from disk_mu_mode before the solver was written;
/// modes n = 0, 1, 1, 2, 2, 3, 3, 4 in ascending order (nonzero modes are
/// double eigenvalues).
inline const std::vector<double>& disk_reference_mus() {
  static const std::vector<double> mus = {
      0.44638996589653451, 1.2401937238700897, 1.2401937238700897,
      2.1633061176105341,  2.1633061176105341, 3.1234693141434069,
      3.1234693141434069,  4.0991783823997126};
  return mus;
}

/// Brute-force oracle for the eigenvalue pencil: solves the reversed dense
/// problem B x = nu (A+C) x, whose right-hand matrix is positive definite,
/// and returns mu = 1/nu for the k largest nu in ascending mu order.
inline std::vector<double> dense_pencil_mus(
    const steklov::SymmetricSparseOperator& A,
    const steklov::SymmetricSparseOperator& C,
    const steklov::SymmetricSparseOperator& B, std::size_t k) {
  const Eigen::MatrixXd K =
      Eigen::MatrixXd(A.matrix()) + Eigen::MatrixXd(C.matrix());
  const Eigen::MatrixXd Bd = Eigen::MatrixXd(B.matrix());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Bd, K);
  std::vector<double> mus;
  const auto& nu = es.eigenvalues();
  for (Eigen::Index i = nu.size() - 1; i >= 0 && mus.size() < k; --i) {
    if (!(nu[i] > 0.0)) break;
    mus.push_back(1.0 / nu[i]);
  }
  return mus;
}

inline steklov::DiscreteFunction random_function(const steklov::Mesh& mesh,
                                                 std::mt19937_64& rng,
                                                 double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  Eigen::VectorXd v(static_cast<Eigen::Index>(mesh.n_nodes()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = gauss(rng);
  return steklov::make_function(mesh, std::move(v));
}

/// Standard desk-scale fixture: unit disk, c == 1, k eigenpairs.
struct DiskSetup {
  steklov::Mesh mesh;
  steklov::SymmetricSparseOperator A, C, B;
  steklov::SteklovSpectrum spectrum;
};

inline DiskSetup make_disk_setup(double h, std::size_t k) {
  steklov::Mesh mesh = steklov::generate_disk(1.0, h);
  auto A = steklov::assemble_stiffness(mesh);
  auto C = steklov::assemble_domain_mass_weighted(
      mesh, steklov::constant_coefficient(1.0), 3);
  auto B = steklov::assemble_boundary_mass(mesh);
  auto spectrum = steklov::solve_steklov(A, C, B, k);
  return {std::move(mesh), std::move(A), std::move(C), std::move(B),
          std::move(spectrum)};
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    static const unsigned run_token = std::random_device{}();
    path_ = std::filesystem::temp_directory_path() /
            (tag + "-" + std::to_string(run_token) + "-" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }

  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }
  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace testhelp
