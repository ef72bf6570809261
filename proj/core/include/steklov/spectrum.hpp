#pragma once

#include <string>
#include <vector>

#include "steklov/assembly.hpp"

namespace steklov {

/// The k smallest eigenpairs of the pencil (A+C)x = mu Bx.  Eigenvalues are
/// strictly positive and ascending; eigenvectors are B-orthonormal with the
/// sign fixed so the first nonzero boundary nodal value is positive.
struct SteklovSpectrum {
  std::vector<double> eigenvalues;
  std::vector<DiscreteFunction> eigenvectors;
  Eigen::VectorXd b_phi1;  // B * phi_1, cached for decompositions
  std::uint64_t mesh_id = 0;
  std::uint64_t id = 0;  // provenance token, unique per solve

  std::size_t k() const { return eigenvalues.size(); }
  double mu(std::size_t i) const { return eigenvalues.at(i); }
  const DiscreteFunction& phi(std::size_t i) const {
    return eigenvectors.at(i);
  }
};

/// Split of u along phi_1: u = t phi_1 + w with phi_1' B w = 0.
struct EigenDecomposition {
  double t = 0.0;
  DiscreteFunction w;
};

/// Boundary Schur complement solve: condense interior unknowns through the
/// SPD block of A+C, solve the dense definite pencil on boundary nodes, and
/// extend eigenvectors back into the interior.
SteklovSpectrum solve_steklov(const SymmetricSparseOperator& A,
                              const SymmetricSparseOperator& C,
                              const SymmetricSparseOperator& B, std::size_t k);

EigenDecomposition decompose(const DiscreteFunction& u,
                             const SteklovSpectrum& spectrum);

/// Rebuild the cached B*phi_1 product (needed by decompose) for a spectrum
/// loaded from disk, which stores eigenpairs only.
void attach_boundary_mass(SteklovSpectrum& spectrum,
                          const SymmetricSparseOperator& B);

/// u'(A+C)u / u'Bu.  Returns +infinity when the boundary trace vanishes
/// (u'Bu = 0); callers must treat the sentinel explicitly.
double rayleigh_quotient(const DiscreteFunction& u,
                         const SymmetricSparseOperator& A,
                         const SymmetricSparseOperator& C,
                         const SymmetricSparseOperator& B);

/// Randomized check of the two-sided eigenspace inequalities: for v in
/// span(phi_1..phi_j), mu_j u'Bu - u'(A+C)u >= 0, and for w B-orthogonal to
/// that span (within the computed subspace), u'(A+C)u - mu_{j+1} u'Bu >= 0.
/// Margins are relative to the c-norm squared; negative margins are
/// violations.
struct EigenspaceReport {
  int j = 1;
  int trials = 0;
  int lower_violations = 0;  // v side
  int upper_violations = 0;  // w side
  double worst_lower_margin = 0.0;
  double worst_upper_margin = 0.0;
  double slack = 1e-8;

  bool passed() const { return lower_violations == 0 && upper_violations == 0; }
};

EigenspaceReport verify_eigenspace_inequalities(const SteklovSpectrum& spectrum,
                                                const SymmetricSparseOperator& A,
                                                const SymmetricSparseOperator& C,
                                                const SymmetricSparseOperator& B,
                                                int trials, int j = 1,
                                                unsigned long long seed = 2024);

void save_spectrum(const SteklovSpectrum& spectrum, const std::string& path);
SteklovSpectrum load_spectrum(const std::string& path);

}  // namespace steklov
