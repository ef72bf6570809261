#include "steklov/spectrum.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>

#include "dense_jacobi.hpp"
#include "text_format.hpp"

namespace steklov {

namespace {

std::atomic<std::uint64_t> next_spectrum_id{1};

std::uint64_t common_mesh_id(const SymmetricSparseOperator& A,
                             const SymmetricSparseOperator& C,
                             const SymmetricSparseOperator& B) {
  const std::uint64_t ids[3] = {A.mesh_id(), C.mesh_id(), B.mesh_id()};
  std::uint64_t common = 0;
  for (std::uint64_t id : ids) {
    if (id == 0) continue;
    if (common != 0 && common != id)
      throw DimensionError("operators come from different meshes");
    common = id;
  }
  return common;
}

}  // namespace

SteklovSpectrum solve_steklov(const SymmetricSparseOperator& A,
                              const SymmetricSparseOperator& C,
                              const SymmetricSparseOperator& B,
                              std::size_t k) {
  const Eigen::Index n = A.dim();
  if (C.dim() != n || B.dim() != n)
    throw DimensionError("operator dimensions disagree: A " +
                         std::to_string(A.dim()) + ", C " +
                         std::to_string(C.dim()) + ", B " +
                         std::to_string(B.dim()));
  const std::uint64_t mesh_id = common_mesh_id(A, C, B);

  Eigen::SparseMatrix<double> K = A.matrix() + C.matrix();
  K.makeCompressed();

  // Boundary nodes are exactly the rows where B has a nonzero entry; the
  // interior is B's kernel.
  std::vector<bool> on_boundary(static_cast<std::size_t>(n), false);
  const auto& Bm = B.matrix();
  for (int col = 0; col < Bm.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(Bm, col); it; ++it)
      if (it.value() != 0.0) {
        on_boundary[static_cast<std::size_t>(it.row())] = true;
        on_boundary[static_cast<std::size_t>(it.col())] = true;
      }

  std::vector<Eigen::Index> boundary, interior;
  for (Eigen::Index i = 0; i < n; ++i)
    (on_boundary[static_cast<std::size_t>(i)] ? boundary : interior)
        .push_back(i);
  const auto nb = static_cast<Eigen::Index>(boundary.size());
  const auto ni = static_cast<Eigen::Index>(interior.size());

  if (k == 0) throw ParameterError("requested eigenpair count must be >= 1");
  if (static_cast<Eigen::Index>(k) > nb)
    throw ParameterError("requested " + std::to_string(k) +
                         " eigenpairs but the pencil has only " +
                         std::to_string(nb) + " boundary nodes");

  std::vector<Eigen::Index> pos(static_cast<std::size_t>(n), -1);
  for (Eigen::Index j = 0; j < nb; ++j)
    pos[static_cast<std::size_t>(boundary[j])] = j;
  for (Eigen::Index j = 0; j < ni; ++j)
    pos[static_cast<std::size_t>(interior[j])] = j;

  // Split K into interior/boundary blocks.
  std::vector<Eigen::Triplet<double>> tii;
  Eigen::MatrixXd Kib = Eigen::MatrixXd::Zero(ni, nb);  // interior x boundary
  Eigen::MatrixXd Kbb = Eigen::MatrixXd::Zero(nb, nb);
  for (int col = 0; col < K.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(K, col); it; ++it) {
      const bool rb = on_boundary[static_cast<std::size_t>(it.row())];
      const bool cb = on_boundary[static_cast<std::size_t>(it.col())];
      const Eigen::Index r = pos[static_cast<std::size_t>(it.row())];
      const Eigen::Index c = pos[static_cast<std::size_t>(it.col())];
      if (!rb && !cb)
        tii.emplace_back(static_cast<int>(r), static_cast<int>(c), it.value());
      else if (!rb && cb)
        Kib(r, c) += it.value();
      else if (rb && cb)
        Kbb(r, c) += it.value();
      // boundary-row/interior-column entries are the transpose of Kib.
    }

  Eigen::MatrixXd S = Kbb;
  Eigen::MatrixXd X;  // K_II^{-1} K_IB, reused for eigenvector extension
  if (ni > 0) {
    Eigen::SparseMatrix<double> Kii(ni, ni);
    Kii.setFromTriplets(tii.begin(), tii.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Kii);
    if (ldlt.info() != Eigen::Success)
      throw DefinitenessError(
          "interior block of A+C could not be factorized; the pencil "
          "requires A+C positive definite");
    const auto& D = ldlt.vectorD();
    for (Eigen::Index i = 0; i < D.size(); ++i)
      if (!(D[i] > 1e-12))
        throw DefinitenessError(
            "interior factorization pivot " + detail::format_double(D[i]) +
            " at position " + std::to_string(i) +
            " is not positive; A+C is not positive definite");
    X = ldlt.solve(Kib);
    S.noalias() -= Kib.transpose() * X;
  }
  S = 0.5 * (S + S.transpose()).eval();

  Eigen::MatrixXd Bbb = Eigen::MatrixXd::Zero(nb, nb);
  for (int col = 0; col < Bm.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(Bm, col); it; ++it)
      Bbb(pos[static_cast<std::size_t>(it.row())],
          pos[static_cast<std::size_t>(it.col())]) += it.value();

  Eigen::LLT<Eigen::MatrixXd> llt(Bbb);
  if (llt.info() != Eigen::Success)
    throw DefinitenessError(
        "boundary mass restricted to boundary nodes is not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();

  // T = L^{-1} S L^{-T} shares the pencil's eigenvalues.
  Eigen::MatrixXd Y =
      L.triangularView<Eigen::Lower>().solve(S);  // L Y = S
  Eigen::MatrixXd T =
      L.triangularView<Eigen::Lower>().solve(Y.transpose()).transpose();
  T = 0.5 * (T + T.transpose()).eval();

  Eigen::VectorXd evals;
  Eigen::MatrixXd evecs;
  detail::symmetric_eigen(T, evals, evecs);

  SteklovSpectrum spectrum;
  spectrum.mesh_id = mesh_id;
  spectrum.id = next_spectrum_id.fetch_add(1);
  spectrum.eigenvalues.reserve(k);
  spectrum.eigenvectors.reserve(k);

  for (std::size_t i = 0; i < k; ++i) {
    const double mu = evals[static_cast<Eigen::Index>(i)];
    if (!(mu > 0.0))
      throw DefinitenessError("computed eigenvalue " +
                              detail::format_double(mu) +
                              " is not strictly positive");
    Eigen::VectorXd y = L.transpose()
                            .triangularView<Eigen::Upper>()
                            .solve(evecs.col(static_cast<Eigen::Index>(i)));
    Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
    for (Eigen::Index j = 0; j < nb; ++j) full[boundary[j]] = y[j];
    if (ni > 0) {
      const Eigen::VectorXd xi = -(X * y);
      for (Eigen::Index j = 0; j < ni; ++j) full[interior[j]] = xi[j];
    }
    // Sign convention: first boundary nodal value of meaningful size positive.
    const double scale = y.cwiseAbs().maxCoeff();
    for (Eigen::Index j = 0; j < nb; ++j) {
      if (std::abs(y[j]) > 1e-12 * scale) {
        if (y[j] < 0.0) full = -full;
        break;
      }
    }
    spectrum.eigenvalues.push_back(mu);
    spectrum.eigenvectors.push_back(DiscreteFunction{std::move(full), mesh_id});
  }

  spectrum.b_phi1 = B.apply(spectrum.eigenvectors.front().coefficients);
  return spectrum;
}

EigenDecomposition decompose(const DiscreteFunction& u,
                             const SteklovSpectrum& spectrum) {
  if (spectrum.k() == 0 || spectrum.b_phi1.size() == 0)
    throw DimensionError(
        "spectrum carries no boundary mass data; recompute or attach it");
  const auto& phi1 = spectrum.phi(0);
  if (u.dim() != phi1.dim())
    throw DimensionError("function of size " + std::to_string(u.dim()) +
                         " decomposed against spectrum of size " +
                         std::to_string(phi1.dim()));
  if (u.mesh_id != 0 && spectrum.mesh_id != 0 && u.mesh_id != spectrum.mesh_id)
    throw DimensionError("function and spectrum come from different meshes");

  EigenDecomposition out;
  out.t = spectrum.b_phi1.dot(u.coefficients);
  out.w = DiscreteFunction{u.coefficients - out.t * phi1.coefficients,
                           u.mesh_id};
  return out;
}

void attach_boundary_mass(SteklovSpectrum& spectrum,
                          const SymmetricSparseOperator& B) {
  if (spectrum.k() == 0)
    throw ParameterError("cannot attach boundary mass to an empty spectrum");
  if (B.dim() != spectrum.phi(0).dim())
    throw DimensionError("boundary mass dimension " + std::to_string(B.dim()) +
                         " does not match spectrum of size " +
                         std::to_string(spectrum.phi(0).dim()));
  spectrum.b_phi1 = B.apply(spectrum.phi(0).coefficients);
  if (spectrum.mesh_id == 0) spectrum.mesh_id = B.mesh_id();
}

double rayleigh_quotient(const DiscreteFunction& u,
                         const SymmetricSparseOperator& A,
                         const SymmetricSparseOperator& C,
                         const SymmetricSparseOperator& B) {
  const double num = A.quad(u.coefficients) + C.quad(u.coefficients);
  const double den = B.quad(u.coefficients);
  if (den <= 0.0) return std::numeric_limits<double>::infinity();
  return num / den;
}

EigenspaceReport verify_eigenspace_inequalities(
    const SteklovSpectrum& spectrum, const SymmetricSparseOperator& A,
    const SymmetricSparseOperator& C, const SymmetricSparseOperator& B,
    int trials, int j, unsigned long long seed) {
  if (spectrum.k() < 2)
    throw ParameterError("eigenspace check needs at least two eigenpairs");
  if (j < 1 || static_cast<std::size_t>(j) >= spectrum.k())
    throw ParameterError("subspace split index j must lie in [1, k-1]");
  if (trials < 1) throw ParameterError("trials must be >= 1");

  EigenspaceReport report;
  report.j = j;
  report.trials = trials;
  report.worst_lower_margin = std::numeric_limits<double>::infinity();
  report.worst_upper_margin = std::numeric_limits<double>::infinity();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Eigen::Index n = spectrum.phi(0).dim();
  const double mu_j = spectrum.mu(static_cast<std::size_t>(j - 1));
  const double mu_next = spectrum.mu(static_cast<std::size_t>(j));

  const auto quad_K = [&](const Eigen::VectorXd& u) {
    return A.quad(u) + C.quad(u);
  };

  for (int trial = 0; trial < trials; ++trial) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < j; ++i)
      v += gauss(rng) * spectrum.phi(static_cast<std::size_t>(i)).coefficients;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    for (std::size_t i = static_cast<std::size_t>(j); i < spectrum.k(); ++i)
      w += gauss(rng) * spectrum.phi(i).coefficients;

    const double vK = quad_K(v);
    const double vB = B.quad(v);
    const double lower_margin = (mu_j * vB - vK) / std::max(vK, 1e-300);
    report.worst_lower_margin = std::min(report.worst_lower_margin,
                                         lower_margin);
    if (lower_margin < -report.slack) report.lower_violations++;

    const double wK = quad_K(w);
    const double wB = B.quad(w);
    const double upper_margin = (wK - mu_next * wB) / std::max(wK, 1e-300);
    report.worst_upper_margin = std::min(report.worst_upper_margin,
                                         upper_margin);
    if (upper_margin < -report.slack) report.upper_violations++;
  }
  return report;
}

void save_spectrum(const SteklovSpectrum& spectrum, const std::string& path) {
  if (spectrum.k() == 0) throw ParameterError("empty spectrum cannot be saved");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  const Eigen::Index n = spectrum.phi(0).dim();
  out << "steklov-spec v1\n";
  out << spectrum.k() << " " << n << "\n";
  for (std::size_t i = 0; i < spectrum.k(); ++i) {
    out << "mu_" << (i + 1) << " " << detail::format_double(spectrum.mu(i))
        << "\n";
    const auto& coeffs = spectrum.phi(i).coefficients;
    for (Eigen::Index r = 0; r < n; ++r)
      out << detail::format_double(coeffs[r]) << "\n";
  }
  if (!out) throw Error("failed writing spectrum to " + path);
}

SteklovSpectrum load_spectrum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open spectrum file " + path, 0);
  long line_no = 0;
  std::string line;
  const auto next_line = [&](const std::string& what) {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return;
    }
    ++line_no;
    throw ParseError("unexpected end of file, expected " + what, line_no);
  };

  next_line("header 'steklov-spec v1'");
  if (line != "steklov-spec v1")
    throw ParseError("bad header, expected 'steklov-spec v1'", line_no);

  next_line("'k n_nodes'");
  std::istringstream counts(line);
  long long k = -1, n = -1;
  if (!(counts >> k >> n) || k < 1 || n < 1 || !(counts >> std::ws).eof())
    throw ParseError("expected 'k n_nodes', got \"" + line + "\"", line_no);

  SteklovSpectrum spectrum;
  spectrum.id = next_spectrum_id.fetch_add(1);
  for (long long i = 0; i < k; ++i) {
    next_line("eigenvalue line 'mu_" + std::to_string(i + 1) + " <value>'");
    std::istringstream ss(line);
    std::string label;
    double mu = 0.0;
    if (!(ss >> label >> mu) || label != "mu_" + std::to_string(i + 1) ||
        !(ss >> std::ws).eof())
      throw ParseError("expected 'mu_" + std::to_string(i + 1) +
                           " <value>', got \"" + line + "\"",
                       line_no);
    Eigen::VectorXd coeffs(n);
    for (long long r = 0; r < n; ++r) {
      next_line("eigenvector coefficient");
      std::istringstream cs(line);
      if (!(cs >> coeffs[r]) || !(cs >> std::ws).eof())
        throw ParseError("expected a coefficient, got \"" + line + "\"",
                         line_no);
    }
    spectrum.eigenvalues.push_back(mu);
    spectrum.eigenvectors.push_back(DiscreteFunction{std::move(coeffs), 0});
  }
  return spectrum;
}

}  // namespace steklov
