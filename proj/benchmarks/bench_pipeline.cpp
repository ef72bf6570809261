// Microbenchmarks for the hot path of a run: operator assembly, the
// condensed eigensolve, and energy/gradient evaluation on a disk mesh.

#include <benchmark/benchmark.h>

#include <random>

#include "steklov/assembly.hpp"
#include "steklov/functional.hpp"
#include "steklov/mesh.hpp"
#include "steklov/nonlinearity.hpp"
#include "steklov/spectrum.hpp"

namespace {

struct Fixture {
  steklov::Mesh mesh;
  steklov::SymmetricSparseOperator A, C, B;
  steklov::SteklovSpectrum spectrum;

  explicit Fixture(double h)
      : mesh(steklov::generate_disk(1.0, h)),
        A(steklov::assemble_stiffness(mesh)),
        C(steklov::assemble_domain_mass_weighted(
            mesh, steklov::constant_coefficient(1.0), 3)),
        B(steklov::assemble_boundary_mass(mesh)),
        spectrum(steklov::solve_steklov(A, C, B, 5)) {}
};

const Fixture& fixture() {
  static const Fixture f(0.1);
  return f;
}

steklov::DiscreteFunction sample_function(const steklov::Mesh& mesh) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal(0.0, 1.0);
  steklov::DiscreteFunction u = steklov::zero_function(mesh);
  for (Eigen::Index i = 0; i < u.coefficients.size(); ++i)
    u.coefficients[i] = normal(rng);
  return u;
}

void BM_assemble_operators(benchmark::State& state) {
  const steklov::Mesh mesh = steklov::generate_disk(1.0, 0.1);
  const auto c = steklov::constant_coefficient(1.0);
  for (auto _ : state) {
    auto A = steklov::assemble_stiffness(mesh);
    auto C = steklov::assemble_domain_mass_weighted(mesh, c, 3);
    auto B = steklov::assemble_boundary_mass(mesh);
    benchmark::DoNotOptimize(A);
    benchmark::DoNotOptimize(C);
    benchmark::DoNotOptimize(B);
  }
}
BENCHMARK(BM_assemble_operators);

void BM_solve_steklov(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) {
    auto spectrum = steklov::solve_steklov(f.A, f.C, f.B,
                                           static_cast<std::size_t>(state.range(0)));
    benchmark::DoNotOptimize(spectrum);
  }
}
BENCHMARK(BM_solve_steklov)->Arg(1)->Arg(5);

void BM_eval_energy(benchmark::State& state) {
  const Fixture& f = fixture();
  const steklov::EnergyContext ctx(f.mesh, f.A, f.C, f.B, f.spectrum,
                                   steklov::builtin("M2", {{"beta", 1.0}}));
  const steklov::DiscreteFunction u = sample_function(f.mesh);
  for (auto _ : state) benchmark::DoNotOptimize(steklov::eval_J(ctx, u));
}
BENCHMARK(BM_eval_energy);

void BM_eval_gradient(benchmark::State& state) {
  const Fixture& f = fixture();
  const steklov::EnergyContext ctx(f.mesh, f.A, f.C, f.B, f.spectrum,
                                   steklov::builtin("M2", {{"beta", 1.0}}));
  const steklov::DiscreteFunction u = sample_function(f.mesh);
  for (auto _ : state) {
    auto g = steklov::grad_J(ctx, u);
    benchmark::DoNotOptimize(g);
  }
}
BENCHMARK(BM_eval_gradient);

}  // namespace

BENCHMARK_MAIN();
