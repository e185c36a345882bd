#include <gtest/gtest.h>

#include "singscat/closed_form.hpp"
#include "singscat/radial_solver.hpp"

using namespace singscat;

namespace {

RadialProblem pure(cplx alpha, double s, double energy = 0.0, int l = 0) {
  RadialProblem p;
  p.l = l;
  p.energy = energy;
  p.potential.terms.push_back({alpha, s, std::nullopt});
  return p;
}

SolverConfig absorbing_at_im_z(double target, double alpha, double s) {
  SolverConfig cfg;
  cfg.r0 = r0_for_z_modulus(target, alpha, s);
  return cfg;
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(InteriorLogDerivative, StronglyAbsorbingLimit) {
  SolverConfig cfg;
  cfg.r0 = 0.1;
  cfg.boundary_mode = BoundaryMode::square_well_interior;
  auto prob = pure({1.0, 0.1}, 6.0);
  auto v = interior_log_derivative(cfg, prob);
  cplx p = effective_momentum(0.1, prob);
  EXPECT_NEAR((p * 0.1).imag(), 5.0, 0.02);
  EXPECT_LT(rel(v.y, cplx{0.0, -1.0} * p), 3 * std::exp(-10.0));
}

TEST(InteriorLogDerivative, ExactCotValueAndRealLimit) {
  SolverConfig cfg;
  cfg.boundary_mode = BoundaryMode::square_well_interior;
  cfg.r0 = 0.5;
  double p = pi / 4 / cfg.r0;
  RadialProblem prob;
  prob.potential.terms.push_back({p * p, 0.0, std::nullopt});  // constant -p^2
  EXPECT_LT(std::abs(interior_log_derivative(cfg, prob).y - p), 1e-13);

  cfg.r0 = 0.05;
  auto real_run = interior_log_derivative(cfg, pure(1.0, 6.0));
  EXPECT_EQ(real_run.y.imag(), 0.0);
}

TEST(InteriorLogDerivative, CotPoleIsPerturbedWithWarning) {
  SolverConfig cfg;
  cfg.boundary_mode = BoundaryMode::square_well_interior;
  cfg.r0 = 1.0;
  RadialProblem prob;
  prob.potential.terms.push_back({pi * pi, 0.0, std::nullopt});
  auto v = interior_log_derivative(cfg, prob);
  EXPECT_FALSE(v.warnings.empty());
  EXPECT_GT(v.r0, 1.0);
  EXPECT_TRUE(std::isfinite(std::abs(v.y)));
}

TEST(AbsorptionBoundary, Examples) {
  SolverConfig cfg;
  cfg.r0 = 0.1;
  EXPECT_LT(std::abs(absorption_boundary(cfg, pure(1.0, 6.0)) - cplx{0.0, -1000.0}), 1e-9);
  cfg.boundary_mode = BoundaryMode::creation;
  EXPECT_LT(std::abs(absorption_boundary(cfg, pure(1.0, 6.0)) - cplx{0.0, 1000.0}), 1e-9);

  SolverConfig s2;
  s2.r0 = 0.01;
  s2.boundary_mode = BoundaryMode::partial_absorption_s2;
  EXPECT_LT(std::abs(absorption_boundary(s2, pure(0.5, 2.0)) - cplx{50.0, -50.0}), 1e-12);
  s2.branch = Branch::create;
  EXPECT_LT(std::abs(absorption_boundary(s2, pure(0.5, 2.0)) - cplx{50.0, 50.0}), 1e-12);

  EXPECT_THROW(absorption_boundary(cfg, pure(1.0, 1.5)), DomainError);
  SolverConfig wrong;
  wrong.boundary_mode = BoundaryMode::partial_absorption_s2;
  EXPECT_THROW(absorption_boundary(wrong, pure(1.0, 6.0)), DomainError);
}

TEST(Propagate, FreeParticle) {
  RadialProblem free;
  free.energy = 4.0;
  SolverConfig cfg;
  cfg.r0 = 0.3;
  cfg.match_radius = 17.0;
  auto st = propagate(2.0 / std::tan(2.0 * cfg.r0), cfg, free);
  double expect = 2.0 / std::tan(2.0 * 17.0);
  EXPECT_LT(std::abs(st.y - expect), 1e-7 * (1.0 + std::abs(expect)));
  EXPECT_GT(st.switches, 0);  // crosses nodes of sin(kr)
}

TEST(Propagate, CentrifugalPowerSolution) {
  RadialProblem p;
  p.l = 1;
  SolverConfig cfg;
  cfg.r0 = 0.01;
  cfg.match_radius = 40.0;
  auto st = propagate(2.0 / cfg.r0, cfg, p);
  EXPECT_LT(std::abs(st.y - 2.0 / 40.0), 1e-10);
}

TEST(Propagate, InwardMatchesOutward) {
  RadialProblem free;
  free.energy = 1.0;
  SolverConfig cfg;
  double r[] = {0.7};
  auto st = propagate_to(1.0 / std::tan(12.0), 12.0, r, cfg, free);
  EXPECT_LT(std::abs(st.front().y - 1.0 / std::tan(0.7)), 1e-7);
}

TEST(Propagate, StepBudgetIsConvergenceError) {
  SolverConfig cfg;
  cfg.r0 = 1e-3;
  cfg.match_radius = 50.0;
  cfg.max_steps = 100;
  auto prob = pure(1.0, 6.0);
  EXPECT_THROW(propagate(absorption_boundary(cfg, prob), cfg, prob), ConvergenceError);
}

TEST(Propagate, WkbConsistencyInDeepRegion) {
  auto prob = pure(1.0, 6.0);
  SolverConfig cfg;
  cfg.r0 = 0.02;
  double r = 0.05;
  ASSERT_LT(wkb_wavefunction_check(r, prob).validity, 0.01);
  double radii[] = {r};
  auto st = propagate_to(absorption_boundary(cfg, prob), cfg.r0, radii, cfg, prob).front();
  cplx p = effective_momentum(r, prob);
  cplx dp = -prob.effective_potential_derivative(r) / (2.0 * p);
  cplx wkb = cplx{0.0, -1.0} * p - dp / (2.0 * p);
  EXPECT_LT(rel(st.y, wkb), 0.05);
}

TEST(ExtractScatteringLength, HardSphere) {
  double b = 1.3, v0 = 1e6, kappa = std::sqrt(v0);
  RadialProblem p;
  p.potential.table = TabulatedPotential({1e-3, b}, {cplx{v0}, cplx{v0}}, Interpolation::linear);
  SolverConfig cfg;
  cfg.r0 = 2e-3;
  cfg.boundary_mode = BoundaryMode::square_well_interior;
  auto obs = solve(p, cfg);
  double expect = b - std::tanh(kappa * b) / kappa;
  EXPECT_LT(std::abs(obs.scattering_length - expect), 1e-7);
}

TEST(ExtractScatteringLength, ClosedFormOracles) {
  // The -i p boundary leaves an O(1/|z(r0)|) reflected admixture for real alpha.
  auto cfg = absorbing_at_im_z(2e4, 1.0, 6.0);
  auto a = solve(pure(1.0, 6.0), cfg).scattering_length;
  EXPECT_LT(rel(a, scattering_length_singular(1.0, 6.0, Branch::absorb)), 1e-3);

  auto rep = solve(pure(-1.0, 6.0), cfg).scattering_length;
  EXPECT_LT(std::abs(rep - scattering_length_repulsive(1.0, 6.0)), 1e-4);
  EXPECT_LT(std::abs(rep.imag()), 1e-12);
}

TEST(ExtractScatteringLength, RichardsonRemovesTail) {
  // An undamped s = 5 tail on top of a hard core: raw a(R) drifts like R^-2.
  RadialProblem p;
  p.potential.table = TabulatedPotential({1e-3, 1.0}, {cplx{1e6}, cplx{1e6}}, Interpolation::linear);
  p.potential.terms.push_back({0.3, 5.0, std::nullopt});
  SolverConfig cfg;
  cfg.r0 = 2e-3;
  cfg.boundary_mode = BoundaryMode::square_well_interior;
  cfg.match_radius = 10.0;
  auto coarse = solve(p, cfg);
  cfg.match_radius = 80.0;
  auto fine = solve(p, cfg);
  EXPECT_LT(std::abs(coarse.scattering_length - fine.scattering_length), 5e-7);
  double radii[] = {10.0};
  auto raw = propagate_to(coarse.provenance.r0 > 0 ? interior_log_derivative(cfg, p).y : 0.0, cfg.r0, radii, cfg, p);
  EXPECT_GT(std::abs(extract_scattering_length(raw.front(), p) - fine.scattering_length), 1e-5);
}

TEST(ExtractScatteringLength, Refusals) {
  auto cfg = absorbing_at_im_z(25.0, 1.0, 3.0);
  EXPECT_THROW(solve(pure(1.0, 3.0), cfg), DomainError);
  LogDerivativeState flat;
  flat.r = 5.0;
  flat.y = 0.0;
  EXPECT_THROW(extract_scattering_length(flat, RadialProblem{}), DomainError);
}

TEST(ExtractPhase, FreeAndUnitary) {
  RadialProblem free;
  free.energy = 1.0;
  SolverConfig cfg;
  cfg.r0 = 0.1;
  cfg.boundary_mode = BoundaryMode::square_well_interior;
  auto obs = solve(free, cfg);
  EXPECT_LT(std::abs(obs.phase_shift), 1e-7);
  EXPECT_LT(std::abs(obs.s_matrix - 1.0), 1e-7);

  auto rep = pure(-1.0, 6.0, 2.0);
  auto rcfg = absorbing_at_im_z(25.0, 1.0, 6.0);
  auto robs = solve(rep, rcfg);
  EXPECT_LT(std::abs(robs.s_matrix_modulus - 1.0), 1e-6);
}

TEST(ExtractPhase, InverseSquareModulusIsEnergyIndependent) {
  SolverConfig cfg;
  cfg.r0 = 1e-3;
  cfg.boundary_mode = BoundaryMode::partial_absorption_s2;
  for (double k : {0.1, 1.0}) {
    auto obs = solve(pure(0.5, 2.0, k * k), cfg);
    EXPECT_NEAR(obs.s_matrix_modulus, 0.207879576350761909, 1e-3) << k;
  }
  auto one = solve(pure(1.0, 2.0, 1.0), cfg);
  EXPECT_NEAR(one.s_matrix_modulus, 0.0658287210112966513, 1e-3);
}

TEST(ExtractPhase, PartialWaveMatchesFreeHigherL) {
  // l = 2 free wave from regular start: delta = 0.
  RadialProblem free;
  free.energy = 0.25;
  free.l = 2;
  SolverConfig cfg;
  cfg.r0 = 0.05;
  cfg.boundary_mode = BoundaryMode::square_well_interior;
  auto obs = solve(free, cfg);
  EXPECT_LT(std::abs(obs.phase_shift), 1e-6);
}

TEST(Solve, CreationIsConjugateOfAbsorption) {
  auto cfg = absorbing_at_im_z(25.0, 1.0, 6.0);
  auto a = solve(pure(1.0, 6.0), cfg);
  cfg.boundary_mode = BoundaryMode::creation;
  auto c = solve(pure(1.0, 6.0), cfg);
  EXPECT_LT(rel(c.scattering_length, std::conj(a.scattering_length)), 10 * cfg.rel_tol);
  EXPECT_EQ(c.branch, Branch::create);
  EXPECT_GT(a.provenance.steps, 0);
  EXPECT_GT(a.provenance.match_radius, 0.0);
}

TEST(Solve, OmegaSignConjugates) {
  SolverConfig cfg;
  cfg.boundary_mode = BoundaryMode::square_well_interior;
  cfg.omega = 0.3;
  cfg.r0 = r0_for_im_z(20.0, 1.0, 0.3, 6.0);
  auto plus = solve(pure(1.0, 6.0), cfg);
  cfg.omega = -0.3;
  auto minus = solve(pure(1.0, 6.0), cfg);
  EXPECT_LT(rel(minus.scattering_length, std::conj(plus.scattering_length)), 10 * cfg.rel_tol);
  EXPECT_GT(im_z0(cfg.r0, 1.0, 0.3, 6.0), 19.99);
}

TEST(Solve, InteriorModeReproducesFullAbsorption) {
  SolverConfig cfg;
  cfg.omega = 0.5;
  cfg.r0 = r0_for_im_z(20.0, 1.0, 0.5, 6.0);
  cfg.boundary_mode = BoundaryMode::square_well_interior;
  auto interior = solve(pure(1.0, 6.0), cfg);
  cfg.boundary_mode = BoundaryMode::full_absorption;
  auto full = solve(pure(1.0, 6.0), cfg);
  EXPECT_LT(rel(interior.scattering_length, full.scattering_length), 1e-3);
}

TEST(Solve, InvalidProblemRejected) {
  SolverConfig cfg;
  EXPECT_THROW(solve(pure(1.0, -1.0), cfg), DomainError);
  cfg.r0 = 0.0;
  EXPECT_THROW(solve(pure(1.0, 6.0), cfg), DomainError);
}
