#include <gtest/gtest.h>

#include "singscat/closed_form.hpp"
#include "singscat/perturbation.hpp"

using namespace singscat;

namespace {

PotentialSpec square_well(double depth, double width) {
  PotentialSpec w;
  w.table = TabulatedPotential({1e-6, width}, {cplx{-depth}, cplx{-depth}}, Interpolation::linear);
  return w;
}

PotentialSpec with_core(PotentialSpec w, cplx alpha_s) {
  w.terms.push_back({alpha_s, 6.0, std::nullopt});
  return w;
}

// Independent oracle: bisection on p cot(p b) + kappa over the first branch of cot.
double textbook_ground_level(double depth, double width) {
  auto f = [&](double e) {
    double p = std::sqrt(depth + e), kappa = std::sqrt(-e);
    return p * std::cos(p * width) + kappa * std::sin(p * width);
  };
  double lo = -depth + 1e-12, hi = std::min(-1e-12, std::pow(pi / width, 2) - depth);
  for (int i = 0; i < 200; ++i) {
    double m = 0.5 * (lo + hi);
    ((f(lo) > 0.0) == (f(m) > 0.0) ? lo : hi) = m;
  }
  return 0.5 * (lo + hi);
}

const double fixture_kappa = std::sqrt(0.05);
const double fixture_depth = 0.255793;

}  // namespace

TEST(RealLevels, SquareWellGroundStateMatchesTextbookRoot) {
  auto levels = real_levels(square_well(10.0, 1.0), 0);
  ASSERT_EQ(levels.size(), 1u);
  EXPECT_NEAR(levels[0], textbook_ground_level(10.0, 1.0), 1e-8);
}

TEST(RealLevels, DeepestFirstAndRefusesSingularCore) {
  auto levels = real_levels(square_well(60.0, 1.0), 0);
  ASSERT_GE(levels.size(), 2u);
  for (std::size_t i = 1; i < levels.size(); ++i) EXPECT_LT(levels[i - 1], levels[i]);
  EXPECT_THROW(real_levels(with_core(square_well(1.0, 1.0), 1e-3), 0), DomainError);
}

TEST(FindLevel, ConvergesFromNearbyGuess) {
  double e0 = textbook_ground_level(10.0, 1.0);
  auto res = find_level(square_well(10.0, 1.0), 0, e0 * 1.01);
  EXPECT_NEAR(res.energy.real(), e0, 1e-8);
  EXPECT_LT(std::abs(res.energy.imag()), 1e-9);
}

TEST(FindLevel, FarGuessRaisesSearchErrorWithTrace) {
  try {
    find_level(square_well(10.0, 1.0), 0, -9.9);
    FAIL() << "expected SearchError";
  } catch (const SearchError& e) {
    EXPECT_FALSE(e.trace().empty());
  }
}

TEST(CompareWithTheory, TunedFixtureWithinTenPercent) {
  auto r = compare_with_theory(with_core(square_well(fixture_depth, 1.0 / fixture_kappa), 1e-3), 0, 0);
  EXPECT_NEAR(r.unperturbed_energy, -0.05, 1e-6);
  EXPECT_LT(r.relative_error, 0.1);
  EXPECT_FALSE(r.has_warning("perturbative_regime"));
  EXPECT_GT(-2.0 * r.energy.imag(), 0.0);
}

TEST(CompareWithTheory, ExactSquareWellShiftAwayFromTunedWidth) {
  // For a square well the first-order shift is -2 p delta / (b + 1/kappa).
  const double b = 10.0, depth = 0.2, alpha_s = 1e-5;
  auto r = compare_with_theory(with_core(square_well(depth, b), alpha_s), 0, 0);
  double p = std::sqrt(depth + r.unperturbed_energy), kappa = std::sqrt(-r.unperturbed_energy);
  cplx delta = perturbative_phase_constant_background(p, alpha_s, 6.0, 0, 0.0, Branch::absorb).value;
  cplx exact = -2.0 * p * delta / (b + 1.0 / kappa);
  EXPECT_LT(std::abs(r.measured_shift - exact) / std::abs(exact), 0.03);
}

TEST(CompareWithTheory, ZeroCoreGivesZeroShift) {
  auto r = compare_with_theory(square_well(fixture_depth, 1.0 / fixture_kappa), 0, 0);
  EXPECT_EQ(r.measured_shift, cplx{});
  EXPECT_EQ(r.predicted_shift, cplx{});
}

TEST(CompareWithTheory, StrongCoreRaisesRegimeWarning) {
  auto r = compare_with_theory(with_core(square_well(fixture_depth, 1.0 / fixture_kappa), 5e-3), 0, 0);
  EXPECT_TRUE(r.has_warning("perturbative_regime"));
  EXPECT_GT(r.regime_parameter, 0.1);
}

TEST(CompareWithTheory, CreationBranchFlipsWidth) {
  auto well = square_well(fixture_depth, 1.0 / fixture_kappa);
  LevelSearchConfig cfg;
  cfg.branch = Branch::create;
  auto absorb = compare_with_theory(with_core(well, 1e-4), 0, 0);
  auto create = compare_with_theory(with_core(well, 1e-4), 0, 0, cfg);
  EXPECT_LT(absorb.energy.imag(), 0.0);
  EXPECT_NEAR(create.energy.imag(), -absorb.energy.imag(), 1e-9);
  EXPECT_NEAR(create.energy.real(), absorb.energy.real(), 1e-9);
}

TEST(CompareWithTheory, BadLevelIndexIsDomainError) {
  auto well = with_core(square_well(fixture_depth, 1.0 / fixture_kappa), 1e-3);
  EXPECT_THROW(compare_with_theory(well, 0, 3), DomainError);
  EXPECT_THROW(compare_with_theory(well, 0, -1), DomainError);
}

TEST(SemiclassicalFrequency, LevelSpacingOfDeepWell) {
  auto well = square_well(200.0, 1.0);
  auto levels = real_levels(well, 0);
  ASSERT_GE(levels.size(), 4u);
  std::size_t n = levels.size() / 2;
  double spacing = 0.5 * (levels[n + 1] - levels[n - 1]);
  // Penetration into the wall lengthens the well to 1 + 1/kappa.
  double kappa = std::sqrt(-levels[n]);
  double expected = 2.0 * pi * semiclassical_frequency(well, levels[n]) / (1.0 + 1.0 / kappa);
  EXPECT_NEAR(spacing / expected, 1.0, 0.01);
}
