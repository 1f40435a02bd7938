#include "swstab/angular.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"

namespace swstab {
namespace {

using testing::jordan_a0;
using testing::jordan_a1;
using testing::random_hurwitz;
using testing::random_mat;
using testing::rotations_a0;
using testing::rotations_a1;

TEST(AngularDrift, ScalarFlowIsZero) {
    for (double th = 0.0; th < 2.0 * kPi; th += 0.1)
        EXPECT_DOUBLE_EQ(angular_drift(-1.0 * Mat2::identity(), th), 0.0);
}

TEST(AngularDrift, ClosedFormsOfTheFamilies) {
    const double a = 1.0, b = 3.0;
    for (double th = -1.0; th < 7.0; th += 0.03) {
        const double s = std::sin(th), c = std::cos(th);
        EXPECT_NEAR(angular_drift(jordan_a0(2.0), th), -2.0 * 2.0 * s * s, 1e-13);
        EXPECT_NEAR(angular_drift(jordan_a1(2.0), th), 2.0 * 2.0 * c * c, 1e-13);
        EXPECT_NEAR(angular_drift(rotations_a0(a, b), th),
                    -(a / b) * c * c - a * b * s * s, 1e-13);
        EXPECT_NEAR(angular_drift(rotations_a1(a, b), th),
                    a * b * c * c + (a / b) * s * s, 1e-13);
    }
}

TEST(RadialRate, ClosedForms) {
    EXPECT_NEAR(radial_rate(-1.0 * Mat2::identity(), 0.37), -1.0, 1e-15);

    const double a = 1.0, b = 3.0;
    const double amp = a * (b * b - 1.0) / (2.0 * b);
    for (double th = -1.0; th < 7.0; th += 0.05) {
        const double expected = amp * std::sin(2.0 * th) - 1.0;
        EXPECT_NEAR(radial_rate(rotations_a0(a, b), th), expected, 1e-13);
        EXPECT_NEAR(radial_rate(rotations_a1(a, b), th), expected, 1e-13);
    }
    // At pi/4 the radial rate equals the positive averaged eigenvalue.
    const double lam_plus = -1.0 + a * (b - 1.0 / b) / 2.0;
    EXPECT_NEAR(radial_rate(rotations_a0(a, b), kPi / 4.0), lam_plus, 1e-13);
}

TEST(AngularFunctions, PiPeriodicity) {
    std::mt19937_64 rng(11);
    for (int it = 0; it < 50; ++it) {
        const Mat2 A = random_mat(rng);
        const double scale = std::max(1.0, A.max_abs());
        for (double th = 0.0; th < kPi; th += 0.05) {
            EXPECT_NEAR(angular_drift(A, th + kPi), angular_drift(A, th), 1e-13 * scale);
            EXPECT_NEAR(radial_rate(A, th + kPi), radial_rate(A, th), 1e-13 * scale);
        }
    }
}

TEST(AngularDrift, AveragedDriftIsPointwiseBlend) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> ul(0.0, 1.0);
    for (int it = 0; it < 50; ++it) {
        const Mat2 A0 = random_mat(rng);
        const Mat2 A1 = random_mat(rng);
        const double lam = ul(rng);
        const Mat2 Alam = convex_combination(A0, A1, lam);
        for (double th = 0.0; th < kPi; th += 0.1) {
            const double blend =
                (1.0 - lam) * angular_drift(A0, th) + lam * angular_drift(A1, th);
            EXPECT_NEAR(angular_drift(Alam, th), blend, 1e-14 * std::max(1.0, std::fabs(blend)) + 1e-14);
        }
    }
}

TEST(CircleZeros, SpiralFlowHasNone) {
    const CircleZeros z = circle_zeros(rotations_a0(1.0, 3.0));
    EXPECT_FALSE(z.is_identically_zero);
    EXPECT_TRUE(z.zeros.empty());
}

TEST(CircleZeros, DefectiveFlowTouchesAtZero) {
    const CircleZeros z = circle_zeros(jordan_a0(2.0));
    ASSERT_EQ(z.zeros.size(), 1u);
    EXPECT_NEAR(z.zeros[0].angle, 0.0, 1e-12);
    EXPECT_TRUE(z.zeros[0].touching);
}

TEST(CircleZeros, DiagonalFlowCrossesTwice) {
    const CircleZeros z = circle_zeros(Mat2{-1.0, 0.0, 0.0, -2.0});
    ASSERT_EQ(z.zeros.size(), 2u);
    EXPECT_NEAR(z.zeros[0].angle, 0.0, 1e-12);
    EXPECT_NEAR(z.zeros[1].angle, kPi / 2.0, 1e-12);
    EXPECT_FALSE(z.zeros[0].touching);
    EXPECT_FALSE(z.zeros[1].touching);
    // dense sampling confirms the sign change at both angles
    EXPECT_LT(angular_drift(Mat2{-1.0, 0.0, 0.0, -2.0}, -0.1) *
                  angular_drift(Mat2{-1.0, 0.0, 0.0, -2.0}, 0.1),
              0.0);
}

TEST(CircleZeros, ScalarMatrixFlagged) {
    EXPECT_TRUE(circle_zeros(-2.5 * Mat2::identity()).is_identically_zero);
}

TEST(AveragedProfile, RotationsFamily) {
    const AveragedProfile p = averaged_profile(rotations_a0(1.0, 3.0),
                                               rotations_a1(1.0, 3.0), 0.5);
    EXPECT_NEAR(p.theta_plus, kPi / 4.0, 1e-12);
    EXPECT_NEAR(p.theta_minus, 3.0 * kPi / 4.0, 1e-12);
    EXPECT_NEAR(p.lambda_plus, 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(p.lambda_minus, 7.0 / 3.0, 1e-12);

    const Mat2 Alam = convex_combination(rotations_a0(1.0, 3.0), rotations_a1(1.0, 3.0), 0.5);
    EXPECT_NEAR(angular_drift(Alam, p.theta_minus), 0.0, 1e-10);
    EXPECT_NEAR(angular_drift(Alam, p.theta_plus), 0.0, 1e-10);
    EXPECT_NEAR(radial_rate(Alam, p.theta_plus), p.lambda_plus, 1e-10);

    // sign pattern on the lifted fundamental interval
    const double tp = p.theta_plus_lifted();
    EXPECT_GT(angular_drift(Alam, 0.5 * (p.theta_minus + tp)), 0.0);
    EXPECT_LT(angular_drift(Alam, 0.5 * (tp + p.theta_minus + kPi)), 0.0);
}

TEST(AveragedProfile, JordanFamily) {
    const AveragedProfile p = averaged_profile(jordan_a0(2.0), jordan_a1(2.0), 0.5);
    EXPECT_NEAR(p.theta_plus, kPi / 4.0, 1e-12);
    EXPECT_NEAR(p.theta_minus, 3.0 * kPi / 4.0, 1e-12);
    EXPECT_NEAR(p.lambda_plus, 1.0, 1e-12);
    EXPECT_NEAR(p.lambda_minus, 3.0, 1e-12);
}

TEST(AveragedProfile, NoSplitForEqualContractions) {
    const Mat2 I = Mat2::identity();
    EXPECT_THROW(averaged_profile(-1.0 * I, -1.0 * I, 0.5), NoHyperbolicSplit);
}

TEST(AveragedProfile, DriftSignsOpposeAtCriticalAngles) {
    // Wherever the averaged drift vanishes, the two flows must disagree in
    // direction; checked on random pairs that pass the criterion.
    std::mt19937_64 rng(77);
    int found = 0;
    while (found < 100) {
        const Mat2 A0 = random_hurwitz(rng);
        const Mat2 A1 = random_hurwitz(rng);
        const auto rep = hyperbolicity_criterion(A0, A1);
        if (!rep.holds) continue;
        const double lam =
            0.5 * (rep.lambda_window->first + rep.lambda_window->second);
        const AveragedProfile p = averaged_profile(A0, A1, lam);
        EXPECT_LT(angular_drift(A0, p.theta_plus) * angular_drift(A1, p.theta_plus), 0.0);
        EXPECT_LT(angular_drift(A0, p.theta_minus) * angular_drift(A1, p.theta_minus), 0.0);

        // averaged drift pushes directions toward the unstable eigen-line
        const Mat2 Alam = convex_combination(A0, A1, lam);
        const double tp = p.theta_plus_lifted();
        EXPECT_GT(angular_drift(Alam, 0.5 * (p.theta_minus + tp)), 0.0);
        EXPECT_LT(angular_drift(Alam, 0.5 * (tp + p.theta_minus + kPi)), 0.0);
        ++found;
    }
}

TEST(Classify, RotationsFamilyIsErgodic) {
    const CaseReport rep = classify(rotations_a0(1.0, 3.0), rotations_a1(1.0, 3.0), 0.5);
    EXPECT_EQ(rep.label, CaseReport::Label::ErgodicNoZeros);
    EXPECT_EQ(rep.verdict, CaseReport::Verdict::UniqueInvariantMeasure);
    EXPECT_FALSE(rep.invariant_interval.has_value());
    EXPECT_FALSE(rep.degenerate);
}

TEST(Classify, JordanFamilyIsDegenerateCaseE) {
    const CaseReport rep = classify(jordan_a0(2.0), jordan_a1(2.0), 0.5);
    EXPECT_EQ(rep.label, CaseReport::Label::E);
    EXPECT_EQ(rep.verdict, CaseReport::Verdict::TwoRecurrentClasses);
    EXPECT_TRUE(rep.degenerate);
    EXPECT_FALSE(rep.swapped);
    ASSERT_TRUE(rep.invariant_interval.has_value());
    EXPECT_NEAR(rep.invariant_interval->first, 0.0, 1e-10);
    EXPECT_NEAR(rep.invariant_interval->second, kPi / 2.0, 1e-10);
    ASSERT_EQ(rep.zeros0.size(), 1u);
    ASSERT_EQ(rep.zeros1.size(), 1u);
    EXPECT_NEAR(rep.zeros0[0].angle, 0.0, 1e-10);
    EXPECT_NEAR(rep.zeros1[0].angle, kPi / 2.0, 1e-10);
    EXPECT_TRUE(rep.zeros0[0].touching);
    EXPECT_TRUE(rep.zeros1[0].touching);
}

TEST(Classify, SwapInvariance) {
    const CaseReport rep = classify(jordan_a1(2.0), jordan_a0(2.0), 0.5);
    EXPECT_EQ(rep.label, CaseReport::Label::E);
    EXPECT_EQ(rep.verdict, CaseReport::Verdict::TwoRecurrentClasses);
    EXPECT_TRUE(rep.swapped);
    ASSERT_TRUE(rep.invariant_interval.has_value());
    EXPECT_NEAR(rep.invariant_interval->first, 0.0, 1e-10);
    EXPECT_NEAR(rep.invariant_interval->second, kPi / 2.0, 1e-10);
}

TEST(Classify, PerturbedJordanIsNondegenerateCaseE) {
    // Small opposite corner entries split each touching zero into a pair of
    // genuine crossings; the label and the two-class verdict must survive.
    const Mat2 A0{-1.0, 4.0, 0.1, -1.0};
    const Mat2 A1{-1.0, 0.1, 4.0, -1.0};
    const CaseReport rep = classify(A0, A1, 0.5);
    EXPECT_EQ(rep.label, CaseReport::Label::E);
    EXPECT_EQ(rep.verdict, CaseReport::Verdict::TwoRecurrentClasses);
    EXPECT_FALSE(rep.degenerate);
    ASSERT_EQ(rep.zeros0.size(), 2u);
    ASSERT_EQ(rep.zeros1.size(), 2u);
    ASSERT_TRUE(rep.invariant_interval.has_value());

    // Both flows point inward at the invariant interval's endpoints.
    const double lo = rep.invariant_interval->first;
    const double hi = rep.invariant_interval->second;
    EXPECT_GE(angular_drift(A0, lo), -1e-10);
    EXPECT_GE(angular_drift(A1, lo), -1e-10);
    EXPECT_LE(angular_drift(A0, hi), 1e-10);
    EXPECT_LE(angular_drift(A1, hi), 1e-10);
}

TEST(Classify, OversizedToleranceReportsDegeneracy) {
    // With a tolerance larger than |d_0(theta_plus)| the sign information is
    // meaningless and classification must refuse.
    EXPECT_THROW(classify(rotations_a0(1.0, 3.0), rotations_a1(1.0, 3.0), 0.5, 2.0),
                 NumericalDegeneracy);
}

} // namespace
} // namespace swstab
