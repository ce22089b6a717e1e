#include "sqzsim/detection.hpp"
#include "sqzsim/sideband_core.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace sqzsim;
using namespace sqzsim::sideband;

namespace {

constexpr double kTol = 1e-12;
const Complex I{0.0, 1.0};

void expect_near(Complex a, Complex b, double tol = kTol)
{
    EXPECT_NEAR(a.real(), b.real(), tol);
    EXPECT_NEAR(a.imag(), b.imag(), tol);
}

Complex random_complex(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    return {u(rng), u(rng)};
}

const double kOmega = kTwoPi * 40.0e6;

} // namespace

TEST(SidebandCore, SingleUpperSidebandQuadratures)
{
    const auto qv = quads_from_sidebands({kOmega, 1.0, 0.0});
    expect_near(qv.q1, 1.0 / std::numbers::sqrt2);
    expect_near(qv.q2, -I / std::numbers::sqrt2);
    EXPECT_EQ(qv.offset, kOmega);
}

TEST(SidebandCore, ZeroFieldQuadratures)
{
    const auto qv = quads_from_sidebands({kOmega, 0.0, 0.0});
    expect_near(qv.q1, 0.0);
    expect_near(qv.q2, 0.0);
    const auto sb = sidebands_from_quads({kOmega, 0.0, 0.0});
    expect_near(sb.upper, 0.0);
    expect_near(sb.lower, 0.0);
}

TEST(SidebandCore, SymmetricSidebandsAreAmplitudeQuadrature)
{
    const auto qv = quads_from_sidebands({kOmega, 1.0, 1.0});
    expect_near(qv.q1, std::numbers::sqrt2);
    expect_near(qv.q2, 0.0);
}

TEST(SidebandCore, InverseOfSingleSideband)
{
    const auto sb = sidebands_from_quads({kOmega, 1.0 / std::numbers::sqrt2, -I / std::numbers::sqrt2});
    expect_near(sb.upper, 1.0);
    expect_near(sb.lower, 0.0);
    EXPECT_EQ(sb.offset, kOmega);
}

TEST(SidebandCore, RoundTripBothDirections)
{
    std::mt19937_64 rng(7);
    for (int k = 0; k < 10000; ++k) {
        const SidebandPair sb{kOmega, random_complex(rng), random_complex(rng)};
        const auto back = sidebands_from_quads(quads_from_sidebands(sb));
        expect_near(back.upper, sb.upper, 1e-12 * 20);
        expect_near(back.lower, sb.lower, 1e-12 * 20);
        const QuadratureVector qv{kOmega, random_complex(rng), random_complex(rng)};
        const auto qback = quads_from_sidebands(sidebands_from_quads(qv));
        expect_near(qback.q1, qv.q1, 1e-12 * 20);
        expect_near(qback.q2, qv.q2, 1e-12 * 20);
    }
}

TEST(SidebandCore, ConversionsAreLinear)
{
    std::mt19937_64 rng(11);
    for (int k = 0; k < 1000; ++k) {
        const SidebandPair a{kOmega, random_complex(rng), random_complex(rng)};
        const SidebandPair b{kOmega, random_complex(rng), random_complex(rng)};
        const Complex ca = random_complex(rng);
        const Complex cb = random_complex(rng);
        // conj(lower) makes the map real-linear, so superpose with real weights
        const double ra = ca.real();
        const double rb = cb.real();
        const SidebandPair mix{kOmega, ra * a.upper + rb * b.upper, ra * a.lower + rb * b.lower};
        const auto qa = quads_from_sidebands(a);
        const auto qb = quads_from_sidebands(b);
        const auto qm = quads_from_sidebands(mix);
        expect_near(qm.q1, ra * qa.q1 + rb * qb.q1, 1e-9);
        expect_near(qm.q2, ra * qa.q2 + rb * qb.q2, 1e-9);
        const auto sm = sidebands_from_quads({kOmega, ra * qa.q1 + rb * qb.q1, ra * qa.q2 + rb * qb.q2});
        expect_near(sm.upper, mix.upper, 1e-9);
        expect_near(sm.lower, mix.lower, 1e-9);
    }
}

TEST(SidebandCore, NormPreserved)
{
    std::mt19937_64 rng(13);
    for (int k = 0; k < 10000; ++k) {
        const SidebandPair sb{kOmega, random_complex(rng), random_complex(rng)};
        const auto qv = quads_from_sidebands(sb);
        const double lhs = std::norm(sb.upper) + std::norm(sb.lower);
        const double rhs = std::norm(qv.q1) + std::norm(qv.q2);
        EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, lhs));
    }
}

TEST(SidebandCore, ZeroVectorSynthesizesZeroSeries)
{
    const CarrierFrame frame = CarrierFrame::from_wavelength(1064e-9);
    const auto ts = synthesize_time_series({kOmega, 0.0, 0.0}, frame, 1e-6, 640e6);
    ASSERT_EQ(ts.samples.size(), 640u);
    for (double v : ts.samples) {
        EXPECT_EQ(v, 0.0);
    }
}

TEST(SidebandCore, SingleSidebandBasebandIsCosine)
{
    const CarrierFrame frame = CarrierFrame::from_wavelength(1064e-9);
    const double alpha = 0.7;
    const auto ts = synthesize_time_series(quads_from_sidebands({kOmega, alpha, 0.0}), frame, 1e-6, 640e6);
    for (std::size_t k = 0; k < ts.samples.size(); ++k) {
        EXPECT_NEAR(ts.samples[k], std::numbers::sqrt2 * alpha * std::cos(kOmega * ts.time_at(k)), 1e-12);
    }
}

TEST(SidebandCore, Deterministic)
{
    const CarrierFrame frame(kTwoPi * 300e6);
    const QuadratureVector qv{kOmega, {0.3, -0.2}, {1.1, 0.4}};
    const auto a = synthesize_time_series(qv, frame, 2e-7, 4e9, SynthesisMode::Literal);
    const auto b = synthesize_time_series(qv, frame, 2e-7, 4e9, SynthesisMode::Literal);
    EXPECT_EQ(a.samples, b.samples);
}

TEST(SidebandCore, SymmetricSidebandsDemodulateMaximallyAtPhaseZero)
{
    const CarrierFrame frame = CarrierFrame::from_wavelength(1064e-9);
    const auto ts = synthesize_time_series(quads_from_sidebands({kOmega, 1.0, 1.0}), frame, 10e-6, 640e6);
    const double f = kOmega / kTwoPi;
    double best = -1.0;
    double best_phase = 0.0;
    for (int k = 0; k < 36; ++k) {
        const double phase = kTwoPi * k / 36.0 - std::numbers::pi;
        const double v = detection::demodulate(ts, {f, phase, 2e6});
        if (v > best) {
            best = v;
            best_phase = phase;
        }
    }
    EXPECT_NEAR(best_phase, 0.0, 1e-12);
    EXPECT_NEAR(best, std::numbers::sqrt2, 1e-6);
}

TEST(SidebandCore, RejectsBadTimebase)
{
    const CarrierFrame frame = CarrierFrame::from_wavelength(1064e-9);
    const QuadratureVector qv{kOmega, 1.0, 0.0};
    EXPECT_THROW(synthesize_time_series(qv, frame, 0.0, 1e9), std::invalid_argument);
    EXPECT_THROW(synthesize_time_series(qv, frame, 1e-6, -1.0), std::invalid_argument);
    EXPECT_THROW(synthesize_time_series(qv, frame, 1e-6, 1e9, SynthesisMode::Literal), std::invalid_argument);
    EXPECT_THROW(CarrierFrame(0.0), std::invalid_argument);
    EXPECT_THROW(CarrierFrame::from_wavelength(-1.0), std::invalid_argument);
}

TEST(SidebandCore, LiteralAndBasebandAgreeAfterDemodulation)
{
    // Scaled-down carrier so the literal field can be sampled.
    const CarrierFrame frame(kTwoPi * 200e6);
    const double omega = kTwoPi * 10e6;
    const SidebandPair sb{omega, {0.8, 0.1}, {0.3, -0.5}};
    const Timebase literal{40e-6, 2.0e9, SynthesisMode::Literal};
    const Timebase baseband{40e-6, 2.0e9, SynthesisMode::Baseband};
    const auto lit = square_law(synthesize_field(sb, frame, literal));
    const auto bb = square_law(synthesize_field(sb, frame, baseband));
    for (double phase : {0.0, 0.7, -1.9}) {
        const detection::DemodulatorConfig cfg{20e6, phase, 0.5e6};
        EXPECT_NEAR(detection::demodulate(lit, cfg), detection::demodulate(bb, cfg), 1e-4);
    }
}
