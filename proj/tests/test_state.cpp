#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "oracle.hpp"
#include "pse/state.hpp"
#include "support.hpp"

using namespace pse;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kPi = std::numbers::pi;

StateVector polar1(double theta, double v) { return StateVector(Coordinates::Polar, {theta, v}, 0, theta); }

StateVector rect1(double re, double im) { return StateVector(Coordinates::Rectangular, {re, im}, 0, im); }

}  // namespace

TEST_CASE("flat start in both layouts", "[state]") {
    const auto p = StateVector::flat(Coordinates::Polar, 3, 0);
    CHECK(p.values()[0] == 0.0);
    CHECK(p.magnitude(2) == 1.0);
    const auto r = to_rectangular(p);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(r[r.real_index(i)] == 1.0);
        CHECK(r[r.imag_index(i)] == 0.0);
    }
}

TEST_CASE("to_rectangular at a quarter turn", "[state]") {
    const auto r = to_rectangular(polar1(kPi / 2, 2.0));
    CHECK_THAT(r[0], WithinAbs(0.0, 1e-15));
    CHECK_THAT(r[1], WithinAbs(2.0, 1e-15));
}

TEST_CASE("to_polar examples", "[state]") {
    auto p = to_polar(rect1(1.0, 0.0));
    CHECK(p.magnitude(0) == 1.0);
    CHECK(p.angle(0) == 0.0);
    p = to_polar(rect1(0.0, -1.0));
    CHECK_THAT(p.magnitude(0), WithinAbs(1.0, 1e-15));
    CHECK_THAT(p.angle(0), WithinAbs(-kPi / 2, 1e-15));
    p = to_polar(rect1(3.0, 4.0));
    CHECK_THAT(p.magnitude(0), WithinAbs(5.0, 1e-15));
    CHECK_THAT(p.angle(0), WithinAbs(static_cast<double>(std::atan2(4.0L, 3.0L)), 1e-15));
    CHECK_THAT(p.angle(0), WithinAbs(0.927295218001612, 1e-14));
}

TEST_CASE("to_polar rejects a zero voltage", "[state]") {
    try {
        to_polar(StateVector(Coordinates::Rectangular, {1.0, 0.0, 0.0, 0.0}, 0, 0.0));
        FAIL("expected ZeroMagnitude");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ZeroMagnitude);
    }
}

TEST_CASE("polar round trip", "[state][property]") {
    const auto net = support::net14();
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const auto x = oracle::random_polar(rng, net, 0.5, 1.5, -3.0, 3.0);
        const auto back = to_polar(to_rectangular(x));
        for (std::size_t k = 0; k < x.size(); ++k) CHECK_THAT(back[k], WithinAbs(x[k], 1e-12));
    }
}

TEST_CASE("state invariants", "[state]") {
    CHECK_THROWS_AS(StateVector(Coordinates::Polar, {0.0, 1.0, 0.0}, 0, 0.0), Error);
    CHECK_THROWS_AS(StateVector(Coordinates::Polar, {0.0, 0.0, 1.0, -1.0}, 0, 0.0), Error);
    StateVector x(Coordinates::Polar, {0.3, 0.1, 1.0, 1.0}, 0, 0.0);
    CHECK(x[0] == 0.0);  // slack entry forced
    x.set(0, 0.5);
    CHECK(x[0] == 0.0);
    x.set(1, 0.2);
    CHECK(x[1] == 0.2);
}

TEST_CASE("wrap_angle maps into (-pi, pi]", "[state]") {
    CHECK(wrap_angle(kPi) == kPi);
    CHECK_THAT(wrap_angle(-kPi), WithinAbs(kPi, 1e-15));
    CHECK_THAT(wrap_angle(3 * kPi / 2), WithinAbs(-kPi / 2, 1e-15));
    CHECK_THAT(wrap_angle(0.1 + 4 * kPi), WithinAbs(0.1, 1e-14));
}

TEST_CASE("polar_to_rect_variance examples", "[state]") {
    auto r = polar_to_rect_variance(1.0, 1e-4, 0.0, 1e-4);
    CHECK_THAT(r.var_re, WithinRel(1e-4, 1e-12));
    CHECK_THAT(r.var_im, WithinRel(1e-4, 1e-12));
    CHECK_THAT(r.cov_re_im, WithinAbs(0.0, 1e-20));

    r = polar_to_rect_variance(1.0, 2e-4, kPi / 2, 3e-4);
    CHECK_THAT(r.var_re, WithinRel(3e-4, 1e-12));
    CHECK_THAT(r.var_im, WithinRel(2e-4, 1e-12));
    CHECK_THAT(r.cov_re_im, WithinAbs(0.0, 1e-19));

    r = polar_to_rect_variance(2.0, 1e-4, kPi / 4, 1e-4);
    CHECK_THAT(r.var_re, WithinRel(2.5e-4, 1e-12));
    CHECK_THAT(r.var_im, WithinRel(2.5e-4, 1e-12));
    CHECK_THAT(r.cov_re_im, WithinRel(-1.5e-4, 1e-12));

    CHECK_THROWS_AS(polar_to_rect_variance(1.0, 0.0, 0.0, 1e-4), Error);
    CHECK_THROWS_AS(polar_to_rect_variance(1.0, 1e-4, 0.0, -1.0), Error);
}

TEST_CASE("polar_to_rect_variance agrees with Monte-Carlo sampling", "[state][oracle]") {
    // Sample polar pairs, convert, and compare sample (co)variances.
    std::mt19937_64 rng(77);
    const double mag = 2.0, ang = kPi / 4, vm = 1e-4, va = 1e-4;
    std::normal_distribution<double> em(0.0, std::sqrt(vm)), ea(0.0, std::sqrt(va));
    const int samples = 1000000;
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (int s = 0; s < samples; ++s) {
        const double m = mag + em(rng), a = ang + ea(rng);
        const double x = m * std::cos(a), y = m * std::sin(a);
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    }
    const double mx = sx / samples, my = sy / samples;
    const double cxx = sxx / samples - mx * mx, cyy = syy / samples - my * my, cxy = sxy / samples - mx * my;
    const auto r = polar_to_rect_variance(mag, vm, ang, va);
    CHECK(std::abs(cxx - r.var_re) <= 0.03 * std::abs(r.var_re));
    CHECK(std::abs(cyy - r.var_im) <= 0.03 * std::abs(r.var_im));
    CHECK(std::abs(cxy - r.cov_re_im) <= 0.03 * std::abs(r.cov_re_im));
}

TEST_CASE("polar_to_rect_variance yields a PSD block", "[state][property]") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> mag(0.0, 3.0), ang(-kPi, kPi), var(1e-8, 1e-2);
    for (int trial = 0; trial < 10000; ++trial) {
        const auto r = polar_to_rect_variance(mag(rng), var(rng), ang(rng), var(rng));
        CHECK(r.var_re * r.var_im - r.cov_re_im * r.cov_re_im >= -1e-15);
    }
}
