#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "speclab/hankel.hpp"
#include "test_util.hpp"

using namespace speclab;

namespace {

int numerical_rank(const CMatrix& a, double tol) {
    const Eigen::VectorXd s = Eigen::JacobiSVD<CMatrix>(a).singularValues();
    int r = 0;
    while (r < s.size() && s(r) > tol * s(0)) ++r;
    return r;
}

}  // namespace

TEST_CASE("synthetic signals") {
    SignalModel m;
    m.n = 3;
    m.modes = {{1.0, 0.5}};
    const CVector s = synth_signal(m);
    REQUIRE(s.size() == 6);
    for (int j = 0; j < 6; ++j) CHECK(s(j) == std::pow(0.5, j));

    m.modes = {{1.0, 0.0}};
    m.noise_sigma = 0.0;
    const CVector d = synth_signal(m);
    CHECK(d(0) == 1.0);
    CHECK(d.tail(5).norm() == 0.0);

    // Unbiased noise: the sample mean of s_j stays within 5 sigma/sqrt(1000) of the clean value.
    m.modes = {{cplx(0.7, 0.2), cplx(0.3, 0.6)}};
    m.noise_sigma = 0.5;
    m.n = 4;
    CVector mean = CVector::Zero(8);
    for (int t = 0; t < 1000; ++t) {
        m.seed = 1000 + t;
        mean += synth_signal(m);
    }
    mean /= 1000.0;
    m.noise_sigma = 0.0;
    const CVector clean = synth_signal(m);
    CHECK((mean - clean).cwiseAbs().maxCoeff() < 5.0 * 0.5 / std::sqrt(1000.0));

    SignalModel bad;
    bad.n = 2;
    bad.modes = {{1.0, 1.0}};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad.modes = {{1.0, 0.1}, {1.0, 0.2}, {1.0, 0.3}};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad.modes.clear();
    bad.noise_sigma = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("Hankel pencil construction") {
    CVector s(4);
    s << 1.0, 0.5, 0.25, 0.125;
    const auto h = hankel_pencil(s);
    CMatrix u0(2, 2), u1(2, 2);
    u0 << 1.0, 0.5, 0.5, 0.25;
    u1 << 0.5, 0.25, 0.25, 0.125;
    CHECK((h.U0 - u0).norm() == 0.0);
    CHECK((h.U1 - u1).norm() == 0.0);

    const auto z = hankel_pencil(CVector::Zero(10));
    CHECK(z.U0.norm() == 0.0);
    CHECK(z.U1.norm() == 0.0);
    CHECK_THROWS_AS(hankel_pencil(CVector::Zero(5)), std::invalid_argument);
    CHECK_THROWS_AS(hankel_pencil(CVector::Zero(0)), std::invalid_argument);

    // Anti-diagonals are constant by construction.
    std::mt19937_64 gen(3);
    const CVector r = testutil::random_complex(12, 1, gen);
    const auto hr = hankel_pencil(r);
    for (int i = 0; i + 1 < 6; ++i)
        for (int j = 1; j < 6; ++j) {
            CHECK(hr.U0(i, j) == hr.U0(i + 1, j - 1));
            CHECK(hr.U1(i, j) == hr.U1(i + 1, j - 1));
        }
}

TEST_CASE("noiseless Vandermonde identity and rank") {
    std::mt19937_64 gen(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 7, k = 1 + trial % 4;
        SignalModel m;
        m.n = n;
        for (int j = 0; j < k; ++j)
            m.modes.push_back({cplx(0.5 + u(gen), u(gen)), std::polar(0.2 + 0.7 * u(gen), 6.28 * u(gen))});
        const auto h = hankel_pencil(synth_signal(m));
        CHECK(numerical_rank(h.U0, 1e-10) == k);
        const cplx z(0.3, -0.8);
        CMatrix rhs = CMatrix::Zero(n, n);
        for (const auto& mode : m.modes) {
            CVector uk(n);
            cplx p = 1.0;
            for (int i = 0; i < n; ++i, p *= mode.pole) uk(i) = p;
            rhs += mode.amplitude * (z - mode.pole) * uk * uk.transpose();
        }
        CHECK(((z * h.U0 - h.U1) - rhs).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("pencil_modes recovers noiseless modes") {
    SignalModel one;
    one.n = 5;
    one.modes = {{1.0, 0.5}};
    auto h = hankel_pencil(synth_signal(one));
    auto z = pencil_modes(h.U0, h.U1, 1);
    REQUIRE(z.size() == 1);
    CHECK(std::abs(z[0] - 0.5) < 1e-10);

    SignalModel two;
    two.n = 8;
    const std::vector<cplx> poles{0.9, std::polar(0.5, std::numbers::pi / 4.0)};
    two.modes = {{1.0, poles[0]}, {cplx(0.5, 0.5), poles[1]}};
    h = hankel_pencil(synth_signal(two));
    z = pencil_modes(h.U0, h.U1, 2);
    const auto err = match_modes(z, poles);
    CHECK(err[0] < 1e-8);
    CHECK(err[1] < 1e-8);

    CHECK_THROWS_AS(pencil_modes(h.U0, h.U1, 3), ModeCountError);
    CHECK_THROWS_AS(pencil_modes(h.U0, h.U1, 0), std::invalid_argument);
    CHECK_THROWS_AS(pencil_modes(CMatrix::Zero(3, 3), CMatrix::Zero(3, 3), 1), ModeCountError);
}

TEST_CASE("pencil_modes on pure noise returns an in-disk value") {
    SignalModel noise;
    noise.n = 20;
    noise.noise_sigma = 1.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        noise.seed = seed;
        const auto h = hankel_pencil(synth_signal(noise));
        const auto z = pencil_modes(h.U0, h.U1, 1);
        REQUIRE(z.size() == 1);
        CHECK(std::abs(z[0]) <= 1.0 + 1e-12);
    }
}

TEST_CASE("mode recovery error trend is non-increasing in n") {
    const std::vector<cplx> poles{0.9, std::polar(0.5, std::numbers::pi / 4.0)};
    std::vector<double> med;
    for (int n : {8, 16, 32, 64, 128}) {
        std::vector<double> errs;
        for (int t = 0; t < 50; ++t) {
            SignalModel m;
            m.n = n;
            m.modes = {{1.0, poles[0]}, {cplx(0.5, 0.5), poles[1]}};
            m.noise_sigma = 1e-2;
            m.seed = 7000 + 100 * n + t;
            const auto h = hankel_pencil(synth_signal(m));
            const auto e = match_modes(pencil_modes(h.U0, h.U1, 2), poles);
            errs.push_back(std::max(e[0], e[1]));
        }
        med.push_back(median(errs));
    }
    // Damped modes carry finite energy, so the error plateaus; the trend must not rise.
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < med.size(); ++i) pts.emplace_back(8 << i, med[i]);
    CHECK(*fit_loglog(pts).slope <= 0.02);
    CHECK(med.back() <= med.front());
}

TEST_CASE("optimal matching") {
    const auto d = match_modes({cplx(0.5, 0.0), cplx(0.0, 0.9)}, {cplx(0.0, 1.0), cplx(0.4, 0.0)});
    CHECK(d[0] == doctest::Approx(0.1));
    CHECK(d[1] == doctest::Approx(0.1));
    CHECK_THROWS_AS(match_modes({0.0}, {0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("mode rotation maps Vandermonde vectors to leading coordinates") {
    const std::vector<cplx> poles{0.9, cplx(0.2, -0.4), -0.6};
    const int n = 10;
    const CMatrix v = mode_rotation(poles, n);
    CHECK((v * v.adjoint() - CMatrix::Identity(n, n)).norm() < 1e-13);
    for (cplx p : poles) {
        CVector u(n);
        cplx w = 1.0;
        for (int i = 0; i < n; ++i, w *= p) u(i) = w;
        CHECK((v * u).tail(n - 3).norm() < 1e-13 * u.norm());
    }
}

TEST_CASE("noise resolvent decay") {
    const std::vector<cplx> poles{0.9, std::polar(0.5, std::numbers::pi / 4.0)};
    const auto a = noise_resolvent_decay({16, 32, 64}, 2.0, 10, 1.0, 5, poles, 50);
    const auto b = noise_resolvent_decay({16, 32, 64}, 2.0, 10, 1.0, 5, poles, 50);
    REQUIRE(a.rate.slope);
    CHECK(*a.rate.slope == *b.rate.slope);  // bit-for-bit
    CHECK(a.samples == b.samples);
    CHECK(a.rate.per_N.size() == 3);
    CHECK(a.bootstrap.total == 50);
    CHECK_THROWS_AS(noise_resolvent_decay({16, 32}, 2.0, 0, 1.0, 5, poles), std::invalid_argument);
    CHECK_THROWS_AS(noise_resolvent_decay({32, 16}, 2.0, 3, 1.0, 5, poles), std::invalid_argument);
    CHECK_THROWS_AS(noise_resolvent_decay({16, 32}, 1.0, 3, 1.0, 5, poles), std::invalid_argument);
}
