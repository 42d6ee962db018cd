#include "combsim/gaussian.hpp"
#include "fock_oracle.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace combsim;
using Catch::Approx;

namespace {

// Engine-side analogue of the oracle's D(alpha) P(theta) S(r) |0>:
// rotated squeezed covariance plus a coherent mean.
GaussianState squeezed_rotated_displaced(double r, double theta, std::complex<double> alpha) {
    GaussianState st = vacuum(1);
    Mat rot(2, 2);
    rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    Mat sq = Mat::Zero(2, 2);
    sq(0, 0) = std::exp(2.0 * r);
    sq(1, 1) = std::exp(-2.0 * r);
    st.cov = rot * sq * rot.transpose();
    st.mean << 2.0 * alpha.real(), 2.0 * alpha.imag();
    return st;
}

}  // namespace

TEST_CASE("vacuum state basics") {
    const GaussianState one = vacuum(1);
    REQUIRE(one.mean.size() == 2);
    REQUIRE(one.mean.isZero(0.0));
    REQUIRE(one.cov.isIdentity(0.0));

    const GaussianState three = vacuum(3);
    REQUIRE(three.mean.size() == 6);
    REQUIRE(three.cov.isIdentity(0.0));
    REQUIRE(three.modes() == 3);

    const PhotonStats stats = photon_stats(one, 0);
    REQUIRE(stats.mean_n == 0.0);
    REQUIRE(stats.var_n == 0.0);

    REQUIRE(physicality_min_eig(one) >= -1e-10);
    REQUIRE_THROWS_AS(vacuum(0), std::invalid_argument);
}

TEST_CASE("phase shift is a quadrature rotation") {
    const GaussianChannel id = phase_shift(0.0, 0, 1);
    REQUIRE(id.A.isIdentity(1e-15));

    const GaussianChannel full = phase_shift(2.0 * M_PI, 0, 1);
    REQUIRE((full.A - Mat::Identity(2, 2)).norm() < 1e-12);

    GaussianState st = vacuum(1);
    st.mean << 2.0, 0.0;
    st = apply(phase_shift(M_PI / 2.0, 0, 1), st);
    REQUIRE(st.mean(0) == Approx(0.0).margin(1e-12));
    REQUIRE(st.mean(1) == Approx(2.0).epsilon(1e-12));
    REQUIRE(unitarity_defect(phase_shift(0.37, 0, 1)) < 1e-12);
}

TEST_CASE("two-mode squeezer symplectic law") {
    SECTION("zero interaction is the identity") {
        const GaussianChannel ch = two_mode_squeezer(0.0, 0.0, 0, 1, 2);
        REQUIRE(ch.A.isIdentity(1e-15));
        REQUIRE(ch.N.isZero(0.0));
    }
    SECTION("invalid arguments rejected") {
        REQUIRE_THROWS_AS(two_mode_squeezer(-0.1, 0.0, 0, 1, 2), std::invalid_argument);
        REQUIRE_THROWS_AS(two_mode_squeezer(0.1, 0.0, 1, 1, 2), std::invalid_argument);
    }
    SECTION("r = ln(2+sqrt(3)) puts 3 photons in each mode") {
        const double r = 1.3169578969248166;
        const GaussianState st = apply(two_mode_squeezer(r, 0.0, 0, 1, 2), vacuum(2));
        for (int mode : {0, 1}) {
            const PhotonStats stats = photon_stats(st, mode);
            REQUIRE(stats.mean_n == Approx(3.0).epsilon(1e-9));
        }
        const double G2 = std::cosh(r) * std::cosh(r), g2 = std::sinh(r) * std::sinh(r);
        REQUIRE(G2 - g2 == Approx(1.0).epsilon(1e-12));
    }
    SECTION("intensity-difference squeezing, phase-sum conjugation") {
        // Var[(x1-x2)/sqrt2] = Var[(p1+p2)/sqrt2] = e^{-2r}
        const double expected[] = {0.8187307530779818, 0.36787944117144233,
                                   0.1353352832366127, 0.01831563888873418};
        const double rs[] = {0.1, 0.5, 1.0, 2.0};
        for (int i = 0; i < 4; ++i) {
            const GaussianState st = apply(two_mode_squeezer(rs[i], 0.0, 0, 1, 2), vacuum(2));
            const double var_xm =
                0.5 * (st.cov(0, 0) + st.cov(2, 2)) - st.cov(0, 2);
            const double var_pp =
                0.5 * (st.cov(1, 1) + st.cov(3, 3)) + st.cov(1, 3);
            REQUIRE(var_xm == Approx(expected[i]).epsilon(1e-9));
            REQUIRE(var_pp == Approx(expected[i]).epsilon(1e-9));
            REQUIRE(unitarity_defect(two_mode_squeezer(rs[i], 0.4, 0, 1, 2)) < 1e-12);
        }
    }
}

TEST_CASE("loss channel") {
    REQUIRE_THROWS_AS(loss_channel(-0.1, 0, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(loss_channel(1.1, 0, 1), std::invalid_argument);
    REQUIRE(loss_channel(1.0, 0, 1).A.isIdentity(1e-15));

    SECTION("full loss lands on vacuum") {
        GaussianState st = squeezed_rotated_displaced(0.4, 0.3, {1.0, -0.5});
        st = apply(loss_channel(0.0, 0, 1), st);
        REQUIRE(st.mean.isZero(1e-15));
        REQUIRE(st.cov.isIdentity(1e-15));
    }
    SECTION("semigroup loss(T1) o loss(T2) = loss(T1 T2)") {
        const GaussianChannel lhs = compose(loss_channel(0.7, 0, 1), loss_channel(0.45, 0, 1));
        const GaussianChannel rhs = loss_channel(0.7 * 0.45, 0, 1);
        REQUIRE((lhs.A - rhs.A).norm() < 1e-12);
        REQUIRE((lhs.N - rhs.N).norm() < 1e-12);
    }
    SECTION("halving a coherent state's photons keeps it coherent") {
        GaussianState st = apply(displacement(2.0, 0, 1), vacuum(1));
        REQUIRE(photon_stats(st, 0).mean_n == Approx(4.0).epsilon(1e-12));
        st = apply(loss_channel(0.5, 0, 1), st);
        REQUIRE(photon_stats(st, 0).mean_n == Approx(2.0).epsilon(1e-12));
        REQUIRE(st.cov.isIdentity(1e-12));
    }
    REQUIRE(cp_min_eig(loss_channel(0.3, 0, 1)) >= -1e-10);
}

TEST_CASE("amplifier channel") {
    REQUIRE_THROWS_AS(amplifier_channel(0.9, 0, 1), std::invalid_argument);
    REQUIRE(amplifier_channel(1.0, 0, 1).A.isIdentity(1e-15));

    const double G = 1.7;
    GaussianState st = apply(displacement({0.8, -0.3}, 0, 1), vacuum(1));
    st = apply(amplifier_channel(G, 0, 1), st);
    REQUIRE(st.mean(0) == Approx(G * 1.6).epsilon(1e-12));
    REQUIRE(st.mean(1) == Approx(G * -0.6).epsilon(1e-12));
    REQUIRE(st.cov(0, 0) == Approx(2.0 * G * G - 1.0).epsilon(1e-12));
    REQUIRE(st.cov(1, 1) == Approx(2.0 * G * G - 1.0).epsilon(1e-12));
    REQUIRE(cp_min_eig(amplifier_channel(G, 0, 1)) >= -1e-10);
}

TEST_CASE("gain-matched amplifier plus attenuator restores the mean, adds noise") {
    const double G = 2.0;
    const GaussianChannel pair =
        compose(loss_channel(1.0 / (G * G), 0, 1), amplifier_channel(G, 0, 1));
    REQUIRE(pair.A.isIdentity(1e-12));
    // N = T(G^2-1) + (1-T) = 0.25*3 + 0.75
    REQUIRE((pair.N - 1.5 * Mat::Identity(2, 2)).norm() < 1e-12);
    REQUIRE(cp_min_eig(pair) >= -1e-10);
}

TEST_CASE("composition matches sequential application") {
    const GaussianChannel c1 = two_mode_squeezer(0.4, 0.3, 0, 1, 2);
    const GaussianChannel c2 = compose(loss_channel(0.8, 1, 2), phase_shift(0.7, 1, 2));
    GaussianState st = apply(displacement({0.5, 0.2}, 0, 2), vacuum(2));

    const GaussianState seq = apply(c2, apply(c1, st));
    const GaussianState fused = apply(compose(c2, c1), st);
    REQUIRE((seq.mean - fused.mean).norm() < 1e-12);
    REQUIRE((seq.cov - fused.cov).norm() < 1e-12);

    REQUIRE_THROWS_AS(apply(c1, vacuum(1)), std::invalid_argument);
    REQUIRE_THROWS_AS(compose(phase_shift(0.1, 0, 1), c1), std::invalid_argument);
}

TEST_CASE("unitary chains preserve the uncertainty bound") {
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    GaussianState st = vacuum(2);
    for (int step = 0; step < 25; ++step) {
        switch (step % 3) {
            case 0: st = apply(two_mode_squeezer(0.6 * uni(rng), 6.28 * uni(rng), 0, 1, 2), st); break;
            case 1: st = apply(phase_shift(6.28 * uni(rng), step % 2, 2), st); break;
            default: st = apply(beam_splitter(0, 1, 2), st); break;
        }
        REQUIRE(physicality_min_eig(st) >= -1e-10);
    }
}

TEST_CASE("validators catch unphysical objects") {
    GaussianState st = vacuum(1);
    st.cov = 0.5 * Mat::Identity(2, 2);  // below vacuum noise in every direction
    REQUIRE(physicality_min_eig(st) < -0.4);

    GaussianChannel noiseless_amp;  // A = 2I with N = 0 cannot be CP
    noiseless_amp.A = 2.0 * Mat::Identity(2, 2);
    noiseless_amp.N = Mat::Zero(2, 2);
    noiseless_amp.d = Vec::Zero(2);
    REQUIRE(cp_min_eig(noiseless_amp) == Approx(-3.0).epsilon(1e-9));
    REQUIRE(unitarity_defect(noiseless_amp) > 1.0);
}

TEST_CASE("photon statistics closed forms") {
    SECTION("coherent state is Poissonian") {
        const GaussianState st = apply(displacement(1.0, 0, 1), vacuum(1));
        const PhotonStats stats = photon_stats(st, 0);
        REQUIRE(stats.mean_n == Approx(1.0).epsilon(1e-12));
        REQUIRE(stats.var_n == Approx(1.0).epsilon(1e-12));
    }
    SECTION("squeezed vacuum r = 0.4") {
        GaussianState st = vacuum(1);
        st.cov << std::exp(0.8), 0.0, 0.0, std::exp(-0.8);
        const PhotonStats stats = photon_stats(st, 0);
        REQUIRE(stats.mean_n == Approx(0.1687174731524223).epsilon(1e-12));
        REQUIRE(stats.var_n == Approx(0.3943661177987213).epsilon(1e-12));
    }
}

TEST_CASE("Fock oracle agreement, single mode", "[oracle]") {
    std::mt19937 rng(20250822);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double r = 0.5 * uni(rng);
        const double theta = 2.0 * M_PI * uni(rng);
        const double amp = uni(rng);  // |alpha| <= 1
        const double arg = 2.0 * M_PI * uni(rng);
        const std::complex<double> alpha = std::polar(amp, arg);

        const GaussianState st = squeezed_rotated_displaced(r, theta, alpha);
        const PhotonStats engine = photon_stats(st, 0);
        const fock::CVec psi = fock::displace(fock::phase(fock::squeeze(fock::vacuum1(), r), theta), alpha);
        const fock::Moments exact = fock::moments1(psi);
        REQUIRE(engine.mean_n == Approx(exact.mean_n).margin(1e-6));
        REQUIRE(engine.var_n == Approx(exact.var_n).margin(1e-6));

        if (trial % 4 == 0) {  // loss channel against the dilated beam splitter
            const double T = 0.25 + 0.7 * uni(rng);
            const GaussianState lossy = apply(loss_channel(T, 0, 1), st);
            const PhotonStats engine_l = photon_stats(lossy, 0);
            const fock::Moments exact_l = fock::lossy_moments(psi, T);
            REQUIRE(engine_l.mean_n == Approx(exact_l.mean_n).margin(1e-6));
            REQUIRE(engine_l.var_n == Approx(exact_l.var_n).margin(1e-6));
        }
    }
}

TEST_CASE("Fock oracle agreement, two modes", "[oracle]") {
    std::mt19937 rng(4242);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int trial = 0; trial < 6; ++trial) {
        const double r = 0.1 + 0.4 * uni(rng);
        const std::complex<double> alpha = std::polar(0.9 * uni(rng), 2.0 * M_PI * uni(rng));
        const double phi = 2.0 * M_PI * uni(rng);

        // displace mode 0, entangle, rotate mode 1, then mix on the balanced splitter
        GaussianState st = vacuum(2);
        st = apply(displacement(alpha, 0, 2), st);
        st = apply(two_mode_squeezer(r, 0.0, 0, 1, 2), st);
        st = apply(phase_shift(phi, 1, 2), st);
        st = apply(beam_splitter(0, 1, 2), st);

        fock::CVec psi = fock::vacuum2();
        psi = fock::displace2(psi, alpha, 0);
        psi = fock::tms(psi, r);
        psi = fock::phase2(psi, phi, 1);
        psi = fock::beam_splitter(psi, M_PI / 4.0);

        for (int mode : {0, 1}) {
            const PhotonStats engine = photon_stats(st, mode);
            const fock::Moments exact = fock::moments2(psi, mode);
            REQUIRE(engine.mean_n == Approx(exact.mean_n).margin(1e-6));
            REQUIRE(engine.var_n == Approx(exact.var_n).margin(1e-6));
        }
    }
}

TEST_CASE("balanced splitter splits a coherent state evenly") {
    GaussianState st = apply(displacement(2.0, 0, 2), vacuum(2));
    st = apply(beam_splitter(0, 1, 2), st);
    for (int mode : {0, 1}) {
        const PhotonStats stats = photon_stats(st, mode);
        REQUIRE(stats.mean_n == Approx(2.0).epsilon(1e-12));
        REQUIRE(stats.var_n == Approx(2.0).epsilon(1e-12));
    }
    REQUIRE(unitarity_defect(beam_splitter(0, 1, 2)) < 1e-12);
    REQUIRE_THROWS_AS(beam_splitter(1, 1, 2), std::invalid_argument);
}
