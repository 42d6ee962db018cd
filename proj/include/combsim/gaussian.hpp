#pragma once

// Gaussian-state engine: mean vector + covariance matrix in shot-noise units
// (vacuum quadrature variance = 1, x = a + a^dag, p = -i(a - a^dag)),
// quadrature ordering x1,p1,x2,p2,... fixed project-wide.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace combsim {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Standard symplectic form, block-diagonal [[0,1],[-1,0]] per mode.
inline Mat symplectic_form(int modes) {
    Mat omega = Mat::Zero(2 * modes, 2 * modes);
    for (int k = 0; k < modes; ++k) {
        omega(2 * k, 2 * k + 1) = 1.0;
        omega(2 * k + 1, 2 * k) = -1.0;
    }
    return omega;
}

struct GaussianState {
    std::vector<std::string> mode_labels;
    Vec mean;
    Mat cov;

    int modes() const { return static_cast<int>(mean.size()) / 2; }
};

struct GaussianChannel {
    Mat A;  // transfer matrix
    Mat N;  // added classical noise, symmetric PSD up to CP slack
    Vec d;  // displacement
};

inline GaussianState vacuum(int modes) {
    if (modes < 1) throw std::invalid_argument("vacuum: mode count must be >= 1");
    GaussianState st;
    st.mode_labels.reserve(modes);
    for (int k = 0; k < modes; ++k) st.mode_labels.push_back("m" + std::to_string(k));
    st.mean = Vec::Zero(2 * modes);
    st.cov = Mat::Identity(2 * modes, 2 * modes);
    return st;
}

namespace detail {

// Writes a 2- or 4-dimensional block channel into the identity on 2M dims.
inline GaussianChannel embed(const Mat& a_block, const Mat& n_block,
                             const std::vector<int>& target_modes, int modes) {
    GaussianChannel ch;
    ch.A = Mat::Identity(2 * modes, 2 * modes);
    ch.N = Mat::Zero(2 * modes, 2 * modes);
    ch.d = Vec::Zero(2 * modes);
    std::vector<int> idx;
    for (int m : target_modes) {
        if (m < 0 || m >= modes) throw std::invalid_argument("channel: mode index out of range");
        idx.push_back(2 * m);
        idx.push_back(2 * m + 1);
    }
    for (size_t a = 0; a < idx.size(); ++a)
        for (size_t b = 0; b < idx.size(); ++b) {
            ch.A(idx[a], idx[b]) = a_block(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            ch.N(idx[a], idx[b]) = n_block(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        }
    return ch;
}

}  // namespace detail

// Two-mode squeezer: cosh r on the diagonal blocks, sinh r cross blocks
// rotated by the pump phase theta. Realizes the Raman pair interaction
// S_a^dag S_L^dag + h.c. with r = eta*t.
inline GaussianChannel two_mode_squeezer(double r, double theta, int mode_i, int mode_j, int modes) {
    if (r < 0) throw std::invalid_argument("two_mode_squeezer: r must be >= 0");
    if (mode_i == mode_j) throw std::invalid_argument("two_mode_squeezer: modes must be distinct");
    const double c = std::cosh(r), s = std::sinh(r);
    Mat rot(2, 2);
    rot << std::cos(theta), std::sin(theta), std::sin(theta), -std::cos(theta);
    Mat a = Mat::Zero(4, 4);
    a.block<2, 2>(0, 0) = c * Mat::Identity(2, 2);
    a.block<2, 2>(2, 2) = c * Mat::Identity(2, 2);
    a.block<2, 2>(0, 2) = s * rot;
    a.block<2, 2>(2, 0) = s * rot;
    return detail::embed(a, Mat::Zero(4, 4), {mode_i, mode_j}, modes);
}

inline GaussianChannel phase_shift(double phi, int mode, int modes) {
    Mat rot(2, 2);
    rot << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
    return detail::embed(rot, Mat::Zero(2, 2), {mode}, modes);
}

// Beam-splitter loss to vacuum: scales quadratures by sqrt(T), refills (1-T) vacuum noise.
inline GaussianChannel loss_channel(double transmissivity, int mode, int modes) {
    if (transmissivity < 0.0 || transmissivity > 1.0)
        throw std::invalid_argument("loss_channel: transmissivity outside [0,1]");
    const double t = std::sqrt(transmissivity);
    return detail::embed(t * Mat::Identity(2, 2), (1.0 - transmissivity) * Mat::Identity(2, 2),
                         {mode}, modes);
}

// Phase-insensitive amplifier, amplitude gain G: adds (G^2-1) units of noise.
inline GaussianChannel amplifier_channel(double gain, int mode, int modes) {
    if (gain < 1.0) throw std::invalid_argument("amplifier_channel: gain must be >= 1");
    return detail::embed(gain * Mat::Identity(2, 2), (gain * gain - 1.0) * Mat::Identity(2, 2),
                         {mode}, modes);
}

// Balanced beam splitter between two modes (used by the coherent benchmark).
inline GaussianChannel beam_splitter(int mode_i, int mode_j, int modes) {
    if (mode_i == mode_j) throw std::invalid_argument("beam_splitter: modes must be distinct");
    const double c = 1.0 / std::sqrt(2.0);
    Mat a = Mat::Zero(4, 4);
    a.block<2, 2>(0, 0) = c * Mat::Identity(2, 2);
    a.block<2, 2>(2, 2) = c * Mat::Identity(2, 2);
    a.block<2, 2>(0, 2) = c * Mat::Identity(2, 2);
    a.block<2, 2>(2, 0) = -c * Mat::Identity(2, 2);
    return detail::embed(a, Mat::Zero(4, 4), {mode_i, mode_j}, modes);
}

// Pure displacement by complex amplitude alpha on one mode (mean shift only).
inline GaussianChannel displacement(std::complex<double> alpha, int mode, int modes) {
    GaussianChannel ch;
    ch.A = Mat::Identity(2 * modes, 2 * modes);
    ch.N = Mat::Zero(2 * modes, 2 * modes);
    ch.d = Vec::Zero(2 * modes);
    ch.d(2 * mode) = 2.0 * alpha.real();
    ch.d(2 * mode + 1) = 2.0 * alpha.imag();
    return ch;
}

inline GaussianChannel compose(const GaussianChannel& second, const GaussianChannel& first) {
    if (second.A.cols() != first.A.rows())
        throw std::invalid_argument("compose: dimension mismatch");
    GaussianChannel ch;
    ch.A = second.A * first.A;
    ch.N = second.A * first.N * second.A.transpose() + second.N;
    ch.d = second.A * first.d + second.d;
    return ch;
}

inline GaussianState apply(const GaussianChannel& ch, const GaussianState& st) {
    if (ch.A.cols() != st.mean.size())
        throw std::invalid_argument("apply: channel/state dimension mismatch");
    GaussianState out;
    out.mode_labels = st.mode_labels;
    out.mean = ch.A * st.mean + ch.d;
    out.cov = ch.A * st.cov * ch.A.transpose() + ch.N;
    return out;
}

struct PhotonStats {
    double mean_n;
    double var_n;
};

// Exact Gaussian photon-number moments of one mode. With thermal part
// Nth = (Vxx+Vpp-2)/4, anomalous part M = (Vxx-Vpp)/4 + i Vxp/2 and
// coherent amplitude alpha = (x+ip)/2:
//   <n>   = Nth + |alpha|^2
//   var n = Nth^2 + Nth + |M|^2 + 2 Re(conj(alpha)^2 M) + (2 Nth + 1)|alpha|^2
inline PhotonStats photon_stats(const GaussianState& st, int mode) {
    const double x = st.mean(2 * mode), p = st.mean(2 * mode + 1);
    const double vxx = st.cov(2 * mode, 2 * mode);
    const double vpp = st.cov(2 * mode + 1, 2 * mode + 1);
    const double vxp = st.cov(2 * mode, 2 * mode + 1);
    const double nth = (vxx + vpp - 2.0) / 4.0;
    const std::complex<double> msq((vxx - vpp) / 4.0, vxp / 2.0);
    const std::complex<double> alpha(x / 2.0, p / 2.0);
    const double a2 = std::norm(alpha);
    const double mean = nth + a2;
    const double var = nth * nth + nth + std::norm(msq) +
                       2.0 * (std::conj(alpha) * std::conj(alpha) * msq).real() +
                       (2.0 * nth + 1.0) * a2;
    return {mean, var};
}

// Minimum eigenvalue of the Hermitian matrix cov + i*Omega; physical states
// satisfy >= -1e-10 (uncertainty principle with numerical slack).
inline double physicality_min_eig(const GaussianState& st) {
    const int n = static_cast<int>(st.mean.size());
    Eigen::MatrixXcd h(n, n);
    const Mat omega = symplectic_form(n / 2);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            h(a, b) = std::complex<double>(st.cov(a, b), omega(a, b));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
    return solver.eigenvalues().minCoeff();
}

// Complete-positivity slack of a channel: min eig of N + i(Omega - A Omega A^T).
inline double cp_min_eig(const GaussianChannel& ch) {
    const int n = static_cast<int>(ch.A.rows());
    const Mat omega = symplectic_form(n / 2);
    const Mat comm = omega - ch.A * omega * ch.A.transpose();
    Eigen::MatrixXcd h(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            h(a, b) = std::complex<double>(ch.N(a, b), comm(a, b));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
    return solver.eigenvalues().minCoeff();
}

// Frobenius deviation from symplectic unitarity, |A Omega A^T - Omega|_F.
inline double unitarity_defect(const GaussianChannel& ch) {
    const Mat omega = symplectic_form(static_cast<int>(ch.A.rows()) / 2);
    return (ch.A * omega * ch.A.transpose() - omega).norm();
}

}  // namespace combsim
