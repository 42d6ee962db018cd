#pragma once

// Closed-form steady-state phase comb: tooth amplitudes from unrolling the
// mean-field recursion of the feedback loop, harmonic collection of the
// resulting fringe, and sawtooth shape metrics. Mean-field only; noise is
// the loop engine's job.

#include "combsim/fringe.hpp"
#include "combsim/loop.hpp"

#include <algorithm>
#include <complex>

namespace combsim {

struct CombTooth {
    int n;             // harmonic index: tooth multiplies e^{i n phi}
    double amplitude;  // G_n >= 0, per unit seed amplitude
    double offset;     // delta_n, rad
};

// Steady-state comb of the loop. Tooth n of each list is the coefficient of
// e^{i n phi} in the steady mean-field amplitude of that arm, per unit of
// conjugate seed (atomic) or seed (optical/output) amplitude.
struct PhaseComb {
    std::vector<CombTooth> atomic;   // retained spin-wave arm; empty at zero gain
    std::vector<CombTooth> optical;  // intra-loop optical arm, includes seed carrier
    std::vector<CombTooth> output;   // recombined output whose intensity is the fringe
    int J = 0;                       // highest tooth index
    double seed_photons = 0.0;       // |seed|^2, absolute fringe normalization
};

namespace detail {

inline std::complex<double> tooth_value(const CombTooth& t) {
    return std::polar(t.amplitude, t.offset);
}

inline std::vector<CombTooth> to_teeth(const std::vector<std::complex<double>>& values) {
    std::vector<CombTooth> teeth(values.size());
    for (size_t k = 0; k < values.size(); ++k)
        teeth[k] = {static_cast<int>(k), std::abs(values[k]), std::arg(values[k])};
    return teeth;
}

}  // namespace detail

// Unrolls the steady mean-field recursion into comb teeth. The atomic arm
// obeys m' = q mu m + (drive), whose fixed point collected by powers of
// e^{i phi} gives geometric teeth with ratio |Y/(1-X)| < 1 below threshold.
inline PhaseComb steady_comb(const LoopConfig& cfg, int teeth_count) {
    cfg.validate();
    if (teeth_count < 1) throw std::invalid_argument("steady_comb: need at least one tooth");
    const double thr = threshold_factor(cfg);
    if (thr >= 1.0)
        throw std::invalid_argument("steady_comb: config at or above threshold (round-trip factor " +
                                    std::to_string(thr) + " >= 1), no steady comb exists");
    using C = std::complex<double>;
    const double cf = std::cosh(cfg.r_f()), sf = std::sinh(cfg.r_f());
    const double cb = std::cosh(cfg.r_b()), sb = std::sinh(cfg.r_b());
    double t_opt = std::sqrt(cfg.T_s);
    if (cfg.insertion) t_opt *= cfg.insertion->gain * std::sqrt(1.0 - cfg.insertion->loss);
    const double dt = cfg.atomic_phase_per_loop();
    const double q = std::sqrt(1.0 - cfg.gamma_a);
    const C rot = std::exp(C(0.0, -dt));
    const C x = q * cb * cf * rot;        // memory path per extra loop
    const double y = q * t_opt * sb * sf;  // optical round-trip path per extra loop

    const int J = teeth_count;
    std::vector<C> b(J + 1), w(J + 1), v(J + 1), t(J + 1);
    b[0] = 1.0 / (1.0 - x);
    for (int k = 1; k <= J; ++k) b[k] = b[k - 1] * y / (1.0 - x);
    for (int k = 0; k <= J; ++k) {
        w[k] = q * (cb * sf * rot * b[k] + (k >= 1 ? t_opt * sb * cf * b[k - 1] : C(0.0)));
        v[k] = (k == 0 ? C(cf) : C(0.0)) + sf * w[k];
    }
    for (int k = 0; k <= J; ++k)
        t[k] = (k >= 1 ? cb * t_opt * v[k - 1] : C(0.0)) +
               sb * rot * (cf * w[k] + (k == 0 ? C(sf) : C(0.0)));

    PhaseComb comb;
    comb.atomic = detail::to_teeth(w);
    comb.optical = detail::to_teeth(v);
    comb.output = detail::to_teeth(t);
    comb.J = J;
    comb.seed_photons = std::norm(cfg.seed);
    return comb;
}

// Tooth count from the geometric decay: enough teeth that the dropped tail
// is below 1e-16 of the leading amplitude.
inline PhaseComb steady_comb(const LoopConfig& cfg) {
    const double thr = threshold_factor(cfg);
    if (thr >= 1.0)
        throw std::invalid_argument("steady_comb: config at or above threshold (round-trip factor " +
                                    std::to_string(thr) + " >= 1), no steady comb exists");
    const double cf = std::cosh(cfg.r_f()), sf = std::sinh(cfg.r_f());
    const double cb = std::cosh(cfg.r_b()), sb = std::sinh(cfg.r_b());
    double t_opt = std::sqrt(cfg.T_s);
    if (cfg.insertion) t_opt *= cfg.insertion->gain * std::sqrt(1.0 - cfg.insertion->loss);
    const double q = std::sqrt(1.0 - cfg.gamma_a);
    const double ratio = q * t_opt * sb * sf / (1.0 - q * cb * cf);
    int teeth = 8;
    if (ratio > 0.0 && ratio < 1.0)
        teeth = std::clamp(static_cast<int>(std::ceil(std::log(1e-16) / std::log(ratio))), 8, 4096);
    return steady_comb(cfg, teeth);
}

struct FringeHarmonic {
    int n;          // harmonic index >= 1
    double F;       // cosine amplitude in photons
    double Lambda;  // collective interference offset, rad
};

struct HarmonicDecomposition {
    double offset = 0.0;  // mean photon level, the n = 0 term
    std::vector<FringeHarmonic> harmonics;
};

// Collects |sum_k t_k e^{i k phi}|^2 into offset + sum_n F_n cos(n phi + Lambda_n).
inline HarmonicDecomposition fringe_harmonics(const PhaseComb& comb) {
    using C = std::complex<double>;
    std::vector<C> t(comb.output.size());
    for (size_t k = 0; k < t.size(); ++k) t[k] = detail::tooth_value(comb.output[k]);
    HarmonicDecomposition dec;
    for (const C& tk : t) dec.offset += std::norm(tk);
    dec.offset *= comb.seed_photons;
    for (size_t h = 1; h < t.size(); ++h) {
        C corr = 0.0;
        for (size_t k = 0; k + h < t.size(); ++k) corr += t[k + h] * std::conj(t[k]);
        dec.harmonics.push_back({static_cast<int>(h), 2.0 * comb.seed_photons * std::abs(corr),
                                 std::arg(corr)});
    }
    return dec;
}

// Mean-field fringe on a grid. theta_A here is a rigid overlay added inside
// every harmonic term (the per-loop accumulated probe phase is already baked
// into the comb teeth by steady_comb via the loop config).
inline FringeCurve synthesize_fringe(const PhaseComb& comb, double theta_A,
                                     const std::vector<double>& phi_grid) {
    const HarmonicDecomposition dec = fringe_harmonics(comb);
    FringeCurve curve;
    curve.provenance = Provenance::closed_form;
    curve.phi = phi_grid;
    curve.signal.resize(phi_grid.size());
    for (size_t i = 0; i < phi_grid.size(); ++i) {
        double s = dec.offset;
        for (const auto& h : dec.harmonics)
            s += h.F * std::cos(h.n * phi_grid[i] + h.Lambda + theta_A);
        curve.signal[i] = s;
    }
    return curve;
}

// Max relative deviation between two curves on an identical grid.
inline double compare_fringes(const FringeCurve& a, const FringeCurve& b) {
    a.validate();
    b.validate();
    if (a.phi.size() != b.phi.size()) throw std::invalid_argument("compare_fringes: grid size mismatch");
    for (size_t i = 0; i < a.phi.size(); ++i)
        if (std::abs(a.phi[i] - b.phi[i]) > 1e-12)
            throw std::invalid_argument("compare_fringes: grids differ");
    double scale = 0.0;
    for (double s : b.signal) scale = std::max(scale, s);
    if (scale <= 0.0) scale = 1.0;
    double worst = 0.0;
    for (size_t i = 0; i < a.phi.size(); ++i)
        worst = std::max(worst, std::abs(a.signal[i] - b.signal[i]) / scale);
    return worst;
}

struct SawtoothMetrics {
    double max_slope = 0.0;
    double slope_asymmetry = 1.0;  // steeper-side over gentler-side, >= 1
    double argmax_phi = 0.0;
};

// Shape metrics by central differences; grid must resolve the fringe
// (at least 256 points per 2*pi of span).
inline SawtoothMetrics sawtooth_metrics(const FringeCurve& curve) {
    curve.validate();
    const size_t n = curve.phi.size();
    if (n < 3) throw std::invalid_argument("sawtooth_metrics: grid too coarse");
    const double span = (curve.phi[n - 1] - curve.phi[0]) + (curve.phi[1] - curve.phi[0]);
    const double density = static_cast<double>(n) * 2.0 * M_PI / span;
    if (density < 256.0 - 1e-9)
        throw std::invalid_argument("sawtooth_metrics: need >= 256 points per 2*pi");
    const std::vector<double> slope = curve_slope(curve.phi, curve.signal);
    double up = 0.0, down = 0.0, peak = 0.0, at = curve.phi[0];
    for (size_t i = 0; i < n; ++i) {
        up = std::max(up, slope[i]);
        down = std::max(down, -slope[i]);
        if (std::abs(slope[i]) > peak) {
            peak = std::abs(slope[i]);
            at = curve.phi[i];
        }
    }
    SawtoothMetrics m;
    m.max_slope = peak;
    m.slope_asymmetry = (up > 0.0 && down > 0.0) ? std::max(up / down, down / up)
                                                 : 1.0;
    m.argmax_phi = at;
    return m;
}

}  // namespace combsim
