#pragma once

// Discrete-time feedback loop: forward Raman split, optical propagation with
// phase and loss (plus optional amplifier/attenuator insertion), backward
// Raman recombination, atomic memory with per-loop decay, iterated to a
// steady state. The atomic mode is the only state carried between loops.

#include "combsim/fringe.hpp"
#include "combsim/gaussian.hpp"

#include <complex>
#include <cstdio>
#include <optional>
#include <sstream>

namespace combsim {

// Pump drive of one Raman pass: squeeze parameter r = eta*t with
// eta = c_eta*A_W/Delta, and ac-Stark phase delta = zeta*t with
// zeta = c_zeta*A_W^2/Delta.
struct RamanDrive {
    double pump_amplitude = 1.0;
    double detuning = 1.0;
    double c_eta = 0.0;
    double c_zeta = 0.0;
    double interaction_time = 1.0;

    double squeeze() const { return c_eta * pump_amplitude / detuning * interaction_time; }
    double stark_phase() const {
        return c_zeta * pump_amplitude * pump_amplitude / detuning * interaction_time;
    }

    void validate() const {
        if (!(pump_amplitude > 0)) throw std::invalid_argument("RamanDrive: pump_amplitude must be > 0");
        if (detuning == 0.0) throw std::invalid_argument("RamanDrive: detuning must be nonzero");
        if (!(interaction_time > 0)) throw std::invalid_argument("RamanDrive: interaction_time must be > 0");
        if (!(squeeze() >= 0) || !std::isfinite(squeeze()) || !std::isfinite(stark_phase()))
            throw std::invalid_argument("RamanDrive: derived r, delta must be finite with r >= 0");
    }

    // Unit pump/detuning/time carrier for a directly chosen gain and offset.
    static RamanDrive from_gain(double r, double delta = 0.0) {
        RamanDrive d;
        d.c_eta = r;
        d.c_zeta = delta;
        return d;
    }
};

// Amplifier/attenuator pair spliced into the optical arm (the correlation
// destruction experiment): amplitude gain G_AM followed by loss l.
struct Insertion {
    double gain = 1.0;  // G_AM, amplitude gain >= 1
    double loss = 0.0;  // l in [0,1)
};

struct LoopConfig {
    RamanDrive forward_drive;
    RamanDrive backward_drive;
    double phi = 0.0;       // optical phase per round trip
    double T_s = 1.0;       // optical power transmissivity per round trip
    double gamma_a = 0.5;   // atomic decay fraction per loop
    double theta_A = 0.0;   // injected atomic phase
    std::optional<Insertion> insertion;
    std::complex<double> seed = 0.0;  // coherent amplitude fed to the fresh optical mode
    int J_max = 10000;
    double steady_tol = 1e-11;

    double r_f() const { return forward_drive.squeeze(); }
    double r_b() const { return backward_drive.squeeze(); }
    // Per-loop atomic phase: ac-Stark offsets of both passes plus the probe phase.
    double atomic_phase_per_loop() const {
        return forward_drive.stark_phase() + backward_drive.stark_phase() + theta_A;
    }

    void validate() const {
        forward_drive.validate();
        backward_drive.validate();
        if (!(T_s > 0.0) || T_s > 1.0) throw std::invalid_argument("LoopConfig: T_s must be in (0,1]");
        if (gamma_a < 0.0 || gamma_a > 1.0) throw std::invalid_argument("LoopConfig: gamma_a must be in [0,1]");
        if (insertion) {
            if (insertion->gain < 1.0) throw std::invalid_argument("LoopConfig: insertion gain must be >= 1");
            if (insertion->loss < 0.0 || insertion->loss >= 1.0)
                throw std::invalid_argument("LoopConfig: insertion loss must be in [0,1)");
        }
        if (J_max < 1) throw std::invalid_argument("LoopConfig: J_max must be >= 1");
        if (!(steady_tol > 0)) throw std::invalid_argument("LoopConfig: steady_tol must be > 0");
        if (!std::isfinite(phi) || !std::isfinite(theta_A))
            throw std::invalid_argument("LoopConfig: phases must be finite");
    }
};

// Round-trip amplitude of the atomic mean-field recursion; steady states
// exist only below 1.
inline double threshold_factor(const LoopConfig& cfg) {
    const double cf = std::cosh(cfg.r_f()), sf = std::sinh(cfg.r_f());
    const double cb = std::cosh(cfg.r_b()), sb = std::sinh(cfg.r_b());
    double t_opt = std::sqrt(cfg.T_s);
    if (cfg.insertion) t_opt *= cfg.insertion->gain * std::sqrt(1.0 - cfg.insertion->loss);
    return std::sqrt(1.0 - cfg.gamma_a) * (cb * cf + t_opt * sb * sf);
}

struct LoopRecord {
    int n;
    std::complex<double> atomic_amplitude;  // (x + i p)/2 of the retained mode
    double sf_mean;
    double sf_var;
    double residual;
};

struct LoopTrace {
    std::vector<LoopRecord> records;
    GaussianState atomic;  // retained mode at exit
    bool converged = false;
    int loops_used = 0;
    double final_residual = 0.0;
    double sf_mean = 0.0;  // output statistics of the last executed loop
    double sf_var = 0.0;
};

class NonConvergenceError : public std::runtime_error {
public:
    NonConvergenceError(double residual, std::vector<double> phis)
        : std::runtime_error(format(residual, phis)),
          residual_(residual),
          phi_values_(std::move(phis)) {}

    double residual() const { return residual_; }
    const std::vector<double>& phi_values() const { return phi_values_; }

private:
    static std::string format(double residual, const std::vector<double>& phis) {
        std::ostringstream os;
        os << "loop did not reach steady state (last residual " << residual << ")";
        if (!phis.empty()) {
            os << " at phi =";
            for (double p : phis) os << ' ' << p;
        }
        return os.str();
    }
    double residual_;
    std::vector<double> phi_values_;
};

namespace detail {

// One iteration precompiled into three affine segments on the 2-mode
// (atomic, optical) system so the hot loop is a handful of 4x4 products.
struct LoopKernel {
    Eigen::Matrix4d a1, n1;  // forward squeezer
    Eigen::Matrix4d a2, n2;  // propagation + insertion + atomic phase + backward squeezer
    Eigen::Matrix4d a3, n3;  // atomic decay
    Eigen::Vector4d seed_d;  // fresh-mode displacement

    explicit LoopKernel(const LoopConfig& cfg) {
        const int M = 2;  // mode 0 atomic, mode 1 optical
        const GaussianChannel fwd = two_mode_squeezer(cfg.r_f(), 0.0, 0, 1, M);
        a1 = fwd.A;
        n1 = fwd.N;

        std::vector<GaussianChannel> mids;
        mids.push_back(phase_shift(cfg.phi, 1, M));
        mids.push_back(loss_channel(cfg.T_s, 1, M));
        if (cfg.insertion) {
            mids.push_back(amplifier_channel(cfg.insertion->gain, 1, M));
            mids.push_back(loss_channel(1.0 - cfg.insertion->loss, 1, M));
        }
        mids.push_back(phase_shift(cfg.atomic_phase_per_loop(), 0, M));
        mids.push_back(two_mode_squeezer(cfg.r_b(), 0.0, 0, 1, M));
        GaussianChannel mid{Mat::Identity(4, 4), Mat::Zero(4, 4), Vec::Zero(4)};
        for (const auto& ch : mids) mid = compose(ch, mid);
        a2 = mid.A;
        n2 = mid.N;

        const GaussianChannel decay = loss_channel(1.0 - cfg.gamma_a, 0, M);
        a3 = decay.A;
        n3 = decay.N;

        seed_d << 0.0, 0.0, 2.0 * cfg.seed.real(), 2.0 * cfg.seed.imag();
    }
};

struct TwoModeState {
    Eigen::Vector4d mean;
    Eigen::Matrix4d cov;
};

inline void affine(const Eigen::Matrix4d& a, const Eigen::Matrix4d& n, TwoModeState& st) {
    st.mean = a * st.mean;
    st.cov = a * st.cov * a.transpose() + n;
}

inline PhotonStats mode_stats(const TwoModeState& st, int mode) {
    GaussianState gs;
    gs.mean = st.mean;
    gs.cov = st.cov;
    return photon_stats(gs, mode);
}

struct SteadyResult {
    Eigen::Vector2d atomic_mean;
    Eigen::Matrix2d atomic_cov;
    TwoModeState mid;  // both arms loaded, just after the forward squeezer
    double sf_mean = 0.0;
    double sf_var = 0.0;
    int loops = 0;
    double residual = 0.0;
    bool converged = false;
};

// Core driver shared by run_loop/steady_state/fringe_scan; record hook may be null.
template <typename RecordFn>
inline SteadyResult iterate_loop(const LoopConfig& cfg, RecordFn&& record) {
    cfg.validate();
    const LoopKernel kernel(cfg);
    Eigen::Vector2d atom_mean = Eigen::Vector2d::Zero();
    Eigen::Matrix2d atom_cov = Eigen::Matrix2d::Identity();
    SteadyResult out;
    for (int n = 1; n <= cfg.J_max; ++n) {
        TwoModeState st;
        st.mean << atom_mean(0), atom_mean(1), kernel.seed_d(2), kernel.seed_d(3);
        st.cov = Eigen::Matrix4d::Identity();
        st.cov.topLeftCorner<2, 2>() = atom_cov;
        affine(kernel.a1, kernel.n1, st);
        out.mid = st;
        affine(kernel.a2, kernel.n2, st);
        const PhotonStats sf = mode_stats(st, 1);
        affine(kernel.a3, kernel.n3, st);

        const Eigen::Vector2d new_mean = st.mean.head<2>();
        const Eigen::Matrix2d new_cov = st.cov.topLeftCorner<2, 2>();
        const double dm = (new_mean - atom_mean).norm() / std::max(1.0, new_mean.norm());
        const double dc = (new_cov - atom_cov).norm() / std::max(1.0, new_cov.norm());
        const double res = std::max(dm, dc);
        atom_mean = new_mean;
        atom_cov = new_cov;
        out.sf_mean = sf.mean_n;
        out.sf_var = sf.var_n;
        out.loops = n;
        out.residual = res;
        record(n, atom_mean, sf, res);
        if (res < cfg.steady_tol) {
            out.converged = true;
            break;
        }
    }
    out.atomic_mean = atom_mean;
    out.atomic_cov = atom_cov;
    return out;
}

inline SteadyResult iterate_loop(const LoopConfig& cfg) {
    return iterate_loop(cfg, [](int, const Eigen::Vector2d&, const PhotonStats&, double) {});
}

inline GaussianState atomic_state(const SteadyResult& res) {
    GaussianState st;
    st.mode_labels = {"S_a"};
    st.mean = res.atomic_mean;
    st.cov = res.atomic_cov;
    return st;
}

}  // namespace detail

// Full loop execution with a per-iteration trace. Non-convergence is a
// reported outcome here (converged = false with the last residual), not an
// exception: above-threshold gain is a physical laser-threshold regime.
inline LoopTrace run_loop(const LoopConfig& cfg) {
    LoopTrace trace;
    auto res = detail::iterate_loop(
        cfg, [&trace](int n, const Eigen::Vector2d& am, const PhotonStats& sf, double r) {
            trace.records.push_back(
                {n, std::complex<double>(am(0) / 2.0, am(1) / 2.0), sf.mean_n, sf.var_n, r});
        });
    trace.atomic = detail::atomic_state(res);
    trace.converged = res.converged;
    trace.loops_used = res.loops;
    trace.final_residual = res.residual;
    trace.sf_mean = res.sf_mean;
    trace.sf_var = res.sf_var;
    return trace;
}

// Converged atomic state or a signalled failure; never a silent truncation.
inline std::pair<GaussianState, int> steady_state(const LoopConfig& cfg) {
    if (!(cfg.gamma_a > 0.0)) throw std::invalid_argument("steady_state: gamma_a must be > 0");
    const auto res = detail::iterate_loop(cfg);
    if (!res.converged) throw NonConvergenceError(res.residual, {cfg.phi});
    return {detail::atomic_state(res), res.loops};
}

// Steady-state S_f photon mean/variance per grid phase. All failures are
// aggregated so the caller sees every offending phi at once.
inline FringeCurve fringe_scan(const LoopConfig& cfg, const std::vector<double>& phi_grid) {
    if (phi_grid.empty()) throw std::invalid_argument("fringe_scan: empty grid");
    FringeCurve curve;
    curve.provenance = Provenance::loop_engine;
    curve.phi = phi_grid;
    curve.signal.resize(phi_grid.size());
    curve.noise.resize(phi_grid.size());
    std::vector<double> failed;
    double worst_residual = 0.0;
    for (size_t i = 0; i < phi_grid.size(); ++i) {
        LoopConfig c = cfg;
        c.phi = phi_grid[i];
        const auto res = detail::iterate_loop(c);
        if (!res.converged) {
            failed.push_back(phi_grid[i]);
            worst_residual = std::max(worst_residual, res.residual);
            continue;
        }
        curve.signal[i] = res.sf_mean;
        curve.noise[i] = res.sf_var;
    }
    if (!failed.empty()) throw NonConvergenceError(worst_residual, failed);
    return curve;
}

// Probe-induced atomic phase theta_A = c_probe * I_p * tau / Delta_p.
struct AtomicPhaseProbe {
    double I_p = 0.0;
    double Delta_p = 1.0;
    double tau = 1.0;
    double c_probe = 1.0;
};

inline double atomic_phase(const AtomicPhaseProbe& probe) {
    if (probe.Delta_p == 0.0) throw std::invalid_argument("atomic_phase: zero probe detuning");
    if (probe.I_p < 0.0) throw std::invalid_argument("atomic_phase: probe power must be >= 0");
    const double theta = probe.c_probe * probe.I_p * probe.tau / probe.Delta_p;
    if (!std::isfinite(theta)) throw std::invalid_argument("atomic_phase: non-finite result");
    return theta;
}

// Phase-sensing particles per loop at the configured operating phase:
// photons in the optical arm plus atomic spins, both counted on the
// steady-state two-arm state just after the forward pass.
struct ParticleFlux {
    double atoms = 0.0;
    double photons = 0.0;
    double total() const { return atoms + photons; }
};

inline ParticleFlux particle_flux(const LoopConfig& cfg) {
    const auto res = detail::iterate_loop(cfg);
    if (!res.converged) throw NonConvergenceError(res.residual, {cfg.phi});
    ParticleFlux flux;
    flux.atoms = detail::mode_stats(res.mid, 0).mean_n;
    flux.photons = detail::mode_stats(res.mid, 1).mean_n;
    return flux;
}

}  // namespace combsim
