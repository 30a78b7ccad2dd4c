#pragma once

#include <complex>

#include "gridwave/case_data.hpp"

namespace gridwave {

struct MachineState {
    double delta = 0.0;   ///< rotor angle, rad
    double omega = 0.0;   ///< rotor speed, rad/s
    double e_q_p = 0.0;
    double e_d_p = 0.0;
    double psi_1d = 0.0;
    double psi_2q = 0.0;
};

struct ExciterState {
    double e_fd = 0.0;
    double r_f = 0.0;
    double v_r = 0.0;
};

struct TurbineState {
    double t_m = 0.0;
    double p_sv = 0.0;
};

/// Constant references established at initialization.
struct MachineSetpoints {
    double v_ref = 0.0;   ///< exciter voltage reference, pu
    double p_c = 0.0;     ///< governor power order, pu
};

/// Rotates a machine-frame (d + jq) quantity into the synchronous network
/// frame. A pure q-axis EMF lands at angle delta.
inline std::complex<double> to_network(std::complex<double> dq, double delta) {
    return dq * std::polar(1.0, delta - M_PI / 2.0);
}

inline std::complex<double> to_dq(std::complex<double> net, double delta) {
    return net * std::polar(1.0, -(delta - M_PI / 2.0));
}

/// EMF behind the subtransient reactance, interpolated between the transient
/// EMF and the damper flux: on the d axis
///   e_q_pp = c1 e_q_p + c2 psi_1d, c1 = (x_d_pp - x_ls)/(x_d_p - x_ls),
/// with c1 + c2 = 1; the q axis mirrors it with the damper flux entering
/// negatively. Returned as e_d_pp + j e_q_pp.
std::complex<double> subtransient_emf(const MachineRecord& m, const MachineState& s);

/// Air-gap electrical torque including the subtransient saliency term.
double electrical_torque(const MachineRecord& m, const MachineState& s, double i_d, double i_q);

struct MachineDerivs {
    double delta, omega, e_q_p, e_d_p, psi_1d, psi_2q;
};

/// Two-axis flux-decay dynamics plus the swing equation. Currents are the
/// machine dq stator currents (generator convention), omega_s the synchronous
/// speed in rad/s.
MachineDerivs machine_rhs(const MachineRecord& m, const MachineState& s, double i_d, double i_q,
                          double e_fd, double t_m, double omega_s);

struct ExciterDerivs {
    double e_fd, r_f, v_r;
};

/// IEEE Type I regulator/exciter/stabilizer chain driven by the terminal
/// voltage magnitude. When the regulator output is at a configured limit and
/// the update pushes outward, the v_r derivative is zeroed (anti-windup).
ExciterDerivs exciter_rhs(const ExciterRecord& e, const ExciterState& s, double v_terminal,
                          double v_ref);

/// Regulator output clamped to the configured range (identity when absent).
double clamp_vr(const ExciterRecord& e, double v_r);

struct TurbineDerivs {
    double t_m, p_sv;
};

/// Steam chest lag plus governor valve dynamics with droop on per-unit speed
/// deviation.
TurbineDerivs turbine_rhs(const TurbineRecord& t, const TurbineState& s, double omega,
                          double omega_s, double p_c);

struct MachineInit {
    MachineState state;
    ExciterState exciter;
    TurbineState turbine;
    MachineSetpoints setpoints;
    double i_d = 0.0;
    double i_q = 0.0;
};

/// Steady-state initialization from the power-flow operating point: rotor
/// angle from the q-axis phasor construction, flux states from zeroed
/// derivatives, references chosen to hold the point. s_gen is the machine's
/// net injection at its bus. Throws NonPhysicalInit when the data cannot
/// support the point (zero terminal voltage, regulator limit violated).
MachineInit init_machine(const MachineRecord& m, const ExciterRecord& e, const TurbineRecord& t,
                         std::complex<double> v_terminal, std::complex<double> s_gen,
                         double omega_s);

}  // namespace gridwave
