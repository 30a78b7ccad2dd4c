#include "gridwave/machine_model.hpp"

#include <cmath>

#include "gridwave/errors.hpp"

namespace gridwave {

using cxd = std::complex<double>;

std::complex<double> subtransient_emf(const MachineRecord& m, const MachineState& s) {
    double c1d = (m.x_d_pp - m.x_ls) / (m.x_d_p - m.x_ls);
    double c2d = (m.x_d_p - m.x_d_pp) / (m.x_d_p - m.x_ls);
    double e_q_pp = c1d * s.e_q_p + c2d * s.psi_1d;

    double c1q = (m.x_q_pp - m.x_ls) / (m.x_q_p - m.x_ls);
    double c2q = (m.x_q_p - m.x_q_pp) / (m.x_q_p - m.x_ls);
    double e_d_pp = c1q * s.e_d_p - c2q * s.psi_2q;

    return {e_d_pp, e_q_pp};
}

double electrical_torque(const MachineRecord& m, const MachineState& s, double i_d, double i_q) {
    cxd e_pp = subtransient_emf(m, s);
    return e_pp.real() * i_d + e_pp.imag() * i_q + (m.x_q_pp - m.x_d_pp) * i_d * i_q;
}

MachineDerivs machine_rhs(const MachineRecord& m, const MachineState& s, double i_d, double i_q,
                          double e_fd, double t_m, double omega_s) {
    MachineDerivs d{};

    double kd = (m.x_d_p - m.x_d_pp) / ((m.x_d_p - m.x_ls) * (m.x_d_p - m.x_ls));
    double kq = (m.x_q_p - m.x_q_pp) / ((m.x_q_p - m.x_ls) * (m.x_q_p - m.x_ls));

    d.e_q_p = (-s.e_q_p -
               (m.x_d - m.x_d_p) *
                   (i_d - kd * (s.psi_1d + (m.x_d_p - m.x_ls) * i_d - s.e_q_p)) +
               e_fd) /
              m.t_do_p;

    d.psi_1d = (-s.psi_1d + s.e_q_p - (m.x_d_p - m.x_ls) * i_d) / m.t_do_pp;

    d.e_d_p = (-s.e_d_p +
               (m.x_q - m.x_q_p) *
                   (i_q - kq * (s.psi_2q + (m.x_q_p - m.x_ls) * i_q + s.e_d_p))) /
              m.t_qo_p;

    d.psi_2q = (-s.psi_2q - s.e_d_p - (m.x_q_p - m.x_ls) * i_q) / m.t_qo_pp;

    d.delta = s.omega - omega_s;
    d.omega = omega_s / (2.0 * m.h) * (t_m - electrical_torque(m, s, i_d, i_q) - m.t_fw);
    return d;
}

ExciterDerivs exciter_rhs(const ExciterRecord& e, const ExciterState& s, double v_terminal,
                          double v_ref) {
    ExciterDerivs d{};
    double se = e.sat_a * std::exp(e.sat_b * s.e_fd);
    double v_r = clamp_vr(e, s.v_r);

    d.e_fd = (-(e.k_e + se) * s.e_fd + v_r) / e.t_e;
    d.r_f = (-s.r_f + (e.k_f / e.t_f) * s.e_fd) / e.t_f;
    d.v_r = (-v_r + e.k_a * s.r_f - (e.k_a * e.k_f / e.t_f) * s.e_fd +
             e.k_a * (v_ref - v_terminal)) /
            e.t_a;

    // Anti-windup: at a limit the regulator only moves back toward the band.
    if (e.vr_max && v_r >= *e.vr_max && d.v_r > 0.0) d.v_r = 0.0;
    if (e.vr_min && v_r <= *e.vr_min && d.v_r < 0.0) d.v_r = 0.0;
    return d;
}

double clamp_vr(const ExciterRecord& e, double v_r) {
    if (e.vr_max && v_r > *e.vr_max) return *e.vr_max;
    if (e.vr_min && v_r < *e.vr_min) return *e.vr_min;
    return v_r;
}

TurbineDerivs turbine_rhs(const TurbineRecord& t, const TurbineState& s, double omega,
                          double omega_s, double p_c) {
    TurbineDerivs d{};
    d.t_m = (-s.t_m + s.p_sv) / t.t_ch;
    d.p_sv = (-s.p_sv + p_c - (1.0 / t.r_d) * (omega / omega_s - 1.0)) / t.t_sv;
    return d;
}

MachineInit init_machine(const MachineRecord& m, const ExciterRecord& e, const TurbineRecord& t,
                         cxd v_terminal, cxd s_gen, double omega_s) {
    if (std::abs(v_terminal) < 1e-6)
        throw Error(ErrorCode::NonPhysicalInit, "machine terminal voltage is zero");

    MachineInit out{};
    cxd i_gen = std::conj(s_gen / v_terminal);

    // Rotor angle from the q-axis phasor construction. The interface stamps
    // x_d_pp on both axes, so the effective q-axis reactance seen from the
    // network is x_q - x_q_pp + x_d_pp (plain x_q when the subtransient
    // reactances match); using it keeps the initialization an exact
    // equilibrium of the interfaced model.
    double x_q_eff = m.x_q - m.x_q_pp + m.x_d_pp;
    cxd e_phasor = v_terminal + cxd(m.r_s, x_q_eff) * i_gen;
    double delta = std::arg(e_phasor);

    cxd i_dq = to_dq(i_gen, delta);
    cxd v_dq = to_dq(v_terminal, delta);
    double i_d = i_dq.real(), i_q = i_dq.imag();
    double v_d = v_dq.real(), v_q = v_dq.imag();

    MachineState& s = out.state;
    s.delta = delta;
    s.omega = omega_s;
    s.e_q_p = v_q + m.r_s * i_q + m.x_d_p * i_d;
    s.e_d_p = (m.x_q - m.x_q_p) * i_q;
    s.psi_1d = s.e_q_p - (m.x_d_p - m.x_ls) * i_d;
    s.psi_2q = -s.e_d_p - (m.x_q_p - m.x_ls) * i_q;

    double e_fd = s.e_q_p + (m.x_d - m.x_d_p) * i_d;
    if (e_fd <= 0.0)
        throw Error(ErrorCode::NonPhysicalInit, "field voltage not positive at the operating point");

    double se = e.sat_a * std::exp(e.sat_b * e_fd);
    ExciterState& ex = out.exciter;
    ex.e_fd = e_fd;
    ex.v_r = (e.k_e + se) * e_fd;
    ex.r_f = (e.k_f / e.t_f) * e_fd;
    if ((e.vr_max && ex.v_r > *e.vr_max) || (e.vr_min && ex.v_r < *e.vr_min))
        throw Error(ErrorCode::NonPhysicalInit,
                    "operating point needs regulator output outside its limits");
    out.setpoints.v_ref = std::abs(v_terminal) + ex.v_r / e.k_a;

    double t_e = electrical_torque(m, s, i_d, i_q);
    TurbineState& tb = out.turbine;
    tb.t_m = t_e + m.t_fw;
    tb.p_sv = tb.t_m;
    out.setpoints.p_c = tb.p_sv;   // omega = omega_s, droop term vanishes

    out.i_d = i_d;
    out.i_q = i_q;
    return out;
}

}  // namespace gridwave
