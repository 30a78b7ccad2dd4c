#include "gridwave/res_model.hpp"

#include <algorithm>
#include <cmath>

#include "gridwave/errors.hpp"

namespace gridwave {

using cxd = std::complex<double>;

ResCommands res_current_commands(const ResPlantRecord& r, cxd v, double p_cmd, double q_cmd,
                                 const ResCommands& last) {
    double vm2 = std::norm(v);
    if (std::sqrt(vm2) < r.v_freeze) {
        ResCommands held = last;
        held.frozen = true;
        return held;
    }

    ResCommands out{};
    // [p; q] = [[v_d, v_q], [v_q, -v_d]] [i_p; i_q], det = -|v|^2.
    out.i_p_cmd = (v.real() * p_cmd + v.imag() * q_cmd) / vm2;
    out.i_q_cmd = (v.imag() * p_cmd - v.real() * q_cmd) / vm2;

    if (r.ip_max) out.i_p_cmd = std::clamp(out.i_p_cmd, -*r.ip_max, *r.ip_max);
    double iq_raw = out.i_q_cmd;
    if (r.iq_max) out.i_q_cmd = std::min(out.i_q_cmd, *r.iq_max);
    if (r.iq_min) out.i_q_cmd = std::max(out.i_q_cmd, *r.iq_min);
    out.iq_limited = out.i_q_cmd != iq_raw;
    return out;
}

double res_q_meas(cxd v, const ResState& s) {
    return v.imag() * s.i_p - v.real() * s.i_q;
}

ResDerivs res_rhs(const ResPlantRecord& r, const ResState& s, cxd v, const ResSetpoints& sp,
                  const ResCommands& last, ResCommands* commands_out) {
    double q_err = sp.q_ref - res_q_meas(v, s);
    double q_cmd = s.q_pi + r.k_p * q_err;

    ResCommands cmd = res_current_commands(r, v, sp.p_ref, q_cmd, last);
    if (commands_out) *commands_out = cmd;

    ResDerivs d{};
    d.i_p = (cmd.i_p_cmd - s.i_p) / r.t_g;
    d.i_q = (cmd.i_q_cmd - s.i_q) / r.t_g;
    // Conditional integration: hold while the reactive path is saturated or held.
    d.q_pi = (cmd.iq_limited || cmd.frozen) ? 0.0 : r.k_i * q_err;
    return d;
}

ResInit init_res(const ResPlantRecord& r, cxd v, cxd s_inj) {
    double vm = std::abs(v);
    if (vm <= r.v_freeze)
        throw Error(ErrorCode::InitInfeasible,
                    "terminal voltage below the freeze threshold at initialization");

    ResInit out{};
    double p = s_inj.real(), q = s_inj.imag();
    double vm2 = vm * vm;
    out.state.i_p = (v.real() * p + v.imag() * q) / vm2;
    out.state.i_q = (v.imag() * p - v.real() * q) / vm2;

    if (r.ip_max && std::abs(out.state.i_p) > *r.ip_max)
        throw Error(ErrorCode::InitInfeasible, "scheduled active current exceeds ip_max");
    if ((r.iq_max && out.state.i_q > *r.iq_max) || (r.iq_min && out.state.i_q < *r.iq_min))
        throw Error(ErrorCode::InitInfeasible, "scheduled reactive current outside limits");

    out.setpoints.p_ref = p;
    out.setpoints.q_ref = q;
    out.state.q_pi = q;   // PI error is zero, the integrator carries the command

    out.commands.i_p_cmd = out.state.i_p;
    out.commands.i_q_cmd = out.state.i_q;
    return out;
}

}  // namespace gridwave
