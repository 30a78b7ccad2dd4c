#pragma once

#include <complex>

#include "gridwave/case_data.hpp"

namespace gridwave {

/// Converter current states are network-frame real/imaginary components; the
/// injected phasor is simply i_p + j i_q.
struct ResState {
    double i_p = 0.0;
    double i_q = 0.0;
    double q_pi = 0.0;   ///< reactive PI integrator output
};

struct ResSetpoints {
    double p_ref = 0.0;
    double q_ref = 0.0;
};

struct ResCommands {
    double i_p_cmd = 0.0;
    double i_q_cmd = 0.0;
    bool iq_limited = false;   ///< reactive command hit a configured limit
    bool frozen = false;       ///< low terminal voltage, commands held
};

/// Inverts the current/power relation
///   [p]   [v_d  v_q] [i_p]
///   [q] = [v_q -v_d] [i_q]
/// (determinant -|v|^2) and applies current limits. Below v_freeze the
/// previous commands are held verbatim.
ResCommands res_current_commands(const ResPlantRecord& r, std::complex<double> v,
                                 double p_cmd, double q_cmd, const ResCommands& last);

/// Reactive power actually delivered for given terminal voltage and filtered
/// currents: q = v_q i_p - v_d i_q.
double res_q_meas(std::complex<double> v, const ResState& s);

struct ResDerivs {
    double i_p, i_q, q_pi;
};

/// First-order converter lags toward the commanded currents plus the reactive
/// PI loop q_cmd = q_pi + k_p (q_ref - q_meas). The integrator freezes while
/// the reactive command is clamped (conditional integration) or commands are
/// voltage-frozen.
ResDerivs res_rhs(const ResPlantRecord& r, const ResState& s, std::complex<double> v,
                  const ResSetpoints& sp, const ResCommands& last, ResCommands* commands_out);

struct ResInit {
    ResState state;
    ResSetpoints setpoints;
    ResCommands commands;
};

/// Equilibrium from the power-flow injection s_inj at terminal voltage v.
/// Throws InitInfeasible when the required current exceeds a configured limit
/// or the voltage is below the freeze threshold.
ResInit init_res(const ResPlantRecord& r, std::complex<double> v, std::complex<double> s_inj);

}  // namespace gridwave
