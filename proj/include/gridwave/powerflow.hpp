#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "gridwave/case_data.hpp"

namespace gridwave {

struct PowerFlowSolution {
    std::vector<double> v_mag;    ///< pu, case bus order
    std::vector<double> v_ang;    ///< radians
    std::vector<double> p_inj;    ///< net injection, pu
    std::vector<double> q_inj;
    int iterations = 0;
    double max_mismatch = 0.0;

    std::complex<double> voltage(int idx) const {
        return std::polar(v_mag[idx], v_ang[idx]);
    }
};

struct PowerFlowOptions {
    double tol = 1e-8;     ///< infinity norm of the mismatch vector
    int max_iter = 20;
};

/// Full-Jacobian Newton-Raphson in polar coordinates from a flat start.
/// Scheduled injections come from the bus table (negative load = generation);
/// pv magnitudes stay pinned, no pv/pq switching. Throws Diverged or
/// SingularJacobian.
PowerFlowSolution solve_powerflow(const NetworkCase& c, const PowerFlowOptions& opt = {});

/// S_i = V_i * conj(sum_k Y_ik V_k) for every bus of a solved case.
void compute_injections(const NetworkCase& c, PowerFlowSolution& sol);

}  // namespace gridwave
