#include "gridwave/powerflow.hpp"

#include <cmath>

#include "gridwave/errors.hpp"
#include "gridwave/network.hpp"

namespace gridwave {

using Eigen::MatrixXd;
using Eigen::VectorXd;

PowerFlowSolution solve_powerflow(const NetworkCase& c, const PowerFlowOptions& opt) {
    const int n = static_cast<int>(c.buses.size());
    AdmittanceMatrix ybus = build_ybus(c);
    const Eigen::MatrixXcd& y = ybus.y;

    // Unknown ordering: angles at every non-slack bus, then magnitudes at pq buses.
    std::vector<int> ang_idx, mag_idx;
    for (int i = 0; i < n; ++i) {
        if (c.buses[i].kind != BusKind::Slack) ang_idx.push_back(i);
        if (c.buses[i].kind == BusKind::Pq) mag_idx.push_back(i);
    }
    const int na = static_cast<int>(ang_idx.size());
    const int nm = static_cast<int>(mag_idx.size());

    VectorXd vm(n), va(n);
    for (int i = 0; i < n; ++i) {
        const auto& b = c.buses[i];
        vm[i] = (b.kind == BusKind::Pq) ? 1.0 : b.v_set;   // flat start
        va[i] = (b.kind == BusKind::Slack) ? b.theta_deg * M_PI / 180.0 : 0.0;
    }

    VectorXd p_spec(n), q_spec(n);
    for (int i = 0; i < n; ++i) {
        p_spec[i] = -c.buses[i].p_load;   // negative load encodes generation
        q_spec[i] = -c.buses[i].q_load;
    }

    auto injections = [&](VectorXd& p, VectorXd& q) {
        for (int i = 0; i < n; ++i) {
            std::complex<double> s(0.0, 0.0);
            std::complex<double> vi = std::polar(vm[i], va[i]);
            std::complex<double> acc(0.0, 0.0);
            for (int k = 0; k < n; ++k) acc += y(i, k) * std::polar(vm[k], va[k]);
            s = vi * std::conj(acc);
            p[i] = s.real();
            q[i] = s.imag();
        }
    };

    auto mismatch_norm = [&]() {
        VectorXd pt(n), qt(n);
        injections(pt, qt);
        double worst = 0.0;
        for (int i : ang_idx) worst = std::max(worst, std::abs(p_spec[i] - pt[i]));
        for (int i : mag_idx) worst = std::max(worst, std::abs(q_spec[i] - qt[i]));
        return worst;
    };

    PowerFlowSolution sol;
    VectorXd p(n), q(n);
    for (int iter = 0; iter <= opt.max_iter; ++iter) {
        injections(p, q);

        VectorXd mis(na + nm);
        for (int a = 0; a < na; ++a) mis[a] = p_spec[ang_idx[a]] - p[ang_idx[a]];
        for (int m = 0; m < nm; ++m) mis[na + m] = q_spec[mag_idx[m]] - q[mag_idx[m]];

        double norm = mis.size() ? mis.cwiseAbs().maxCoeff() : 0.0;
        sol.iterations = iter;
        sol.max_mismatch = norm;
        if (norm < opt.tol) break;
        if (iter == opt.max_iter)
            throw Error(ErrorCode::Diverged,
                        "power flow not converged after " + std::to_string(opt.max_iter) +
                            " iterations (mismatch " + std::to_string(norm) + ")");

        // Polar-form Jacobian: dP/dtheta, dP/dV, dQ/dtheta, dQ/dV.
        MatrixXd jac(na + nm, na + nm);
        auto g = [&](int i, int k) { return y(i, k).real(); };
        auto b = [&](int i, int k) { return y(i, k).imag(); };
        for (int a = 0; a < na; ++a) {
            int i = ang_idx[a];
            for (int a2 = 0; a2 < na; ++a2) {
                int k = ang_idx[a2];
                double v;
                if (i == k) {
                    v = -q[i] - b(i, i) * vm[i] * vm[i];
                } else {
                    double th = va[i] - va[k];
                    v = vm[i] * vm[k] * (g(i, k) * std::sin(th) - b(i, k) * std::cos(th));
                }
                jac(a, a2) = v;
            }
            for (int m2 = 0; m2 < nm; ++m2) {
                int k = mag_idx[m2];
                double v;
                if (i == k) {
                    v = p[i] / vm[i] + g(i, i) * vm[i];
                } else {
                    double th = va[i] - va[k];
                    v = vm[i] * (g(i, k) * std::cos(th) + b(i, k) * std::sin(th));
                }
                jac(a, na + m2) = v;
            }
        }
        for (int m = 0; m < nm; ++m) {
            int i = mag_idx[m];
            for (int a2 = 0; a2 < na; ++a2) {
                int k = ang_idx[a2];
                double v;
                if (i == k) {
                    v = p[i] - g(i, i) * vm[i] * vm[i];
                } else {
                    double th = va[i] - va[k];
                    v = -vm[i] * vm[k] * (g(i, k) * std::cos(th) + b(i, k) * std::sin(th));
                }
                jac(na + m, a2) = v;
            }
            for (int m2 = 0; m2 < nm; ++m2) {
                int k = mag_idx[m2];
                double v;
                if (i == k) {
                    v = q[i] / vm[i] - b(i, i) * vm[i];
                } else {
                    double th = va[i] - va[k];
                    v = vm[i] * (g(i, k) * std::sin(th) - b(i, k) * std::cos(th));
                }
                jac(na + m, na + m2) = v;
            }
        }

        Eigen::FullPivLU<MatrixXd> lu(jac);
        if (!lu.isInvertible())
            throw Error(ErrorCode::SingularJacobian,
                        "power-flow Jacobian singular at iteration " + std::to_string(iter));
        VectorXd dx = lu.solve(mis);

        // Backtrack when the full Newton step overshoots (large phase shifts
        // or heavy loading far from the flat start); near the solution the
        // first trial always wins and quadratic convergence is untouched.
        VectorXd va_base = va, vm_base = vm;
        double alpha = 1.0;
        for (int cut = 0; cut < 8; ++cut, alpha *= 0.5) {
            for (int a = 0; a < na; ++a) va[ang_idx[a]] = va_base[ang_idx[a]] + alpha * dx[a];
            bool positive = true;
            for (int m = 0; m < nm; ++m) {
                vm[mag_idx[m]] = vm_base[mag_idx[m]] + alpha * dx[na + m];
                if (vm[mag_idx[m]] <= 0.0) positive = false;
            }
            if (positive && mismatch_norm() < norm) break;
        }
    }

    sol.v_mag.assign(vm.data(), vm.data() + n);
    sol.v_ang.assign(va.data(), va.data() + n);
    compute_injections(c, sol);
    return sol;
}

void compute_injections(const NetworkCase& c, PowerFlowSolution& sol) {
    const int n = static_cast<int>(c.buses.size());
    AdmittanceMatrix ybus = build_ybus(c);
    sol.p_inj.resize(n);
    sol.q_inj.resize(n);
    for (int i = 0; i < n; ++i) {
        std::complex<double> acc(0.0, 0.0);
        for (int k = 0; k < n; ++k) acc += ybus.y(i, k) * sol.voltage(k);
        std::complex<double> s = sol.voltage(i) * std::conj(acc);
        sol.p_inj[i] = s.real();
        sol.q_inj[i] = s.imag();
    }
}

}  // namespace gridwave
