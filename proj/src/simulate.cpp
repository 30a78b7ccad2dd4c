#include "gridwave/simulate.hpp"

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "gridwave/csv.hpp"
#include "gridwave/errors.hpp"

namespace gridwave {

namespace {

MachineState machine_state_at(const Eigen::VectorXd& x, int base) {
    return {x(base), x(base + 1), x(base + 2), x(base + 3), x(base + 4), x(base + 5)};
}

}  // namespace

SystemModel::SystemModel(const NetworkCase& c, const PowerFlowSolution& pf) : case_(&c) {
    omega_s_ = 2.0 * M_PI * c.scenario.freq_hz;
    machines_ = c.machines;
    res_ = c.res_plants;
    const int m = n_machines();
    const int p = n_res();

    // Pair every machine with its controller records before touching state.
    exciters_.resize(m);
    turbines_.resize(m);
    std::vector<bool> have_exc(m, false), have_tur(m, false);
    for (const auto& e : c.exciters) {
        const int k = e.machine - 1;
        if (k < 0 || k >= m || have_exc[k])
            throw Error(ErrorCode::InvalidCase,
                        "exciter table does not pair one-to-one with the machine table");
        exciters_[k] = e;
        have_exc[k] = true;
    }
    for (const auto& t : c.turbines) {
        const int k = t.machine - 1;
        if (k < 0 || k >= m || have_tur[k])
            throw Error(ErrorCode::InvalidCase,
                        "turbine table does not pair one-to-one with the machine table");
        turbines_[k] = t;
        have_tur[k] = true;
    }
    for (int k = 0; k < m; ++k)
        if (!have_exc[k] || !have_tur[k])
            throw Error(ErrorCode::InvalidCase,
                        "machine " + std::to_string(k + 1) + " lacks an exciter or turbine");

    n_states_ = m * kMachineStates + p * kResStates;
    x0_.resize(n_states_);
    u0_.resize(m + p + 1);

    for (int k = 0; k < m; ++k) {
        const int bi = c.bus_index(machines_[k].bus);
        if (bi < 0)
            throw Error(ErrorCode::DanglingReference,
                        "machine bus " + std::to_string(machines_[k].bus) + " not in bus table");
        mach_bus_pos_.push_back(bi);

        const std::complex<double> v = pf.voltage(bi);
        const std::complex<double> s_gen(pf.p_inj[bi], pf.q_inj[bi]);
        const MachineInit init = init_machine(machines_[k], exciters_[k], turbines_[k], v, s_gen,
                                              omega_s_);
        mach_sp_.push_back(init.setpoints);

        const int base = k * kMachineStates;
        x0_.segment(base, kMachineStates) << init.state.delta, init.state.omega, init.state.e_q_p,
            init.state.e_d_p, init.state.psi_1d, init.state.psi_2q, init.exciter.e_fd,
            init.exciter.r_f, init.exciter.v_r, init.turbine.t_m, init.turbine.p_sv;

        const std::string name = "G" + std::to_string(k + 1);
        device_names_.push_back(name);
        for (const char* s : {".delta", ".omega", ".e_q_p", ".e_d_p", ".psi_1d", ".psi_2q",
                              ".e_fd", ".r_f", ".v_r", ".t_m", ".p_sv"})
            state_labels_.push_back(name + s);
        input_labels_.push_back(name + ".v_ref");
        u0_(k) = init.setpoints.v_ref;
    }

    const int res_off = m * kMachineStates;
    for (int j = 0; j < p; ++j) {
        const int bi = c.bus_index(res_[j].bus);
        if (bi < 0)
            throw Error(ErrorCode::DanglingReference,
                        "RES bus " + std::to_string(res_[j].bus) + " not in bus table");
        res_bus_pos_.push_back(bi);

        const std::complex<double> v = pf.voltage(bi);
        const std::complex<double> s_inj(pf.p_inj[bi], pf.q_inj[bi]);
        const ResInit init = init_res(res_[j], v, s_inj);
        res_sp_.push_back(init.setpoints);
        res_cmd_memory_.push_back(init.commands);

        const int base = res_off + j * kResStates;
        x0_.segment(base, kResStates) << init.state.i_p, init.state.i_q, init.state.q_pi;

        const std::string name = "RES" + std::to_string(res_[j].bus);
        device_names_.push_back(name);
        for (const char* s : {".i_p", ".i_q", ".q_pi"}) state_labels_.push_back(name + s);
        input_labels_.push_back(name + ".q_ref");
        u0_(m + j) = init.setpoints.q_ref;
    }

    input_labels_.push_back("omega_s");
    u0_(m + p) = omega_s_;

    rns_ = build_reduced_networks(c, pf);
}

MixedSolution SystemModel::network_solution(const Eigen::VectorXd& x, Topology topo) const {
    const int m = n_machines();
    const int p = n_res();
    Eigen::VectorXcd e(m), ires(p);
    for (int k = 0; k < m; ++k) {
        const MachineState s = machine_state_at(x, k * kMachineStates);
        e(k) = to_network(subtransient_emf(machines_[k], s), s.delta);
    }
    const int res_off = m * kMachineStates;
    for (int j = 0; j < p; ++j)
        ires(j) = {x(res_off + j * kResStates), x(res_off + j * kResStates + 1)};
    return mixed_boundary_solve(rns_, topo, e, ires);
}

Eigen::VectorXd SystemModel::rhs(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                 Topology topo) const {
    const int m = n_machines();
    const int p = n_res();
    const MixedSolution sol = network_solution(x, topo);
    const double omega_in = u(m + p);

    Eigen::VectorXd dx(n_states_);
    for (int k = 0; k < m; ++k) {
        const int base = k * kMachineStates;
        const MachineState s = machine_state_at(x, base);
        const ExciterState es{x(base + 6), x(base + 7), x(base + 8)};
        const TurbineState ts{x(base + 9), x(base + 10)};

        const std::complex<double> i_dq = to_dq(sol.i_machine(k), s.delta);
        const double v_term = std::abs(sol.v_bus(mach_bus_pos_[k]));

        MachineDerivs md = machine_rhs(machines_[k], s, i_dq.real(), i_dq.imag(), es.e_fd, ts.t_m,
                                       omega_s_);
        // The frequency input shifts the angle reference; the acceleration
        // scaling stays at the nominal base.
        md.delta -= omega_in - omega_s_;
        const ExciterDerivs ed = exciter_rhs(exciters_[k], es, v_term, u(k));
        const TurbineDerivs td = turbine_rhs(turbines_[k], ts, s.omega, omega_in,
                                             mach_sp_[k].p_c);

        dx.segment(base, kMachineStates) << md.delta, md.omega, md.e_q_p, md.e_d_p, md.psi_1d,
            md.psi_2q, ed.e_fd, ed.r_f, ed.v_r, td.t_m, td.p_sv;
    }

    const int res_off = m * kMachineStates;
    for (int j = 0; j < p; ++j) {
        const int base = res_off + j * kResStates;
        const ResState rs{x(base), x(base + 1), x(base + 2)};
        const ResSetpoints sp{res_sp_[j].p_ref, u(m + j)};
        const ResDerivs rd = res_rhs(res_[j], rs, sol.v_res(j), sp, res_cmd_memory_[j], nullptr);
        dx.segment(base, kResStates) << rd.i_p, rd.i_q, rd.q_pi;
    }
    return dx;
}

Eigen::VectorXd SystemModel::rhs(double t, const Eigen::VectorXd& x) const {
    return rhs(x, u0_, topology_at(t));
}

Topology SystemModel::topology_at(double t) const {
    if (!rns_.has_fault) return Topology::Pre;
    const auto& sc = case_->scenario;
    if (t < sc.t_f1) return Topology::Pre;
    if (t < sc.t_f2) return Topology::Fault;
    return Topology::Post;
}

std::vector<int> SystemModel::angle_state_indices() const {
    std::vector<int> idx;
    for (int k = 0; k < n_machines(); ++k) idx.push_back(k * kMachineStates);
    return idx;
}

std::vector<std::pair<int, int>> SystemModel::res_current_state_indices() const {
    std::vector<std::pair<int, int>> idx;
    const int res_off = n_machines() * kMachineStates;
    for (int j = 0; j < n_res(); ++j) {
        const int base = res_off + j * kResStates;
        idx.emplace_back(base, base + 1);
    }
    return idx;
}

void SystemModel::update_command_memory(const Eigen::VectorXd& x, Topology topo) const {
    if (res_.empty()) return;
    const MixedSolution sol = network_solution(x, topo);
    const int res_off = n_machines() * kMachineStates;
    for (int j = 0; j < n_res(); ++j) {
        const int base = res_off + j * kResStates;
        const ResState rs{x(base), x(base + 1), x(base + 2)};
        ResCommands cmd;
        res_rhs(res_[j], rs, sol.v_res(j), res_sp_[j], res_cmd_memory_[j], &cmd);
        if (!cmd.frozen) res_cmd_memory_[j] = cmd;
    }
}

void SystemModel::enforce_limits(Eigen::VectorXd& x) const {
    for (int k = 0; k < n_machines(); ++k) {
        double& vr = x(k * kMachineStates + 8);
        vr = clamp_vr(exciters_[k], vr);
    }
}

namespace {

struct Segment {
    double t0 = 0.0;
    double t1 = 0.0;
    Topology topo = Topology::Pre;
};

int steps_for(double span, double dt) {
    // Ceil with a tolerance so span = n * dt does not spill into n + 1 steps.
    return std::max(1, static_cast<int>(std::ceil(span / dt - 1e-9)));
}

}  // namespace

SimulationResult run_simulation(const SystemModel& model, const ScenarioConfig& sc,
                                const SimulateOptions& opt) {
    if (sc.dt <= 0.0 || sc.t_end <= 0.0)
        throw Error(ErrorCode::InvalidCase, "simulation needs positive dt and t_end");

    const Eigen::VectorXd u0 = model.nominal_inputs();
    Eigen::VectorXd x = model.initial_state();

    const Eigen::VectorXd d0 = model.rhs(x, u0, Topology::Pre);
    const double r0 = d0.size() > 0 ? d0.lpNorm<Eigen::Infinity>() : 0.0;
    if (r0 > opt.init_residual_tol)
        throw Error(ErrorCode::InitResidualTooLarge,
                    "initial derivative norm " + csv::format_double(r0) + " exceeds " +
                        csv::format_double(opt.init_residual_tol));

    const bool faulted = sc.fault_bus.has_value() && model.networks().has_fault &&
                         sc.t_f2 > sc.t_f1 && sc.t_f1 < sc.t_end;
    std::vector<Segment> segs;
    if (faulted) {
        const double t_clear = std::min(sc.t_f2, sc.t_end);
        if (sc.t_f1 > 0.0) segs.push_back({0.0, sc.t_f1, Topology::Pre});
        segs.push_back({sc.t_f1, t_clear, Topology::Fault});
        if (t_clear < sc.t_end) segs.push_back({t_clear, sc.t_end, Topology::Post});
    } else {
        segs.push_back({0.0, sc.t_end, Topology::Pre});
    }

    int total = 1;
    for (const auto& seg : segs) total += steps_for(seg.t1 - seg.t0, sc.dt);

    const NetworkCase& c = model.network_case();
    const int n_bus = static_cast<int>(c.buses.size());
    const int m = model.n_machines();

    SimulationResult out;
    out.t.reserve(total);
    out.states.resize(total, model.n_states());
    out.bus_v_mag.resize(total, n_bus);
    out.bus_freq.resize(total, m);
    out.state_labels = model.state_labels();
    for (const auto& b : c.buses) out.bus_ids.push_back(b.id);
    for (int k = 0; k < m; ++k) out.freq_labels.push_back(model.device_names()[k]);

    auto record = [&](int row, double t, Topology topo) {
        out.t.push_back(t);
        out.states.row(row) = x.transpose();
        const MixedSolution sol = model.network_solution(x, topo);
        for (int i = 0; i < n_bus; ++i) out.bus_v_mag(row, i) = std::abs(sol.v_bus(i));
        for (int k = 0; k < m; ++k)
            out.bus_freq(row, k) = x(k * kMachineStates + 1) / (2.0 * M_PI);
    };

    int row = 0;
    record(row++, 0.0, segs.front().topo);

    for (const auto& seg : segs) {
        if (faulted && seg.topo == Topology::Fault)
            out.events.push_back({seg.t0, "fault applied at bus " +
                                              std::to_string(*sc.fault_bus)});
        if (faulted && seg.topo == Topology::Post)
            out.events.push_back({seg.t0, "fault cleared at bus " +
                                              std::to_string(*sc.fault_bus)});

        const int n = steps_for(seg.t1 - seg.t0, sc.dt);
        const double h = (seg.t1 - seg.t0) / n;
        for (int i = 0; i < n; ++i) {
            const double t = seg.t0 + i * h;
            const Eigen::VectorXd k1 = model.rhs(x, u0, seg.topo);
            const Eigen::VectorXd k2 = model.rhs(x + 0.5 * h * k1, u0, seg.topo);
            const Eigen::VectorXd k3 = model.rhs(x + 0.5 * h * k2, u0, seg.topo);
            const Eigen::VectorXd k4 = model.rhs(x + h * k3, u0, seg.topo);
            x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            model.enforce_limits(x);

            if (x.size() > 0 && (!x.allFinite() || x.cwiseAbs().maxCoeff() > opt.blowup_limit))
                throw Error(ErrorCode::NumericalBlowup,
                            "state left [-" + csv::format_double(opt.blowup_limit) + ", " +
                                csv::format_double(opt.blowup_limit) + "] at t = " +
                                csv::format_double(t + h));

            model.update_command_memory(x, seg.topo);
            record(row++, t + h, seg.topo);
        }
    }

    return out;
}

}  // namespace gridwave
