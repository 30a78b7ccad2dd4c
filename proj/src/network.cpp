#include "gridwave/network.hpp"

#include <cmath>
#include <set>

#include "gridwave/errors.hpp"

namespace gridwave {

using cxd = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

std::string to_string(const NodeTag& tag) {
    if (tag.kind == NodeTag::Kind::Bus) return "bus:" + std::to_string(tag.id);
    return "gen:" + std::to_string(tag.id);
}

int AdmittanceMatrix::find(const NodeTag& tag) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i] == tag) return static_cast<int>(i);
    return -1;
}

AdmittanceMatrix build_ybus(const NetworkCase& c) {
    const int n = static_cast<int>(c.buses.size());
    AdmittanceMatrix y;
    y.y = MatrixXcd::Zero(n, n);
    y.nodes.reserve(n);
    for (const auto& b : c.buses) y.nodes.push_back({NodeTag::Kind::Bus, b.id});

    for (const auto& br : c.branches) {
        if (!br.in_service) continue;
        if (br.r == 0.0 && br.x == 0.0)
            throw Error(ErrorCode::SingularBranch, "branch " + std::to_string(br.from) + "-" +
                                                       std::to_string(br.to) + " has r = x = 0");
        int f = c.bus_index(br.from);
        int t = c.bus_index(br.to);
        if (f < 0 || t < 0)
            throw Error(ErrorCode::UnknownBus, "branch endpoint not in bus table");

        cxd ys = 1.0 / cxd(br.r, br.x);
        cxd ysh(0.0, br.b / 2.0);
        double ratio = br.tap == 0.0 ? 1.0 : br.tap;
        cxd tap = std::polar(ratio, br.shift_deg * M_PI / 180.0);

        y.y(f, f) += (ys + ysh) / (ratio * ratio);
        y.y(t, t) += ys + ysh;
        y.y(f, t) += -ys / std::conj(tap);
        y.y(t, f) += -ys / tap;
    }

    for (int i = 0; i < n; ++i) y.y(i, i) += cxd(c.buses[i].g_shunt, c.buses[i].b_shunt);

    return y;
}

AdmittanceMatrix absorb_loads(const AdmittanceMatrix& y, const NetworkCase& c,
                              const PowerFlowSolution& pf) {
    AdmittanceMatrix out = y;
    std::set<int> device_buses;
    for (const auto& m : c.machines) device_buses.insert(m.bus);
    for (const auto& r : c.res_plants) device_buses.insert(r.bus);

    for (std::size_t i = 0; i < c.buses.size(); ++i) {
        const auto& b = c.buses[i];
        if (device_buses.count(b.id)) continue;
        if (b.p_load == 0.0 && b.q_load == 0.0) continue;
        double vm = pf.v_mag[i];
        if (vm < 1e-6)
            throw Error(ErrorCode::ZeroVoltageBus,
                        "cannot absorb load at bus " + std::to_string(b.id) +
                            " with |V| = " + std::to_string(vm));
        int row = out.find({NodeTag::Kind::Bus, b.id});
        out.y(row, row) += cxd(b.p_load, -b.q_load) / (vm * vm);
    }
    return out;
}

AdmittanceMatrix extend_machine_nodes(const AdmittanceMatrix& y, const NetworkCase& c) {
    const int n = y.size();
    const int m = static_cast<int>(c.machines.size());
    AdmittanceMatrix out;
    out.y = MatrixXcd::Zero(n + m, n + m);
    out.y.topLeftCorner(n, n) = y.y;
    out.nodes = y.nodes;

    for (int k = 0; k < m; ++k) {
        const auto& mach = c.machines[k];
        int bus_row = y.find({NodeTag::Kind::Bus, mach.bus});
        if (bus_row < 0)
            throw Error(ErrorCode::UnknownBus,
                        "machine " + std::to_string(k + 1) + " references bus " +
                            std::to_string(mach.bus));
        cxd y_g = 1.0 / cxd(mach.r_s, mach.x_d_pp);
        int g = n + k;
        out.y(g, g) += y_g;
        out.y(bus_row, bus_row) += y_g;
        out.y(g, bus_row) -= y_g;
        out.y(bus_row, g) -= y_g;
        out.nodes.push_back({NodeTag::Kind::MachineInternal, k + 1});
    }
    return out;
}

AdmittanceMatrix apply_fault(const AdmittanceMatrix& y, int bus, cxd y_fault) {
    AdmittanceMatrix out = y;
    int row = out.find({NodeTag::Kind::Bus, bus});
    if (row < 0) throw Error(ErrorCode::UnknownBus, "fault bus " + std::to_string(bus));
    out.y(row, row) += y_fault;
    return out;
}

KronReduction kron_reduce(const AdmittanceMatrix& y, const std::vector<int>& retained) {
    const int n = y.size();
    const int r = static_cast<int>(retained.size());

    std::vector<bool> keep(n, false);
    for (int idx : retained) {
        if (idx < 0 || idx >= n)
            throw Error(ErrorCode::UnknownBus, "retained index out of range");
        keep[idx] = true;
    }
    KronReduction out;
    out.retained = retained;
    for (int i = 0; i < n; ++i)
        if (!keep[i]) out.interior.push_back(i);
    const int e = static_cast<int>(out.interior.size());

    MatrixXcd y11(r, r), y12(r, e), y21(e, r), y22(e, e);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) y11(i, j) = y.y(retained[i], retained[j]);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < e; ++j) y12(i, j) = y.y(retained[i], out.interior[j]);
    for (int i = 0; i < e; ++i)
        for (int j = 0; j < r; ++j) y21(i, j) = y.y(out.interior[i], retained[j]);
    for (int i = 0; i < e; ++i)
        for (int j = 0; j < e; ++j) y22(i, j) = y.y(out.interior[i], out.interior[j]);

    if (e == 0) {
        out.y_red = y11;
        out.recovery = MatrixXcd::Zero(0, r);
        return out;
    }

    Eigen::FullPivLU<MatrixXcd> lu(y22);
    if (!lu.isInvertible())
        throw Error(ErrorCode::SingularInterior, "interior admittance block is singular");

    // V_interior = -Y22^-1 Y21 V_retained while interior injections are zero.
    out.recovery = -lu.solve(y21);
    out.y_red = y11 + y12 * out.recovery;
    return out;
}

namespace {

ReducedTopology make_topology(const AdmittanceMatrix& y, const std::vector<int>& retained,
                              int n_machines, int n_res) {
    KronReduction kr = kron_reduce(y, retained);
    ReducedTopology t;
    t.y_red = std::move(kr.y_red);
    t.recovery = std::move(kr.recovery);
    t.gg = t.y_red.topLeftCorner(n_machines, n_machines);
    t.gr = t.y_red.topRightCorner(n_machines, n_res);
    t.rg = t.y_red.bottomLeftCorner(n_res, n_machines);
    if (n_res > 0) {
        t.rr_lu.compute(t.y_red.bottomRightCorner(n_res, n_res));
        t.rr_invertible = t.rr_lu.isInvertible();
    }
    return t;
}

}  // namespace

ReducedNetworkSet build_reduced_networks(const NetworkCase& c, const PowerFlowSolution& pf) {
    AdmittanceMatrix base = extend_machine_nodes(absorb_loads(build_ybus(c), c, pf), c);

    ReducedNetworkSet rns;
    rns.n_machines = static_cast<int>(c.machines.size());
    rns.n_res = static_cast<int>(c.res_plants.size());

    // Retained: machine internal nodes first, then RES buses.
    std::vector<int> retained;
    for (int k = 0; k < rns.n_machines; ++k) {
        int idx = base.find({NodeTag::Kind::MachineInternal, k + 1});
        retained.push_back(idx);
        rns.retained_tags.push_back(base.nodes[idx]);
    }
    for (const auto& r : c.res_plants) {
        int idx = base.find({NodeTag::Kind::Bus, r.bus});
        retained.push_back(idx);
        rns.retained_tags.push_back(base.nodes[idx]);
    }

    rns.pre = make_topology(base, retained, rns.n_machines, rns.n_res);
    if (c.scenario.fault_bus) {
        AdmittanceMatrix faulted =
            apply_fault(base, *c.scenario.fault_bus, cxd(c.scenario.fault_admittance, 0.0));
        rns.fault = make_topology(faulted, retained, rns.n_machines, rns.n_res);
        rns.has_fault = true;
    }
    // No switching at clearing: the post-fault network is the pre-fault one.
    rns.post = rns.pre;

    // Bus voltage lookup: RES buses are retained, everything else is interior.
    // Interior ordering matches kron_reduce (ascending non-retained indices).
    std::vector<bool> keep(base.size(), false);
    for (int idx : retained) keep[idx] = true;
    std::vector<int> interior_pos(base.size(), -1);
    int pos = 0;
    for (int i = 0; i < base.size(); ++i)
        if (!keep[i]) interior_pos[i] = pos++;

    rns.bus_lookup.resize(c.buses.size());
    for (std::size_t i = 0; i < c.buses.size(); ++i) {
        int row = base.find({NodeTag::Kind::Bus, c.buses[i].id});
        bool is_res = false;
        int res_idx = -1;
        for (std::size_t k = 0; k < c.res_plants.size(); ++k)
            if (c.res_plants[k].bus == c.buses[i].id) {
                is_res = true;
                res_idx = static_cast<int>(k);
            }
        rns.bus_lookup[i] = is_res ? std::make_pair(true, res_idx)
                                   : std::make_pair(false, interior_pos[row]);
    }
    return rns;
}

const ReducedTopology& select_topology(const ReducedNetworkSet& rns, Topology topo) {
    switch (topo) {
        case Topology::Pre: return rns.pre;
        case Topology::Fault: return rns.has_fault ? rns.fault : rns.pre;
        case Topology::Post: return rns.post;
    }
    return rns.pre;
}

MixedSolution mixed_boundary_solve(const ReducedNetworkSet& rns, Topology topo,
                                   const VectorXcd& e_machine, const VectorXcd& i_res) {
    const ReducedTopology& t = select_topology(rns, topo);
    MixedSolution sol;

    if (rns.n_res > 0) {
        if (!t.rr_invertible)
            throw Error(ErrorCode::SingularResBlock, "RES bus admittance block is singular");
        sol.v_res = t.rr_lu.solve(i_res - t.rg * e_machine);
    } else {
        sol.v_res = VectorXcd::Zero(0);
    }
    sol.i_machine = t.gg * e_machine + t.gr * sol.v_res;

    VectorXcd v_retained(rns.n_machines + rns.n_res);
    v_retained.head(rns.n_machines) = e_machine;
    v_retained.tail(rns.n_res) = sol.v_res;
    VectorXcd v_interior = t.recovery * v_retained;

    sol.v_bus.resize(rns.bus_lookup.size());
    for (std::size_t i = 0; i < rns.bus_lookup.size(); ++i) {
        auto [is_res, idx] = rns.bus_lookup[i];
        sol.v_bus[i] = is_res ? sol.v_res[idx] : v_interior[idx];
    }
    return sol;
}

}  // namespace gridwave
