#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridwave/case_data.hpp"
#include "gridwave/powerflow.hpp"

namespace gridwave {

/// Identity of one admittance-matrix node: either an original bus or the
/// internal EMF node added behind a machine's stator impedance.
struct NodeTag {
    enum class Kind { Bus, MachineInternal };
    Kind kind = Kind::Bus;
    int id = 0;  ///< bus id, or 1-based machine index for internal nodes

    bool operator==(const NodeTag&) const = default;
};

std::string to_string(const NodeTag& tag);

/// Square complex nodal admittance matrix with node identities attached.
struct AdmittanceMatrix {
    Eigen::MatrixXcd y;
    std::vector<NodeTag> nodes;

    int size() const { return static_cast<int>(y.rows()); }
    int find(const NodeTag& tag) const;
};

/// Bus admittance matrix from branch and shunt data. Out-of-service branches
/// are skipped; r = x = 0 raises SingularBranch.
AdmittanceMatrix build_ybus(const NetworkCase& c);

/// Folds constant-impedance loads into the diagonal using the solved bus
/// voltages: y_load = (p - jq) / |V|^2. Buses hosting a machine or RES plant
/// are skipped because their scheduled injection belongs to the device model.
AdmittanceMatrix absorb_loads(const AdmittanceMatrix& y, const NetworkCase& c,
                              const PowerFlowSolution& pf);

/// Adds one internal node per machine behind y_g = 1 / (r_s + j x_d_pp),
/// in machine-table order after the existing nodes.
AdmittanceMatrix extend_machine_nodes(const AdmittanceMatrix& y, const NetworkCase& c);

/// Adds a (mostly resistive) fault admittance to the diagonal of `bus`.
AdmittanceMatrix apply_fault(const AdmittanceMatrix& y, int bus, std::complex<double> y_fault);

/// Kron reduction onto `retained` (row indices of y). `recovery` maps
/// retained-node voltages to the eliminated interior voltages, valid while
/// interior injections stay zero.
struct KronReduction {
    Eigen::MatrixXcd y_red;      ///< r x r
    Eigen::MatrixXcd recovery;   ///< (n-r) x r, V_interior = recovery * V_retained
    std::vector<int> retained;   ///< original row indices, in output order
    std::vector<int> interior;
};

KronReduction kron_reduce(const AdmittanceMatrix& y, const std::vector<int>& retained);

/// One reduced operating topology, partitioned for the mixed boundary solve:
/// machine internal nodes are voltage sources, RES buses are current sources.
/// With G = machines, R = RES buses the reduced equations read
///   [i_g]   [gg gr] [e_g]
///   [i_r] = [rg rr] [v_r]
/// so v_r = rr^-1 (i_r - rg e_g) and i_g = gg e_g + gr v_r.
struct ReducedTopology {
    Eigen::MatrixXcd y_red;
    Eigen::MatrixXcd recovery;
    Eigen::MatrixXcd gg, gr, rg;
    Eigen::FullPivLU<Eigen::MatrixXcd> rr_lu;
    bool rr_invertible = true;
};

/// Pre-fault, faulted and post-fault reduced networks over the same retained
/// node set (machine internal nodes first, then RES buses).
struct ReducedNetworkSet {
    ReducedTopology pre;
    ReducedTopology fault;
    ReducedTopology post;
    bool has_fault = false;

    int n_machines = 0;
    int n_res = 0;
    std::vector<NodeTag> retained_tags;
    /// For each case bus: (is_res, index) where index points into v_res for
    /// RES buses and into the recovery output otherwise.
    std::vector<std::pair<bool, int>> bus_lookup;
};

enum class Topology { Pre, Fault, Post };

/// Assembles the full reduction pipeline (ybus, load absorption, machine
/// extension, optional fault variant, Kron reduction, partitioning).
ReducedNetworkSet build_reduced_networks(const NetworkCase& c, const PowerFlowSolution& pf);

struct MixedSolution {
    Eigen::VectorXcd i_machine;  ///< injections at machine internal nodes
    Eigen::VectorXcd v_res;      ///< voltages at RES buses
    Eigen::VectorXcd v_bus;      ///< voltages at every original bus
};

/// Boundary solve with machine EMFs fixed and RES currents injected, plus
/// algebraic recovery of every eliminated bus voltage.
MixedSolution mixed_boundary_solve(const ReducedNetworkSet& rns, Topology topo,
                                   const Eigen::VectorXcd& e_machine,
                                   const Eigen::VectorXcd& i_res);

const ReducedTopology& select_topology(const ReducedNetworkSet& rns, Topology topo);

}  // namespace gridwave
