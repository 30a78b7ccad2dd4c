#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridwave/case_data.hpp"
#include "gridwave/machine_model.hpp"
#include "gridwave/network.hpp"
#include "gridwave/powerflow.hpp"
#include "gridwave/res_model.hpp"

namespace gridwave {

/// Flat state vector layout: 11 entries per machine
///   [delta, omega, e_q_p, e_d_p, psi_1d, psi_2q, e_fd, r_f, v_r, t_m, p_sv]
/// followed by 3 per RES plant [i_p, i_q, q_pi], in table order.
constexpr int kMachineStates = 11;
constexpr int kResStates = 3;

/// Assembled dynamic model: devices initialized at the power-flow point and
/// coupled through the reduced networks. Owns the input bookkeeping used for
/// linearization (v_ref per machine, q_ref per RES plant, omega_s).
class SystemModel {
  public:
    SystemModel(const NetworkCase& c, const PowerFlowSolution& pf);

    int n_states() const { return n_states_; }
    int n_machines() const { return static_cast<int>(machines_.size()); }
    int n_res() const { return static_cast<int>(res_.size()); }
    double omega_s() const { return omega_s_; }

    const std::vector<std::string>& state_labels() const { return state_labels_; }
    const std::vector<std::string>& input_labels() const { return input_labels_; }
    const std::vector<std::string>& device_names() const { return device_names_; }

    /// Equilibrium state assembled from the device initializations.
    Eigen::VectorXd initial_state() const { return x0_; }
    /// Equilibrium values of every available input.
    Eigen::VectorXd nominal_inputs() const { return u0_; }

    /// Time derivative with the topology chosen by t (fault window selects
    /// the faulted matrices). Inputs are absolute values aligned with
    /// input_labels().
    Eigen::VectorXd rhs(double t, const Eigen::VectorXd& x) const;
    Eigen::VectorXd rhs(const Eigen::VectorXd& x, const Eigen::VectorXd& u, Topology topo) const;

    /// Network solution for a given state (used for outputs and recovery).
    MixedSolution network_solution(const Eigen::VectorXd& x, Topology topo) const;

    Topology topology_at(double t) const;

    const ReducedNetworkSet& networks() const { return rns_; }
    const NetworkCase& network_case() const { return *case_; }

    /// Indices into the state vector of every rotor angle, the reference
    /// machine first; and of the (i_p, i_q) pairs of every RES plant. Used by
    /// the reference-angle reduction.
    std::vector<int> angle_state_indices() const;
    std::vector<std::pair<int, int>> res_current_state_indices() const;

    /// Updates the low-voltage command memory from an accepted state. Called
    /// by the integrator at step boundaries.
    void update_command_memory(const Eigen::VectorXd& x, Topology topo) const;

    /// Clamps limited states (regulator outputs) into their bands.
    void enforce_limits(Eigen::VectorXd& x) const;

  private:
    const NetworkCase* case_;
    ReducedNetworkSet rns_;
    double omega_s_ = 0.0;

    std::vector<MachineRecord> machines_;
    std::vector<ExciterRecord> exciters_;
    std::vector<TurbineRecord> turbines_;
    std::vector<ResPlantRecord> res_;
    std::vector<MachineSetpoints> mach_sp_;
    std::vector<ResSetpoints> res_sp_;
    std::vector<int> mach_bus_pos_;
    std::vector<int> res_bus_pos_;
    mutable std::vector<ResCommands> res_cmd_memory_;

    int n_states_ = 0;
    Eigen::VectorXd x0_, u0_;
    std::vector<std::string> state_labels_, input_labels_, device_names_;
};

struct SimulationEvent {
    double t = 0.0;
    std::string what;
};

struct SimulationResult {
    std::vector<double> t;
    Eigen::MatrixXd states;      ///< one row per time point
    Eigen::MatrixXd bus_v_mag;   ///< one column per bus
    Eigen::MatrixXd bus_freq;    ///< electrical frequency per machine, Hz
    std::vector<std::string> state_labels;
    std::vector<int> bus_ids;
    std::vector<std::string> freq_labels;
    std::vector<SimulationEvent> events;
};

struct SimulateOptions {
    double init_residual_tol = 1e-5;
    double blowup_limit = 1e6;
};

/// Fixed-step classical RK4 over a grid built so that fault application and
/// clearing times land exactly on step boundaries. Throws
/// InitResidualTooLarge when the assembled model is not at equilibrium and
/// NumericalBlowup when any state leaves [-limit, limit].
SimulationResult run_simulation(const SystemModel& model, const ScenarioConfig& sc,
                                const SimulateOptions& opt = {});

}  // namespace gridwave
