#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "unravel/functionals.hpp"
#include "unravel/master.hpp"
#include "unravel/quantum_core.hpp"
#include "unravel/trajectory.hpp"

namespace unravel {

struct EnsembleConfig {
    LindbladModel model;
    StateVector psi0;
    Measurement meas;
    TimeGrid grid;
    std::size_t n_traj = 2;
    std::uint64_t master_seed = 0;
    Unraveling unraveling = Unraveling::wiener;
    /// Grid stride of the second-moment finite differences.
    std::size_t decimation = 100;
};

/// Throws std::invalid_argument for n_traj < 2, mismatched dimensions or a
/// time step outside the policy.
void validate(const EnsembleConfig& config);

/// A trajectory failed; the message carries its index and seed.
class TrajectoryError : public std::runtime_error {
public:
    TrajectoryError(std::size_t index, std::uint64_t seed, const std::string& what);
    std::size_t index() const { return index_; }

private:
    std::size_t index_;
};

struct Estimate {
    double mean = 0.0;
    double se = 0.0;
    std::size_t samples = 0;
};

/// Ensemble estimates at one grid point. Standard errors are per-trajectory
/// sample standard deviations over sqrt(n).
struct GridPointStats {
    double time = 0.0;
    DensityMatrix mean_projector = DensityMatrix::maximally_mixed(1);
    RealMatrix projector_se_re;
    RealMatrix projector_se_im;
    RealVector mean_p;
    RealVector p_se;
    RealMatrix mean_pp;  // E p_i p_k
    RealMatrix pp_se;
    Estimate entropy;    // E S
    /// S^A from the ensemble probabilities. The SE is the second-order
    /// delta-method RMSE (variance plus squared bias) from the sample covariance of p.
    double measurement_entropy = 0.0;
    double measurement_entropy_se = 0.0;
    Estimate f;          // E f_t over points without a boundary divergence
    std::size_t boundary_flags = 0;
    RealMatrix mean_drift;  // E[lindblad_part + ito_part] for the ensemble's unraveling
    RealMatrix drift_se;
};

/// Finite-difference check of d E[p_i p_k]/dt on the window [t - h, t + h].
/// `residual` is the mean over trajectories of
///   (pp(t+h) - pp(t-h) - int_{t-h}^{t+h} drift ds) / 2h
/// with the drift integrated by the trapezoid rule on the fine grid.
struct SecondMomentWindow {
    std::size_t index = 0;
    double time = 0.0;
    double half_width = 0.0;
    RealMatrix fd_derivative;
    RealMatrix window_drift;
    RealMatrix residual;
    RealMatrix residual_se;
};

struct EnsembleStats {
    TimeGrid grid;
    Unraveling unraveling = Unraveling::wiener;
    std::size_t n_traj = 0;
    std::uint64_t master_seed = 0;
    std::vector<GridPointStats> points;
    std::vector<SecondMomentWindow> second_moment;
    std::vector<Estimate> jumps_per_trajectory;  // per channel
    Estimate first_jump_time;                    // over trajectories that jumped
    std::size_t trajectories_with_jump = 0;
    double max_norm_drift = 0.0;
};

/// Streaming accumulator of per-trajectory statistics (Welford within a
/// trajectory sequence, Chan et al. pairwise merge between accumulators).
/// Feed one trajectory at a time through the observer interface or `add`.
class EnsembleAccumulator : public TrajectoryObserver {
public:
    EnsembleAccumulator(const LindbladModel& model, const Measurement& meas, const TimeGrid& grid, Unraveling tag,
                        std::size_t decimation = 100);

    void begin_trajectory();
    void on_state(std::size_t k, const StateVector& psi) override;
    void on_jump(const JumpEvent& event) override;
    void end_trajectory(double max_norm_drift = 0.0);

    /// begin + every state and jump of `record` + end.
    void add(const TrajectoryRecord& record);

    /// Absorbs `other` as if its trajectories had been added after ours.
    void merge(const EnsembleAccumulator& other);

    std::size_t trajectories() const { return trajectories_; }

    EnsembleStats finish(std::uint64_t master_seed = 0) const;

private:
    struct Welford {
        std::vector<double> mean;
        std::vector<double> m2;
        std::vector<std::uint64_t> count;

        explicit Welford(std::size_t n = 0) : mean(n, 0.0), m2(n, 0.0), count(n, 0) {}
        void add(std::size_t i, double x);
        void merge(const Welford& other);
        Estimate estimate(std::size_t i) const;
    };

    std::size_t slot(std::size_t k) const { return k * slots_per_point_; }

    MeasurementDynamics dynamics_;
    TimeGrid grid_;
    Unraveling tag_;
    std::size_t dim_;
    std::size_t outcomes_;
    std::size_t channels_;
    std::size_t decimation_;
    std::size_t slots_per_point_;
    // slot offsets within a grid point
    std::size_t off_proj_, off_p_, off_pp_, off_s_, off_f_, off_drift_;

    Welford points_;
    std::vector<std::size_t> boundary_flags_;
    std::vector<std::size_t> window_centers_;
    Welford windows_;  // per window: fd, drift integral, residual (3 K^2 blocks)
    Welford jumps_;    // per channel
    Welford first_jump_;
    std::size_t trajectories_with_jump_ = 0;
    std::size_t trajectories_ = 0;
    double max_norm_drift_ = 0.0;

    // current trajectory
    std::vector<double> traj_pp_;        // at decimated points
    std::vector<double> traj_integral_;  // trapezoid integral of the drift at decimated points
    std::vector<double> running_integral_;
    std::vector<double> previous_drift_;
    std::vector<std::size_t> traj_jumps_;
    double traj_first_jump_ = -1.0;
    std::size_t next_k_ = 0;
};

/// Runs config.n_traj trajectories; trajectory k uses split_seed(master_seed, k).
/// The result is bit-for-bit independent of `workers` (0 = hardware concurrency).
EnsembleStats run_ensemble(const EnsembleConfig& config, std::size_t workers = 0);

struct GridComparison {
    double time = 0.0;
    double trace_distance = 0.0;
    RealVector p_residual_se;          // |E p_i - Tr[rho P_i]| / SE
    double projector_residual_se = 0;  // max over entries (re and im) in SE units
    double master_measurement_entropy = 0.0;
    double ensemble_measurement_entropy = 0.0;
    double measurement_entropy_agreement_se = 0.0;
    double von_neumann_entropy = 0.0;
    double jensen_gap = 0.0;      // S^A(master) - E S
    double jensen_gap_se = 0.0;   // SE of E S
    double jensen_gap_pooled_se = 0.0;  // also folds in the SE of the ensemble S^A
};

struct WindowComparison {
    double time = 0.0;
    RealMatrix fd_derivative;
    RealMatrix window_drift;
    RealMatrix residual_se;  // |residual| / SE
};

struct ComparisonReport {
    Unraveling unraveling = Unraveling::wiener;
    std::vector<GridComparison> points;
    std::vector<WindowComparison> second_moment;

    double max_trace_distance() const;
    double max_p_residual_se() const;
    double max_projector_residual_se() const;
    /// min over grid of jensen_gap / jensen_gap_se (+inf where SE and gap vanish)
    double min_jensen_gap_se() const;
    double max_measurement_entropy_agreement_se() const;
    double max_second_moment_residual_se() const;
};

/// |diff| / se, with |diff| <= 1e-9 counted as zero and a positive diff over a
/// zero SE as infinite.
double se_units(double diff, double se);

/// Throws std::invalid_argument for mismatched grids.
ComparisonReport compare_to_master(const EnsembleStats& stats, const MasterSolution& master, const Measurement& meas);

struct DiscrepancyPoint {
    double time = 0.0;
    RealMatrix wiener_pp;
    RealMatrix poisson_pp;
    RealMatrix pooled_se_units;  // |wiener - poisson| / sqrt(se_w^2 + se_p^2)
};

struct SecondMomentReport {
    std::vector<WindowComparison> wiener;
    std::vector<WindowComparison> poisson;
    std::vector<DiscrepancyPoint> discrepancy;  // every grid point

    double max_residual_se(Unraveling tag) const;
};

SecondMomentReport second_moment_validation(const EnsembleStats& wiener, const EnsembleStats& poisson);

/// Runs both unravelings of `config` and cross-checks them.
SecondMomentReport second_moment_validation(const EnsembleConfig& config, const MasterSolution& master,
                                            std::size_t workers = 0);

}  // namespace unravel
