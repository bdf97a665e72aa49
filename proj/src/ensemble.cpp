#include "unravel/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "unravel/poisson.hpp"
#include "unravel/rng.hpp"
#include "unravel/wiener.hpp"

namespace unravel {

namespace {

constexpr std::size_t kMaxBlocks = 64;
constexpr double kResidualFloor = 1e-9;

std::string trajectory_message(std::size_t index, std::uint64_t seed, const std::string& what)
{
    std::ostringstream msg;
    msg << "trajectory " << index << " (seed " << seed << "): " << what;
    return msg.str();
}

}  // namespace

TrajectoryError::TrajectoryError(std::size_t index, std::uint64_t seed, const std::string& what)
    : std::runtime_error(trajectory_message(index, seed, what)), index_(index)
{
}

void validate(const EnsembleConfig& config)
{
    if (config.n_traj < 2) throw std::invalid_argument("ensemble needs at least 2 trajectories for standard errors");
    if (config.psi0.dim() != config.model.dim() || config.meas.dim() != config.model.dim()) {
        throw std::invalid_argument("model, initial state and measurement dimensions differ");
    }
    check_time_step(config.model, config.grid.dt);
}

// --- Welford -----------------------------------------------------------------------

void EnsembleAccumulator::Welford::add(std::size_t i, double x)
{
    const auto n = ++count[i];
    const double delta = x - mean[i];
    mean[i] += delta / static_cast<double>(n);
    m2[i] += delta * (x - mean[i]);
}

void EnsembleAccumulator::Welford::merge(const Welford& other)
{
    for (std::size_t i = 0; i < mean.size(); ++i) {
        const auto nb = other.count[i];
        if (nb == 0) continue;
        const auto na = count[i];
        if (na == 0) {
            mean[i] = other.mean[i];
            m2[i] = other.m2[i];
            count[i] = nb;
            continue;
        }
        const double n = static_cast<double>(na + nb);
        const double delta = other.mean[i] - mean[i];
        mean[i] += delta * static_cast<double>(nb) / n;
        m2[i] += other.m2[i] + delta * delta * static_cast<double>(na) * static_cast<double>(nb) / n;
        count[i] = na + nb;
    }
}

Estimate EnsembleAccumulator::Welford::estimate(std::size_t i) const
{
    Estimate e;
    e.samples = count[i];
    e.mean = mean[i];
    if (count[i] >= 2) {
        const double n = static_cast<double>(count[i]);
        e.se = std::sqrt(std::max(0.0, m2[i]) / (n - 1.0) / n);
    }
    return e;
}

// --- EnsembleAccumulator ---------------------------------------------------------------

EnsembleAccumulator::EnsembleAccumulator(const LindbladModel& model, const Measurement& meas, const TimeGrid& grid,
                                         Unraveling tag, std::size_t decimation)
    : dynamics_(model, meas),
      grid_(grid),
      tag_(tag),
      dim_(model.dim()),
      outcomes_(meas.outcomes()),
      channels_(model.channels()),
      decimation_(decimation)
{
    const std::size_t k2 = outcomes_ * outcomes_;
    off_proj_ = 0;
    off_p_ = off_proj_ + 2 * dim_ * dim_;
    off_pp_ = off_p_ + outcomes_;
    off_s_ = off_pp_ + k2;
    off_f_ = off_s_ + 1;
    off_drift_ = off_f_ + 1;
    slots_per_point_ = off_drift_ + k2;

    points_ = Welford(slots_per_point_ * grid_.points());
    boundary_flags_.assign(grid_.points(), 0);

    if (decimation_ > 0) {
        const std::size_t marks = grid_.steps / decimation_;
        for (std::size_t m = 1; m < marks; ++m) window_centers_.push_back(m);
        traj_pp_.assign((marks + 1) * k2, 0.0);
        traj_integral_.assign((marks + 1) * k2, 0.0);
    }
    windows_ = Welford(window_centers_.size() * 3 * k2);
    running_integral_.assign(k2, 0.0);
    previous_drift_.assign(k2, 0.0);
    jumps_ = Welford(channels_);
    first_jump_ = Welford(1);
    traj_jumps_.assign(channels_, 0);
}

void EnsembleAccumulator::begin_trajectory()
{
    std::fill(running_integral_.begin(), running_integral_.end(), 0.0);
    std::fill(traj_jumps_.begin(), traj_jumps_.end(), 0);
    traj_first_jump_ = -1.0;
    next_k_ = 0;
}

void EnsembleAccumulator::on_state(std::size_t k, const StateVector& psi)
{
    if (k != next_k_ || k >= grid_.points()) throw std::logic_error("ensemble accumulator fed out of order");
    if (psi.dim() != dim_) throw DimensionError("ensemble accumulator: state dimension differs");
    ++next_k_;

    const ComplexVector& v = psi.amplitudes();
    const LocalQuantities q = dynamics_.evaluate(v);
    const std::size_t base = slot(k);

    for (std::size_t r = 0; r < dim_; ++r) {
        for (std::size_t c = 0; c < dim_; ++c) {
            const Complex x = v(static_cast<Eigen::Index>(r)) * std::conj(v(static_cast<Eigen::Index>(c)));
            points_.add(base + off_proj_ + 2 * (r * dim_ + c), x.real());
            points_.add(base + off_proj_ + 2 * (r * dim_ + c) + 1, x.imag());
        }
    }

    RealVector p(static_cast<Eigen::Index>(outcomes_));
    for (std::size_t i = 0; i < outcomes_; ++i) {
        p(static_cast<Eigen::Index>(i)) = std::clamp(q.p(static_cast<Eigen::Index>(i)), 0.0, 1.0);
        points_.add(base + off_p_ + i, p(static_cast<Eigen::Index>(i)));
    }
    for (std::size_t i = 0; i < outcomes_; ++i) {
        for (std::size_t j = 0; j < outcomes_; ++j) {
            const double pp = p(static_cast<Eigen::Index>(i)) * p(static_cast<Eigen::Index>(j));
            points_.add(base + off_pp_ + i * outcomes_ + j, pp);
        }
    }

    points_.add(base + off_s_, shannon_entropy(p));

    const FEvaluation f = evaluate_f(q);
    if (f.status == FunctionalStatus::boundary_divergence) {
        ++boundary_flags_[k];
    } else {
        points_.add(base + off_f_, f.value);
    }

    // trapezoid rule: running_integral_ holds the integral up to t_k after this loop
    const RealMatrix drift = second_moment_drift(q, tag_).total();
    const bool on_mark = decimation_ > 0 && k % decimation_ == 0;
    const std::size_t mark_base = on_mark ? (k / decimation_) * outcomes_ * outcomes_ : 0;
    for (std::size_t i = 0; i < outcomes_; ++i) {
        for (std::size_t j = 0; j < outcomes_; ++j) {
            const std::size_t e = i * outcomes_ + j;
            const double d = drift(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            points_.add(base + off_drift_ + e, d);
            if (k > 0) running_integral_[e] += 0.5 * (previous_drift_[e] + d) * grid_.dt;
            previous_drift_[e] = d;
            if (on_mark) {
                traj_pp_[mark_base + e] = p(static_cast<Eigen::Index>(i)) * p(static_cast<Eigen::Index>(j));
                traj_integral_[mark_base + e] = running_integral_[e];
            }
        }
    }
}

void EnsembleAccumulator::on_jump(const JumpEvent& event)
{
    if (event.channel >= channels_) throw DimensionError("jump channel out of range");
    ++traj_jumps_[event.channel];
    if (traj_first_jump_ < 0.0) traj_first_jump_ = event.time - grid_.t0;
}

void EnsembleAccumulator::end_trajectory(double max_norm_drift)
{
    if (next_k_ != grid_.points()) throw std::logic_error("trajectory ended before the last grid point");
    const std::size_t k2 = outcomes_ * outcomes_;
    const double width = 2.0 * static_cast<double>(decimation_) * grid_.dt;
    for (std::size_t w = 0; w < window_centers_.size(); ++w) {
        const std::size_t lo = (window_centers_[w] - 1) * k2;
        const std::size_t hi = (window_centers_[w] + 1) * k2;
        for (std::size_t e = 0; e < k2; ++e) {
            const double fd = (traj_pp_[hi + e] - traj_pp_[lo + e]) / width;
            const double drift = (traj_integral_[hi + e] - traj_integral_[lo + e]) / width;
            windows_.add(w * 3 * k2 + e, fd);
            windows_.add(w * 3 * k2 + k2 + e, drift);
            windows_.add(w * 3 * k2 + 2 * k2 + e, fd - drift);
        }
    }
    for (std::size_t j = 0; j < channels_; ++j) jumps_.add(j, static_cast<double>(traj_jumps_[j]));
    if (traj_first_jump_ >= 0.0) {
        first_jump_.add(0, traj_first_jump_);
        ++trajectories_with_jump_;
    }
    max_norm_drift_ = std::max(max_norm_drift_, max_norm_drift);
    ++trajectories_;
}

void EnsembleAccumulator::add(const TrajectoryRecord& record)
{
    if (!(record.grid == grid_)) throw std::invalid_argument("trajectory grid differs from accumulator grid");
    if (record.states.size() != grid_.points()) throw std::invalid_argument("trajectory record is incomplete");
    begin_trajectory();
    auto jump = record.jumps.begin();
    for (std::size_t k = 0; k < record.states.size(); ++k) {
        // a jump is reported before the state of the grid point it lands on
        while (jump != record.jumps.end() && jump->time <= grid_.time(k) + 0.5 * grid_.dt) {
            on_jump(*jump);
            ++jump;
        }
        on_state(k, record.states[k]);
    }
    end_trajectory(record.max_norm_drift);
}

void EnsembleAccumulator::merge(const EnsembleAccumulator& other)
{
    if (!(other.grid_ == grid_) || other.slots_per_point_ != slots_per_point_ || other.tag_ != tag_ ||
        other.decimation_ != decimation_ || other.channels_ != channels_) {
        throw std::invalid_argument("cannot merge accumulators of different shape");
    }
    points_.merge(other.points_);
    windows_.merge(other.windows_);
    jumps_.merge(other.jumps_);
    first_jump_.merge(other.first_jump_);
    for (std::size_t k = 0; k < boundary_flags_.size(); ++k) boundary_flags_[k] += other.boundary_flags_[k];
    trajectories_with_jump_ += other.trajectories_with_jump_;
    trajectories_ += other.trajectories_;
    max_norm_drift_ = std::max(max_norm_drift_, other.max_norm_drift_);
}

EnsembleStats EnsembleAccumulator::finish(std::uint64_t master_seed) const
{
    if (trajectories_ == 0) throw std::logic_error("no trajectories accumulated");
    EnsembleStats stats;
    stats.grid = grid_;
    stats.unraveling = tag_;
    stats.n_traj = trajectories_;
    stats.master_seed = master_seed;
    stats.trajectories_with_jump = trajectories_with_jump_;
    stats.max_norm_drift = max_norm_drift_;

    const auto d = static_cast<Eigen::Index>(dim_);
    const auto K = static_cast<Eigen::Index>(outcomes_);
    const double n = static_cast<double>(trajectories_);
    stats.points.reserve(grid_.points());
    for (std::size_t k = 0; k < grid_.points(); ++k) {
        const std::size_t base = slot(k);
        GridPointStats gp;
        gp.time = grid_.time(k);

        OperatorMatrix proj(d, d);
        gp.projector_se_re.resize(d, d);
        gp.projector_se_im.resize(d, d);
        for (Eigen::Index r = 0; r < d; ++r) {
            for (Eigen::Index c = 0; c < d; ++c) {
                const std::size_t idx = base + off_proj_ + 2 * static_cast<std::size_t>(r * d + c);
                const Estimate re = points_.estimate(idx);
                const Estimate im = points_.estimate(idx + 1);
                proj(r, c) = Complex(re.mean, im.mean);
                gp.projector_se_re(r, c) = re.se;
                gp.projector_se_im(r, c) = im.se;
            }
        }
        gp.mean_projector = DensityMatrix(proj);

        gp.mean_p.resize(K);
        gp.p_se.resize(K);
        for (Eigen::Index i = 0; i < K; ++i) {
            const Estimate e = points_.estimate(base + off_p_ + static_cast<std::size_t>(i));
            gp.mean_p(i) = e.mean;
            gp.p_se(i) = e.se;
        }
        gp.mean_pp.resize(K, K);
        gp.pp_se.resize(K, K);
        gp.mean_drift.resize(K, K);
        gp.drift_se.resize(K, K);
        for (Eigen::Index i = 0; i < K; ++i) {
            for (Eigen::Index j = 0; j < K; ++j) {
                const auto e = static_cast<std::size_t>(i * K + j);
                const Estimate pp = points_.estimate(base + off_pp_ + e);
                const Estimate dr = points_.estimate(base + off_drift_ + e);
                gp.mean_pp(i, j) = pp.mean;
                gp.pp_se(i, j) = pp.se;
                gp.mean_drift(i, j) = dr.mean;
                gp.drift_se(i, j) = dr.se;
            }
        }
        gp.entropy = points_.estimate(base + off_s_);
        gp.f = points_.estimate(base + off_f_);
        gp.boundary_flags = boundary_flags_[k];

        gp.measurement_entropy = shannon_entropy(gp.mean_p);
        if (trajectories_ >= 2) {
            RealVector grad = RealVector::Zero(K);
            for (Eigen::Index i = 0; i < K; ++i) {
                if (gp.mean_p(i) > 0.0) grad(i) = -(std::log(gp.mean_p(i)) + 1.0);
            }
            const RealMatrix cov = (gp.mean_pp - gp.mean_p * gp.mean_p.transpose()) * (n / (n - 1.0));
            // RMSE of the plug-in estimate to second order (Hessian -diag(1/q)):
            // the linear term vanishes where the gradient does, the O(1/n) bias does not.
            double var = grad.dot(cov * grad) / n;
            double bias = 0.0;
            for (Eigen::Index i = 0; i < K; ++i) {
                if (gp.mean_p(i) <= 0.0) continue;
                bias -= cov(i, i) / (2.0 * gp.mean_p(i) * n);
                for (Eigen::Index j = 0; j < K; ++j) {
                    if (gp.mean_p(j) <= 0.0) continue;
                    var += 0.5 * cov(i, j) * cov(i, j) / (gp.mean_p(i) * gp.mean_p(j) * n * n);
                }
            }
            gp.measurement_entropy_se = std::sqrt(std::max(0.0, var) + bias * bias);
        }
        stats.points.push_back(std::move(gp));
    }

    const std::size_t k2 = outcomes_ * outcomes_;
    for (std::size_t w = 0; w < window_centers_.size(); ++w) {
        SecondMomentWindow win;
        win.index = window_centers_[w] * decimation_;
        win.time = grid_.time(win.index);
        win.half_width = static_cast<double>(decimation_) * grid_.dt;
        win.fd_derivative.resize(K, K);
        win.window_drift.resize(K, K);
        win.residual.resize(K, K);
        win.residual_se.resize(K, K);
        for (Eigen::Index i = 0; i < K; ++i) {
            for (Eigen::Index j = 0; j < K; ++j) {
                const auto e = static_cast<std::size_t>(i * K + j);
                win.fd_derivative(i, j) = windows_.estimate(w * 3 * k2 + e).mean;
                win.window_drift(i, j) = windows_.estimate(w * 3 * k2 + k2 + e).mean;
                const Estimate res = windows_.estimate(w * 3 * k2 + 2 * k2 + e);
                win.residual(i, j) = res.mean;
                win.residual_se(i, j) = res.se;
            }
        }
        stats.second_moment.push_back(std::move(win));
    }

    for (std::size_t j = 0; j < channels_; ++j) stats.jumps_per_trajectory.push_back(jumps_.estimate(j));
    stats.first_jump_time = first_jump_.estimate(0);
    return stats;
}

// --- run_ensemble -------------------------------------------------------------------

EnsembleStats run_ensemble(const EnsembleConfig& config, std::size_t workers)
{
    validate(config);
    const std::size_t blocks = std::min(config.n_traj, kMaxBlocks);
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, blocks);

    auto block_begin = [&](std::size_t b) { return b * config.n_traj / blocks; };

    EnsembleAccumulator total(config.model, config.meas, config.grid, config.unraveling, config.decimation);
    std::vector<std::optional<EnsembleAccumulator>> ready(blocks);
    std::vector<std::exception_ptr> errors(blocks);
    std::size_t next_merge = 0;
    std::mutex merge_mutex;
    std::atomic<std::size_t> next_block{0};

    auto work = [&]() {
        for (;;) {
            const std::size_t b = next_block.fetch_add(1);
            if (b >= blocks) return;
            EnsembleAccumulator acc(config.model, config.meas, config.grid, config.unraveling, config.decimation);
            std::exception_ptr error;
            for (std::size_t t = block_begin(b); t < block_begin(b + 1); ++t) {
                const std::uint64_t seed = split_seed(config.master_seed, t);
                try {
                    acc.begin_trajectory();
                    const double drift = config.unraveling == Unraveling::wiener
                                             ? simulate_gp(config.model, config.psi0, config.grid, seed, acc)
                                             : simulate_pdp(config.model, config.psi0, config.grid, seed, acc);
                    acc.end_trajectory(drift);
                } catch (const std::exception& e) {
                    error = std::make_exception_ptr(TrajectoryError(t, seed, e.what()));
                    break;
                }
            }
            std::lock_guard<std::mutex> lock(merge_mutex);
            errors[b] = error;
            ready[b].emplace(std::move(acc));
            // merge in block order so the result does not depend on scheduling
            while (next_merge < blocks && ready[next_merge]) {
                if (!errors[next_merge]) total.merge(*ready[next_merge]);
                ready[next_merge].reset();
                ++next_merge;
            }
        }
    };

    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return total.finish(config.master_seed);
}

// --- comparisons --------------------------------------------------------------------

double se_units(double diff, double se)
{
    const double a = std::abs(diff);
    if (a <= kResidualFloor) return 0.0;
    if (se <= 0.0) return std::numeric_limits<double>::infinity();
    return a / se;
}

namespace {

double signed_se_units(double diff, double se)
{
    const double u = se_units(diff, se);
    return diff < 0.0 ? -u : u;
}

WindowComparison compare_window(const SecondMomentWindow& w)
{
    WindowComparison out;
    out.time = w.time;
    out.fd_derivative = w.fd_derivative;
    out.window_drift = w.window_drift;
    out.residual_se.resize(w.residual.rows(), w.residual.cols());
    for (Eigen::Index i = 0; i < w.residual.rows(); ++i) {
        for (Eigen::Index j = 0; j < w.residual.cols(); ++j) {
            out.residual_se(i, j) = se_units(w.residual(i, j), w.residual_se(i, j));
        }
    }
    return out;
}

double max_window_residual(const std::vector<WindowComparison>& windows)
{
    double m = 0.0;
    for (const auto& w : windows) m = std::max(m, w.residual_se.maxCoeff());
    return m;
}

}  // namespace

ComparisonReport compare_to_master(const EnsembleStats& stats, const MasterSolution& master, const Measurement& meas)
{
    if (!(stats.grid == master.grid) || stats.points.size() != master.states.size()) {
        throw std::invalid_argument("ensemble and master solution use different time grids");
    }
    ComparisonReport report;
    report.unraveling = stats.unraveling;
    report.points.reserve(stats.points.size());
    for (std::size_t k = 0; k < stats.points.size(); ++k) {
        const GridPointStats& gp = stats.points[k];
        const DensityMatrix& rho = master.states[k];
        if (rho.dim() != gp.mean_projector.dim() || meas.outcomes() != static_cast<std::size_t>(gp.mean_p.size())) {
            throw DimensionError("ensemble statistics and master solution dimensions differ");
        }
        GridComparison c;
        c.time = gp.time;
        c.trace_distance = trace_distance(gp.mean_projector.matrix(), rho.matrix());

        c.p_residual_se.resize(gp.mean_p.size());
        for (Eigen::Index i = 0; i < gp.mean_p.size(); ++i) {
            const double exact = (rho.matrix() * meas.effect(static_cast<std::size_t>(i))).trace().real();
            c.p_residual_se(i) = se_units(gp.mean_p(i) - exact, gp.p_se(i));
        }
        const OperatorMatrix diff = gp.mean_projector.matrix() - rho.matrix();
        for (Eigen::Index r = 0; r < diff.rows(); ++r) {
            for (Eigen::Index col = 0; col < diff.cols(); ++col) {
                c.projector_residual_se = std::max(
                    {c.projector_residual_se, se_units(diff(r, col).real(), gp.projector_se_re(r, col)),
                     se_units(diff(r, col).imag(), gp.projector_se_im(r, col))});
            }
        }
        c.master_measurement_entropy = measurement_entropy(rho, meas);
        c.ensemble_measurement_entropy = gp.measurement_entropy;
        c.measurement_entropy_agreement_se =
            se_units(gp.measurement_entropy - c.master_measurement_entropy, gp.measurement_entropy_se);
        c.von_neumann_entropy = von_neumann_entropy(rho);
        c.jensen_gap = c.master_measurement_entropy - gp.entropy.mean;
        c.jensen_gap_se = gp.entropy.se;
        c.jensen_gap_pooled_se = std::hypot(gp.entropy.se, gp.measurement_entropy_se);
        report.points.push_back(std::move(c));
    }
    for (const auto& w : stats.second_moment) report.second_moment.push_back(compare_window(w));
    return report;
}

double ComparisonReport::max_trace_distance() const
{
    double m = 0.0;
    for (const auto& p : points) m = std::max(m, p.trace_distance);
    return m;
}

double ComparisonReport::max_p_residual_se() const
{
    double m = 0.0;
    for (const auto& p : points) m = std::max(m, p.p_residual_se.maxCoeff());
    return m;
}

double ComparisonReport::max_projector_residual_se() const
{
    double m = 0.0;
    for (const auto& p : points) m = std::max(m, p.projector_residual_se);
    return m;
}

double ComparisonReport::min_jensen_gap_se() const
{
    double m = std::numeric_limits<double>::infinity();
    for (const auto& p : points) {
        const double u = std::abs(p.jensen_gap) <= kResidualFloor ? 0.0 : signed_se_units(p.jensen_gap, p.jensen_gap_pooled_se);
        m = std::min(m, u);
    }
    return m;
}

double ComparisonReport::max_measurement_entropy_agreement_se() const
{
    double m = 0.0;
    for (const auto& p : points) m = std::max(m, p.measurement_entropy_agreement_se);
    return m;
}

double ComparisonReport::max_second_moment_residual_se() const
{
    return max_window_residual(second_moment);
}

double SecondMomentReport::max_residual_se(Unraveling tag) const
{
    return max_window_residual(tag == Unraveling::wiener ? wiener : poisson);
}

SecondMomentReport second_moment_validation(const EnsembleStats& wiener, const EnsembleStats& poisson)
{
    if (!(wiener.grid == poisson.grid) || wiener.points.size() != poisson.points.size()) {
        throw std::invalid_argument("second-moment validation needs ensembles on the same grid");
    }
    if (wiener.unraveling != Unraveling::wiener || poisson.unraveling != Unraveling::poisson) {
        throw std::invalid_argument("second-moment validation expects a wiener and a poisson ensemble");
    }
    SecondMomentReport report;
    for (const auto& w : wiener.second_moment) report.wiener.push_back(compare_window(w));
    for (const auto& w : poisson.second_moment) report.poisson.push_back(compare_window(w));
    report.discrepancy.reserve(wiener.points.size());
    for (std::size_t k = 0; k < wiener.points.size(); ++k) {
        const auto& a = wiener.points[k];
        const auto& b = poisson.points[k];
        DiscrepancyPoint d;
        d.time = a.time;
        d.wiener_pp = a.mean_pp;
        d.poisson_pp = b.mean_pp;
        d.pooled_se_units.resize(a.mean_pp.rows(), a.mean_pp.cols());
        for (Eigen::Index i = 0; i < a.mean_pp.rows(); ++i) {
            for (Eigen::Index j = 0; j < a.mean_pp.cols(); ++j) {
                d.pooled_se_units(i, j) =
                    se_units(a.mean_pp(i, j) - b.mean_pp(i, j), std::hypot(a.pp_se(i, j), b.pp_se(i, j)));
            }
        }
        report.discrepancy.push_back(std::move(d));
    }
    return report;
}

SecondMomentReport second_moment_validation(const EnsembleConfig& config, const MasterSolution& master,
                                            std::size_t workers)
{
    if (!(master.grid == config.grid)) throw std::invalid_argument("master solution grid differs from the ensemble grid");
    EnsembleConfig w = config;
    w.unraveling = Unraveling::wiener;
    EnsembleConfig p = config;
    p.unraveling = Unraveling::poisson;
    return second_moment_validation(run_ensemble(w, workers), run_ensemble(p, workers));
}

}  // namespace unravel
