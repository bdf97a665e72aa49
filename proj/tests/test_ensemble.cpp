#include <doctest.h>

#include <cmath>
#include <limits>

#include "support/random_models.hpp"
#include "unravel/ensemble.hpp"
#include "unravel/poisson.hpp"
#include "unravel/rng.hpp"
#include "unravel/wiener.hpp"

using namespace unravel;
using namespace unravel::testing;

namespace {

EnsembleConfig damping_config(Unraveling tag, std::size_t n, std::size_t steps = 1000)
{
    return EnsembleConfig{LindbladModel(OperatorMatrix::Zero(2, 2), {sigma_minus()}),
                          StateVector::basis(2, 1),
                          Measurement::computational_basis(2),
                          TimeGrid(0.0, 1e-3, steps),
                          n,
                          123,
                          tag};
}

void check_identical(const EnsembleStats& a, const EnsembleStats& b)
{
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t k = 0; k < a.points.size(); ++k) {
        const GridPointStats& x = a.points[k];
        const GridPointStats& y = b.points[k];
        CHECK(x.mean_projector.matrix() == y.mean_projector.matrix());
        CHECK(x.projector_se_re == y.projector_se_re);
        CHECK(x.mean_p == y.mean_p);
        CHECK(x.p_se == y.p_se);
        CHECK(x.mean_pp == y.mean_pp);
        CHECK(x.entropy.mean == y.entropy.mean);
        CHECK(x.entropy.se == y.entropy.se);
        CHECK(x.mean_drift == y.mean_drift);
        CHECK(x.boundary_flags == y.boundary_flags);
    }
    REQUIRE(a.second_moment.size() == b.second_moment.size());
    for (std::size_t w = 0; w < a.second_moment.size(); ++w) {
        CHECK(a.second_moment[w].residual == b.second_moment[w].residual);
        CHECK(a.second_moment[w].residual_se == b.second_moment[w].residual_se);
    }
    CHECK(a.first_jump_time.mean == b.first_jump_time.mean);
}

}  // namespace

TEST_CASE("configuration validation")
{
    EnsembleConfig config = damping_config(Unraveling::wiener, 1);
    CHECK_THROWS_AS(validate(config), std::invalid_argument);
    CHECK_THROWS_AS(run_ensemble(config, 1), std::invalid_argument);
    config.n_traj = 2;
    CHECK_NOTHROW(validate(config));
    config.grid = TimeGrid(0.0, 0.5, 4);
    CHECK_THROWS_AS(validate(config), std::invalid_argument);
    config = damping_config(Unraveling::wiener, 10);
    config.psi0 = StateVector::basis(3, 0);
    CHECK_THROWS_AS(validate(config), std::invalid_argument);
}

TEST_CASE("se_units")
{
    CHECK(se_units(0.0, 0.0) == 0.0);
    CHECK(se_units(1e-10, 0.0) == 0.0);
    CHECK(se_units(1e-6, 0.0) == std::numeric_limits<double>::infinity());
    CHECK(se_units(-0.3, 0.1) == doctest::Approx(3.0));
}

TEST_CASE("results do not depend on the worker count")
{
    for (Unraveling tag : {Unraveling::wiener, Unraveling::poisson}) {
        EnsembleConfig config = damping_config(tag, 150, 400);
        config.model = LindbladModel(sigma_x(), {sigma_minus()});
        const EnsembleStats one = run_ensemble(config, 1);
        check_identical(one, run_ensemble(config, 3));
        check_identical(one, run_ensemble(config, 16));
    }
}

TEST_CASE("streaming and record paths agree; merging matches sequential accumulation")
{
    const EnsembleConfig config = damping_config(Unraveling::poisson, 40, 300);
    EnsembleAccumulator sequential(config.model, config.meas, config.grid, config.unraveling);
    EnsembleAccumulator first(config.model, config.meas, config.grid, config.unraveling);
    EnsembleAccumulator second(config.model, config.meas, config.grid, config.unraveling);
    for (std::size_t k = 0; k < config.n_traj; ++k) {
        const TrajectoryRecord r = pdp_trajectory(config.model, config.psi0, config.grid, split_seed(config.master_seed, k));
        sequential.add(r);
        (k < 17 ? first : second).add(r);
    }
    first.merge(second);
    const EnsembleStats a = sequential.finish(config.master_seed);
    const EnsembleStats b = first.finish(config.master_seed);
    for (std::size_t k = 0; k < a.points.size(); ++k) {
        CHECK((a.points[k].mean_p - b.points[k].mean_p).norm() < 1e-14);
        CHECK((a.points[k].p_se - b.points[k].p_se).norm() < 1e-14);
    }
    CHECK(a.first_jump_time.mean == doctest::Approx(b.first_jump_time.mean).epsilon(1e-14));
    CHECK(a.trajectories_with_jump == b.trajectories_with_jump);

    // run_ensemble streams through the observer path
    const EnsembleStats c = run_ensemble(config, 1);
    for (std::size_t k = 0; k < a.points.size(); ++k) {
        CHECK((a.points[k].mean_p - c.points[k].mean_p).norm() < 1e-14);
    }
    CHECK(c.trajectories_with_jump == a.trajectories_with_jump);
}

TEST_CASE("deterministic unitary ensemble: zero residuals")
{
    OperatorMatrix sz = OperatorMatrix::Zero(2, 2);
    sz(0, 0) = -1.0;
    sz(1, 1) = 1.0;
    ComplexVector v(2);
    v << std::sqrt(0.3), Complex(0.0, std::sqrt(0.7));
    for (Unraveling tag : {Unraveling::wiener, Unraveling::poisson}) {
        const EnsembleConfig config{LindbladModel(sz, {}), StateVector(v), Measurement::computational_basis(2),
                                    TimeGrid(0.0, 1e-3, 500), 20, 3, tag};
        const EnsembleStats stats = run_ensemble(config, 2);
        const MasterSolution master = integrate_master(config.model, projector_of(config.psi0), config.grid);
        const ComparisonReport report = compare_to_master(stats, master, config.meas);
        CHECK(report.max_trace_distance() < 1e-6);  // O(dt^2) phase error of the normalized Euler step
        for (const auto& gp : stats.points) {
            CHECK(gp.mean_p(0) == doctest::Approx(0.3).epsilon(1e-12));
            CHECK(gp.mean_pp(1, 1) == doctest::Approx(0.49).epsilon(1e-12));
        }
        for (const auto& w : stats.second_moment) CHECK(w.residual.cwiseAbs().maxCoeff() < 1e-12);
        CHECK(report.max_second_moment_residual_se() == 0.0);
        CHECK(report.max_measurement_entropy_agreement_se() == 0.0);
    }
}

TEST_CASE("jump ensemble of amplitude damping from the excited state")
{
    const EnsembleConfig config = damping_config(Unraveling::poisson, 2000, 2000);
    const EnsembleStats stats = run_ensemble(config, 2);
    for (const auto& gp : stats.points) {
        CHECK(gp.entropy.mean == 0.0);
        CHECK(gp.entropy.se == 0.0);
        CHECK(gp.mean_pp(1, 1) == gp.mean_p(1));
    }
    const Estimate jumps = stats.jumps_per_trajectory.at(0);
    CHECK(std::abs(jumps.mean - (1.0 - std::exp(-2.0))) < 5.0 * jumps.se);
    CHECK(stats.trajectories_with_jump == static_cast<std::size_t>(std::llround(jumps.mean * 2000)));
    CHECK(stats.points[1000].boundary_flags > 0);
}

TEST_CASE("diffusive ensemble of amplitude damping tracks the decay")
{
    const EnsembleConfig config = damping_config(Unraveling::wiener, 2000, 1000);
    const EnsembleStats stats = run_ensemble(config, 2);
    const GridPointStats& gp = stats.points[1000];
    CHECK(std::abs(gp.mean_p(1) - std::exp(-1.0)) < 5.0 * gp.p_se(1));
    CHECK(stats.max_norm_drift < 0.05);
    CHECK(stats.trajectories_with_jump == 0);
}

TEST_CASE("comparison report on a small random model")
{
    Rng rng(77);
    const LindbladModel model = random_model(rng, 3, 2);
    const Measurement meas = random_measurement(rng, 3, 3);
    const StateVector psi0 = random_state(rng, 3);
    for (Unraveling tag : {Unraveling::wiener, Unraveling::poisson}) {
        const EnsembleConfig config{model, psi0, meas, TimeGrid(0.0, 1e-3, 500), 1000, 11, tag, 50};
        const EnsembleStats stats = run_ensemble(config, 2);
        const MasterSolution master = integrate_master(model, projector_of(psi0), config.grid);
        const ComparisonReport report = compare_to_master(stats, master, meas);
        CHECK(report.points.size() == config.grid.points());
        CHECK(report.second_moment.size() == 9);
        CHECK(report.max_p_residual_se() < 5.0);
        CHECK(report.min_jensen_gap_se() > -5.0);
        CHECK(report.points.front().trace_distance < 1e-12);
    }
}

TEST_CASE("mismatched grids are rejected")
{
    const EnsembleConfig config = damping_config(Unraveling::wiener, 10, 100);
    const EnsembleStats stats = run_ensemble(config, 1);
    const MasterSolution master =
        integrate_master(config.model, projector_of(config.psi0), TimeGrid(0.0, 1e-3, 200));
    CHECK_THROWS_AS(compare_to_master(stats, master, config.meas), std::invalid_argument);
}

TEST_CASE("trajectory errors carry index and seed")
{
    const TrajectoryError err(7, 12345, "boom");
    CHECK(err.index() == 7);
    CHECK(std::string(err.what()).find("12345") != std::string::npos);
    CHECK(std::string(err.what()).find("7") != std::string::npos);
}
