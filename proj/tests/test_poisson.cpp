#include <doctest.h>

#include <cmath>
#include <vector>

#include "support/random_models.hpp"
#include "unravel/poisson.hpp"
#include "unravel/rng.hpp"

using namespace unravel;
using namespace unravel::testing;

namespace {

LindbladModel damping()
{
    return LindbladModel(OperatorMatrix::Zero(2, 2), {sigma_minus()});
}

}  // namespace

TEST_CASE("jump-unraveling drift")
{
    CHECK(pdp_drift(damping(), StateVector::basis(2, 1)).norm() < 1e-15);
    CHECK(pdp_drift(damping(), StateVector::basis(2, 0)).norm() == 0.0);
    const ComplexVector d = pdp_drift(damping(), plus_state());
    CHECK(std::abs(d(0) - 0.17677669529663688) < 1e-15);
    CHECK(std::abs(d(1) + 0.17677669529663688) < 1e-15);
}

TEST_CASE("jump rates")
{
    CHECK(jump_rates(damping(), StateVector::basis(2, 1))(0) == doctest::Approx(1.0));
    CHECK(jump_rates(damping(), StateVector::basis(2, 0))(0) == 0.0);
    CHECK(jump_rates(damping(), plus_state())(0) == doctest::Approx(0.5).epsilon(1e-15));

    const LindbladModel two(OperatorMatrix::Zero(2, 2), {sigma_minus(), 0.5 * sigma_x()});
    const RealVector r = jump_rates(two, StateVector::basis(2, 1));
    CHECK(r.size() == 2);
    CHECK(r(1) == doctest::Approx(0.25));
}

TEST_CASE("apply_jump")
{
    const StateVector g = StateVector::basis(2, 0);
    CHECK(std::abs(apply_jump(damping(), plus_state(), 0)[0] - 1.0) < 1e-15);
    CHECK(apply_jump(damping(), StateVector::basis(2, 1), 0) == g);
    CHECK_THROWS_AS(apply_jump(damping(), g, 0), InvariantError);
    CHECK_THROWS_AS(apply_jump(damping(), plus_state(), 3), DimensionError);
}

TEST_CASE("pdp_step examples")
{
    const std::vector<double> zero{0.0};
    const std::vector<double> half{0.5};
    const StateVector g = StateVector::basis(2, 0);
    const PdpStepResult dark = pdp_step(damping(), g, 1e-3, zero);
    CHECK_FALSE(dark.jump.has_value());
    CHECK(dark.state == g);

    const StateVector e = StateVector::basis(2, 1);
    const std::vector<double> low{0.5e-3};
    const PdpStepResult fired = pdp_step(damping(), e, 1e-3, low, 0.25);
    REQUIRE(fired.jump.has_value());
    CHECK(fired.state == g);
    CHECK(fired.jump->post_state == g);
    CHECK(fired.jump->pre_state == e);
    CHECK(fired.jump->channel == 0);
    CHECK(fired.jump->time == doctest::Approx(0.251));

    const PdpStepResult stay = pdp_step(damping(), e, 1e-3, half);
    CHECK_FALSE(stay.jump.has_value());
    CHECK(stay.state == e);

    CHECK_THROWS_AS(pdp_step(damping(), e, 0.2, half), std::invalid_argument);
    CHECK_THROWS_AS(pdp_step(damping(), e, 1e-3, std::vector<double>{}), DimensionError);
}

TEST_CASE("lowest firing channel wins")
{
    const LindbladModel two(OperatorMatrix::Zero(2, 2), {sigma_minus(), sigma_minus()});
    const std::vector<double> both{0.0, 0.0};
    const PdpStepResult r = pdp_step(two, StateVector::basis(2, 1), 1e-3, both);
    REQUIRE(r.jump.has_value());
    CHECK(r.jump->channel == 0);
    const std::vector<double> second{0.9, 0.0};
    CHECK(pdp_step(two, StateVector::basis(2, 1), 1e-3, second).jump->channel == 1);
}

TEST_CASE("deterministic flow matches the normalized no-jump evolution")
{
    // psi(t) ~ exp(-(iH + B/2) t) psi0 between jumps
    Rng rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        const LindbladModel model = random_model(rng, 3, 2);
        const StateVector psi0 = random_state(rng, 3);
        StateVector psi = psi0;
        const std::vector<double> never{1.0, 1.0};
        for (int k = 0; k < 200; ++k) psi = pdp_step(model, psi, 1e-3, never).state;
        const OperatorMatrix gen = -(Complex(0.0, 1.0) * model.hamiltonian() + 0.5 * model.total_jump_product()) * 0.2;
        Eigen::ComplexEigenSolver<OperatorMatrix> es(gen);
        const OperatorMatrix prop = es.eigenvectors() * es.eigenvalues().array().exp().matrix().asDiagonal() *
                                    es.eigenvectors().inverse();
        const ComplexVector exact = (prop * psi0.amplitudes()).normalized();
        CHECK((psi.amplitudes() - exact).norm() < 1e-10);
    }
}

TEST_CASE("amplitude damping trajectories live on basis states")
{
    const TimeGrid grid(0.0, 1e-3, 2000);
    const StateVector e = StateVector::basis(2, 1);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const TrajectoryRecord r = pdp_trajectory(damping(), e, grid, split_seed(5, seed));
        CHECK(r.jumps.size() <= 1);
        for (std::size_t k = 0; k < r.states.size(); ++k) {
            const double pe = std::norm(r.states[k][1]);
            CHECK((pe == 0.0 || pe == 1.0));
        }
        if (!r.jumps.empty()) {
            const double tj = r.jumps.front().time;
            const auto kj = static_cast<std::size_t>(std::llround(tj / grid.dt));
            CHECK(std::norm(r.states[kj][1]) == 0.0);      // post-jump at the jump time
            CHECK(std::norm(r.states[kj - 1][1]) == 1.0);  // pre-jump just before
        }
    }
}

TEST_CASE("same seed, same trajectory")
{
    const TimeGrid grid(0.0, 1e-3, 1000);
    const LindbladModel rabi(sigma_x(), {sigma_minus()});
    const TrajectoryRecord a = pdp_trajectory(rabi, StateVector::basis(2, 1), grid, 9);
    const TrajectoryRecord b = pdp_trajectory(rabi, StateVector::basis(2, 1), grid, 9);
    CHECK(a.states == b.states);
    CHECK(a.jumps.size() == b.jumps.size());
}

TEST_CASE("first-jump times are exponential with unit mean")
{
    const int n = 10000;
    double sum = 0.0;
    double sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto t = sample_first_jump(damping(), StateVector::basis(2, 1), 1e-3, 40.0, split_seed(3, i));
        REQUIRE(t.has_value());
        sum += *t;
        sum2 += *t * *t;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sum2 / n - mean * mean);
    CHECK(std::abs(mean - 1.0) < 5.0 / std::sqrt(n));
    CHECK(sd == doctest::Approx(1.0).epsilon(0.05));
    CHECK_FALSE(sample_first_jump(damping(), StateVector::basis(2, 0), 1e-3, 1.0, 1).has_value());
}
