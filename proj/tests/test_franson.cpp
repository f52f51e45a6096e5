#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <future>
#include <random>

#include "ephsim/fit.hpp"
#include "ephsim/franson.hpp"

using namespace ephsim;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInvSqrt2 = 0.70710678118654752440;

double closed_form_rate(double phi1, double phi2, double gamma, bool polarization_free = false) {
    const double cross = gamma * std::cos(phi1 - phi2);
    return (polarization_free ? 1.0 - cross : 1.0 + cross) / (1.0 + gamma);
}

std::vector<double> phase_grid(int steps) {
    std::vector<double> values(steps);
    for (int i = 0; i < steps; ++i) values[i] = 2.0 * kPi * i / (steps - 1);
    return values;
}

}  // namespace

TEST_CASE("post-selected source state: +-1/sqrt2 amplitudes, relative phase pi, probability 1/2") {
    const TimeGrid grid{};
    const Eq1Preparation prep = prepare_eq1_state(grid);
    CHECK(prep.probability == doctest::Approx(0.5).epsilon(1e-12));

    const StateVector state = prep.survivors.normalized();
    REQUIRE(state.term_count() == 2);
    const Complex early_late = state.amplitude(FockBasisState::from_occupations(
        {{ModeLabel{kDetectorPort1, 0, Pol::V}, 1},
         {ModeLabel{kDetectorPort2, grid.tau0_bins, Pol::H}, 1}}));
    const Complex late_early = state.amplitude(FockBasisState::from_occupations(
        {{ModeLabel{kDetectorPort1, grid.tau0_bins, Pol::H}, 1},
         {ModeLabel{kDetectorPort2, 0, Pol::V}, 1}}));
    CHECK(std::abs(std::abs(early_late) - kInvSqrt2) < 1e-12);
    CHECK(std::abs(std::abs(late_early) - kInvSqrt2) < 1e-12);
    CHECK(std::abs(early_late + late_early) < 1e-12);  // relative phase pi

    SUBCASE("polarization-free variant matches") {
        const Eq1Preparation free_prep = prepare_eq1_state(grid, true);
        CHECK(free_prep.probability == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(free_prep.survivors.term_count() == 2);
    }
}

TEST_CASE("analytic rate hits the paper's fringe values") {
    ExperimentConfig config;
    config.phi1 = 0.3;
    config.phi2 = 0.3;
    CHECK(analytic_coincidence_rate(config) == doctest::Approx(1.0).epsilon(1e-10));

    config.phi1 = config.phi2 + kPi;
    CHECK(std::abs(analytic_coincidence_rate(config)) < 1e-12);

    config.phi1 = config.phi2 + kPi / 2.0;
    CHECK(analytic_coincidence_rate(config) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("pipeline equals the closed form on random settings") {
    std::mt19937_64 engine(101);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        ExperimentConfig config;
        config.phi1 = angle(engine);
        config.phi2 = angle(engine);
        config.visibility_gamma = unit(engine);
        const double pipeline = analytic_coincidence_rate(config);
        const double closed = closed_form_rate(config.phi1, config.phi2, config.visibility_gamma);
        CHECK(std::abs(pipeline - closed) < 1e-9);
    }
}

TEST_CASE("rate depends only on the phase difference") {
    std::mt19937_64 engine(102);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
    for (int trial = 0; trial < 20; ++trial) {
        ExperimentConfig config;
        config.phi1 = angle(engine);
        config.phi2 = angle(engine);
        config.visibility_gamma = 0.9;
        const double base = analytic_coincidence_rate(config);
        const double shift = angle(engine);
        config.phi1 += shift;
        config.phi2 += shift;
        CHECK(std::abs(analytic_coincidence_rate(config) - base) < 1e-12);
    }
}

TEST_CASE("rates ignore the relative phase of the source photons") {
    std::mt19937_64 engine(103);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
    ExperimentConfig config;
    config.phi1 = 0.7;
    config.phi2 = 0.2;
    const double base = coincidence_breakdown(config).rate;
    for (int trial = 0; trial < 10; ++trial) {
        const double rate = coincidence_breakdown(config, std::nullopt, angle(engine)).rate;
        CHECK(std::abs(rate - base) < 1e-12);
    }
}

TEST_CASE("the routed state matches the short/long two-term form") {
    ExperimentConfig config;

    SUBCASE("zero phases") {
        CHECK(eq2_state_check(config) < 1e-12);
    }
    SUBCASE("phase factor carried by the late-early term") {
        config.phi1 = kPi / 2.0;
        config.phi2 = 0.0;
        CHECK(eq2_state_check(config) < 1e-12);
    }
    SUBCASE("random phases") {
        std::mt19937_64 engine(104);
        std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
        for (int trial = 0; trial < 20; ++trial) {
            config.phi1 = angle(engine);
            config.phi2 = angle(engine);
            CHECK(eq2_state_check(config) < 1e-12);
        }
    }
    SUBCASE("deviation is gauge invariant") {
        config.phi1 = 1.1;
        config.phi2 = 0.4;
        const double base = eq2_state_check(config);
        CHECK(std::abs(eq2_state_check(config, 2.345) - base) < 1e-12);
    }
    SUBCASE("requires the ideal overlap") {
        config.visibility_gamma = 0.9;
        CHECK_THROWS_AS(eq2_state_check(config), std::invalid_argument);
    }
}

TEST_CASE("analyzer delay mismatch kills the fringe and is flagged") {
    ExperimentConfig config;
    config.phi1 = 0.0;
    const RateBreakdown matched = coincidence_breakdown(config);
    CHECK(matched.delay_matched);
    CHECK(matched.rate == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(matched.satellite_prob < 1e-14);  // deterministic routing: no satellites

    double previous = -1.0;
    for (double phi : {0.0, 0.9, 2.2}) {
        config.phi1 = phi;
        const RateBreakdown mismatched = coincidence_breakdown(config, config.grid.tau0_bins - 6);
        CHECK_FALSE(mismatched.delay_matched);
        CHECK(mismatched.middle_prob < 1e-14);
        if (previous >= 0.0) CHECK(std::abs(mismatched.rate - previous) < 1e-12);
        previous = mismatched.rate;
    }
}

TEST_CASE("polarization-free analyzers: anti-fringe with satellite coincidences") {
    ExperimentConfig config;
    config.polarization_free = true;

    std::mt19937_64 engine(105);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
    double satellite_reference = -1.0;
    for (int trial = 0; trial < 10; ++trial) {
        config.phi1 = angle(engine);
        config.phi2 = angle(engine);
        config.visibility_gamma = 1.0;
        const RateBreakdown breakdown = coincidence_breakdown(config);
        CHECK(std::abs(breakdown.rate -
                       closed_form_rate(config.phi1, config.phi2, 1.0, true)) < 1e-9);
        // Satellite coincidences exist here and carry no phase dependence.
        CHECK(breakdown.satellite_prob > 0.01);
        if (satellite_reference >= 0.0)
            CHECK(breakdown.satellite_prob == doctest::Approx(satellite_reference).epsilon(1e-10));
        satellite_reference = breakdown.satellite_prob;
    }

    config.visibility_gamma = 0.5;
    config.phi1 = 1.3;
    config.phi2 = 0.1;
    CHECK(std::abs(coincidence_breakdown(config).rate -
                   closed_form_rate(config.phi1, config.phi2, 0.5, true)) < 1e-9);
}

TEST_CASE("degenerate source photons cancel at the beamsplitter") {
    CHECK(hom_coincidence_probability(TimeGrid{}) < 1e-12);
}

TEST_CASE("phase scans") {
    ExperimentConfig config;
    config.phi2 = 0.0;

    SUBCASE("ideal extremes") {
        const std::vector<double> phis{0.0, kPi};
        const std::vector<CoincidenceRecord> records = run_phase_scan(config, phis);
        REQUIRE(records.size() == 2);
        CHECK(records[0].analytic_rate == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(std::abs(records[1].analytic_rate) < 1e-12);
    }
    SUBCASE("zero shots means zero counts") {
        config.shots_mean = 0.0;
        for (const CoincidenceRecord& record : run_phase_scan(config, phase_grid(8)))
            CHECK(record.counts == 0);
    }
    SUBCASE("empty scan is rejected") {
        CHECK_THROWS_AS(run_phase_scan(config, {}), std::invalid_argument);
    }
}

TEST_CASE("Monte Carlo counts are deterministic across schedules") {
    ExperimentConfig config;
    config.visibility_gamma = 0.861;
    config.seed = 20120611;
    const std::vector<double> phis = phase_grid(25);

    const std::vector<CoincidenceRecord> serial = run_phase_scan(config, phis);
    const std::vector<CoincidenceRecord> repeat = run_phase_scan(config, phis);
    for (std::size_t i = 0; i < phis.size(); ++i) CHECK(serial[i].counts == repeat[i].counts);

    // Same records from per-point evaluation in reversed order and from
    // concurrent workers.
    for (std::size_t i = phis.size(); i-- > 0;) {
        const CoincidenceRecord record = simulate_scan_point(config, phis[i], i);
        CHECK(record.counts == serial[i].counts);
    }
    std::vector<std::future<CoincidenceRecord>> futures;
    for (std::size_t i = 0; i < phis.size(); ++i)
        futures.push_back(std::async(std::launch::async, [&, i] {
            return simulate_scan_point(config, phis[i], i);
        }));
    for (std::size_t i = 0; i < phis.size(); ++i)
        CHECK(futures[i].get().counts == serial[i].counts);

    // A different seed draws different counts somewhere.
    ExperimentConfig other = config;
    other.seed += 1;
    const std::vector<CoincidenceRecord> reseeded = run_phase_scan(other, phis);
    bool any_difference = false;
    for (std::size_t i = 0; i < phis.size(); ++i)
        any_difference = any_difference || reseeded[i].counts != serial[i].counts;
    CHECK(any_difference);
}

TEST_CASE("synthetic scan recovers the overlap factor within fit error") {
    ExperimentConfig config;
    config.visibility_gamma = 0.861;
    config.seed = 424242;
    config.shots_mean = 1000.0;
    const std::vector<double> phis = phase_grid(25);
    const std::vector<CoincidenceRecord> records = run_phase_scan(config, phis);

    FitDataset data;
    for (const CoincidenceRecord& record : records) {
        data.x.push_back(record.phi1);
        data.y.push_back(static_cast<double>(record.counts));
        data.sigma_y.push_back(std::sqrt(std::max<double>(record.counts, 1)));
    }
    const SinusoidFit fit = fit_common_period({data}).front();
    CHECK(std::abs(fit.visibility - 0.861) < 3.0 * fit.visibility_sigma);
}

TEST_CASE("bell verdicts split at 1/sqrt2") {
    CHECK(bell_verdict(0.861, 0.005) == BellVerdict::Violation);
    CHECK(bell_verdict(0.817, 0.005) == BellVerdict::Violation);
    CHECK(bell_verdict(0.75, 0.005) == BellVerdict::Violation);
    CHECK(bell_verdict(0.70, 0.005) == BellVerdict::NoViolation);
    CHECK(bell_verdict(kInvSqrt2, 0.0) == BellVerdict::Inconclusive);
    CHECK(bell_verdict(0.72, 0.02) == BellVerdict::Inconclusive);

    // Wider k widens the inconclusive band.
    CHECK(bell_verdict(0.75, 0.02, 1.0) == BellVerdict::Violation);
    CHECK(bell_verdict(0.75, 0.02, 3.0) == BellVerdict::Inconclusive);

    CHECK_THROWS_AS(bell_verdict(0.8, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(bell_verdict(1.2, 0.1), std::invalid_argument);
}

TEST_CASE("config validation") {
    ExperimentConfig config;
    config.visibility_gamma = 1.2;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);

    config.visibility_gamma = 1.0;
    config.shots_mean = -1.0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);

    config.shots_mean = 0.0;
    config.polarization_free = true;
    config.grid.tau0_bins = 40;  // 2 * 40 >= 64
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}
