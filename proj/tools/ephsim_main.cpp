// Command-line front end: scenario amplitude grids, Franson phase scans,
// Bell-test fitting, the closed-form consistency checks and the full
// two-curve fringe reproduction.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "ephsim/biphoton.hpp"
#include "ephsim/csv.hpp"
#include "ephsim/elements.hpp"
#include "ephsim/fit.hpp"
#include "ephsim/fock.hpp"
#include "ephsim/franson.hpp"
#include "ephsim/report.hpp"
#include "ephsim/tpa.hpp"

namespace {

constexpr double kPi = 3.14159265358979323846;

using namespace ephsim;

Background parse_background(const std::string& text) {
    if (text == "single") return Background{Background::Kind::SinglePhoton, 0.0};
    if (text.rfind("coherent:", 0) == 0) {
        Background bg;
        bg.kind = Background::Kind::Coherent;
        bg.alpha = std::stod(text.substr(9));
        return bg;
    }
    throw CLI::ValidationError("--background", "expected 'single' or 'coherent:<alpha>'");
}

Scenario parse_scenario(const std::string& text) {
    if (text == "pdc-et") return Scenario::PdcEnergyTime;
    if (text == "eph-et") return Scenario::EphEnergyTime;
    if (text == "pdc-tb") return Scenario::PdcTimeBin;
    if (text == "eph-tb") return Scenario::EphTimeBin;
    throw CLI::ValidationError("--scenario", "expected one of pdc-et|eph-et|pdc-tb|eph-tb");
}

double parse_phi2(const std::string& text) {
    if (text == "0") return 0.0;
    if (text == "pi_2") return kPi / 2.0;
    return std::stod(text);
}

std::vector<double> phase_grid(int steps) {
    std::vector<double> values(steps);
    for (int i = 0; i < steps; ++i)
        values[i] = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(steps - 1);
    return values;
}

FitDataset dataset_from_records(const std::vector<CoincidenceRecord>& records) {
    FitDataset data;
    for (const CoincidenceRecord& record : records) {
        data.x.push_back(record.phi1);
        data.y.push_back(static_cast<double>(record.counts));
        // sqrt(N) Poisson sigma with an N >= 1 floor.
        data.sigma_y.push_back(std::sqrt(std::max<double>(record.counts, 1)));
    }
    return data;
}

ReportDataset plot_dataset(const std::string& label, const FitDataset& data,
                           const SinusoidFit& fit) {
    ReportDataset out;
    out.label = label;
    out.x = data.x;
    out.y = data.y;
    out.y_err = data.sigma_y;
    for (double x : data.x) {
        out.model_y.push_back(fit.degenerate
                                  ? fit.offset
                                  : fit.offset + fit.amplitude *
                                                     std::cos(2.0 * kPi * x / fit.period + fit.phase));
    }
    return out;
}

void print_fit_summary(const std::vector<SinusoidFit>& fits,
                       const std::vector<BellVerdict>& verdicts) {
    for (std::size_t k = 0; k < fits.size(); ++k) {
        const SinusoidFit& fit = fits[k];
        std::printf("dataset %zu: visibility = %.4f +- %.4f, period = %.6f, phase = %.4f rad%s",
                    k, fit.visibility, fit.visibility_sigma, fit.period, fit.phase,
                    fit.degenerate ? " [degenerate]" : "");
        if (k < verdicts.size()) std::printf("  -> %s", to_string(verdicts[k]));
        std::printf("\n");
    }
}

int run_amplitudes(const std::string& scenario_name, const std::string& background_text, int bins,
                   int tau0_bins, double tpa_strength, const std::string& out_dir) {
    const TimeGrid grid{bins, 100.0, tau0_bins};
    grid.validate();
    const TpaChannel tpa{kScenarioPortA, kScenarioPortB, tpa_strength, 0};
    const Scenario scenario = parse_scenario(scenario_name);
    const Background background = parse_background(background_text);

    const StateVector state = build_scenario(scenario, background, grid, tpa);
    const BiphotonAmplitudes amplitudes =
        peak_one(compute_amplitudes(state, kScenarioPortA, kScenarioPortB, grid.n_bins));

    std::filesystem::create_directories(out_dir);
    write_amplitude_csv(std::filesystem::path(out_dir) / "a12.csv", amplitudes.a12);
    write_amplitude_csv(std::filesystem::path(out_dir) / "a1c2.csv", amplitudes.a1c2);

    std::printf("%s: %zu state terms, %zu a12 bins, %zu a1c2 bins\n", scenario_name.c_str(),
                state.term_count(), amplitudes.a12.size(), amplitudes.a1c2.size());
    if (amplitudes.higher_sectors_ignored)
        std::printf("note: terms above the pair sector were ignored\n");
    if (amplitudes.empty_two_photon_sector)
        std::printf("warning: no support on the one-photon-per-port sector\n");
    std::printf("wrote %s/a12.csv and %s/a1c2.csv\n", out_dir.c_str(), out_dir.c_str());
    return 0;
}

int run_scan(double phi2, double gamma, int steps, double shots_mean, std::uint64_t seed,
             const std::string& out_dir) {
    if (steps < 2) throw CLI::ValidationError("--steps", "need at least 2 steps");
    ExperimentConfig config;
    config.phi2 = phi2;
    config.visibility_gamma = gamma;
    config.shots_mean = shots_mean;
    config.seed = seed;

    const std::vector<double> phis = phase_grid(steps);
    const std::vector<CoincidenceRecord> records = run_phase_scan(config, phis);

    std::filesystem::create_directories(out_dir);
    const std::filesystem::path path = std::filesystem::path(out_dir) / "scan.csv";
    write_scan_csv(path, records);
    std::printf("wrote %s (%d points, phi2 = %s, gamma = %s)\n", path.c_str(), steps,
                format_double(phi2).c_str(), format_double(gamma).c_str());
    return 0;
}

int run_bell_test(const std::vector<std::string>& files, const std::string& out_dir) {
    std::vector<FitDataset> datasets;
    std::vector<std::vector<CoincidenceRecord>> scans;
    for (const std::string& file : files) {
        scans.push_back(read_scan_csv(file));
        datasets.push_back(dataset_from_records(scans.back()));
    }
    const std::vector<SinusoidFit> fits = fit_common_period(datasets);

    std::vector<BellVerdict> verdicts;
    for (const SinusoidFit& fit : fits)
        verdicts.push_back(bell_verdict(fit.visibility, fit.visibility_sigma));
    print_fit_summary(fits, verdicts);

    if (!out_dir.empty()) {
        Report report;
        report.fits = fits;
        report.verdicts = verdicts;
        for (std::size_t k = 0; k < datasets.size(); ++k)
            report.datasets.push_back(plot_dataset(files[k], datasets[k], fits[k]));
        for (std::size_t k = 0; k < files.size(); ++k)
            report.config_echo["from_" + std::to_string(k)] = files[k];
        emit_report(report, out_dir);
        std::printf("wrote %s/report.json\n", out_dir.c_str());
    }
    return 0;
}

int run_eq_check(const std::string& which) {
    double deviation = 0.0;
    double tolerance = 0.0;
    const TimeGrid grid{};

    if (which == "eq1") {
        tolerance = 1e-12;
        const Eq1Preparation prep = prepare_eq1_state(grid);
        const StateVector normalized = prep.survivors.normalized();
        const auto& terms = normalized.terms();
        if (terms.size() != 2) {
            std::printf("eq1: expected 2 surviving terms, got %zu\n", terms.size());
            return 1;
        }
        const Complex a = terms.begin()->second;
        const Complex b = std::next(terms.begin())->second;
        const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
        deviation = std::abs(std::abs(a) - inv_sqrt2);
        deviation = std::max(deviation, std::abs(std::abs(b) - inv_sqrt2));
        deviation = std::max(deviation, std::abs(a + b));  // relative phase pi
        deviation = std::max(deviation, std::abs(prep.probability - 0.5));
    } else if (which == "eq2") {
        tolerance = 1e-12;
        std::mt19937_64 engine(0xEB2ULL);
        std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
        for (int trial = 0; trial < 20; ++trial) {
            ExperimentConfig config;
            config.phi1 = angle(engine);
            config.phi2 = angle(engine);
            deviation = std::max(deviation, eq2_state_check(config));
        }
    } else if (which == "negative-image") {
        tolerance = 1e-10;
        const TpaChannel tpa{kScenarioPortA, kScenarioPortB, 1.0, 0};
        const Background coherent{Background::Kind::Coherent, 0.3};
        const Background single{Background::Kind::SinglePhoton, 0.0};

        const auto residual_for = [&](Scenario eph, Scenario pdc, const Background& bg) {
            const BiphotonAmplitudes eph_amp =
                peak_one(compute_amplitudes(build_scenario(eph, bg, grid, tpa), kScenarioPortA,
                                            kScenarioPortB, grid.n_bins));
            const BiphotonAmplitudes pdc_amp =
                peak_one(compute_amplitudes(build_scenario(pdc, bg, grid, tpa), kScenarioPortA,
                                            kScenarioPortB, grid.n_bins));
            return negative_image_residual(eph_amp, pdc_amp, 1.0);
        };
        deviation = residual_for(Scenario::EphEnergyTime, Scenario::PdcEnergyTime, coherent);
        deviation = std::max(
            deviation, residual_for(Scenario::EphTimeBin, Scenario::PdcTimeBin, single));
    } else if (which == "hom") {
        tolerance = 1e-12;
        deviation = hom_coincidence_probability(grid);
    } else {
        std::printf("unknown check '%s' (expected eq1|eq2|negative-image|hom)\n", which.c_str());
        return 2;
    }

    const bool ok = deviation < tolerance;
    std::printf("%s: max deviation = %.3e (tolerance %.0e) -> %s\n", which.c_str(), deviation,
                tolerance, ok ? "PASS" : "FAIL");
    return ok ? 0 : 1;
}

int run_fig4(std::uint64_t seed, const std::string& out_dir) {
    constexpr int kSteps = 25;
    constexpr double kShotsMean = 1000.0;

    ExperimentConfig first;
    first.phi2 = 0.0;
    first.visibility_gamma = 0.861;
    first.shots_mean = kShotsMean;
    first.seed = seed;

    ExperimentConfig second = first;
    second.phi2 = kPi / 2.0;
    second.visibility_gamma = 0.817;

    const std::vector<double> phis = phase_grid(kSteps);
    const std::vector<CoincidenceRecord> scan1 = run_phase_scan(first, phis);
    std::vector<CoincidenceRecord> scan2;
    // The second curve continues the point-index stream so the two
    // datasets draw independent counts from one seed.
    for (std::size_t i = 0; i < phis.size(); ++i)
        scan2.push_back(simulate_scan_point(second, phis[i], kSteps + i));

    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    write_scan_csv(dir / "scan_phi2_0.csv", scan1);
    write_scan_csv(dir / "scan_phi2_pi2.csv", scan2);

    const std::vector<FitDataset> datasets{dataset_from_records(scan1),
                                           dataset_from_records(scan2)};
    const std::vector<SinusoidFit> fits = fit_common_period(datasets);
    std::vector<BellVerdict> verdicts;
    for (const SinusoidFit& fit : fits)
        verdicts.push_back(bell_verdict(fit.visibility, fit.visibility_sigma));

    Report report;
    report.fits = fits;
    report.verdicts = verdicts;
    report.datasets.push_back(plot_dataset("phi2=0", datasets[0], fits[0]));
    report.datasets.push_back(plot_dataset("phi2=pi/2", datasets[1], fits[1]));
    report.config_echo = {
        {"seed", std::to_string(seed)},
        {"steps", std::to_string(kSteps)},
        {"shots-mean", format_double(kShotsMean)},
        {"gamma_0", format_double(first.visibility_gamma)},
        {"gamma_1", format_double(second.visibility_gamma)},
        {"phi2_0", format_double(first.phi2)},
        {"phi2_1", format_double(second.phi2)},
    };
    emit_report(report, dir);

    print_fit_summary(fits, verdicts);
    double wrapped = std::remainder(fits[1].phase - fits[0].phase, 2.0 * kPi);
    std::printf("dataset phase offset = %.4f rad (expected +-pi/2)\n", wrapped);
    std::printf("wrote scans and report under %s\n", out_dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete-mode linear-optics simulator for time-bin entangled photon holes"};
    app.require_subcommand(1);

    // amplitudes
    std::string scenario_name, background_text = "single", amp_out;
    int bins = 64, tau0_bins = 26;
    double tpa_strength = 1.0;
    CLI::App* amplitudes = app.add_subcommand("amplitudes", "Biphoton amplitude grids (a12, a1c2)");
    amplitudes->add_option("--scenario", scenario_name, "pdc-et|eph-et|pdc-tb|eph-tb")->required();
    amplitudes->add_option("--background", background_text, "single or coherent:<alpha>");
    amplitudes->add_option("--bins", bins, "time bins on the grid");
    amplitudes->add_option("--tau0-bins", tau0_bins, "early->late separation in bins");
    amplitudes->add_option("--tpa-strength", tpa_strength, "TPA strength in [0,1]");
    amplitudes->add_option("--out", amp_out, "output directory")->required();
    amplitudes->set_config("--config");

    // franson-scan
    std::string phi2_text = "0", scan_out;
    double gamma = 1.0, shots_mean = 1000.0;
    int steps = 25;
    std::uint64_t seed = 42;
    CLI::App* scan = app.add_subcommand("franson-scan", "Coincidence-rate scan over phi1");
    scan->add_option("--phi2", phi2_text, "0, pi_2 or a value in radians");
    scan->add_option("--gamma", gamma, "mode-overlap visibility factor in [0,1]");
    scan->add_option("--steps", steps, "number of phi1 settings over one 2*pi turn");
    scan->add_option("--shots-mean", shots_mean, "mean coincidences per setting at peak");
    scan->add_option("--seed", seed, "RNG seed");
    scan->add_option("--out", scan_out, "output directory")->required();
    scan->set_config("--config");

    // bell-test
    std::vector<std::string> from_files;
    std::string bell_out;
    CLI::App* bell = app.add_subcommand("bell-test", "Joint common-period fit plus Bell verdicts");
    bell->add_option("--from", from_files, "scan CSV files")->required()->expected(-1);
    bell->add_option("--out", bell_out, "optional report directory");
    bell->set_config("--config");

    // eq-check
    std::string which_check;
    CLI::App* eq = app.add_subcommand("eq-check", "Closed-form consistency checks");
    eq->add_option("check", which_check, "eq1|eq2|negative-image|hom")->required();

    // fig4
    std::uint64_t fig4_seed = 42;
    std::string fig4_out;
    CLI::App* fig4 = app.add_subcommand("fig4", "Two-curve fringe reproduction with joint fit");
    fig4->add_option("--seed", fig4_seed, "RNG seed");
    fig4->add_option("--out", fig4_out, "output directory")->required();
    fig4->set_config("--config");

    CLI11_PARSE(app, argc, argv);

    try {
        if (amplitudes->parsed())
            return run_amplitudes(scenario_name, background_text, bins, tau0_bins, tpa_strength,
                                  amp_out);
        if (scan->parsed())
            return run_scan(parse_phi2(phi2_text), gamma, steps, shots_mean, seed, scan_out);
        if (bell->parsed()) return run_bell_test(from_files, bell_out);
        if (eq->parsed()) return run_eq_check(which_check);
        if (fig4->parsed()) return run_fig4(fig4_seed, fig4_out);
    } catch (const std::exception& error) {
        std::fprintf(stderr, "error: %s\n", error.what());
        return 1;
    }
    return 0;
}
