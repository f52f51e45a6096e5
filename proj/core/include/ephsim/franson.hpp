#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ephsim/elements.hpp"
#include "ephsim/fock.hpp"

namespace ephsim {

// Bell-inequality visibility threshold for sinusoidal two-photon
// fringes (Clauser-Horne type).
inline constexpr double kBellVisibilityThreshold = 0.70710678118654752440;  // 1/sqrt2

// Full experiment: two orthogonally polarized photons separated by tau0
// mixed at a 50/50 beamsplitter, one polarization-based unbalanced MZ
// analyzer per output port, post-selection on one photon per detector.
struct ExperimentConfig {
    TimeGrid grid{};
    double phi1 = 0.0;  // analyzer 1 long-arm phase
    double phi2 = 0.0;  // analyzer 2 long-arm phase
    // Mode-overlap distinguishability factor scaling the interference
    // cross-term; 1 reproduces the ideal law exactly.
    double visibility_gamma = 1.0;
    double shots_mean = 1000.0;  // mean coincidences per setting at peak
    std::uint64_t seed = 42;
    // Shih-Alley analogy mode: unpolarized time-bin qubits analyzed by
    // plain (non-polarizing) unbalanced MZs.
    bool polarization_free = false;
    double dark_rate = 0.0;  // reserved hook, not used by the model

    void validate() const;
};

// Detector ports of the standard experiment.
inline constexpr int kDetectorPort1 = 0;
inline constexpr int kDetectorPort2 = 1;

struct Eq1Preparation {
    // Unnormalized post-selected survivors; norm_sq is the post-selection
    // probability when the inputs were normalized.
    StateVector survivors;
    double probability = 0.0;
};

// Sends the early photon (V-polarized, bin 0) into port 0 and the late
// photon (H-polarized, bin tau0) into port 1, mixes them at a 50/50
// beamsplitter and post-selects one photon per output port. The
// normalized survivor is the antisymmetric time-bin pair state (two
// terms of magnitude 1/sqrt2 with relative phase pi). The early photon
// carries V so the analyzers' H->short / V->long routing brings both
// post-selected photons to the same (middle) bin. early_photon_phase
// multiplies the early input photon before the beamsplitter.
Eq1Preparation prepare_eq1_state(const TimeGrid& grid, bool polarization_free = false,
                                 double early_photon_phase = 0.0);

// Coincidence-rate decomposition of one phase setting.
struct RateBreakdown {
    double middle_prob = 0.0;     // same-bin coincidence at the interfering bin
    double satellite_prob = 0.0;  // remaining one-per-port coincidences
    double peak_prob = 0.0;       // matched-delay fringe maximum at the same gamma
    double rate = 0.0;            // middle_prob / peak_prob (peak normalized to 1)
    bool delay_matched = true;    // false flags an analyzer/source mismatch
    int middle_bin = 0;
};

// Runs the state pipeline (preparation, both analyzers, middle-bin
// post-selection) with the interference cross-term scaled by
// visibility_gamma. analyzer_delay_bins overrides the matched delay;
// a mismatch makes the rate phase-independent and flags the breakdown.
RateBreakdown coincidence_breakdown(const ExperimentConfig& config,
                                    std::optional<int> analyzer_delay_bins = std::nullopt,
                                    double early_photon_phase = 0.0);

// Pipeline coincidence rate normalized to fringe peak 1. Agrees with
// (1 + gamma cos(phi1 - phi2)) / (1 + gamma) to 1e-9 for the standard
// experiment.
double analytic_coincidence_rate(const ExperimentConfig& config);

// Verifies the post-selected state after PBS routing but before the
// polarizers against (|S,L> - e^{i(phi1-phi2)} |L,S>)/sqrt2 up to a
// global phase, where S/L are the short/long-arm kets at the middle bin.
// Returns the max amplitude deviation. Requires visibility_gamma = 1.
// early_photon_phase multiplies the pipeline state by a global phase
// and must leave the deviation unchanged.
double eq2_state_check(const ExperimentConfig& config, double early_photon_phase = 0.0);

// Degenerate source check: two indistinguishable photons (same bin,
// same polarization, one per input port) on a 50/50 beamsplitter.
// Returns the one-photon-per-port coincidence probability, which
// vanishes by Hong-Ou-Mandel interference.
double hom_coincidence_probability(const TimeGrid& grid);

struct CoincidenceRecord {
    double phi1 = 0.0;
    double phi2 = 0.0;
    double analytic_rate = 0.0;
    std::int64_t counts = 0;
    double shots_mean = 0.0;
};

// One scan point: analytic rate plus a Poisson draw with mean
// shots_mean * rate. The RNG stream is derived from (seed, index), so
// results do not depend on evaluation order or parallel schedule.
CoincidenceRecord simulate_scan_point(const ExperimentConfig& config, double phi1,
                                      std::uint64_t index);

std::vector<CoincidenceRecord> run_phase_scan(const ExperimentConfig& config,
                                              std::span<const double> phi1_values);

enum class BellVerdict { Violation, NoViolation, Inconclusive };

const char* to_string(BellVerdict verdict);

// VIOLATION if visibility - k*uncertainty > 1/sqrt2, NO_VIOLATION if
// visibility + k*uncertainty < 1/sqrt2, else INCONCLUSIVE.
BellVerdict bell_verdict(double visibility, double uncertainty, double k = 1.0);

}  // namespace ephsim
