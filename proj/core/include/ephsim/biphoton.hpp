#pragma once

#include <map>

#include "ephsim/fock.hpp"
#include "ephsim/tpa.hpp"

namespace ephsim {

enum class AmpNormalization { Raw, PeakOne };

// The two biphoton amplitude functions of a state across two detector
// ports: a12 keyed by the detection-bin difference (one photon in each
// port at bins differing by delta), a1c2 keyed by the common bin (one
// photon in each port at the same bin T).
struct BiphotonAmplitudes {
    std::map<int, Complex> a12;
    std::map<int, Complex> a1c2;
    AmpNormalization normalization = AmpNormalization::Raw;
    // Set when some term carried more than two photons across the port
    // pair; such terms are ignored.
    bool higher_sectors_ignored = false;
    // Set when the state had no support on the one-per-port sector.
    bool empty_two_photon_sector = false;
    // Grid size the amplitudes were computed on (0 = unknown); used to
    // detect grid mismatches between comparands.
    int grid_bins = 0;

    double peak_abs_a12() const;
    double peak_abs_a1c2() const;
};

// Extracts both amplitude functions from the one-photon-per-port sector.
// Polarization is traced by magnitude aggregation; contributions at
// different absolute times with the same difference are reduced
// root-mean-square, so a stationary background maps to a flat profile
// and a single contribution keeps its complex amplitude.
BiphotonAmplitudes compute_amplitudes(const StateVector& state, int port1, int port2,
                                      int grid_bins = 0);

// Each populated map rescaled so its peak magnitude is 1 (identically
// zero maps are left alone). Idempotent; preserves ratios between bins.
BiphotonAmplitudes peak_one(const BiphotonAmplitudes& amplitudes);

// Max over the union support of | |a12_eph| - bg_level * (1 - |a12_pdc|) |,
// quantifying the negative-image relation at grid resolution. Both
// inputs must be PeakOne-normalized on a common grid.
double negative_image_residual(const BiphotonAmplitudes& eph, const BiphotonAmplitudes& pdc,
                               double bg_level);

// The four canonical source scenarios: photon-pair sources (PDC) and
// their photon-hole counterparts (EPH) in energy-time and time-bin form.
enum class Scenario {
    PdcEnergyTime,  // pair created at one uncertain common time
    EphEnergyTime,  // cw background with same-time pairs absorbed
    PdcTimeBin,     // (|e,e> + |l,l>)/sqrt2
    EphTimeBin,     // two-bin background with same-bin pairs absorbed
};

struct Background {
    enum class Kind { Coherent, SinglePhoton };
    Kind kind = Kind::SinglePhoton;
    double alpha = 0.3;  // per-bin coherent amplitude for Kind::Coherent
};

// Source beams occupy ports 0 and 1; time-bin scenarios use bins
// {0, tau0_bins}. EPH scenarios require channel strength > 0. Coherent
// energy-time backgrounds are truncated at the pair sector to keep the
// 64-bin basis tractable.
StateVector build_scenario(Scenario scenario, const Background& background, const TimeGrid& grid,
                           const TpaChannel& tpa);

// Port of beam a and beam b in built scenarios.
inline constexpr int kScenarioPortA = 0;
inline constexpr int kScenarioPortB = 1;

}  // namespace ephsim
