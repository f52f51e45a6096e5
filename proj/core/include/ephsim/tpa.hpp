#pragma once

#include "ephsim/fock.hpp"

namespace ephsim {

// Idealized two-photon-absorption channel between two beams: basis terms
// containing at least one photon in each beam within the simultaneity
// window are removed (strength 1) or attenuated. With strength 1 and
// window 0 the channel is exactly a projector.
struct TpaChannel {
    int port_a = 0;
    int port_b = 1;
    double strength = 1.0;  // in [0, 1]; 1 = infinitely strong TPA
    int window_bins = 0;    // half-width of the simultaneity window

    // Throws std::invalid_argument on out-of-range fields.
    void validate() const;
};

// Per basis term, p = sum over bin pairs (t, t') with |t - t'| <=
// window_bins of min(n_a(t), n_b(t')), polarization-blind; the amplitude
// is multiplied by (1 - strength)^p. No renormalization: downstream
// analyses decide whether the lost norm is absorption or post-selection.
StateVector apply_tpa(const StateVector& state, const TpaChannel& channel);

// Number of simultaneous pairs the channel sees in one basis term.
int tpa_pair_count(const FockBasisState& basis, const TpaChannel& channel);

// True iff apply_tpa leaves the state unchanged term-by-term within
// 1e-12. Only meaningful for the projector case; throws
// std::invalid_argument when strength < 1.
bool is_projector_fixed_point(const StateVector& state, const TpaChannel& channel);

}  // namespace ephsim
