#include "ephsim/tpa.hpp"

#include <cmath>
#include <cstdlib>
#include <map>
#include <stdexcept>

namespace ephsim {

void TpaChannel::validate() const {
    if (port_a == port_b) throw std::invalid_argument("TpaChannel: ports must differ");
    if (strength < 0.0 || strength > 1.0)
        throw std::invalid_argument("TpaChannel: strength must be in [0, 1]");
    if (window_bins < 0) throw std::invalid_argument("TpaChannel: window_bins must be >= 0");
}

int tpa_pair_count(const FockBasisState& basis, const TpaChannel& channel) {
    // Occupation per bin, polarization-blind.
    std::map<int, int> at_a, at_b;
    for (const auto& [mode, count] : basis.occupations()) {
        if (mode.port == channel.port_a) at_a[mode.bin] += count;
        if (mode.port == channel.port_b) at_b[mode.bin] += count;
    }
    int pairs = 0;
    for (const auto& [t, n_a] : at_a)
        for (const auto& [t_prime, n_b] : at_b)
            if (std::abs(t - t_prime) <= channel.window_bins) pairs += std::min(n_a, n_b);
    return pairs;
}

StateVector apply_tpa(const StateVector& state, const TpaChannel& channel) {
    channel.validate();
    StateVector::TermMap out;
    for (const auto& [basis, amp] : state.terms()) {
        const int p = tpa_pair_count(basis, channel);
        if (p == 0) {
            out.emplace(basis, amp);
            continue;
        }
        if (channel.strength == 1.0) continue;  // term removed
        double factor = 1.0;
        for (int k = 0; k < p; ++k) factor *= 1.0 - channel.strength;
        out.emplace(basis, amp * factor);
    }
    return StateVector::from_terms(std::move(out));
}

bool is_projector_fixed_point(const StateVector& state, const TpaChannel& channel) {
    channel.validate();
    if (channel.strength < 1.0)
        throw std::invalid_argument("is_projector_fixed_point: channel strength must be 1");
    const StateVector punched = apply_tpa(state, channel);
    if (punched.term_count() != state.term_count()) return false;
    for (const auto& [basis, amp] : state.terms())
        if (std::abs(punched.amplitude(basis) - amp) > 1e-12) return false;
    return true;
}

}  // namespace ephsim
