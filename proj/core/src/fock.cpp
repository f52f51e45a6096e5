#include "ephsim/fock.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ephsim {

const char* to_string(Pol pol) {
    switch (pol) {
        case Pol::H: return "H";
        case Pol::V: return "V";
        case Pol::None: return "none";
    }
    return "?";
}

void TimeGrid::validate() const {
    if (n_bins < 2) throw std::invalid_argument("TimeGrid: n_bins must be >= 2");
    if (dt_fs <= 0.0) throw std::invalid_argument("TimeGrid: dt_fs must be positive");
    if (tau0_bins < 1 || tau0_bins >= n_bins)
        throw std::invalid_argument("TimeGrid: need 1 <= tau0_bins < n_bins");
}

FockBasisState FockBasisState::from_occupations(std::vector<Entry> occupations) {
    for (const auto& [mode, count] : occupations) {
        if (count < 0) throw std::invalid_argument("FockBasisState: negative photon count");
    }
    std::sort(occupations.begin(), occupations.end(),
              [](const Entry& a, const Entry& b) { return a.first < b.first; });
    FockBasisState out;
    for (const auto& [mode, count] : occupations) {
        if (count == 0) continue;
        if (!out.entries_.empty() && out.entries_.back().first == mode) {
            out.entries_.back().second += count;
        } else {
            out.entries_.emplace_back(mode, count);
        }
    }
    return out;
}

int FockBasisState::count(const ModeLabel& mode) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), mode,
                               [](const Entry& e, const ModeLabel& m) { return e.first < m; });
    return (it != entries_.end() && it->first == mode) ? it->second : 0;
}

int FockBasisState::total_photons() const {
    int total = 0;
    for (const auto& [mode, count] : entries_) total += count;
    return total;
}

int FockBasisState::photons_at_port(int port) const {
    int total = 0;
    for (const auto& [mode, count] : entries_)
        if (mode.port == port) total += count;
    return total;
}

StateVector StateVector::from_terms(TermMap terms) {
    double norm_sq = 0.0;
    for (auto it = terms.begin(); it != terms.end();) {
        if (std::abs(it->second) < kAmplitudePruneEps) {
            it = terms.erase(it);
        } else {
            norm_sq += std::norm(it->second);
            ++it;
        }
    }
    return StateVector(std::move(terms), norm_sq);
}

Complex StateVector::amplitude(const FockBasisState& basis) const {
    auto it = terms_.find(basis);
    return it != terms_.end() ? it->second : Complex{0.0, 0.0};
}

StateVector StateVector::normalized() const {
    if (terms_.empty() || norm_sq_ <= 0.0)
        throw std::domain_error("StateVector: cannot normalize the zero state");
    return scaled(1.0 / std::sqrt(norm_sq_));
}

StateVector StateVector::scaled(Complex factor) const {
    TermMap terms;
    for (const auto& [basis, amp] : terms_) terms.emplace(basis, amp * factor);
    return from_terms(std::move(terms));
}

int StateVector::max_port() const {
    int max_port = -1;
    for (const auto& [basis, amp] : terms_)
        for (const auto& [mode, count] : basis.occupations()) max_port = std::max(max_port, mode.port);
    return max_port;
}

StateVector make_single_photon(const TimeGrid& grid, int port, int bin, Pol pol) {
    grid.validate();
    if (!grid.contains(bin)) throw std::out_of_range("make_single_photon: bin off grid");
    StateVector::TermMap terms;
    terms.emplace(FockBasisState::from_occupations({{ModeLabel{port, bin, pol}, 1}}), Complex{1.0, 0.0});
    return StateVector::from_terms(std::move(terms));
}

namespace {

double factorial(int n) {
    double out = 1.0;
    for (int k = 2; k <= n; ++k) out *= k;
    return out;
}

// Enumerate occupations (n_0..n_{m-1}) with sum <= n_max over the given
// modes, amplitude prod alpha_i^{n_i}/sqrt(n_i!).
void enumerate_coherent_terms(std::span<const std::pair<ModeLabel, Complex>> modes, std::size_t index,
                              int photons_left, Complex amp,
                              std::vector<FockBasisState::Entry>& occupation,
                              StateVector::TermMap& terms) {
    if (index == modes.size()) {
        terms[FockBasisState::from_occupations(occupation)] += amp;
        return;
    }
    const auto& [mode, alpha] = modes[index];
    Complex power{1.0, 0.0};
    for (int n = 0; n <= photons_left; ++n) {
        if (n > 0) power *= alpha;
        Complex term_amp = amp * power / std::sqrt(factorial(n));
        if (n > 0) occupation.emplace_back(mode, n);
        enumerate_coherent_terms(modes, index + 1, photons_left - n, term_amp, occupation, terms);
        if (n > 0) occupation.pop_back();
    }
}

}  // namespace

StateVector make_coherent_background(const TimeGrid& grid,
                                     std::span<const std::pair<ModeLabel, Complex>> mode_amplitudes,
                                     int n_max) {
    grid.validate();
    if (mode_amplitudes.empty())
        throw std::invalid_argument("make_coherent_background: empty mode list");
    if (n_max < 1) throw std::invalid_argument("make_coherent_background: n_max must be >= 1");
    if (n_max > kGlobalPhotonCutoff)
        throw std::invalid_argument("make_coherent_background: n_max exceeds global photon cutoff");
    for (const auto& [mode, alpha] : mode_amplitudes) {
        if (!grid.contains(mode.bin))
            throw std::out_of_range("make_coherent_background: bin off grid");
    }
    StateVector::TermMap terms;
    std::vector<FockBasisState::Entry> occupation;
    enumerate_coherent_terms(mode_amplitudes, 0, n_max, Complex{1.0, 0.0}, occupation, terms);
    return StateVector::from_terms(std::move(terms)).normalized();
}

StateVector make_coherent_product(const TimeGrid& grid, int port,
                                  std::span<const std::pair<int, Complex>> bin_amplitudes,
                                  Pol pol, int n_max) {
    std::vector<std::pair<ModeLabel, Complex>> modes;
    modes.reserve(bin_amplitudes.size());
    for (const auto& [bin, alpha] : bin_amplitudes)
        modes.emplace_back(ModeLabel{port, bin, pol}, alpha);
    return make_coherent_background(grid, modes, n_max);
}

Complex inner_product(const StateVector& a, const StateVector& b) {
    // Iterate over the smaller map.
    const StateVector& small = a.term_count() <= b.term_count() ? a : b;
    const StateVector& large = a.term_count() <= b.term_count() ? b : a;
    Complex out{0.0, 0.0};
    for (const auto& [basis, amp] : small.terms()) {
        auto it = large.terms().find(basis);
        if (it == large.terms().end()) continue;
        const Complex& amp_a = (&small == &a) ? amp : it->second;
        const Complex& amp_b = (&small == &a) ? it->second : amp;
        out += std::conj(amp_a) * amp_b;
    }
    return out;
}

double fidelity(const StateVector& a, const StateVector& b) {
    if (a.is_zero() || b.is_zero()) throw std::domain_error("fidelity: zero state");
    return std::norm(inner_product(a, b)) / (a.norm_sq() * b.norm_sq());
}

StateVector project_onto(const StateVector& state,
                         const std::function<bool(const FockBasisState&)>& predicate) {
    StateVector::TermMap terms;
    for (const auto& [basis, amp] : state.terms())
        if (predicate(basis)) terms.emplace(basis, amp);
    return StateVector::from_terms(std::move(terms));
}

StateVector superpose(Complex c1, const StateVector& a, Complex c2, const StateVector& b) {
    StateVector::TermMap terms;
    for (const auto& [basis, amp] : a.terms()) terms[basis] += c1 * amp;
    for (const auto& [basis, amp] : b.terms()) terms[basis] += c2 * amp;
    return StateVector::from_terms(std::move(terms));
}

}  // namespace ephsim
