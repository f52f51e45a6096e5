#pragma once

#include <compare>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <utility>
#include <vector>

namespace ephsim {

using Complex = std::complex<double>;

// Amplitudes below this magnitude are dropped from sparse states.
inline constexpr double kAmplitudePruneEps = 1e-14;

// Photon-number truncation: n_max defaults to 4; the hard ceiling guards
// against runaway basis sizes in multi-bin coherent products.
inline constexpr int kDefaultPhotonCutoff = 4;
inline constexpr int kGlobalPhotonCutoff = 8;

enum class Pol : std::uint8_t {
    H = 0,
    V = 1,
    // Modes with no polarization label, for experiments declared
    // polarization-free.
    None = 2,
};

const char* to_string(Pol pol);

// One optical mode: (spatial port, time bin, polarization). The member
// order is the canonical sort order for occupation maps.
struct ModeLabel {
    int port = 0;
    int bin = 0;
    Pol pol = Pol::None;

    auto operator<=>(const ModeLabel&) const = default;
};

// Uniform time-bin grid. Bins are dimensionless indices 0..n_bins-1; the
// physical spacing is dt_fs. tau0_bins is the early->late separation.
// Defaults encode tau0 = 2.6 ps and a 200 fs coherence time (2 bins).
struct TimeGrid {
    int n_bins = 64;
    double dt_fs = 100.0;
    int tau0_bins = 26;

    double tau0_fs() const { return tau0_bins * dt_fs; }
    bool contains(int bin) const { return bin >= 0 && bin < n_bins; }
    // Throws std::invalid_argument unless 1 <= tau0_bins < n_bins and
    // dt_fs > 0.
    void validate() const;
};

// Occupation-number basis element: sorted (mode -> count) pairs with no
// zero counts. Equality is structural.
class FockBasisState {
  public:
    using Entry = std::pair<ModeLabel, int>;

    FockBasisState() = default;  // vacuum

    // Merges duplicate modes, drops zero counts, sorts canonically.
    // Throws std::invalid_argument on negative counts.
    static FockBasisState from_occupations(std::vector<Entry> occupations);

    const std::vector<Entry>& occupations() const { return entries_; }
    int count(const ModeLabel& mode) const;
    int total_photons() const;
    // Photons at a port, summed over bins and polarizations.
    int photons_at_port(int port) const;
    bool is_vacuum() const { return entries_.empty(); }

    auto operator<=>(const FockBasisState&) const = default;

  private:
    std::vector<Entry> entries_;
};

// Sparse complex superposition over FockBasisState. Immutable after
// construction; every operation returns a new value, so states can be
// shared freely across threads. norm_sq is cached at construction and
// may be < 1 after trace-decreasing channels (TPA, post-selection).
class StateVector {
  public:
    using TermMap = std::map<FockBasisState, Complex>;

    StateVector() = default;  // zero state

    // Prunes amplitudes below kAmplitudePruneEps and caches the norm.
    static StateVector from_terms(TermMap terms);

    const TermMap& terms() const { return terms_; }
    double norm_sq() const { return norm_sq_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t term_count() const { return terms_.size(); }

    Complex amplitude(const FockBasisState& basis) const;

    // Throws std::domain_error on the zero state.
    StateVector normalized() const;
    StateVector scaled(Complex factor) const;

    // Largest port index appearing in any term, or -1 for vacuum/zero.
    int max_port() const;

  private:
    explicit StateVector(TermMap terms, double norm_sq)
        : terms_(std::move(terms)), norm_sq_(norm_sq) {}

    TermMap terms_;
    double norm_sq_ = 0.0;
};

// Normalized one-photon state in the given mode. Throws
// std::out_of_range if bin is off-grid.
StateVector make_single_photon(const TimeGrid& grid, int port, int bin, Pol pol);

// Multi-bin coherent product at one port: amplitudes proportional to
// prod alpha_b^{n_b}/sqrt(n_b!), truncated at total photon number n_max
// and renormalized over the truncated space.
StateVector make_coherent_product(const TimeGrid& grid, int port,
                                  std::span<const std::pair<int, Complex>> bin_amplitudes,
                                  Pol pol, int n_max = kDefaultPhotonCutoff);

// Generalization over arbitrary modes (used for joint two-beam
// backgrounds where the truncation must apply to the total).
StateVector make_coherent_background(const TimeGrid& grid,
                                     std::span<const std::pair<ModeLabel, Complex>> mode_amplitudes,
                                     int n_max = kDefaultPhotonCutoff);

// Conjugate-linear in the first argument; inner_product(a, a) == norm_sq(a).
Complex inner_product(const StateVector& a, const StateVector& b);

// |<a|b>|^2 over both norms; throws std::domain_error if either is zero.
double fidelity(const StateVector& a, const StateVector& b);

// Keeps only terms satisfying the predicate. Does NOT renormalize: the
// returned norm_sq is the post-selection probability when the input was
// normalized.
StateVector project_onto(const StateVector& state,
                         const std::function<bool(const FockBasisState&)>& predicate);

// c1*a + c2*b, term by term.
StateVector superpose(Complex c1, const StateVector& a, Complex c2, const StateVector& b);

}  // namespace ephsim
