#include "ephsim/franson.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

namespace ephsim {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr Complex kI{0.0, 1.0};

}  // namespace

void ExperimentConfig::validate() const {
    grid.validate();
    if (visibility_gamma < 0.0 || visibility_gamma > 1.0)
        throw std::invalid_argument("ExperimentConfig: visibility_gamma must be in [0, 1]");
    if (shots_mean < 0.0) throw std::invalid_argument("ExperimentConfig: shots_mean must be >= 0");
    if (polarization_free && 2 * grid.tau0_bins >= grid.n_bins)
        throw std::invalid_argument(
            "ExperimentConfig: polarization-free analyzers need 2*tau0_bins < n_bins");
}

Eq1Preparation prepare_eq1_state(const TimeGrid& grid, bool polarization_free,
                                 double early_photon_phase) {
    grid.validate();
    const Pol early_pol = polarization_free ? Pol::None : Pol::V;
    const Pol late_pol = polarization_free ? Pol::None : Pol::H;

    // Joint input: early photon in port 0 at bin 0, late photon in port 1
    // at bin tau0.
    StateVector::TermMap input;
    input.emplace(
        FockBasisState::from_occupations({{ModeLabel{kDetectorPort1, 0, early_pol}, 1},
                                          {ModeLabel{kDetectorPort2, grid.tau0_bins, late_pol}, 1}}),
        std::exp(kI * early_photon_phase));
    StateVector state = StateVector::from_terms(std::move(input));

    state = apply_element(state, LinearElement::beamsplitter_50_50(kDetectorPort1, kDetectorPort2),
                          grid);
    StateVector survivors = project_onto(state, [](const FockBasisState& basis) {
        return basis.photons_at_port(kDetectorPort1) == 1 &&
               basis.photons_at_port(kDetectorPort2) == 1;
    });
    return {survivors, survivors.norm_sq()};
}

namespace {

// Both analyzers applied to one state component. The polarizer of
// analyzer 2 sits at -45 degrees; together with the symmetric
// beamsplitter convention this reproduces the 1 + cos(phi1 - phi2)
// fringe of the antisymmetric input.
StateVector propagate_through_analyzers(const StateVector& component,
                                        const ExperimentConfig& config, int delay_bins) {
    const TimeGrid& grid = config.grid;
    if (!config.polarization_free) {
        const FransonAnalyzer analyzer1{kDetectorPort1, delay_bins, config.phi1, kPi / 4.0};
        const FransonAnalyzer analyzer2{kDetectorPort2, delay_bins, config.phi2, -kPi / 4.0};
        StateVector out = apply_franson_analyzer(component, analyzer1, grid);
        return apply_franson_analyzer(out, analyzer2, grid);
    }
    // Shih-Alley analogy: plain unbalanced MZs, one unmonitored output
    // arm each; photons left in an arm fail post-selection later.
    auto mz = [&](const StateVector& in, int port, int aux, double phi) {
        const std::vector<LinearElement> chain{
            LinearElement::beamsplitter_50_50(port, aux),
            LinearElement::delay(aux, delay_bins),
            LinearElement::phase(aux, std::nullopt, phi),
            LinearElement::beamsplitter_50_50(port, aux),
        };
        return apply_elements(in, chain, grid);
    };
    const int aux1 = std::max(component.max_port(), kDetectorPort2) + 1;
    StateVector out = mz(component, kDetectorPort1, aux1, config.phi1);
    return mz(out, kDetectorPort2, aux1 + 1, config.phi2);
}

struct CoincidenceProbs {
    double middle = 0.0;
    double satellites = 0.0;
};

// Propagates the two Eq. (1) components separately and recombines with
// the cross-term scaled by gamma (partial mode overlap).
CoincidenceProbs coincidence_probs(const ExperimentConfig& config, int delay_bins,
                                   double early_photon_phase) {
    const Eq1Preparation prep =
        prepare_eq1_state(config.grid, config.polarization_free, early_photon_phase);
    const StateVector source = prep.survivors.normalized();
    if (source.term_count() != 2)
        throw std::logic_error("coincidence_probs: expected a two-term post-selected state");

    std::vector<StateVector> components;
    for (const auto& [basis, amp] : source.terms()) {
        StateVector::TermMap one;
        one.emplace(basis, amp);
        components.push_back(
            propagate_through_analyzers(StateVector::from_terms(std::move(one)), config, delay_bins));
    }

    std::set<FockBasisState> patterns;
    for (const StateVector& component : components)
        for (const auto& [basis, amp] : component.terms()) patterns.insert(basis);

    const int middle_bin = config.grid.tau0_bins;
    CoincidenceProbs probs;
    for (const FockBasisState& pattern : patterns) {
        if (pattern.total_photons() != 2) continue;
        if (pattern.photons_at_port(kDetectorPort1) != 1 ||
            pattern.photons_at_port(kDetectorPort2) != 1)
            continue;
        const Complex a = components[0].amplitude(pattern);
        const Complex b = components[1].amplitude(pattern);
        const double p = std::max(
            0.0, std::norm(a) + std::norm(b) +
                     2.0 * config.visibility_gamma * (a * std::conj(b)).real());
        int bin1 = 0, bin2 = 0;
        for (const auto& [mode, count] : pattern.occupations()) {
            if (mode.port == kDetectorPort1) bin1 = mode.bin;
            if (mode.port == kDetectorPort2) bin2 = mode.bin;
        }
        if (bin1 == middle_bin && bin2 == middle_bin)
            probs.middle += p;
        else
            probs.satellites += p;
    }
    return probs;
}

}  // namespace

RateBreakdown coincidence_breakdown(const ExperimentConfig& config,
                                    std::optional<int> analyzer_delay_bins,
                                    double early_photon_phase) {
    config.validate();
    const int matched_delay = config.grid.tau0_bins;
    const int delay = analyzer_delay_bins.value_or(matched_delay);

    RateBreakdown out;
    out.middle_bin = config.grid.tau0_bins;
    out.delay_matched = (delay == matched_delay);

    const CoincidenceProbs probs = coincidence_probs(config, delay, early_photon_phase);
    out.middle_prob = probs.middle;
    out.satellite_prob = probs.satellites;

    // Fringe maximum with matched delay at the same gamma; the fringe
    // peaks at phi1 - phi2 = 0 or pi depending on the analyzer scheme.
    ExperimentConfig peak_config = config;
    peak_config.phi2 = 0.0;
    peak_config.phi1 = 0.0;
    const double peak_at_zero = coincidence_probs(peak_config, matched_delay, 0.0).middle;
    peak_config.phi1 = kPi;
    const double peak_at_pi = coincidence_probs(peak_config, matched_delay, 0.0).middle;
    out.peak_prob = std::max(peak_at_zero, peak_at_pi);
    if (out.peak_prob <= 0.0)
        throw std::logic_error("coincidence_breakdown: vanishing fringe peak");
    out.rate = out.middle_prob / out.peak_prob;
    return out;
}

double analytic_coincidence_rate(const ExperimentConfig& config) {
    return coincidence_breakdown(config).rate;
}

double eq2_state_check(const ExperimentConfig& config, double early_photon_phase) {
    config.validate();
    if (config.visibility_gamma != 1.0)
        throw std::invalid_argument("eq2_state_check: requires visibility_gamma = 1");
    if (config.polarization_free)
        throw std::invalid_argument("eq2_state_check: requires the polarization-based analyzers");

    const TimeGrid& grid = config.grid;
    const StateVector source =
        prepare_eq1_state(grid, false, early_photon_phase).survivors.normalized();

    // MZ stages only (PBS routing, delay, phase), no polarizers.
    const int delay = grid.tau0_bins;
    const FransonAnalyzer analyzer1{kDetectorPort1, delay, config.phi1, kPi / 4.0};
    const FransonAnalyzer analyzer2{kDetectorPort2, delay, config.phi2, -kPi / 4.0};
    StateVector state = apply_elements(source, analyzer1.mz_stage(2), grid);
    state = apply_elements(state, analyzer2.mz_stage(3), grid);

    // Short-arm photons exit H, long-arm photons exit V, both at the
    // middle bin.
    const int mid = grid.tau0_bins;
    const FockBasisState sl = FockBasisState::from_occupations(
        {{ModeLabel{kDetectorPort1, mid, Pol::H}, 1}, {ModeLabel{kDetectorPort2, mid, Pol::V}, 1}});
    const FockBasisState ls = FockBasisState::from_occupations(
        {{ModeLabel{kDetectorPort1, mid, Pol::V}, 1}, {ModeLabel{kDetectorPort2, mid, Pol::H}, 1}});

    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    StateVector::TermMap target_terms;
    target_terms.emplace(sl, Complex{inv_sqrt2, 0.0});
    target_terms.emplace(ls, -std::exp(kI * (config.phi1 - config.phi2)) * inv_sqrt2);
    const StateVector target = StateVector::from_terms(std::move(target_terms));

    // Align the global phase on the largest pipeline amplitude.
    Complex reference_state{0.0, 0.0}, reference_target{0.0, 0.0};
    double best = -1.0;
    for (const auto& [basis, amp] : state.terms()) {
        if (std::abs(amp) > best && std::abs(target.amplitude(basis)) > 0.0) {
            best = std::abs(amp);
            reference_state = amp;
            reference_target = target.amplitude(basis);
        }
    }
    if (best < 0.0) return 1.0;  // no overlap at all
    const Complex rotation = reference_target / reference_state;

    double deviation = 0.0;
    std::set<FockBasisState> keys;
    for (const auto& [basis, amp] : state.terms()) keys.insert(basis);
    for (const auto& [basis, amp] : target.terms()) keys.insert(basis);
    for (const FockBasisState& basis : keys)
        deviation =
            std::max(deviation, std::abs(state.amplitude(basis) * rotation - target.amplitude(basis)));
    return deviation;
}

double hom_coincidence_probability(const TimeGrid& grid) {
    grid.validate();
    StateVector::TermMap input;
    input.emplace(FockBasisState::from_occupations({{ModeLabel{kDetectorPort1, 0, Pol::H}, 1},
                                                    {ModeLabel{kDetectorPort2, 0, Pol::H}, 1}}),
                  Complex{1.0, 0.0});
    StateVector state = apply_element(
        StateVector::from_terms(std::move(input)),
        LinearElement::beamsplitter_50_50(kDetectorPort1, kDetectorPort2), grid);
    return project_onto(state,
                        [](const FockBasisState& basis) {
                            return basis.photons_at_port(kDetectorPort1) == 1 &&
                                   basis.photons_at_port(kDetectorPort2) == 1;
                        })
        .norm_sq();
}

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

CoincidenceRecord simulate_scan_point(const ExperimentConfig& config, double phi1,
                                      std::uint64_t index) {
    ExperimentConfig point_config = config;
    point_config.phi1 = phi1;
    const double rate = analytic_coincidence_rate(point_config);

    CoincidenceRecord record;
    record.phi1 = phi1;
    record.phi2 = config.phi2;
    record.analytic_rate = rate;
    record.shots_mean = config.shots_mean;
    const double mean = config.shots_mean * rate;
    if (mean > 0.0) {
        std::mt19937_64 engine(mix_seed(config.seed, index));
        record.counts = std::poisson_distribution<std::int64_t>(mean)(engine);
    }
    return record;
}

std::vector<CoincidenceRecord> run_phase_scan(const ExperimentConfig& config,
                                              std::span<const double> phi1_values) {
    if (phi1_values.empty()) throw std::invalid_argument("run_phase_scan: empty phi1 list");
    std::vector<CoincidenceRecord> records;
    records.reserve(phi1_values.size());
    for (std::size_t i = 0; i < phi1_values.size(); ++i)
        records.push_back(simulate_scan_point(config, phi1_values[i], i));
    return records;
}

const char* to_string(BellVerdict verdict) {
    switch (verdict) {
        case BellVerdict::Violation: return "VIOLATION";
        case BellVerdict::NoViolation: return "NO_VIOLATION";
        case BellVerdict::Inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

BellVerdict bell_verdict(double visibility, double uncertainty, double k) {
    if (visibility < 0.0 || visibility > 1.0)
        throw std::invalid_argument("bell_verdict: visibility must be in [0, 1]");
    if (uncertainty < 0.0) throw std::invalid_argument("bell_verdict: negative uncertainty");
    if (visibility - k * uncertainty > kBellVisibilityThreshold) return BellVerdict::Violation;
    if (visibility + k * uncertainty < kBellVisibilityThreshold) return BellVerdict::NoViolation;
    return BellVerdict::Inconclusive;
}

}  // namespace ephsim
