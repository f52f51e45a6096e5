#include "ephsim/biphoton.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace ephsim {

namespace {

double peak_abs(const std::map<int, Complex>& values) {
    double peak = 0.0;
    for (const auto& [key, value] : values) peak = std::max(peak, std::abs(value));
    return peak;
}

// Aggregate a group of contributing amplitudes: a single contribution
// keeps its complex value, several are reduced to the root-sum-square
// magnitude (polarization trace).
Complex aggregate_rss(const std::vector<Complex>& contributions) {
    if (contributions.size() == 1) return contributions.front();
    double sum_sq = 0.0;
    for (const Complex& c : contributions) sum_sq += std::norm(c);
    return Complex{std::sqrt(sum_sq), 0.0};
}

}  // namespace

double BiphotonAmplitudes::peak_abs_a12() const { return peak_abs(a12); }
double BiphotonAmplitudes::peak_abs_a1c2() const { return peak_abs(a1c2); }

BiphotonAmplitudes compute_amplitudes(const StateVector& state, int port1, int port2,
                                      int grid_bins) {
    if (port1 == port2) throw std::invalid_argument("compute_amplitudes: ports must differ");
    BiphotonAmplitudes out;
    out.grid_bins = grid_bins;

    // (t1, t2) -> contributions from distinct polarization assignments.
    std::map<std::pair<int, int>, std::vector<Complex>> pair_terms;
    bool any_pair = false;
    for (const auto& [basis, amp] : state.terms()) {
        const int n1 = basis.photons_at_port(port1);
        const int n2 = basis.photons_at_port(port2);
        if (n1 + n2 > 2) {
            out.higher_sectors_ignored = true;
            continue;
        }
        if (n1 != 1 || n2 != 1) continue;
        // Exactly one photon in each port; anything in other ports keeps
        // the term out of the pair sector.
        if (basis.total_photons() != 2) continue;
        int t1 = 0, t2 = 0;
        for (const auto& [mode, count] : basis.occupations()) {
            if (mode.port == port1) t1 = mode.bin;
            if (mode.port == port2) t2 = mode.bin;
        }
        pair_terms[{t1, t2}].push_back(amp);
        any_pair = true;
    }
    out.empty_two_photon_sector = !any_pair;
    if (!any_pair) return out;

    // Same-bin amplitudes, keyed by the common bin.
    for (const auto& [bins, contributions] : pair_terms) {
        if (bins.first == bins.second) out.a1c2[bins.first] = aggregate_rss(contributions);
    }

    // Difference amplitudes: polarization-aggregate per absolute time,
    // then root-mean-square over the contributing times so a stationary
    // background reduces to a flat profile.
    std::map<int, std::vector<Complex>> per_delta;
    for (const auto& [bins, contributions] : pair_terms)
        per_delta[bins.first - bins.second].push_back(aggregate_rss(contributions));
    for (const auto& [delta, values] : per_delta) {
        if (values.size() == 1) {
            out.a12[delta] = values.front();
            continue;
        }
        double mean_sq = 0.0;
        for (const Complex& v : values) mean_sq += std::norm(v);
        mean_sq /= static_cast<double>(values.size());
        out.a12[delta] = Complex{std::sqrt(mean_sq), 0.0};
    }
    return out;
}

BiphotonAmplitudes peak_one(const BiphotonAmplitudes& amplitudes) {
    BiphotonAmplitudes out = amplitudes;
    out.normalization = AmpNormalization::PeakOne;
    if (const double peak = peak_abs(out.a12); peak > 0.0)
        for (auto& [key, value] : out.a12) value /= peak;
    if (const double peak = peak_abs(out.a1c2); peak > 0.0)
        for (auto& [key, value] : out.a1c2) value /= peak;
    return out;
}

double negative_image_residual(const BiphotonAmplitudes& eph, const BiphotonAmplitudes& pdc,
                               double bg_level) {
    if (eph.normalization != AmpNormalization::PeakOne ||
        pdc.normalization != AmpNormalization::PeakOne)
        throw std::invalid_argument("negative_image_residual: inputs must be peak-one normalized");
    if (eph.grid_bins != 0 && pdc.grid_bins != 0 && eph.grid_bins != pdc.grid_bins)
        throw std::invalid_argument("negative_image_residual: grid mismatch");

    auto abs_at = [](const std::map<int, Complex>& values, int key) {
        auto it = values.find(key);
        return it != values.end() ? std::abs(it->second) : 0.0;
    };
    double residual = 0.0;
    auto consider = [&](int delta) {
        const double predicted = bg_level * (1.0 - abs_at(pdc.a12, delta));
        residual = std::max(residual, std::abs(abs_at(eph.a12, delta) - predicted));
    };
    for (const auto& [delta, value] : eph.a12) consider(delta);
    for (const auto& [delta, value] : pdc.a12) consider(delta);
    return residual;
}

namespace {

// Source beam through the pulse-splitting unbalanced MZ of the time-bin
// scenarios. The two beams take complementary MZ output ports, which
// fixes the relative phase of the surviving hole pair to the
// antisymmetric combination.
std::vector<std::pair<ModeLabel, Complex>> split_bins(int port, const TimeGrid& grid,
                                                      Complex amplitude) {
    const Complex kI{0.0, 1.0};
    if (port == kScenarioPortA) {
        return {{ModeLabel{port, 0, Pol::None}, amplitude * 0.5},
                {ModeLabel{port, grid.tau0_bins, Pol::None}, amplitude * -0.5}};
    }
    return {{ModeLabel{port, 0, Pol::None}, amplitude * kI * 0.5},
            {ModeLabel{port, grid.tau0_bins, Pol::None}, amplitude * kI * 0.5}};
}

StateVector pair_source(const TimeGrid& grid, const std::vector<int>& bins) {
    StateVector::TermMap terms;
    const double amp = 1.0 / std::sqrt(static_cast<double>(bins.size()));
    for (int t : bins) {
        terms.emplace(FockBasisState::from_occupations({{ModeLabel{kScenarioPortA, t, Pol::None}, 1},
                                                        {ModeLabel{kScenarioPortB, t, Pol::None}, 1}}),
                      Complex{amp, 0.0});
    }
    return StateVector::from_terms(std::move(terms));
}

}  // namespace

StateVector build_scenario(Scenario scenario, const Background& background, const TimeGrid& grid,
                           const TpaChannel& tpa) {
    grid.validate();
    const bool is_eph = scenario == Scenario::EphEnergyTime || scenario == Scenario::EphTimeBin;
    if (is_eph && tpa.strength <= 0.0)
        throw std::invalid_argument("build_scenario: EPH scenarios need TPA strength > 0");

    std::vector<int> all_bins(grid.n_bins);
    for (int t = 0; t < grid.n_bins; ++t) all_bins[t] = t;

    switch (scenario) {
        case Scenario::PdcEnergyTime:
            return pair_source(grid, all_bins);
        case Scenario::PdcTimeBin:
            return pair_source(grid, {0, grid.tau0_bins});
        case Scenario::EphEnergyTime: {
            StateVector bg;
            if (background.kind == Background::Kind::Coherent) {
                std::vector<std::pair<ModeLabel, Complex>> modes;
                for (int port : {kScenarioPortA, kScenarioPortB})
                    for (int t : all_bins)
                        modes.emplace_back(ModeLabel{port, t, Pol::None},
                                           Complex{background.alpha, 0.0});
                // Pair-sector truncation: the biphoton functions only see
                // the one-per-port sector.
                bg = make_coherent_background(grid, modes, 2);
            } else {
                const double amp = 1.0 / std::sqrt(static_cast<double>(grid.n_bins));
                std::vector<std::pair<int, Complex>> bins;
                for (int t : all_bins) bins.emplace_back(t, Complex{amp, 0.0});
                // One photon per beam, uniformly spread: exact product of
                // two single-photon wavepackets.
                StateVector::TermMap terms;
                for (int t1 : all_bins)
                    for (int t2 : all_bins)
                        terms.emplace(
                            FockBasisState::from_occupations(
                                {{ModeLabel{kScenarioPortA, t1, Pol::None}, 1},
                                 {ModeLabel{kScenarioPortB, t2, Pol::None}, 1}}),
                            Complex{amp * amp, 0.0});
                bg = StateVector::from_terms(std::move(terms));
            }
            return apply_tpa(bg, tpa);
        }
        case Scenario::EphTimeBin: {
            StateVector bg;
            if (background.kind == Background::Kind::Coherent) {
                std::vector<std::pair<ModeLabel, Complex>> modes;
                for (int port : {kScenarioPortA, kScenarioPortB})
                    for (const auto& [mode, amp] :
                         split_bins(port, grid, Complex{background.alpha, 0.0}))
                        modes.emplace_back(mode, amp);
                bg = make_coherent_background(grid, modes, kDefaultPhotonCutoff);
            } else {
                // One photon per beam through its MZ; renormalized to the
                // monitored output port.
                StateVector::TermMap terms_a, terms_b;
                for (const auto& [mode, amp] : split_bins(kScenarioPortA, grid, {1.0, 0.0}))
                    terms_a.emplace(FockBasisState::from_occupations({{mode, 1}}), amp);
                for (const auto& [mode, amp] : split_bins(kScenarioPortB, grid, {1.0, 0.0}))
                    terms_b.emplace(FockBasisState::from_occupations({{mode, 1}}), amp);
                const StateVector beam_a = StateVector::from_terms(std::move(terms_a)).normalized();
                const StateVector beam_b = StateVector::from_terms(std::move(terms_b)).normalized();
                StateVector::TermMap product;
                for (const auto& [basis_a, amp_a] : beam_a.terms())
                    for (const auto& [basis_b, amp_b] : beam_b.terms()) {
                        std::vector<FockBasisState::Entry> occ = basis_a.occupations();
                        for (const auto& entry : basis_b.occupations()) occ.push_back(entry);
                        product.emplace(FockBasisState::from_occupations(std::move(occ)),
                                        amp_a * amp_b);
                    }
                bg = StateVector::from_terms(std::move(product));
            }
            return apply_tpa(bg, tpa);
        }
    }
    throw std::logic_error("build_scenario: unknown scenario");
}

}  // namespace ephsim
