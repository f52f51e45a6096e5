#include "ephsim/elements.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace ephsim {

namespace {

constexpr Complex kI{0.0, 1.0};

double factorial(int n) {
    double out = 1.0;
    for (int k = 2; k <= n; ++k) out *= k;
    return out;
}

// Exact repeated multiplication; std::pow(complex, ...) goes through
// exp/log and spoils exact interference cancellations.
Complex cpow_int(Complex base, int exponent) {
    Complex out{1.0, 0.0};
    for (int k = 0; k < exponent; ++k) out *= base;
    return out;
}

}  // namespace

LinearElement LinearElement::beamsplitter(int port_a, int port_b, double theta,
                                          BsConvention convention) {
    if (port_a == port_b) throw std::invalid_argument("beamsplitter: ports must differ");
    return LinearElement(Bs{port_a, port_b, theta, convention});
}

LinearElement LinearElement::beamsplitter_50_50(int port_a, int port_b) {
    return beamsplitter(port_a, port_b, std::atan(1.0) /* pi/4 */, BsConvention::Symmetric);
}

LinearElement LinearElement::pbs(int port_a, int port_b) {
    if (port_a == port_b) throw std::invalid_argument("pbs: ports must differ");
    return LinearElement(Pbs{port_a, port_b});
}

LinearElement LinearElement::phase(int port, std::optional<Pol> pol, double phi) {
    return LinearElement(Phase{port, pol, phi});
}

LinearElement LinearElement::delay(int port, int shift_bins) {
    return LinearElement(Delay{port, shift_bins});
}

LinearElement LinearElement::waveplate(int port, WaveplateKind kind, double axis_angle) {
    return LinearElement(Waveplate{port, kind, axis_angle});
}

LinearElement LinearElement::polarizer(int port, double angle) {
    return LinearElement(Polarizer{port, angle});
}

bool LinearElement::is_unitary_kind() const {
    return !std::holds_alternative<Polarizer>(spec_);
}

std::vector<int> LinearElement::ports() const {
    return std::visit(
        [](const auto& s) -> std::vector<int> {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Bs> || std::is_same_v<T, Pbs>)
                return {s.port_a, s.port_b};
            else
                return {s.port};
        },
        spec_);
}

std::string LinearElement::description() const {
    return std::visit(
        [](const auto& s) -> std::string {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Bs>)
                return "BS(" + std::to_string(s.port_a) + "," + std::to_string(s.port_b) + ")";
            else if constexpr (std::is_same_v<T, Pbs>)
                return "PBS(" + std::to_string(s.port_a) + "," + std::to_string(s.port_b) + ")";
            else if constexpr (std::is_same_v<T, Phase>)
                return "PHASE(" + std::to_string(s.port) + ")";
            else if constexpr (std::is_same_v<T, Delay>)
                return "DELAY(" + std::to_string(s.port) + "," + std::to_string(s.shift_bins) + ")";
            else if constexpr (std::is_same_v<T, Waveplate>)
                return s.kind == WaveplateKind::Quarter ? "QWP(" + std::to_string(s.port) + ")"
                                                        : "HWP(" + std::to_string(s.port) + ")";
            else
                return "POLARIZER(" + std::to_string(s.port) + ")";
        },
        spec_);
}

ModeImage LinearElement::map_mode(const ModeLabel& mode, const TimeGrid& grid) const {
    return std::visit(
        [&](const auto& s) -> ModeImage {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Bs>) {
                if (mode.port != s.port_a && mode.port != s.port_b) return {{mode, 1.0}};
                const double c = std::cos(s.theta), sn = std::sin(s.theta);
                ModeLabel here = mode;
                ModeLabel there = mode;
                there.port = (mode.port == s.port_a) ? s.port_b : s.port_a;
                if (s.convention == BsConvention::Symmetric)
                    return {{here, c}, {there, kI * sn}};
                // Real rotation: columns (c, -s) from port_a, (s, c) from port_b.
                if (mode.port == s.port_a) return {{here, c}, {there, -sn}};
                return {{there, sn}, {here, c}};
            } else if constexpr (std::is_same_v<T, Pbs>) {
                if (mode.port != s.port_a && mode.port != s.port_b) return {{mode, 1.0}};
                if (mode.pol == Pol::None)
                    throw std::invalid_argument("pbs: unpolarized mode at a PBS port");
                if (mode.pol == Pol::H) return {{mode, 1.0}};
                ModeLabel crossed = mode;
                crossed.port = (mode.port == s.port_a) ? s.port_b : s.port_a;
                return {{crossed, 1.0}};
            } else if constexpr (std::is_same_v<T, Phase>) {
                if (mode.port != s.port) return {{mode, 1.0}};
                if (s.pol.has_value() && mode.pol != *s.pol) return {{mode, 1.0}};
                return {{mode, std::exp(kI * s.phi)}};
            } else if constexpr (std::is_same_v<T, Delay>) {
                if (mode.port != s.port) return {{mode, 1.0}};
                ModeLabel shifted = mode;
                shifted.bin = mode.bin + s.shift_bins;
                if (!grid.contains(shifted.bin))
                    throw std::out_of_range("delay: shift pushes bin off grid");
                return {{shifted, 1.0}};
            } else if constexpr (std::is_same_v<T, Waveplate>) {
                if (mode.port != s.port) return {{mode, 1.0}};
                if (mode.pol == Pol::None)
                    throw std::invalid_argument("waveplate: unpolarized mode at a waveplate port");
                const double c = std::cos(s.axis_angle), sn = std::sin(s.axis_angle);
                const Complex d = (s.kind == WaveplateKind::Quarter) ? kI : Complex{-1.0, 0.0};
                // R(axis) diag(1, d) R(-axis) on the (H, V) pair.
                const Complex m_hh = c * c + d * sn * sn;
                const Complex m_vv = sn * sn + d * c * c;
                const Complex m_cross = c * sn * (1.0 - d);
                ModeLabel h = mode, v = mode;
                h.pol = Pol::H;
                v.pol = Pol::V;
                if (mode.pol == Pol::H) return {{h, m_hh}, {v, m_cross}};
                return {{h, m_cross}, {v, m_vv}};
            } else {
                static_assert(std::is_same_v<T, Polarizer>);
                if (mode.port != s.port) return {{mode, 1.0}};
                if (mode.pol == Pol::None)
                    throw std::invalid_argument("polarizer: unpolarized mode at a polarizer port");
                ModeLabel out = mode;
                out.pol = Pol::H;  // canonical post-polarizer label
                const double proj = (mode.pol == Pol::H) ? std::cos(s.angle) : std::sin(s.angle);
                return {{out, proj}};
            }
        },
        spec_);
}

namespace {

// One resolved way to distribute n photons of an input mode over its
// image. The map-coefficient product and the multinomial k! denominator
// are kept separate so the bosonic prefactor
//   sqrt(prod n_i! * prod q_j!) / prod k_j!
// can be evaluated in one division; diagonal maps then contribute an
// exact factor of 1 and composition order cannot leak rounding.
struct Distribution {
    Complex coeff;                // prod over image entries of c_j^{k_j}
    double factorial_denominator;  // prod over image entries of k_j!
    std::vector<std::pair<ModeLabel, int>> placement;
};

void enumerate_distributions(const ModeImage& image, std::size_t index, int photons_left,
                             Complex coeff, double denominator,
                             std::vector<std::pair<ModeLabel, int>>& placement,
                             std::vector<Distribution>& out) {
    if (index + 1 == image.size()) {
        // Remaining photons all go to the last image entry.
        Complex c = coeff * cpow_int(image[index].second, photons_left);
        if (photons_left > 0) placement.emplace_back(image[index].first, photons_left);
        out.push_back({c, denominator * factorial(photons_left), placement});
        if (photons_left > 0) placement.pop_back();
        return;
    }
    Complex power{1.0, 0.0};
    for (int k = 0; k <= photons_left; ++k) {
        if (k > 0) power *= image[index].second;
        if (k > 0) placement.emplace_back(image[index].first, k);
        enumerate_distributions(image, index + 1, photons_left - k, coeff * power,
                                denominator * factorial(k), placement, out);
        if (k > 0) placement.pop_back();
    }
}

std::vector<Distribution> expand_mode_power(const ModeImage& image, int n) {
    std::vector<Distribution> out;
    std::vector<std::pair<ModeLabel, int>> placement;
    enumerate_distributions(image, 0, n, Complex{1.0, 0.0}, 1.0, placement, out);
    return out;
}

void combine_modes(const std::vector<std::vector<Distribution>>& per_mode, std::size_t index,
                   Complex coeff, double denominator, std::map<ModeLabel, int>& occupation,
                   double in_factorials, Complex term_amp, StateVector::TermMap& out) {
    if (index == per_mode.size()) {
        double q_factorials = 1.0;
        std::vector<FockBasisState::Entry> entries;
        entries.reserve(occupation.size());
        for (const auto& [mode, q] : occupation) {
            q_factorials *= factorial(q);
            entries.emplace_back(mode, q);
        }
        const double prefactor = std::sqrt(in_factorials * q_factorials) / denominator;
        out[FockBasisState::from_occupations(std::move(entries))] +=
            term_amp * coeff * prefactor;
        return;
    }
    for (const auto& dist : per_mode[index]) {
        for (const auto& [mode, k] : dist.placement) occupation[mode] += k;
        combine_modes(per_mode, index + 1, coeff * dist.coeff,
                      denominator * dist.factorial_denominator, occupation, in_factorials,
                      term_amp, out);
        for (const auto& [mode, k] : dist.placement) {
            auto it = occupation.find(mode);
            it->second -= k;
            if (it->second == 0) occupation.erase(it);
        }
    }
}

}  // namespace

StateVector apply_element(const StateVector& state, const LinearElement& element,
                          const TimeGrid& grid) {
    grid.validate();
    StateVector::TermMap out;
    for (const auto& [basis, amp] : state.terms()) {
        const auto& occupations = basis.occupations();
        std::vector<std::vector<Distribution>> per_mode;
        per_mode.reserve(occupations.size());
        double in_factorials = 1.0;
        for (const auto& [mode, n] : occupations) {
            per_mode.push_back(expand_mode_power(element.map_mode(mode, grid), n));
            in_factorials *= factorial(n);
        }
        std::map<ModeLabel, int> occupation;
        combine_modes(per_mode, 0, Complex{1.0, 0.0}, occupation, in_factorials, amp, out);
    }
    return StateVector::from_terms(std::move(out));
}

StateVector apply_elements(const StateVector& state, std::span<const LinearElement> elements,
                           const TimeGrid& grid) {
    StateVector current = state;
    for (const auto& element : elements) current = apply_element(current, element, grid);
    return current;
}

namespace {

using SparseColumn = std::map<ModeLabel, Complex>;

// Image of one input mode through the whole chain, as a sparse column.
SparseColumn chain_image(std::span<const LinearElement> elements, const ModeLabel& input,
                         const TimeGrid& grid) {
    SparseColumn column{{input, Complex{1.0, 0.0}}};
    for (const auto& element : elements) {
        SparseColumn next;
        for (const auto& [mode, coeff] : column)
            for (const auto& [image_mode, image_coeff] : element.map_mode(mode, grid))
                next[image_mode] += coeff * image_coeff;
        column = std::move(next);
    }
    return column;
}

}  // namespace

double mode_map_unitarity_check(std::span<const LinearElement> elements, const TimeGrid& grid) {
    grid.validate();
    if (elements.empty()) throw std::invalid_argument("unitarity check: empty element chain");
    for (const auto& element : elements)
        if (!element.is_unitary_kind())
            throw std::invalid_argument("unitarity check: chain contains a polarizer");

    std::set<int> ports;
    for (const auto& element : elements)
        for (int p : element.ports()) ports.insert(p);

    std::vector<SparseColumn> columns;
    for (int port : ports) {
        for (int bin = 0; bin < grid.n_bins; ++bin) {
            for (Pol pol : {Pol::H, Pol::V, Pol::None}) {
                try {
                    columns.push_back(chain_image(elements, ModeLabel{port, bin, pol}, grid));
                } catch (const std::out_of_range&) {
                    // Delay would leave the grid for this probe; the map is
                    // unitary on the invariant subspace only.
                } catch (const std::invalid_argument&) {
                    // Unpolarized probe into a polarization element.
                }
            }
        }
    }
    if (columns.empty()) throw std::invalid_argument("unitarity check: no valid probe modes");

    double max_dev = 0.0;
    for (std::size_t i = 0; i < columns.size(); ++i) {
        for (std::size_t j = i; j < columns.size(); ++j) {
            Complex dot{0.0, 0.0};
            for (const auto& [mode, ci] : columns[i]) {
                auto it = columns[j].find(mode);
                if (it != columns[j].end()) dot += std::conj(ci) * it->second;
            }
            if (i == j) dot -= 1.0;
            max_dev = std::max(max_dev, std::abs(dot));
        }
    }
    return max_dev;
}

double mode_map_unitarity_check(const LinearElement& element, const TimeGrid& grid) {
    return mode_map_unitarity_check(std::span<const LinearElement>(&element, 1), grid);
}

std::vector<LinearElement> FransonAnalyzer::mz_stage(int aux_port) const {
    return {
        LinearElement::pbs(port, aux_port),
        LinearElement::delay(aux_port, delay_bins),
        LinearElement::phase(aux_port, std::nullopt, phase),
        LinearElement::pbs(port, aux_port),
    };
}

StateVector apply_franson_analyzer(const StateVector& state, const FransonAnalyzer& analyzer,
                                   const TimeGrid& grid) {
    for (const auto& [basis, amp] : state.terms())
        for (const auto& [mode, count] : basis.occupations())
            if (mode.port == analyzer.port && mode.pol == Pol::None)
                throw std::invalid_argument(
                    "apply_franson_analyzer: photons at the analyzer port must be polarized");

    const int aux_port = std::max(state.max_port(), analyzer.port) + 1;
    StateVector current = apply_elements(state, analyzer.mz_stage(aux_port), grid);
    return apply_element(current, LinearElement::polarizer(analyzer.port, analyzer.polarizer_angle),
                         grid);
}

}  // namespace ephsim
