#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ephsim/fock.hpp"

namespace ephsim {

// Beamsplitter phase convention. Symmetric: reflection picks up i, so a
// 50/50 splitter sends one photon to amplitudes (1/sqrt2, i/sqrt2).
// RealRotation: real rotation matrix [[cos, sin], [-sin, cos]].
enum class BsConvention { Symmetric, RealRotation };

enum class WaveplateKind { Quarter, Half };

// Image of one creation operator under an element's mode map.
using ModeImage = std::vector<std::pair<ModeLabel, Complex>>;

// A linear-optical element described by its action on creation
// operators. All kinds are unitary single-photon mode maps except the
// polarizer, which projects onto a polarization axis and relabels the
// survivor to a canonical output polarization (erasing which-path
// information carried by polarization).
class LinearElement {
  public:
    static LinearElement beamsplitter(int port_a, int port_b, double theta,
                                      BsConvention convention = BsConvention::Symmetric);
    // 50/50 with the symmetric convention.
    static LinearElement beamsplitter_50_50(int port_a, int port_b);
    // H transmits (stays in its port), V crosses to the other port.
    static LinearElement pbs(int port_a, int port_b);
    // e^{i phi} on (port, pol); pol = nullopt phases every polarization
    // at the port.
    static LinearElement phase(int port, std::optional<Pol> pol, double phi);
    static LinearElement delay(int port, int shift_bins);
    // Jones matrix R(axis) diag(1, i or -1) R(-axis); the slow axis gets
    // the retardance phase.
    static LinearElement waveplate(int port, WaveplateKind kind, double axis_angle);
    // Projects onto cos(angle) H + sin(angle) V and relabels survivors to
    // H at the same port/bin. Norm non-increasing.
    static LinearElement polarizer(int port, double angle);

    bool is_unitary_kind() const;
    std::vector<int> ports() const;
    std::string description() const;

    // Image of a^dagger for the given input mode. Identity for modes the
    // element does not couple. Throws std::out_of_range when a delay
    // pushes a bin off-grid and std::invalid_argument for a PBS or
    // waveplate hitting an unpolarized mode.
    ModeImage map_mode(const ModeLabel& mode, const TimeGrid& grid) const;

  private:
    struct Bs {
        int port_a, port_b;
        double theta;
        BsConvention convention;
    };
    struct Pbs {
        int port_a, port_b;
    };
    struct Phase {
        int port;
        std::optional<Pol> pol;
        double phi;
    };
    struct Delay {
        int port;
        int shift_bins;
    };
    struct Waveplate {
        int port;
        WaveplateKind kind;
        double axis_angle;
    };
    struct Polarizer {
        int port;
        double angle;
    };
    using Spec = std::variant<Bs, Pbs, Phase, Delay, Waveplate, Polarizer>;

    explicit LinearElement(Spec spec) : spec_(std::move(spec)) {}

    Spec spec_;
};

// Rewrites every creation operator by the element's mode map, expanding
// multi-photon terms multilinearly, and canonicalizes the result. Norm
// is preserved for unitary kinds and non-increasing for the polarizer.
StateVector apply_element(const StateVector& state, const LinearElement& element,
                          const TimeGrid& grid);

// Applies elements left to right.
StateVector apply_elements(const StateVector& state, std::span<const LinearElement> elements,
                           const TimeGrid& grid);

// Max |U^dagger U - I| entry over the element's single-photon matrix,
// probed over every mode the element couples whose image stays on-grid.
// Throws std::invalid_argument for the polarizer.
double mode_map_unitarity_check(const LinearElement& element, const TimeGrid& grid);

// Same check for a left-to-right composition (matrix product of the
// component maps).
double mode_map_unitarity_check(std::span<const LinearElement> elements, const TimeGrid& grid);

// Polarization-based unbalanced Mach-Zehnder analyzer: a PBS routes H
// along the short arm and V along the long arm (delay_bins, phase), a
// second PBS recombines, and a polarizer at polarizer_angle erases the
// which-path information. delay_bins equals the source tau0_bins when
// built by the standard experiment builder (matching condition).
struct FransonAnalyzer {
    int port = 0;
    int delay_bins = 0;
    double phase = 0.0;
    double polarizer_angle = 0.78539816339744830961;  // pi/4

    // The PBS + DELAY + PHASE + PBS stage, before the polarizer.
    std::vector<LinearElement> mz_stage(int aux_port) const;
};

// Full analyzer: MZ stage then polarizer. Photons at the analyzer port
// must carry H or V polarization. Norm may decrease (polarizer).
StateVector apply_franson_analyzer(const StateVector& state, const FransonAnalyzer& analyzer,
                                   const TimeGrid& grid);

}  // namespace ephsim
