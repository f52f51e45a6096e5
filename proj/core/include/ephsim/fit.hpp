#pragma once

#include <stdexcept>
#include <vector>

namespace ephsim {

struct FitDataset {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> sigma_y;
};

// Weighted least-squares fit of y = offset + amplitude*cos(2*pi*x/period
// + phase). visibility = amplitude / offset.
struct SinusoidFit {
    double offset = 0.0;
    double amplitude = 0.0;
    double period = 0.0;
    double phase = 0.0;
    double visibility = 0.0;
    double visibility_sigma = 0.0;
    double phase_sigma = 0.0;
    double period_sigma = 0.0;
    double chi2_per_dof = 0.0;
    // Set for constant (zero-variance) data: amplitude indistinguishable
    // from 0, visibility reported as 0, no modulation parameters.
    bool degenerate = false;
};

struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Fits every dataset with a single shared period (damped Gauss-Newton
// with analytic Jacobian; the period is initialized by a coarse grid
// search and the in-phase/quadrature amplitudes by exact linear solves).
// Requires >= 5 points per dataset, non-constant x and positive sigmas.
// Constant-y datasets are flagged degenerate and excluded from the joint
// problem. Throws FitError on non-convergence and std::invalid_argument
// on malformed input; fits with visibility materially above 1 (beyond
// 3 sigma) are rejected with FitError.
std::vector<SinusoidFit> fit_common_period(const std::vector<FitDataset>& datasets);

}  // namespace ephsim
