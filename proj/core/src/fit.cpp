#include "ephsim/fit.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace ephsim {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

struct Workspace {
    std::vector<const FitDataset*> active;  // non-degenerate datasets
    std::vector<std::size_t> active_index;  // position in the caller's list
    int total_points = 0;
};

// Model per dataset: y = c + alpha*cos(w x) + beta*sin(w x); parameter
// vector is [w, (c, alpha, beta) per active dataset].
int param_count(const Workspace& ws) { return 1 + 3 * static_cast<int>(ws.active.size()); }

double chi2_for(const Workspace& ws, const Eigen::VectorXd& params) {
    double chi2 = 0.0;
    const double w = params[0];
    for (std::size_t k = 0; k < ws.active.size(); ++k) {
        const FitDataset& data = *ws.active[k];
        const double c = params[1 + 3 * k];
        const double alpha = params[2 + 3 * k];
        const double beta = params[3 + 3 * k];
        for (std::size_t i = 0; i < data.x.size(); ++i) {
            const double model = c + alpha * std::cos(w * data.x[i]) + beta * std::sin(w * data.x[i]);
            const double r = (data.y[i] - model) / data.sigma_y[i];
            chi2 += r * r;
        }
    }
    return chi2;
}

void fill_jacobian(const Workspace& ws, const Eigen::VectorXd& params, Eigen::MatrixXd& jac,
                   Eigen::VectorXd& residual) {
    const double w = params[0];
    int row = 0;
    for (std::size_t k = 0; k < ws.active.size(); ++k) {
        const FitDataset& data = *ws.active[k];
        const double c = params[1 + 3 * k];
        const double alpha = params[2 + 3 * k];
        const double beta = params[3 + 3 * k];
        for (std::size_t i = 0; i < data.x.size(); ++i, ++row) {
            const double inv_sigma = 1.0 / data.sigma_y[i];
            const double cs = std::cos(w * data.x[i]);
            const double sn = std::sin(w * data.x[i]);
            const double model = c + alpha * cs + beta * sn;
            residual[row] = (data.y[i] - model) * inv_sigma;
            jac.row(row).setZero();
            jac(row, 0) = data.x[i] * (-alpha * sn + beta * cs) * inv_sigma;
            jac(row, 1 + 3 * k) = inv_sigma;
            jac(row, 2 + 3 * k) = cs * inv_sigma;
            jac(row, 3 + 3 * k) = sn * inv_sigma;
        }
    }
}

// Exact linear WLS for (c, alpha, beta) at fixed angular frequency.
Eigen::Vector3d linear_solve_at(const FitDataset& data, double w, double* chi2_out) {
    Eigen::Matrix3d normal = Eigen::Matrix3d::Zero();
    Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < data.x.size(); ++i) {
        const double weight = 1.0 / (data.sigma_y[i] * data.sigma_y[i]);
        const Eigen::Vector3d basis{1.0, std::cos(w * data.x[i]), std::sin(w * data.x[i])};
        normal += weight * basis * basis.transpose();
        rhs += weight * data.y[i] * basis;
    }
    const Eigen::Vector3d solution = normal.ldlt().solve(rhs);
    if (chi2_out) {
        double chi2 = 0.0;
        for (std::size_t i = 0; i < data.x.size(); ++i) {
            const double model = solution[0] + solution[1] * std::cos(w * data.x[i]) +
                                 solution[2] * std::sin(w * data.x[i]);
            const double r = (data.y[i] - model) / data.sigma_y[i];
            chi2 += r * r;
        }
        *chi2_out = chi2;
    }
    return solution;
}

SinusoidFit degenerate_fit(const FitDataset& data) {
    double weight_sum = 0.0, weighted_y = 0.0;
    for (std::size_t i = 0; i < data.x.size(); ++i) {
        const double weight = 1.0 / (data.sigma_y[i] * data.sigma_y[i]);
        weight_sum += weight;
        weighted_y += weight * data.y[i];
    }
    SinusoidFit fit;
    fit.offset = weighted_y / weight_sum;
    fit.degenerate = true;
    return fit;
}

}  // namespace

std::vector<SinusoidFit> fit_common_period(const std::vector<FitDataset>& datasets) {
    if (datasets.empty()) throw std::invalid_argument("fit_common_period: no datasets");
    for (const FitDataset& data : datasets) {
        if (data.x.size() < 5)
            throw std::invalid_argument("fit_common_period: need >= 5 points per dataset");
        if (data.y.size() != data.x.size() || data.sigma_y.size() != data.x.size())
            throw std::invalid_argument("fit_common_period: x/y/sigma length mismatch");
        if (std::all_of(data.x.begin(), data.x.end(),
                        [&](double v) { return v == data.x.front(); }))
            throw std::invalid_argument("fit_common_period: x values are all equal");
        for (double s : data.sigma_y)
            if (!(s > 0.0)) throw std::invalid_argument("fit_common_period: sigma_y must be > 0");
    }

    std::vector<SinusoidFit> fits(datasets.size());
    Workspace ws;
    for (std::size_t k = 0; k < datasets.size(); ++k) {
        const auto& y = datasets[k].y;
        const bool constant = std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); });
        if (constant) {
            fits[k] = degenerate_fit(datasets[k]);
        } else {
            ws.active.push_back(&datasets[k]);
            ws.active_index.push_back(k);
            ws.total_points += static_cast<int>(datasets[k].x.size());
        }
    }
    if (ws.active.empty()) return fits;  // nothing to fit jointly

    // Coarse period grid search: joint chi2 of the exact linear solves.
    double x_min = std::numeric_limits<double>::max(), x_max = std::numeric_limits<double>::lowest();
    for (const FitDataset* data : ws.active) {
        x_min = std::min(x_min, *std::min_element(data->x.begin(), data->x.end()));
        x_max = std::max(x_max, *std::max_element(data->x.begin(), data->x.end()));
    }
    const double span = x_max - x_min;
    double best_w = kTwoPi / span, best_chi2 = std::numeric_limits<double>::max();
    for (int step = 0; step < 400; ++step) {
        // Periods from span/8 to 4*span, log-spaced.
        const double period = (span / 8.0) * std::pow(32.0, step / 399.0);
        const double w = kTwoPi / period;
        double chi2 = 0.0;
        for (const FitDataset* data : ws.active) {
            double dataset_chi2 = 0.0;
            linear_solve_at(*data, w, &dataset_chi2);
            chi2 += dataset_chi2;
        }
        if (chi2 < best_chi2) {
            best_chi2 = chi2;
            best_w = w;
        }
    }

    const int n_params = param_count(ws);
    Eigen::VectorXd params(n_params);
    params[0] = best_w;
    for (std::size_t k = 0; k < ws.active.size(); ++k)
        params.segment<3>(1 + 3 * static_cast<int>(k)) = linear_solve_at(*ws.active[k], best_w, nullptr);

    // Damped Gauss-Newton refinement.
    Eigen::MatrixXd jac(ws.total_points, n_params);
    Eigen::VectorXd residual(ws.total_points);
    double lambda = 1e-6;
    double chi2 = chi2_for(ws, params);
    bool converged = false;
    for (int iteration = 0; iteration < 200 && !converged; ++iteration) {
        fill_jacobian(ws, params, jac, residual);
        const Eigen::MatrixXd normal = jac.transpose() * jac;
        const Eigen::VectorXd gradient = jac.transpose() * residual;
        bool stepped = false;
        for (int attempt = 0; attempt < 40; ++attempt) {
            Eigen::MatrixXd damped = normal;
            for (int d = 0; d < n_params; ++d)
                damped(d, d) += lambda * std::max(normal(d, d), 1e-30);
            const Eigen::VectorXd step = damped.ldlt().solve(gradient);
            const Eigen::VectorXd trial = params + step;
            const double trial_chi2 = chi2_for(ws, trial);
            if (trial_chi2 <= chi2 + 1e-14) {
                const double improvement = chi2 - trial_chi2;
                params = trial;
                chi2 = trial_chi2;
                lambda = std::max(lambda / 3.0, 1e-14);
                stepped = true;
                if (improvement <= 1e-12 * std::max(chi2, 1.0) &&
                    step.cwiseAbs().maxCoeff() <= 1e-11 * (1.0 + params.cwiseAbs().maxCoeff()))
                    converged = true;
                break;
            }
            lambda *= 3.0;
        }
        if (!stepped) {
            converged = true;  // no downhill direction left at any damping
        }
    }
    if (!converged) throw FitError("fit_common_period: did not converge");

    // Covariance from the undamped normal matrix at the optimum.
    fill_jacobian(ws, params, jac, residual);
    const Eigen::MatrixXd normal = jac.transpose() * jac;
    const Eigen::MatrixXd covariance =
        normal.ldlt().solve(Eigen::MatrixXd::Identity(n_params, n_params));

    const double w = params[0];
    for (std::size_t k = 0; k < ws.active.size(); ++k) {
        const int base = 1 + 3 * static_cast<int>(k);
        const double c = params[base];
        const double alpha = params[base + 1];
        const double beta = params[base + 2];
        const double amplitude = std::hypot(alpha, beta);
        if (c <= 0.0)
            throw FitError("fit_common_period: non-positive offset, visibility undefined");

        SinusoidFit fit;
        fit.offset = c;
        fit.amplitude = amplitude;
        fit.period = kTwoPi / w;
        fit.phase = std::atan2(-beta, alpha);
        fit.visibility = amplitude / c;

        // Delta method on (w, c, alpha, beta).
        Eigen::VectorXd grad_v = Eigen::VectorXd::Zero(n_params);
        grad_v[base] = -amplitude / (c * c);
        grad_v[base + 1] = alpha / (amplitude * c);
        grad_v[base + 2] = beta / (amplitude * c);
        fit.visibility_sigma = std::sqrt(std::max(0.0, grad_v.dot(covariance * grad_v)));

        Eigen::VectorXd grad_phase = Eigen::VectorXd::Zero(n_params);
        grad_phase[base + 1] = beta / (amplitude * amplitude);
        grad_phase[base + 2] = -alpha / (amplitude * amplitude);
        fit.phase_sigma = std::sqrt(std::max(0.0, grad_phase.dot(covariance * grad_phase)));

        fit.period_sigma = kTwoPi / (w * w) * std::sqrt(std::max(0.0, covariance(0, 0)));

        double dataset_chi2 = 0.0;
        linear_solve_at(*ws.active[k], w, &dataset_chi2);
        const int dof = static_cast<int>(ws.active[k]->x.size()) - 4;
        fit.chi2_per_dof = dof > 0 ? dataset_chi2 / dof : 0.0;

        if (fit.visibility > 1.0 + 3.0 * fit.visibility_sigma)
            throw FitError("fit_common_period: visibility materially exceeds 1");
        fits[ws.active_index[k]] = fit;
    }
    return fits;
}

}  // namespace ephsim
