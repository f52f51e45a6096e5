#include "ephsim/report.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "ephsim/csv.hpp"

namespace ephsim {

namespace {

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buffer[32];
    std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buffer;
}

}  // namespace

void emit_report(const Report& report, const std::filesystem::path& out_dir) {
    if (report.fits.empty()) throw std::invalid_argument("emit_report: no fits to report");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec && !std::filesystem::is_directory(out_dir))
        throw std::runtime_error("emit_report: cannot create " + out_dir.string());

    nlohmann::json doc;
    doc["generated_at"] = utc_timestamp();
    doc["bell_threshold"] = kBellVisibilityThreshold;

    nlohmann::json fits = nlohmann::json::array();
    for (std::size_t k = 0; k < report.fits.size(); ++k) {
        const SinusoidFit& fit = report.fits[k];
        nlohmann::json entry;
        entry["dataset"] = k;
        entry["offset"] = fit.offset;
        entry["amplitude"] = fit.amplitude;
        entry["period"] = fit.period;
        entry["period_sigma"] = fit.period_sigma;
        entry["phase"] = fit.phase;
        entry["phase_sigma"] = fit.phase_sigma;
        entry["visibility"] = fit.visibility;
        entry["visibility_sigma"] = fit.visibility_sigma;
        entry["chi2_per_dof"] = fit.chi2_per_dof;
        entry["degenerate"] = fit.degenerate;
        if (k < report.verdicts.size()) entry["bell_verdict"] = to_string(report.verdicts[k]);
        fits.push_back(entry);
    }
    doc["fits"] = fits;
    doc["config"] = report.config_echo;

    {
        std::ofstream out(out_dir / "report.json", std::ios::binary);
        if (!out) throw std::runtime_error("emit_report: cannot write report.json");
        out << doc.dump(2) << '\n';
        if (!out) throw std::runtime_error("emit_report: write failed for report.json");
    }

    for (std::size_t k = 0; k < report.datasets.size(); ++k) {
        const ReportDataset& data = report.datasets[k];
        const std::filesystem::path path = out_dir / ("fit_data_" + std::to_string(k) + ".csv");
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("emit_report: cannot write " + path.string());
        out << "x,y,y_err,model_y\n";
        for (std::size_t i = 0; i < data.x.size(); ++i) {
            out << format_double(data.x[i]) << ',' << format_double(data.y[i]) << ','
                << format_double(data.y_err[i]) << ',' << format_double(data.model_y[i]) << '\n';
        }
        if (!out) throw std::runtime_error("emit_report: write failed for " + path.string());
    }
}

}  // namespace ephsim
