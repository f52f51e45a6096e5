#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ephsim/fit.hpp"
#include "ephsim/franson.hpp"

namespace ephsim {

struct ReportDataset {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> y_err;
    std::vector<double> model_y;
};

struct Report {
    std::vector<SinusoidFit> fits;
    std::vector<BellVerdict> verdicts;
    std::vector<ReportDataset> datasets;
    // Flat config echo; includes the seed so a run can be reproduced.
    std::map<std::string, std::string> config_echo;
};

// Writes <out_dir>/report.json (fit parameters, visibilities with
// uncertainties, verdicts, config echo) and one plot-ready
// <out_dir>/fit_data_<k>.csv per dataset with columns x, y, y_err,
// model_y. Reruns with the same inputs are byte-identical except for
// the generated_at timestamp field. Throws std::invalid_argument when
// fits is empty and std::runtime_error on unwritable paths.
void emit_report(const Report& report, const std::filesystem::path& out_dir);

}  // namespace ephsim
