#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ephsim/fock.hpp"
#include "ephsim/franson.hpp"

namespace ephsim {

// All CSV files are comma-separated with a header row, '.' decimal
// separator, UTF-8 and LF line endings.

// Doubles formatted so they round-trip exactly.
std::string format_double(double value);

// Columns: phi1_rad, phi2_rad, analytic_rate, counts, shots_mean.
void write_scan_csv(const std::filesystem::path& path, std::span<const CoincidenceRecord> records);
std::vector<CoincidenceRecord> read_scan_csv(const std::filesystem::path& path);

// Columns: index, re, im, abs. Keyed by bin difference or common bin.
void write_amplitude_csv(const std::filesystem::path& path, const std::map<int, Complex>& values);

}  // namespace ephsim
