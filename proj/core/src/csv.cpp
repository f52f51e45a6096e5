#include "ephsim/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ephsim {

std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);  // binary keeps LF endings
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream stream(line);
    while (std::getline(stream, field, ',')) fields.push_back(field);
    return fields;
}

}  // namespace

void write_scan_csv(const std::filesystem::path& path, std::span<const CoincidenceRecord> records) {
    std::ofstream out = open_for_write(path);
    out << "phi1_rad,phi2_rad,analytic_rate,counts,shots_mean\n";
    for (const CoincidenceRecord& record : records) {
        out << format_double(record.phi1) << ',' << format_double(record.phi2) << ','
            << format_double(record.analytic_rate) << ',' << record.counts << ','
            << format_double(record.shots_mean) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<CoincidenceRecord> read_scan_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty scan CSV: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "phi1_rad,phi2_rad,analytic_rate,counts,shots_mean")
        throw std::runtime_error("unexpected scan CSV header in " + path.string());

    std::vector<CoincidenceRecord> records;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_fields(line);
        if (fields.size() != 5)
            throw std::runtime_error("malformed scan CSV row in " + path.string() + ": " + line);
        CoincidenceRecord record;
        record.phi1 = std::stod(fields[0]);
        record.phi2 = std::stod(fields[1]);
        record.analytic_rate = std::stod(fields[2]);
        record.counts = std::stoll(fields[3]);
        record.shots_mean = std::stod(fields[4]);
        records.push_back(record);
    }
    return records;
}

void write_amplitude_csv(const std::filesystem::path& path, const std::map<int, Complex>& values) {
    std::ofstream out = open_for_write(path);
    out << "index,re,im,abs\n";
    for (const auto& [index, value] : values) {
        out << index << ',' << format_double(value.real()) << ',' << format_double(value.imag())
            << ',' << format_double(std::abs(value)) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace ephsim
