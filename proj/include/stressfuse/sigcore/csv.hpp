#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "stressfuse/sigcore/types.hpp"

namespace stressfuse::sigcore {

// Column-major view of a numeric CSV file with one header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  // Index of a header name, or -1.
  long find(std::string_view name) const;
};

CsvTable read_numeric_csv(const std::filesystem::path& path);
void write_numeric_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                       const std::vector<const std::vector<double>*>& columns);

// Shortest decimal form that round-trips; NaN is written as "nan".
std::string format_double(double v);
double parse_double(std::string_view token);

// Maps each declared channel to the CSV column holding it.
struct RecordingSchema {
  std::map<std::string, std::string> channel_columns;

  static RecordingSchema standard();
};

Recording load_recording(const std::filesystem::path& path, const RecordingSchema& schema,
                         std::string subject_id = {}, std::string session_id = {});
LandmarkTrack load_landmarks(const std::filesystem::path& path, std::string subject_id = {},
                             std::string session_id = {});
StressTrace load_stress(const std::filesystem::path& path, std::string subject_id = {},
                        std::string session_id = {});

void write_recording(const std::filesystem::path& path, const Recording& rec);
void write_landmarks(const std::filesystem::path& path, const LandmarkTrack& track);
void write_stress(const std::filesystem::path& path, const StressTrace& trace);

}  // namespace stressfuse::sigcore
