#pragma once

#include "fockfit/bootstrap.hpp"
#include "fockfit/estimation.hpp"
#include "fockfit/studies.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fockfit::io {

inline constexpr int kFormatVersion = 1;

/// Malformed or schema-violating input; the message names the offending field.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File could not be read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string counts_to_json(const FockHistogram& h);
FockHistogram counts_from_json(std::string_view text);

/// Contents of an estimate file.
struct Estimate {
    FitResult fit;
    WeightScheme weight_scheme = WeightScheme::posterior;
    PriorShape prior;
    std::vector<ConfidenceInterval> intervals;
    std::optional<int> n_b;
    std::optional<std::uint64_t> seed;
};

std::string estimate_to_json(const Estimate& e);
Estimate estimate_from_json(std::string_view text);

enum class StudyKind { fidelity, bias, coverage, weights };

std::string_view to_string(StudyKind kind);

struct StudyRequest {
    StudyKind kind = StudyKind::fidelity;
    StudyConfig config;
};

/// Parse a study config; unknown or ill-typed fields raise FormatError naming their path.
StudyRequest study_request_from_json(std::string_view text);

/// Header row of the report CSV.
std::vector<std::string> report_csv_columns();
std::string report_to_csv(const StudyReport& report);
std::string report_to_json(const StudyReport& report, StudyKind kind);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double x);

std::string read_file(const std::filesystem::path& path);
/// Write through a temporary file in the same directory, then rename over path.
/// Existing non-regular files (devices, pipes) are written directly instead.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

} // namespace fockfit::io
