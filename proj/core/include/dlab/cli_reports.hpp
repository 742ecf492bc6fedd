#pragma once

#include "dlab/parallel.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace dlab {

inline constexpr const char* kConfigSchema = "dlab-config/1";
inline constexpr const char* kReportSchema = "dlab-report/1";

enum class Verdict { pass, inconclusive, fail };

std::string to_string(Verdict verdict);

// PASS iff |measured - prediction| <= band, FAIL iff it exceeds 2 band.
Verdict judge(double measured, double prediction, double band);
Verdict worst(Verdict a, Verdict b);

const std::vector<std::string>& known_commands();

using CsvCell = std::variant<std::string, double, long long>;

struct Report {
    std::string command;
    nlohmann::json summary;  // written as report.json (keys sorted)
    std::vector<std::string> csv_header;
    std::vector<std::vector<CsvCell>> csv_rows;
    std::vector<std::string> plot_header;
    std::vector<std::vector<double>> plot_rows;  // plotdata.tsv when nonempty
    std::optional<nlohmann::json> state;         // state.json (extremize)
    Verdict verdict = Verdict::inconclusive;
};

struct RunOptions {
    std::optional<std::uint64_t> seed;  // overrides the config's "seed"
    unsigned threads = 1;
};

// Validates the document against the schema of `command` (ConfigInvalid
// naming the offending key) and runs the experiment.
Report run_experiment(const std::string& command, const nlohmann::json& config, const RunOptions& options = {});

// Writes report.json, data.csv and, when present, plotdata.tsv / state.json.
// IoFailure when the report has no rows or a file cannot be written.
void emit_report(const Report& report, const std::filesystem::path& out_dir);

std::string format_double(double value);  // %.17g
std::string render_csv(const Report& report);
std::string render_plot(const Report& report);
std::string render_json(const nlohmann::json& doc);

nlohmann::json load_config(const std::filesystem::path& path);  // IoFailure / ConfigInvalid

// Full pipeline; returns the process exit status (0 PASS/INCONCLUSIVE, 1 FAIL,
// 2 error) and prints errors to stderr.
int run_config(const std::string& command, const std::filesystem::path& config_path,
               const std::filesystem::path& out_dir, const RunOptions& options = {});

}  // namespace dlab
