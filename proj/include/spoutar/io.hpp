#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "spoutar/factorization.hpp"
#include "spoutar/posterior.hpp"
#include "spoutar/sampler.hpp"

namespace spoutar {

/// How to read a delimited text file into a paired dataset: orientation,
/// the pre/post split, and per-variable preprocessing.
struct IngestSpec {
    enum class Orientation { rows_are_time, rows_are_variables };
    enum class Preprocess { none, log_diff };

    std::string path;
    Orientation orientation = Orientation::rows_are_time;
    Preprocess preprocess = Preprocess::none;
    bool header = false;

    // Split rule: either an explicit count of period-1 time points, or a
    // date column with two inclusive ranges (string-ordered, e.g. ISO dates).
    int split_index = -1;
    std::string date_column;
    std::string range1_start, range1_end, range2_start, range2_end;
};

/// Parse, orient, split and preprocess. Throws ParseError with line/column
/// diagnostics for malformed text and ValidationError for semantic issues
/// (nonpositive values under log-diff, too-short periods, ...).
PairedDataset ingest(const IngestSpec& spec);

/// Raw matrix reader (variables x time after orientation), header-aware.
Eigen::MatrixXd read_matrix_csv(const std::string& path,
                                IngestSpec::Orientation orientation,
                                bool header,
                                std::vector<std::string>* names_out);

/// Writes variables as rows, 17 significant digit round-trip precision.
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& names);

// Self-describing draws container: magic, header (p, q, flags, layout),
// then fixed-width little-endian float64 records.
void save_draws(const std::string& path, const PosteriorDraws& draws);
PosteriorDraws load_draws(const std::string& path);
void export_draws_csv(const std::string& path, const PosteriorDraws& draws);

void write_report_json(const std::string& path, const EdgeShiftReport& report,
                       const std::vector<EdgeShift>& top,
                       const std::vector<std::string>& names);
void write_dot(const std::string& path, const EdgeShiftReport& report,
               const std::vector<std::string>& names);
void write_top_k_csv(const std::string& path,
                     const std::vector<EdgeShift>& top,
                     const std::vector<std::string>& names);
void write_forecast_csv(const std::string& path, const ForecastResult& fc,
                        const std::vector<std::string>& names);

/// Flat `key = value` configuration file; '#' starts a comment.
std::map<std::string, std::string> load_kv_config(const std::string& path);

/// FNV-1a 64-bit digest of a file's bytes, hex-encoded.
std::string file_digest_hex(const std::string& path);

}  // namespace spoutar
