#pragma once

// File formats shared by the CLI stages: fingerprint/truth CSV, the per-burst
// directory index, evaluation outputs and the scatter plot.

#include <filesystem>
#include <string>
#include <vector>

#include "btfp/classifier.hpp"
#include "btfp/extract.hpp"
#include "btfp/fingerprint.hpp"
#include "btfp/synth.hpp"

namespace btfp::report {

namespace fs = std::filesystem;

inline constexpr const char* kFingerprintHeader = "label,channel,start_sample,cfo_hz,scaling_factor,variant";

void write_fingerprints_csv(const fs::path& path, const std::vector<Fingerprint>& rows);
std::vector<Fingerprint> read_fingerprints_csv(const fs::path& path);

/// Rows become ([cfo_hz, scaling_factor], label). Throws FormatError on an
/// unlabelled row.
LabeledDataset to_dataset(const std::vector<Fingerprint>& rows);

void write_truth_csv(const fs::path& path, const synth::GroundTruth& truth);
synth::GroundTruth read_truth_csv(const fs::path& path);

/// Writes burst_NNNNN.data files plus bursts.json into `dir`.
void write_bursts(const fs::path& dir, const std::vector<Burst>& bursts, const ChannelPlan& plan);
std::vector<Burst> read_bursts(const fs::path& dir);

/// CFO on x, scaling factor on y, one colour and legend entry per label.
void emit_scatter_svg(const LabeledDataset& data, const fs::path& path);
std::string scatter_svg(const LabeledDataset& data);

/// metrics.json, confusion.csv and confusion_normalized.csv.
void emit_report(const EvalReport& report, const fs::path& out_dir);

/// Accuracy / Precision / Recall / F1 score table in Markdown.
std::string metrics_table(const EvalReport& report);

void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

} // namespace btfp::report
