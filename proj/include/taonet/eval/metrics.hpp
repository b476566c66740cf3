// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace taonet::eval {

inline constexpr const char* kOverflowLabel = "UNMAPPED";

/// Rows are gold labels, columns predicted labels on the same axis, plus
/// one overflow column for predictions outside the axis (UNMAPPED and any
/// label that never occurs as gold).
struct ConfusionMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<std::uint64_t>> counts;  // labels x labels
  std::vector<std::uint64_t> overflow;             // per gold row

  std::size_t size() const { return labels.size(); }
  std::uint64_t total() const;
  std::uint64_t row_sum(std::size_t gold) const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Tallies pairs. The axis holds the gold labels that occur, ordered as in
/// `preferred_order` with unlisted labels appended by first appearance.
/// Throws Error{kLengthMismatch} for unequal lengths or no pairs.
ConfusionMatrix confusion(std::span<const std::string> gold, std::span<const std::string> pred,
                          std::span<const std::string> preferred_order = {});

struct ClassMetrics {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
};

struct MetricReport {
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double micro_precision = 0.0;
  double micro_recall = 0.0;  // equals accuracy
  double micro_f1 = 0.0;
  double accuracy = 0.0;
  std::vector<ClassMetrics> per_class;
  std::uint64_t seed = 0;
};

/// Per-class precision TP/(TP+FP) and recall TP/(TP+FN), 0 on a zero
/// denominator; F1 likewise. Macro values average over the label axis.
/// Micro values pool TP, FP and FN; overflow counts are FN for their gold
/// row and FP for no class. Throws Error{kEmptyMatrix}.
MetricReport compute_metrics(const ConfusionMatrix& matrix);

struct MetricSummary {
  std::string name;
  double mean = 0.0;
  double stddev = 0.0;  // population
};

/// Mean and population standard deviation of macro_precision, macro_f1,
/// micro_f1, recall (macro) and accuracy, in that order. Throws
/// Error{kEmptyMatrix} for an empty list.
std::vector<MetricSummary> aggregate_runs(std::span<const MetricReport> reports);

/// CSV texts; numbers carry 6 decimals.
std::string metrics_csv(const MetricReport& report);
std::string confusion_csv(const ConfusionMatrix& matrix);
std::string confusion_text(const ConfusionMatrix& matrix);
std::string summary_csv(std::span<const MetricSummary> summary);

/// Writes `<prefix>metrics.csv`, `<prefix>confusion.csv` and
/// `<prefix>confusion.txt` into `dir`. Throws Error{kIoFailure}.
void emit_report(const MetricReport& report, const ConfusionMatrix& matrix,
                 const std::filesystem::path& dir, const std::string& prefix = "");

/// Reads a file written by metrics_csv back (values to 6 decimals).
/// Throws Error{kFileNotFound} or Error{kSchemaViolation}.
MetricReport read_metrics_csv(const std::filesystem::path& path);

/// Writes `text` to `path`, throwing Error{kIoFailure} on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace taonet::eval
