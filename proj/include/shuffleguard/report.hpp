#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace shuffleguard {

// One evaluation condition: accuracy on clean inputs and on the outputs of
// the named attack, over sample_count test images.
struct EvalRow {
  std::string condition;
  double epsilon = 0.0;
  int iterations = 0;
  bool random_init = false;
  bool key_match = true;  // false only for wrong-key adaptive conditions
  int64_t sample_count = 0;
  double clean_acc = 0.0;
  double attacked_acc = 0.0;
};

struct AccuracyReport {
  std::vector<EvalRow> rows;
  std::string manifest_hash;
  uint64_t seed = 0;
  double wall_seconds = 0.0;  // recorded in JSON only; CSV stays reproducible
};

// CSV: one '# manifest <hash>' comment line, a header, then one row per
// condition. Accuracies print as %.6f and epsilon as an exact "k/255"
// fraction, so identical reports serialize byte-identically.
std::string report_csv(const AccuracyReport& report);
void write_report_csv(const std::filesystem::path& path, const AccuracyReport& report);

// JSON carries full provenance: manifest hash, seed, wall time, rows.
std::string report_json(const AccuracyReport& report);
void write_report_json(const std::filesystem::path& path, const AccuracyReport& report);

// Accuracy-vs-epsilon line plot of the report rows, as a standalone SVG.
std::string report_svg(const AccuracyReport& report, const std::string& title);
void write_report_svg(const std::filesystem::path& path, const AccuracyReport& report,
                      const std::string& title);

}  // namespace shuffleguard
