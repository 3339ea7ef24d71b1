#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hddrul/text.hpp"

namespace hddrul {

// SMART attribute id -> raw value. A present key with nullopt is an empty
// cell in the source file.
using SmartValues = std::map<int, std::optional<double>>;

// One drive-day from a daily snapshot.
struct DriveRecord {
  std::string serial;
  Day date;
  std::string model;
  SmartValues smart;
  bool failed = false;

  bool operator==(const DriveRecord&) const = default;
};

struct FailureEvent {
  std::string serial;
  Day fail_date;

  auto operator<=>(const FailureEvent&) const = default;
};

// Column layout of a Backblaze daily snapshot file. Only smart_<n>_raw
// columns are kept; the vendor-normalized columns are dropped.
class SnapshotHeader {
 public:
  // Throws ParseError (row 0) when a required column is missing.
  explicit SnapshotHeader(std::span<const std::string> columns);

  std::size_t width() const { return width_; }
  const std::vector<int>& attributes() const { return attributes_; }

 private:
  friend DriveRecord parse_snapshot_row(const SnapshotHeader&, std::span<const std::string>,
                                        std::size_t);

  std::size_t width_ = 0;
  std::size_t date_ = 0, serial_ = 0, model_ = 0, failure_ = 0;
  std::vector<std::pair<std::size_t, int>> raw_columns_;
  std::vector<int> attributes_;
};

// Throws ParseError carrying `row_index` for a malformed date, a
// non-numeric failure flag, a non-numeric SMART cell or a short row.
DriveRecord parse_snapshot_row(const SnapshotHeader& header, std::span<const std::string> row,
                               std::size_t row_index);

std::vector<DriveRecord> read_snapshot_csv(std::istream& in);
std::vector<DriveRecord> read_snapshot_file(const std::filesystem::path& path);

struct SnapshotLoad {
  std::vector<DriveRecord> records;
  std::size_t files_read = 0;
  // One "<file>: <message>" entry per file that could not be ingested.
  std::vector<std::string> errors;
};

// Reads every *.csv in `dir` (sorted by name). Bad files are reported and
// skipped. Parsing may use up to `threads` workers; the merged result does
// not depend on the thread count.
SnapshotLoad load_snapshot_dir(const std::filesystem::path& dir, std::size_t threads = 1);

// Drive records indexed by serial, sorted by (serial, date).
class Corpus {
 public:
  // Throws DataError if a serial has two records for the same date.
  explicit Corpus(std::vector<DriveRecord> records);

  std::span<const DriveRecord> records() const { return records_; }
  std::span<const DriveRecord> history(std::string_view serial) const;

 private:
  std::vector<DriveRecord> records_;
};

// Failures of drives whose model equals `model_filter`, one per
// (serial, date), sorted by fail date then serial.
std::vector<FailureEvent> scan_failures(std::span<const DriveRecord> corpus,
                                        std::string_view model_filter);

struct SeriesDay {
  Day date;
  SmartValues smart;

  bool operator==(const SeriesDay&) const = default;
};

// A failed drive's pre-failure history with RUL labels in days. The
// failure flag is implied by a final label of 0.
struct LabeledSeries {
  std::string serial;
  std::vector<SeriesDay> days;
  std::vector<int> rul;

  bool failed() const { return !rul.empty() && rul.back() == 0; }
  bool operator==(const LabeledSeries&) const = default;
};

// Up to lookback_days + 1 records ending on the failure date, labeled with
// (fail_date - date) in days. Absent calendar days are not interpolated.
// Throws DataError when the corpus has no record on the failure date.
LabeledSeries build_labeled_series(const Corpus& corpus, const FailureEvent& event,
                                   int lookback_days);

LabeledSeries cap_rul(LabeledSeries series, int cap = 30);
std::vector<LabeledSeries> cap_rul(std::vector<LabeledSeries> cohort, int cap = 30);

struct FillResult {
  std::vector<LabeledSeries> series;
  // Serials dropped because a selected feature was missing on every day.
  std::vector<std::string> excluded;
};

// Forward-fills sporadic gaps in the selected features from the previous
// day of the same drive. Leading gaps take the first observed value.
FillResult fill_missing(std::vector<LabeledSeries> cohort, std::span<const int> features);

// Sorted union of attribute ids appearing in the cohort.
std::vector<int> cohort_attributes(std::span<const LabeledSeries> cohort);

// Attributes with at least one non-missing value on every drive.
std::vector<int> attributes_present_on_all(std::span<const LabeledSeries> cohort);

// Long-format cohort CSV: serial,date,rul,smart_<n>_raw...
void write_cohort_csv(std::ostream& out, std::span<const LabeledSeries> cohort);
// Inverse of write_cohort_csv. The rul column is optional; when absent
// every series comes back with an empty label vector.
std::vector<LabeledSeries> read_cohort_csv(std::istream& in);

struct SynthConfig {
  std::size_t n_drives = 20;
  int lookback_days = 60;
  std::size_t n_features = 5;
  // Degradation begins once rul <= jump_day.
  int jump_day = 15;
  double noise_scale = 0.3;
  std::uint64_t seed = 0;
  std::string serial_prefix = "SYN";
  Day last_fail_date = Day{std::chrono::year{2020} / 6 / 30};

  // Throws ConfigError.
  void validate() const;
};

// Attribute ids used for synthetic feature k: 7, 9, 240, 241, 242 first.
std::vector<int> synthetic_attributes(std::size_t n_features);
// Whether synthetic feature k receives the pre-failure step/ramp.
bool synthetic_jump_feature(std::size_t index);

// Seeded failed-drive histories: per-drive linear drift plus Gaussian
// noise on every feature, and an additive step plus ramp on the jump
// features once rul <= jump_day. Uncapped labels.
std::vector<LabeledSeries> generate_synthetic(const SynthConfig& config);

// Flattens series into snapshot records; the last record of a failed
// series carries failed = true.
std::vector<DriveRecord> to_drive_records(std::span<const LabeledSeries> cohort,
                                          std::string_view model);

}  // namespace hddrul
