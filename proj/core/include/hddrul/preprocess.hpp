#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hddrul/dataset.hpp"
#include "hddrul/forest.hpp"

namespace hddrul {

// One drive's selected features, days x features, with labels carried
// through unchanged.
struct StandardizedSeries {
  std::string serial;
  std::vector<Day> dates;
  std::vector<int> features;
  RowMatrix values;
  std::vector<int> rul;
};

// Copies the selected features without scaling. Throws DataError when a
// value is missing (run fill_missing first).
StandardizedSeries unscaled(const LabeledSeries& series, std::span<const int> features);

// Z-scores every feature with the drive's own mean and population standard
// deviation. A constant feature becomes all zeros.
StandardizedSeries standardize_per_device(const LabeledSeries& series,
                                          std::span<const int> features);

// One mean/std pair per feature over a pooled cohort.
class GlobalScaler {
 public:
  GlobalScaler() = default;
  GlobalScaler(std::vector<int> features, std::vector<double> means, std::vector<double> stds);

  static GlobalScaler fit(std::span<const LabeledSeries> cohort, std::span<const int> features);

  StandardizedSeries apply(const LabeledSeries& series) const;

  const std::vector<int>& features() const { return features_; }
  const std::vector<double>& means() const { return means_; }
  const std::vector<double>& stds() const { return stds_; }
  // Features whose pooled values were constant; they map to zero.
  std::vector<int> constant_features() const;

  void save(std::ostream& out) const;
  static GlobalScaler load(std::istream& in);

 private:
  std::vector<int> features_;
  std::vector<double> means_;
  std::vector<double> stds_;
};

struct GlobalStandardization {
  std::vector<StandardizedSeries> cohort;
  GlobalScaler scaler;
};

GlobalStandardization standardize_global(std::span<const LabeledSeries> cohort,
                                         std::span<const int> features);

struct WindowProvenance {
  std::string serial;
  Day date;

  bool operator==(const WindowProvenance&) const = default;
};

// samples x timesteps x features, stored sample-major then time-major; the
// newest day of each window is its last row.
struct WindowedDataset {
  std::size_t samples = 0;
  std::size_t timesteps = 0;
  std::size_t features = 0;
  // Attribute ids of the feature columns; empty when unknown.
  std::vector<int> attributes;
  std::vector<double> values;
  std::vector<double> targets;
  std::vector<WindowProvenance> provenance;

  std::span<const double> window(std::size_t sample) const {
    return {values.data() + sample * timesteps * features, timesteps * features};
  }
  double at(std::size_t sample, std::size_t step, std::size_t feature) const {
    return values[(sample * timesteps + step) * features + feature];
  }
};

// One window per drive-day. Days with fewer than timesteps-1 predecessors
// are left-padded by repeating the drive's first day. Targets are the
// day's rul label (0 when the series carries no labels).
WindowedDataset window(std::span<const StandardizedSeries> cohort, std::size_t timesteps);

// Manifest line "windows,1,<samples>,<timesteps>,<features>", a column
// header, then one CSV row per sample.
void write_windows_csv(std::ostream& out, const WindowedDataset& data);
WindowedDataset read_windows_csv(std::istream& in);

}  // namespace hddrul
