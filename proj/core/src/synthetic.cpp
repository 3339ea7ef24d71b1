#include <array>
#include <cstdio>

#include "hddrul/dataset.hpp"
#include "hddrul/error.hpp"
#include "hddrul/rng.hpp"

namespace hddrul {
namespace {

constexpr std::array<int, 22> kAttributeIds = {7,   9,   240, 241, 242, 1,   3,   4,
                                               5,   10,  12,  187, 188, 189, 190, 192,
                                               193, 194, 195, 197, 198, 199};

// Rough magnitude of each synthetic counter; 7/241/242 are large counters
// in real Backblaze data, 9/240 are hour counts.
double attribute_scale(std::size_t index) {
  constexpr std::array<double, 5> head = {1e4, 24.0, 20.0, 1e6, 1e6};
  return index < head.size() ? head[index] : 1.0 + static_cast<double>(index % 7);
}

}  // namespace

void SynthConfig::validate() const {
  if (n_drives < 1) throw ConfigError("synthetic n_drives must be >= 1");
  if (lookback_days < 1) throw ConfigError("synthetic lookback_days must be >= 1");
  if (n_features < 1) throw ConfigError("synthetic n_features must be >= 1");
  if (jump_day < 0 || jump_day >= lookback_days)
    throw ConfigError("synthetic jump_day must lie in [0, lookback_days)");
  if (!(noise_scale >= 0)) throw ConfigError("synthetic noise_scale must be >= 0");
}

std::vector<int> synthetic_attributes(std::size_t n_features) {
  std::vector<int> ids;
  for (std::size_t k = 0; k < n_features; ++k)
    ids.push_back(k < kAttributeIds.size() ? kAttributeIds[k]
                                           : 300 + static_cast<int>(k - kAttributeIds.size()));
  return ids;
}

bool synthetic_jump_feature(std::size_t index) { return index % 2 == 0; }

std::vector<LabeledSeries> generate_synthetic(const SynthConfig& config) {
  config.validate();
  const auto ids = synthetic_attributes(config.n_features);
  Rng rng(config.seed);
  std::vector<LabeledSeries> cohort;
  cohort.reserve(config.n_drives);

  for (std::size_t d = 0; d < config.n_drives; ++d) {
    LabeledSeries series;
    char serial[64];
    std::snprintf(serial, sizeof serial, "%s-%05zu", config.serial_prefix.c_str(), d);
    series.serial = serial;
    const Day fail_date = config.last_fail_date - std::chrono::days{rng.below(180)};

    struct Trajectory {
      double base, rate, jump;
    };
    std::vector<Trajectory> traj(config.n_features);
    for (auto& t : traj) {
      t.base = rng.uniform(1000.0, 3000.0);
      t.rate = rng.uniform(0.5, 1.5);
      t.jump = rng.uniform(2.0, 4.0);
    }

    const int days = config.lookback_days;
    for (int t = 0; t <= days; ++t) {
      const int rul = days - t;
      SeriesDay day{fail_date - std::chrono::days{rul}, {}};
      for (std::size_t k = 0; k < config.n_features; ++k) {
        const auto& tr = traj[k];
        double value = tr.base + tr.rate * t + config.noise_scale * rng.normal();
        if (synthetic_jump_feature(k) && rul <= config.jump_day)
          value += tr.jump * (4.0 + static_cast<double>(config.jump_day - rul));
        day.smart[ids[k]] = value * attribute_scale(k);
      }
      series.days.push_back(std::move(day));
      series.rul.push_back(rul);
    }
    cohort.push_back(std::move(series));
  }
  return cohort;
}

std::vector<DriveRecord> to_drive_records(std::span<const LabeledSeries> cohort,
                                          std::string_view model) {
  std::vector<DriveRecord> records;
  for (const auto& series : cohort) {
    for (std::size_t i = 0; i < series.days.size(); ++i) {
      DriveRecord r;
      r.serial = series.serial;
      r.date = series.days[i].date;
      r.model = std::string(model);
      r.smart = series.days[i].smart;
      r.failed = i + 1 == series.days.size() && series.failed();
      records.push_back(std::move(r));
    }
  }
  return records;
}

}  // namespace hddrul
