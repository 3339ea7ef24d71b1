#include "hddrul/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "hddrul/error.hpp"
#include "hddrul/text.hpp"

namespace hddrul {
namespace {

struct Moments {
  double mean = 0.0;
  double std = 0.0;
  bool constant = true;
};

template <typename Column>
Moments moments(const Column& column) {
  Moments m;
  const auto n = column.size();
  if (n == 0) return m;
  for (Eigen::Index i = 0; i < n; ++i) m.mean += column(i);
  m.mean /= static_cast<double>(n);
  double ss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    ss += (column(i) - m.mean) * (column(i) - m.mean);
    if (column(i) != column(0)) m.constant = false;
  }
  m.std = std::sqrt(ss / static_cast<double>(n));
  if (m.std == 0.0) m.constant = true;
  return m;
}

template <typename Column>
void zscore(Column column, const Moments& m) {
  if (m.constant) {
    column.setZero();
    return;
  }
  for (Eigen::Index i = 0; i < column.size(); ++i) column(i) = (column(i) - m.mean) / m.std;
}

}  // namespace

StandardizedSeries unscaled(const LabeledSeries& series, std::span<const int> features) {
  StandardizedSeries out;
  out.serial = series.serial;
  out.features.assign(features.begin(), features.end());
  out.rul = series.rul;
  out.values.resize(static_cast<Eigen::Index>(series.days.size()),
                    static_cast<Eigen::Index>(features.size()));
  for (std::size_t i = 0; i < series.days.size(); ++i) {
    const auto& day = series.days[i];
    out.dates.push_back(day.date);
    for (std::size_t j = 0; j < features.size(); ++j) {
      auto it = day.smart.find(features[j]);
      if (it == day.smart.end() || !it->second)
        throw DataError(series.serial + " on " + format_date(day.date) + " lacks smart_" +
                        std::to_string(features[j]));
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = *it->second;
    }
  }
  return out;
}

StandardizedSeries standardize_per_device(const LabeledSeries& series,
                                          std::span<const int> features) {
  if (series.days.empty()) throw DataError("cannot standardize empty series " + series.serial);
  StandardizedSeries out = unscaled(series, features);
  for (Eigen::Index j = 0; j < out.values.cols(); ++j) {
    auto column = out.values.col(j);
    zscore(column, moments(column));
  }
  return out;
}

GlobalScaler::GlobalScaler(std::vector<int> features, std::vector<double> means,
                           std::vector<double> stds)
    : features_(std::move(features)), means_(std::move(means)), stds_(std::move(stds)) {
  if (means_.size() != features_.size() || stds_.size() != features_.size())
    throw ConfigError("scaler dimensions disagree");
}

GlobalScaler GlobalScaler::fit(std::span<const LabeledSeries> cohort,
                               std::span<const int> features) {
  if (cohort.empty()) throw DataError("cannot fit a scaler on an empty cohort");
  std::vector<StandardizedSeries> raw;
  Eigen::Index rows = 0;
  for (const auto& s : cohort) {
    raw.push_back(unscaled(s, features));
    rows += raw.back().values.rows();
  }
  RowMatrix pooled(rows, static_cast<Eigen::Index>(features.size()));
  Eigen::Index r = 0;
  for (const auto& s : raw) {
    pooled.middleRows(r, s.values.rows()) = s.values;
    r += s.values.rows();
  }
  std::vector<double> means, stds;
  for (Eigen::Index j = 0; j < pooled.cols(); ++j) {
    auto m = moments(pooled.col(j));
    means.push_back(m.mean);
    stds.push_back(m.constant ? 0.0 : m.std);
  }
  return GlobalScaler({features.begin(), features.end()}, std::move(means), std::move(stds));
}

StandardizedSeries GlobalScaler::apply(const LabeledSeries& series) const {
  StandardizedSeries out = unscaled(series, features_);
  for (Eigen::Index j = 0; j < out.values.cols(); ++j) {
    const auto k = static_cast<std::size_t>(j);
    zscore(out.values.col(j), Moments{means_[k], stds_[k], stds_[k] == 0.0});
  }
  return out;
}

std::vector<int> GlobalScaler::constant_features() const {
  std::vector<int> ids;
  for (std::size_t j = 0; j < features_.size(); ++j)
    if (stds_[j] == 0.0) ids.push_back(features_[j]);
  return ids;
}

void GlobalScaler::save(std::ostream& out) const {
  out << "attribute,mean,std\n";
  for (std::size_t j = 0; j < features_.size(); ++j)
    out << features_[j] << ',' << format_double(means_[j]) << ',' << format_double(stds_[j])
        << '\n';
}

GlobalScaler GlobalScaler::load(std::istream& in) {
  std::string line;
  if (!next_line(in, line) || line != "attribute,mean,std")
    throw ParseError(0, "scaler file lacks its header");
  std::vector<int> features;
  std::vector<double> means, stds;
  std::size_t row = 0;
  while (next_line(in, line)) {
    auto f = split_csv_line(line);
    auto id = f.size() == 3 ? parse_int(f[0]) : std::nullopt;
    auto mean = f.size() == 3 ? parse_double(f[1]) : std::nullopt;
    auto sd = f.size() == 3 ? parse_double(f[2]) : std::nullopt;
    if (!id || !mean || !sd) throw ParseError(row, "malformed scaler row");
    features.push_back(static_cast<int>(*id));
    means.push_back(*mean);
    stds.push_back(*sd);
    ++row;
  }
  return GlobalScaler(std::move(features), std::move(means), std::move(stds));
}

GlobalStandardization standardize_global(std::span<const LabeledSeries> cohort,
                                         std::span<const int> features) {
  GlobalStandardization result{{}, GlobalScaler::fit(cohort, features)};
  for (const auto& s : cohort) result.cohort.push_back(result.scaler.apply(s));
  return result;
}

WindowedDataset window(std::span<const StandardizedSeries> cohort, std::size_t timesteps) {
  if (timesteps < 1) throw ConfigError("timesteps must be >= 1");
  WindowedDataset data;
  data.timesteps = timesteps;
  if (cohort.empty()) return data;
  data.features = static_cast<std::size_t>(cohort.front().values.cols());
  data.attributes = cohort.front().features;
  for (const auto& s : cohort) {
    if (static_cast<std::size_t>(s.values.cols()) != data.features)
      throw ConfigError("series " + s.serial + " has a different feature count");
    data.samples += static_cast<std::size_t>(s.values.rows());
  }
  data.values.reserve(data.samples * timesteps * data.features);
  data.targets.reserve(data.samples);
  data.provenance.reserve(data.samples);

  for (const auto& s : cohort) {
    const auto days = static_cast<std::ptrdiff_t>(s.values.rows());
    for (std::ptrdiff_t day = 0; day < days; ++day) {
      for (std::ptrdiff_t k = static_cast<std::ptrdiff_t>(timesteps) - 1; k >= 0; --k) {
        const auto source = std::max<std::ptrdiff_t>(0, day - k);
        for (Eigen::Index j = 0; j < s.values.cols(); ++j) data.values.push_back(s.values(source, j));
      }
      data.targets.push_back(s.rul.empty() ? 0.0
                                           : static_cast<double>(s.rul[static_cast<std::size_t>(day)]));
      data.provenance.push_back({s.serial, s.dates[static_cast<std::size_t>(day)]});
    }
  }
  return data;
}

void write_windows_csv(std::ostream& out, const WindowedDataset& data) {
  out << "windows,1," << data.samples << ',' << data.timesteps << ',' << data.features << '\n';
  out << "serial,date,target";
  for (std::size_t t = 0; t < data.timesteps; ++t)
    for (std::size_t f = 0; f < data.features; ++f) out << ",t" << t << "_f" << f;
  out << '\n';
  for (std::size_t s = 0; s < data.samples; ++s) {
    out << data.provenance[s].serial << ',' << format_date(data.provenance[s].date) << ','
        << format_double(data.targets[s]);
    for (double v : data.window(s)) out << ',' << format_double(v);
    out << '\n';
  }
}

WindowedDataset read_windows_csv(std::istream& in) {
  std::string line;
  if (!next_line(in, line)) throw ParseError(0, "missing windows manifest");
  auto manifest = split_csv_line(line);
  if (manifest.size() != 5 || manifest[0] != "windows" || manifest[1] != "1")
    throw ParseError(0, "bad windows manifest");
  auto samples = parse_int(manifest[2]), steps = parse_int(manifest[3]),
       features = parse_int(manifest[4]);
  if (!samples || !steps || !features || *samples < 0 || *steps < 1 || *features < 0)
    throw ParseError(0, "bad windows manifest");
  WindowedDataset data;
  data.samples = static_cast<std::size_t>(*samples);
  data.timesteps = static_cast<std::size_t>(*steps);
  data.features = static_cast<std::size_t>(*features);
  if (!next_line(in, line)) throw ParseError(0, "missing windows header");
  const std::size_t width = 3 + data.timesteps * data.features;
  for (std::size_t s = 0; s < data.samples; ++s) {
    if (!next_line(in, line)) throw ParseError(s, "fewer rows than the manifest states");
    auto f = split_csv_line(line);
    if (f.size() != width) throw ParseError(s, "wrong field count");
    auto date = parse_date(f[1]);
    auto target = parse_double(f[2]);
    if (!date || !target) throw ParseError(s, "bad provenance or target");
    data.provenance.push_back({f[0], *date});
    data.targets.push_back(*target);
    for (std::size_t k = 3; k < width; ++k) {
      auto v = parse_double(f[k]);
      if (!v) throw ParseError(s, "non-numeric window value");
      data.values.push_back(*v);
    }
  }
  return data;
}

}  // namespace hddrul
