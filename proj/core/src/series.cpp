#include <algorithm>
#include <ostream>
#include <set>
#include <unordered_map>

#include "hddrul/dataset.hpp"
#include "hddrul/error.hpp"

namespace hddrul {

LabeledSeries build_labeled_series(const Corpus& corpus, const FailureEvent& event,
                                   int lookback_days) {
  if (lookback_days < 1) throw ConfigError("lookback_days must be >= 1");
  const Day first = event.fail_date - std::chrono::days{lookback_days};
  LabeledSeries series;
  series.serial = event.serial;
  bool found_failure_day = false;
  for (const auto& record : corpus.history(event.serial)) {
    if (record.date < first || record.date > event.fail_date) continue;
    series.days.push_back({record.date, record.smart});
    series.rul.push_back(static_cast<int>((event.fail_date - record.date).count()));
    found_failure_day = found_failure_day || record.date == event.fail_date;
  }
  if (!found_failure_day)
    throw DataError("no record for " + event.serial + " on failure date " +
                    format_date(event.fail_date));
  return series;
}

LabeledSeries cap_rul(LabeledSeries series, int cap) {
  if (cap < 1) throw ConfigError("cap must be >= 1");
  for (int& r : series.rul) r = std::min(r, cap);
  return series;
}

std::vector<LabeledSeries> cap_rul(std::vector<LabeledSeries> cohort, int cap) {
  for (auto& series : cohort) series = cap_rul(std::move(series), cap);
  return cohort;
}

FillResult fill_missing(std::vector<LabeledSeries> cohort, std::span<const int> features) {
  FillResult result;
  for (auto& series : cohort) {
    bool usable = true;
    for (int feature : features) {
      std::optional<double> first_seen;
      for (const auto& day : series.days) {
        auto it = day.smart.find(feature);
        if (it != day.smart.end() && it->second) {
          first_seen = it->second;
          break;
        }
      }
      if (!first_seen) {
        usable = false;
        break;
      }
      double carry = *first_seen;
      for (auto& day : series.days) {
        auto& slot = day.smart[feature];
        if (slot)
          carry = *slot;
        else
          slot = carry;
      }
    }
    if (usable)
      result.series.push_back(std::move(series));
    else
      result.excluded.push_back(series.serial);
  }
  return result;
}

std::vector<int> cohort_attributes(std::span<const LabeledSeries> cohort) {
  std::set<int> ids;
  for (const auto& series : cohort)
    for (const auto& day : series.days)
      for (const auto& [id, value] : day.smart) ids.insert(id);
  return {ids.begin(), ids.end()};
}

std::vector<int> attributes_present_on_all(std::span<const LabeledSeries> cohort) {
  std::vector<int> result;
  if (cohort.empty()) return result;
  for (int id : cohort_attributes(cohort)) {
    bool everywhere = std::all_of(cohort.begin(), cohort.end(), [id](const LabeledSeries& s) {
      return std::any_of(s.days.begin(), s.days.end(), [id](const SeriesDay& d) {
        auto it = d.smart.find(id);
        return it != d.smart.end() && it->second.has_value();
      });
    });
    if (everywhere) result.push_back(id);
  }
  return result;
}

void write_cohort_csv(std::ostream& out, std::span<const LabeledSeries> cohort) {
  const auto attributes = cohort_attributes(cohort);
  out << "serial,date,rul";
  for (int id : attributes) out << ",smart_" << id << "_raw";
  out << '\n';
  for (const auto& series : cohort) {
    for (std::size_t i = 0; i < series.days.size(); ++i) {
      const auto& day = series.days[i];
      out << series.serial << ',' << format_date(day.date) << ',' << series.rul.at(i);
      for (int id : attributes) {
        out << ',';
        auto it = day.smart.find(id);
        if (it != day.smart.end() && it->second) out << format_double(*it->second);
      }
      out << '\n';
    }
  }
}

std::vector<LabeledSeries> read_cohort_csv(std::istream& in) {
  std::string line;
  if (!next_line(in, line)) return {};
  const auto header = split_csv_line(line);
  if (header.size() < 2 || trim(header[0]) != "serial" || trim(header[1]) != "date")
    throw ParseError(0, "cohort header must start with serial,date");
  std::size_t first_feature = 2;
  const bool labeled = header.size() > 2 && trim(header[2]) == "rul";
  if (labeled) first_feature = 3;
  std::vector<int> ids;
  for (std::size_t c = first_feature; c < header.size(); ++c) {
    std::string_view name = trim(header[c]);
    if (name.starts_with("smart_")) name.remove_prefix(6);
    if (name.ends_with("_raw")) name.remove_suffix(4);
    auto id = parse_int(name);
    if (!id) throw ParseError(0, "unrecognized feature column '" + header[c] + "'");
    ids.push_back(static_cast<int>(*id));
  }

  std::vector<LabeledSeries> cohort;
  std::unordered_map<std::string, std::size_t> index;
  std::size_t row = 0;
  while (next_line(in, line)) {
    auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw ParseError(row, "expected " + std::to_string(header.size()) + " fields");
    std::string serial(trim(fields[0]));
    auto date = parse_date(trim(fields[1]));
    if (!date) throw ParseError(row, "malformed date '" + fields[1] + "'");
    auto [it, inserted] = index.try_emplace(serial, cohort.size());
    if (inserted) cohort.push_back({serial, {}, {}});
    auto& series = cohort[it->second];
    if (!series.days.empty() && series.days.back().date >= *date)
      throw ParseError(row, "dates for " + serial + " are not strictly increasing");
    SeriesDay day{*date, {}};
    for (std::size_t k = 0; k < ids.size(); ++k) {
      std::string_view cell = trim(fields[first_feature + k]);
      if (cell.empty()) {
        day.smart[ids[k]] = std::nullopt;
        continue;
      }
      auto value = parse_double(cell);
      if (!value) throw ParseError(row, "non-numeric value '" + std::string(cell) + "'");
      day.smart[ids[k]] = *value;
    }
    series.days.push_back(std::move(day));
    if (labeled) {
      auto rul = parse_int(fields[2]);
      if (!rul || *rul < 0) throw ParseError(row, "bad rul '" + fields[2] + "'");
      series.rul.push_back(static_cast<int>(*rul));
    }
    ++row;
  }
  return cohort;
}

}  // namespace hddrul
