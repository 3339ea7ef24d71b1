#include <algorithm>
#include <fstream>
#include <thread>

#include "hddrul/dataset.hpp"
#include "hddrul/error.hpp"

namespace hddrul {
namespace {

// smart_<n>_raw -> n, otherwise nullopt.
std::optional<int> raw_attribute(std::string_view column) {
  constexpr std::string_view prefix = "smart_", suffix = "_raw";
  if (column.size() <= prefix.size() + suffix.size()) return std::nullopt;
  if (!column.starts_with(prefix) || !column.ends_with(suffix)) return std::nullopt;
  auto id = parse_int(column.substr(prefix.size(), column.size() - prefix.size() - suffix.size()));
  if (!id || *id < 0) return std::nullopt;
  return static_cast<int>(*id);
}

}  // namespace

SnapshotHeader::SnapshotHeader(std::span<const std::string> columns) : width_(columns.size()) {
  bool have_date = false, have_serial = false, have_model = false, have_failure = false;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    std::string_view name = trim(columns[i]);
    if (name == "date") {
      date_ = i;
      have_date = true;
    } else if (name == "serial_number") {
      serial_ = i;
      have_serial = true;
    } else if (name == "model") {
      model_ = i;
      have_model = true;
    } else if (name == "failure") {
      failure_ = i;
      have_failure = true;
    } else if (auto id = raw_attribute(name)) {
      raw_columns_.emplace_back(i, *id);
      attributes_.push_back(*id);
    }
  }
  if (!have_date || !have_serial || !have_model || !have_failure)
    throw ParseError(0, "header lacks one of date, serial_number, model, failure");
  std::sort(attributes_.begin(), attributes_.end());
}

DriveRecord parse_snapshot_row(const SnapshotHeader& header, std::span<const std::string> row,
                               std::size_t row_index) {
  if (row.size() != header.width_)
    throw ParseError(row_index, "expected " + std::to_string(header.width_) + " fields, got " +
                                    std::to_string(row.size()));
  DriveRecord record;
  auto date = parse_date(trim(row[header.date_]));
  if (!date) throw ParseError(row_index, "malformed date '" + row[header.date_] + "'");
  record.date = *date;
  record.serial = std::string(trim(row[header.serial_]));
  record.model = std::string(trim(row[header.model_]));
  auto flag = parse_int(row[header.failure_]);
  if (!flag || (*flag != 0 && *flag != 1))
    throw ParseError(row_index, "non-numeric failure flag '" + row[header.failure_] + "'");
  record.failed = *flag == 1;
  for (auto [column, id] : header.raw_columns_) {
    std::string_view cell = trim(row[column]);
    if (cell.empty()) {
      record.smart[id] = std::nullopt;
      continue;
    }
    auto value = parse_double(cell);
    if (!value || *value < 0)
      throw ParseError(row_index, "bad value '" + std::string(cell) + "' for smart_" +
                                      std::to_string(id) + "_raw");
    record.smart[id] = *value;
  }
  return record;
}

std::vector<DriveRecord> read_snapshot_csv(std::istream& in) {
  std::string line;
  if (!next_line(in, line)) return {};
  auto columns = split_csv_line(line);
  SnapshotHeader header(columns);
  std::vector<DriveRecord> records;
  std::size_t row = 0;
  while (next_line(in, line)) {
    auto fields = split_csv_line(line);
    records.push_back(parse_snapshot_row(header, fields, row++));
  }
  return records;
}

std::vector<DriveRecord> read_snapshot_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_snapshot_csv(in);
}

SnapshotLoad load_snapshot_dir(const std::filesystem::path& dir, std::size_t threads) {
  std::vector<std::filesystem::path> files;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  if (ec) throw DataError("cannot list " + dir.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());

  struct Slot {
    std::vector<DriveRecord> records;
    std::string error;
  };
  std::vector<Slot> slots(files.size());
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < files.size(); i += stride) {
      try {
        slots[i].records = read_snapshot_file(files[i]);
      } catch (const std::exception& e) {
        slots[i].error = files[i].filename().string() + ": " + e.what();
      }
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, files.size()));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }

  SnapshotLoad load;
  for (auto& slot : slots) {
    if (!slot.error.empty()) {
      load.errors.push_back(std::move(slot.error));
      continue;
    }
    ++load.files_read;
    std::move(slot.records.begin(), slot.records.end(), std::back_inserter(load.records));
  }
  return load;
}

Corpus::Corpus(std::vector<DriveRecord> records) : records_(std::move(records)) {
  std::stable_sort(records_.begin(), records_.end(), [](const auto& a, const auto& b) {
    return std::tie(a.serial, a.date) < std::tie(b.serial, b.date);
  });
  auto dup = std::adjacent_find(records_.begin(), records_.end(), [](const auto& a, const auto& b) {
    return a.serial == b.serial && a.date == b.date;
  });
  if (dup != records_.end())
    throw DataError("duplicate record for " + dup->serial + " on " + format_date(dup->date));
}

std::span<const DriveRecord> Corpus::history(std::string_view serial) const {
  auto lo = std::lower_bound(records_.begin(), records_.end(), serial,
                             [](const DriveRecord& r, std::string_view s) { return r.serial < s; });
  auto hi = std::upper_bound(lo, records_.end(), serial,
                             [](std::string_view s, const DriveRecord& r) { return s < r.serial; });
  return {lo, hi};
}

std::vector<FailureEvent> scan_failures(std::span<const DriveRecord> corpus,
                                        std::string_view model_filter) {
  std::vector<FailureEvent> events;
  for (const auto& record : corpus) {
    if (record.failed && record.model == model_filter)
      events.push_back({record.serial, record.date});
  }
  std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
    return std::tie(a.fail_date, a.serial) < std::tie(b.fail_date, b.serial);
  });
  events.erase(std::unique(events.begin(), events.end()), events.end());
  return events;
}

}  // namespace hddrul
