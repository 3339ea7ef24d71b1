#include "hddrul_cli/run_config.hpp"

#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <hddrul/error.hpp>
#include <hddrul/text.hpp>

namespace hddrul::cli {
namespace {

std::string key_error(std::string_view key, std::string_view value, std::string_view want) {
  return std::string(key) + " = '" + std::string(value) + "': expected " + std::string(want);
}

long long to_int(std::string_view key, std::string_view value) {
  auto v = parse_int(trim(value));
  if (!v) throw ConfigError(key_error(key, value, "an integer"));
  return *v;
}

std::size_t to_count(std::string_view key, std::string_view value) {
  auto v = to_int(key, value);
  if (v < 0) throw ConfigError(key_error(key, value, "a non-negative integer"));
  return static_cast<std::size_t>(v);
}

double to_real(std::string_view key, std::string_view value) {
  auto v = parse_double(trim(value));
  if (!v) throw ConfigError(key_error(key, value, "a number"));
  return *v;
}

bool to_bool(std::string_view key, std::string_view value) {
  auto v = trim(value);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key_error(key, value, "true or false"));
}

std::vector<long long> to_list(std::string_view key, std::string_view value) {
  std::vector<long long> out;
  for (const auto& field : split_csv_line(value)) out.push_back(to_int(key, field));
  if (out.empty()) throw ConfigError(key_error(key, value, "a comma-separated list"));
  return out;
}

template <typename T>
std::string join(const std::vector<T>& items) {
  std::string s;
  for (std::size_t i = 0; i < items.size(); ++i) s += (i ? "," : "") + std::to_string(items[i]);
  return s;
}

struct Key {
  std::string_view name;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define HDDRUL_COUNT(field) \
  Key{#field, [](RunConfig& c, std::string_view v) { c.field = to_count(#field, v); }, \
      [](const RunConfig& c) { return std::to_string(c.field); }}
#define HDDRUL_INT(field) \
  Key{#field, [](RunConfig& c, std::string_view v) { c.field = static_cast<int>(to_int(#field, v)); }, \
      [](const RunConfig& c) { return std::to_string(c.field); }}
#define HDDRUL_REAL(field) \
  Key{#field, [](RunConfig& c, std::string_view v) { c.field = to_real(#field, v); }, \
      [](const RunConfig& c) { return format_double(c.field); }}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      {"snapshot_dir",
       [](RunConfig& c, std::string_view v) {
         v = trim(v);
         c.snapshot_dir = v.empty() ? std::nullopt : std::optional<std::filesystem::path>(v);
       },
       [](const RunConfig& c) { return c.snapshot_dir ? c.snapshot_dir->string() : std::string(); }},
      {"synthetic", [](RunConfig& c, std::string_view v) { c.synthetic = to_bool("synthetic", v); },
       [](const RunConfig& c) { return std::string(c.synthetic ? "true" : "false"); }},
      {"out", [](RunConfig& c, std::string_view v) { c.out = std::string(trim(v)); },
       [](const RunConfig& c) { return c.out.string(); }},
      {"model_filter", [](RunConfig& c, std::string_view v) { c.model_filter = std::string(trim(v)); },
       [](const RunConfig& c) { return c.model_filter; }},
      HDDRUL_INT(lookback_train),
      HDDRUL_INT(lookback_test),
      HDDRUL_INT(lookback_extrapolate),
      HDDRUL_INT(cap),
      HDDRUL_REAL(train_fraction),
      {"features",
       [](RunConfig& c, std::string_view v) {
         v = trim(v);
         if (v.empty() || v == "default") {
           c.features.reset();
           return;
         }
         std::vector<int> ids;
         for (auto id : to_list("features", v)) ids.push_back(static_cast<int>(id));
         c.features = ids;
       },
       [](const RunConfig& c) { return c.features ? join(*c.features) : std::string("default"); }},
      {"timesteps",
       [](RunConfig& c, std::string_view v) {
         c.timesteps.clear();
         for (auto t : to_list("timesteps", v)) {
           if (t < 1) throw ConfigError(key_error("timesteps", v, "positive integers"));
           c.timesteps.push_back(static_cast<std::size_t>(t));
         }
       },
       [](const RunConfig& c) { return join(c.timesteps); }},
      HDDRUL_COUNT(hidden_size),
      HDDRUL_COUNT(epochs),
      HDDRUL_COUNT(batch_size),
      HDDRUL_REAL(learning_rate),
      HDDRUL_REAL(beta1),
      HDDRUL_REAL(beta2),
      HDDRUL_REAL(epsilon),
      HDDRUL_REAL(clip_norm),
      {"clip_predictions",
       [](RunConfig& c, std::string_view v) {
         v = trim(v);
         if (v.empty() || v == "none")
           c.clip_predictions.reset();
         else
           c.clip_predictions = to_real("clip_predictions", v);
       },
       [](const RunConfig& c) {
         return c.clip_predictions ? format_double(*c.clip_predictions) : std::string("none");
       }},
      HDDRUL_COUNT(rf_estimators),
      {"rf_features", [](RunConfig& c, std::string_view v) { c.rf_features = std::string(trim(v)); },
       [](const RunConfig& c) { return c.rf_features; }},
      HDDRUL_REAL(rf_train_fraction),
      {"seed",
       [](RunConfig& c, std::string_view v) {
         auto n = to_int("seed", v);
         if (n < 0) throw ConfigError(key_error("seed", v, "a non-negative integer"));
         c.seed = static_cast<std::uint64_t>(n);
       },
       [](const RunConfig& c) { return std::to_string(c.seed); }},
      HDDRUL_COUNT(threads),
      HDDRUL_COUNT(synth_train_drives),
      HDDRUL_COUNT(synth_test_drives),
      HDDRUL_COUNT(synth_features),
      HDDRUL_INT(synth_jump_day),
      HDDRUL_REAL(synth_noise),
  };
  return table;
}

#undef HDDRUL_COUNT
#undef HDDRUL_INT
#undef HDDRUL_REAL

}  // namespace

void set_value(RunConfig& config, std::string_view key, std::string_view value) {
  key = trim(key);
  for (const auto& k : keys()) {
    if (k.name == key) {
      k.set(config, value);
      return;
    }
  }
  throw ConfigError("unknown configuration key '" + std::string(key) + "'");
}

RunConfig parse_config(std::istream& in) {
  RunConfig config;
  std::optional<long long> schema;
  std::set<std::string, std::less<>> seen;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(number) + ": expected key = value");
    const auto key = trim(text.substr(0, eq));
    const auto value = trim(text.substr(eq + 1));
    if (!seen.emplace(key).second)
      throw ConfigError("config line " + std::to_string(number) + ": duplicate key '" +
                        std::string(key) + "'");
    if (key == "schema_version") {
      schema = parse_int(value);
      if (!schema) throw ConfigError("schema_version must be an integer");
      continue;
    }
    set_value(config, key, value);
  }
  if (!schema) throw ConfigError("config lacks schema_version");
  if (*schema != kSchemaVersion)
    throw ConfigError("unsupported schema_version " + std::to_string(*schema));
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  return parse_config(in);
}

void validate(const RunConfig& c, bool need_snapshots) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(c.lookback_train >= 1 && c.lookback_test >= 1 && c.lookback_extrapolate >= 1,
          "lookback days must be >= 1");
  require(c.cap >= 0, "cap must be >= 0");
  require(c.train_fraction > 0.0 && c.train_fraction < 1.0, "train_fraction must be in (0, 1)");
  require(c.rf_train_fraction > 0.0 && c.rf_train_fraction <= 1.0,
          "rf_train_fraction must be in (0, 1]");
  require(!c.timesteps.empty(), "timesteps must not be empty");
  for (auto t : c.timesteps)
    require(t >= 1 && t <= static_cast<std::size_t>(c.lookback_train),
            "timesteps " + std::to_string(t) + " is outside 1.." + std::to_string(c.lookback_train));
  require(c.hidden_size >= 1 && c.epochs >= 1 && c.batch_size >= 1,
          "hidden_size, epochs and batch_size must be >= 1");
  require(c.learning_rate > 0.0, "learning_rate must be > 0");
  require(c.beta1 >= 0.0 && c.beta1 < 1.0 && c.beta2 >= 0.0 && c.beta2 < 1.0,
          "beta1 and beta2 must be in [0, 1)");
  require(c.epsilon > 0.0, "epsilon must be > 0");
  require(!c.clip_predictions || *c.clip_predictions >= 0.0, "clip_predictions must be >= 0");
  require(c.rf_estimators >= 1, "rf_estimators must be >= 1");
  require(c.rf_features == "all" || c.rf_features == "selected",
          "rf_features must be 'all' or 'selected'");
  require(c.threads >= 1, "threads must be >= 1");
  require(!c.model_filter.empty(), "model_filter must not be empty");
  require(!c.out.empty(), "out must not be empty");
  if (c.synthetic) {
    require(c.synth_train_drives >= 1 && c.synth_test_drives >= 1,
            "synthetic drive counts must be >= 1");
    require(c.synth_features >= 1, "synth_features must be >= 1");
    require(c.synth_noise >= 0.0, "synth_noise must be >= 0");
  } else if (need_snapshots) {
    require(c.snapshot_dir.has_value(), "snapshot_dir is required unless synthetic = true");
    require(std::filesystem::is_directory(*c.snapshot_dir),
            "snapshot_dir " + c.snapshot_dir->string() + " is not a directory");
  }
}

std::string to_text(const RunConfig& config) {
  std::ostringstream out;
  out << "schema_version = " << kSchemaVersion << '\n';
  for (const auto& k : keys()) out << k.name << " = " << k.get(config) << '\n';
  return out.str();
}

}  // namespace hddrul::cli
