#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "hddrul/neural.hpp"
#include "hddrul/text.hpp"
#include "param_visit.hpp"

namespace hddrul {
namespace {

constexpr std::string_view kFormat = "hddrul-model";
constexpr int kVersion = 1;

void write_matrix(std::ostream& out, std::string_view name, const Eigen::MatrixXd& m) {
  out << "tensor " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? " " : "") << format_double(m(r, c));
    out << '\n';
  }
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string word(const char* what) {
    std::string w;
    if (!(in_ >> w)) throw DataError(std::string("model file: missing ") + what);
    return w;
  }
  void expect(std::string_view token) {
    if (word("token") != token) throw DataError("model file: expected '" + std::string(token) + "'");
  }
  long long integer(const char* what) {
    auto v = parse_int(word(what));
    if (!v) throw DataError(std::string("model file: bad ") + what);
    return *v;
  }
  std::uint64_t unsigned64(const char* what) {
    std::string w = word(what);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc{} || ptr != w.data() + w.size())
      throw DataError(std::string("model file: bad ") + what);
    return v;
  }
  double real(const char* what) {
    auto v = parse_double(word(what));
    if (!v) throw DataError(std::string("model file: bad ") + what);
    return *v;
  }
  std::size_t count(const char* key) {
    expect(key);
    auto v = integer(key);
    if (v < 0) throw DataError(std::string("model file: negative ") + key);
    return static_cast<std::size_t>(v);
  }
  double keyed_real(const char* key) {
    expect(key);
    return real(key);
  }

  void matrix(std::string_view name, Eigen::MatrixXd& m) {
    expect("tensor");
    expect(name);
    auto rows = integer("rows"), cols = integer("cols");
    if (rows != m.rows() || cols != m.cols())
      throw DataError("model file: tensor " + std::string(name) + " has the wrong shape");
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = real("tensor value");
  }

 private:
  std::istream& in_;
};

void write_cell(std::ostream& out, std::string_view prefix, const LstmCellParams& cell) {
  write_matrix(out, std::string(prefix) + ".input_weights", cell.input_weights);
  write_matrix(out, std::string(prefix) + ".hidden_weights", cell.hidden_weights);
  write_matrix(out, std::string(prefix) + ".bias", cell.bias);
}

void read_cell(Reader& in, std::string_view prefix, LstmCellParams& cell) {
  in.matrix(std::string(prefix) + ".input_weights", cell.input_weights);
  in.matrix(std::string(prefix) + ".hidden_weights", cell.hidden_weights);
  Eigen::MatrixXd bias(cell.bias.size(), 1);
  in.matrix(std::string(prefix) + ".bias", bias);
  cell.bias = bias.col(0);
}

}  // namespace

void save_model(std::ostream& out, const BiLstmModel& model) {
  const auto& c = model.config;
  out << kFormat << ' ' << kVersion << '\n';
  out << "architecture " << architecture_name(model.architecture) << '\n';
  out << "features " << model.features << '\n';
  out << "attributes " << model.attributes.size();
  for (int id : model.attributes) out << ' ' << id;
  out << '\n';
  out << "timesteps " << model.timesteps << '\n';
  out << "hidden " << model.params.forward.hidden_size() << '\n';
  out << "epochs " << c.epochs << '\n';
  out << "batch_size " << c.batch_size << '\n';
  out << "learning_rate " << format_double(c.adam.learning_rate) << '\n';
  out << "beta1 " << format_double(c.adam.beta1) << '\n';
  out << "beta2 " << format_double(c.adam.beta2) << '\n';
  out << "epsilon " << format_double(c.adam.epsilon) << '\n';
  out << "clip_norm " << format_double(c.clip_norm) << '\n';
  out << "seed " << c.seed << '\n';
  out << "clip_predictions "
      << (model.clip_predictions ? format_double(*model.clip_predictions) : std::string("none"))
      << '\n';
  write_cell(out, "forward", model.params.forward);
  if (model.params.backward) write_cell(out, "backward", *model.params.backward);
  Eigen::MatrixXd dense(model.params.dense.weights.size(), 1);
  dense.col(0) = model.params.dense.weights;
  write_matrix(out, "dense.weights", dense);
  write_matrix(out, "dense.bias", Eigen::MatrixXd::Constant(1, 1, model.params.dense.bias));
  out << "end\n";
}

BiLstmModel load_model(std::istream& stream) {
  Reader in(stream);
  in.expect(kFormat);
  if (in.integer("version") != kVersion) throw DataError("model file: unsupported version");
  in.expect("architecture");
  Architecture arch;
  try {
    arch = parse_architecture(in.word("architecture"));
  } catch (const ConfigError& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
  const auto features = in.count("features");
  std::vector<int> attributes(in.count("attributes"));
  for (int& id : attributes) id = static_cast<int>(in.integer("attribute id"));
  const auto timesteps = in.count("timesteps");
  const auto hidden = in.count("hidden");
  if (features < 1 || timesteps < 1 || hidden < 1)
    throw DataError("model file: dimensions must be >= 1");
  if (!attributes.empty() && attributes.size() != features)
    throw DataError("model file: attribute list does not match the feature count");
  BiLstmModel model = make_model(arch, features, timesteps, hidden);
  model.attributes = std::move(attributes);
  auto& c = model.config;
  c.epochs = in.count("epochs");
  c.batch_size = in.count("batch_size");
  c.adam.learning_rate = in.keyed_real("learning_rate");
  c.adam.beta1 = in.keyed_real("beta1");
  c.adam.beta2 = in.keyed_real("beta2");
  c.adam.epsilon = in.keyed_real("epsilon");
  c.clip_norm = in.keyed_real("clip_norm");
  in.expect("seed");
  c.seed = in.unsigned64("seed");
  in.expect("clip_predictions");
  if (auto w = in.word("clip_predictions"); w != "none") {
    auto v = parse_double(w);
    if (!v) throw DataError("model file: bad clip_predictions");
    model.clip_predictions = *v;
  }
  read_cell(in, "forward", model.params.forward);
  if (model.params.backward) read_cell(in, "backward", *model.params.backward);
  Eigen::MatrixXd dense(model.params.dense.weights.size(), 1);
  in.matrix("dense.weights", dense);
  model.params.dense.weights = dense.col(0);
  Eigen::MatrixXd bias(1, 1);
  in.matrix("dense.bias", bias);
  model.params.dense.bias = bias(0, 0);
  in.expect("end");
  return model;
}

std::string model_snapshot_id(const BiLstmModel& model) {
  std::ostringstream text;
  save_model(text, model);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text.str()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

bool BiLstmModel::operator==(const BiLstmModel& other) const {
  std::ostringstream a, b;
  save_model(a, *this);
  save_model(b, other);
  return a.str() == b.str();
}

}  // namespace hddrul
