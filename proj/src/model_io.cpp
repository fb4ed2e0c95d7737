// Model file layout (all integers and floats little-endian):
//
//   offset  size  field
//   0       8     magic "INTENTNN"
//   8       4     u32 format version (1)
//   12      4     u32 activation tag (1 tanh, 2 relu, 3 identity)
//   16      4     u32 output mode (0 absolute, 1 residual on the newest input frame)
//   20      4     i32 curriculum stage k the weights were trained through (-1: none)
//   24      4     u32 layer count L
//   then for each of the L layers:
//           4     u32 rows (outputs)
//           4     u32 cols (inputs)
//           8*r*c f64 weights, row-major
//           8*r   f64 biases
//   then    48    f64 scaler mean[6]
//           48    f64 scaler std[6]
//           8     u64 FNV-1a 64 checksum of every preceding byte

#include <bit>
#include <fstream>
#include <sstream>

#include "intent/error.hpp"
#include "intent/mlp.hpp"

namespace intent {

namespace {

constexpr char kMagic[8] = {'I', 'N', 'T', 'E', 'N', 'T', 'N', 'N'};
constexpr std::uint32_t kMaxLayers = 64;

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Writer {
 public:
  void u32(std::uint32_t v) { raw(v, 4); }
  void u64(std::uint64_t v) { raw(v, 8); }
  void f64(double v) { raw(std::bit_cast<std::uint64_t>(v), 8); }
  void bytes(const char* p, std::size_t n) { out_.append(p, n); }
  std::string& str() { return out_; }

 private:
  void raw(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}
  std::uint32_t u32() { return static_cast<std::uint32_t>(raw(4)); }
  std::uint64_t u64() { return raw(8); }
  double f64() { return std::bit_cast<double>(raw(8)); }
  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }
  void need(std::size_t n) const {
    if (remaining() < n) fail(ErrorKind::kFormat, "truncated model file at byte " + std::to_string(pos_));
  }

 private:
  std::uint64_t raw(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_model(const MlpModel& model) {
  model.check();
  Writer w;
  w.bytes(kMagic, sizeof(kMagic));
  w.u32(kModelFormatVersion);
  w.u32(static_cast<std::uint32_t>(model.activation));
  w.u32(static_cast<std::uint32_t>(model.output_mode));
  w.u32(static_cast<std::uint32_t>(model.curriculum_k));
  w.u32(static_cast<std::uint32_t>(model.layer_count()));
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    const Eigen::MatrixXd& W = model.weights[l];
    w.u32(static_cast<std::uint32_t>(W.rows()));
    w.u32(static_cast<std::uint32_t>(W.cols()));
    for (Eigen::Index r = 0; r < W.rows(); ++r) {
      for (Eigen::Index c = 0; c < W.cols(); ++c) w.f64(W(r, c));
    }
    for (Eigen::Index r = 0; r < W.rows(); ++r) w.f64(model.biases[l](r));
  }
  for (double m : model.scaler.mean) w.f64(m);
  for (double s : model.scaler.std) w.f64(s);
  w.u64(fnv1a64(w.str()));
  return std::move(w.str());
}

MlpModel deserialize_model(const std::string& bytes) {
  if (bytes.size() < sizeof(kMagic) || bytes.compare(0, sizeof(kMagic), kMagic, sizeof(kMagic)) != 0) {
    fail(ErrorKind::kFormat, "not a model file");
  }
  Reader r(std::string_view(bytes).substr(sizeof(kMagic)));
  const std::uint32_t version = r.u32();
  if (version != kModelFormatVersion) {
    fail(ErrorKind::kVersion, "unsupported model format version " + std::to_string(version) + " (expected " +
                                  std::to_string(kModelFormatVersion) + ")");
  }
  MlpModel model;
  const std::uint32_t tag = r.u32();
  if (tag < 1 || tag > 3) fail(ErrorKind::kFormat, "unknown activation tag " + std::to_string(tag));
  model.activation = static_cast<Activation>(tag);
  const std::uint32_t mode = r.u32();
  if (mode > 1) fail(ErrorKind::kFormat, "unknown output mode " + std::to_string(mode));
  model.output_mode = static_cast<OutputMode>(mode);
  model.curriculum_k = static_cast<std::int32_t>(r.u32());
  const std::uint32_t layers = r.u32();
  if (layers == 0 || layers > kMaxLayers) {
    fail(ErrorKind::kFormat, "dimension inconsistency: implausible layer count " + std::to_string(layers));
  }
  for (std::uint32_t l = 0; l < layers; ++l) {
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    if (rows == 0 || cols == 0) fail(ErrorKind::kFormat, "dimension inconsistency: empty layer " + std::to_string(l + 1));
    if (l == 0) {
      model.layer_dims.push_back(cols);
    } else if (static_cast<Eigen::Index>(cols) != model.layer_dims.back()) {
      fail(ErrorKind::kFormat, "dimension inconsistency: layer " + std::to_string(l + 1) + " declares " +
                                   std::to_string(cols) + " inputs but the previous layer has " +
                                   std::to_string(model.layer_dims.back()) + " outputs");
    }
    model.layer_dims.push_back(rows);
    const std::uint64_t count = static_cast<std::uint64_t>(rows) * cols + rows;
    r.need(count * 8);
    Eigen::MatrixXd W(rows, cols);
    for (Eigen::Index i = 0; i < W.rows(); ++i) {
      for (Eigen::Index j = 0; j < W.cols(); ++j) W(i, j) = r.f64();
    }
    Eigen::VectorXd b(rows);
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = r.f64();
    model.weights.push_back(std::move(W));
    model.biases.push_back(std::move(b));
  }
  for (double& m : model.scaler.mean) m = r.f64();
  for (double& s : model.scaler.std) s = r.f64();
  const std::size_t payload = sizeof(kMagic) + r.offset();
  const std::uint64_t stored = r.u64();
  if (r.remaining() != 0) {
    fail(ErrorKind::kFormat, "dimension inconsistency: " + std::to_string(r.remaining()) +
                                 " bytes beyond the declared layers");
  }
  if (stored != fnv1a64(std::string_view(bytes).substr(0, payload))) {
    fail(ErrorKind::kFormat, "checksum mismatch: model file is corrupted");
  }
  model.check();
  return model;
}

void save_model(const MlpModel& model, const std::string& path) {
  const std::string bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::kIo, "failed writing '" + path + "'");
}

MlpModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open model file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return deserialize_model(buffer.str());
}

}  // namespace intent
