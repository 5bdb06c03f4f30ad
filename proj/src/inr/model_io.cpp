#include "pinr/model_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "pinr/errors.hpp"

namespace pinr {

namespace {

constexpr char kMagic[4] = {'P', 'I', 'N', 'R'};
// Guards allocation on corrupted headers.
constexpr std::uint32_t kMaxDim = 1u << 24;

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
  }
  void f64s(const diff::Tensor& t) {
    for (double v : t.data()) f64(v);
  }
  void raw(const char* p, std::size_t n) { out_.append(p, n); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}

  void set_context(std::string where) { where_ = std::move(where); }

  std::uint32_t u32(const char* field) {
    need(4, field);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(byte(pos_ + i)) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::int32_t i32(const char* field) { return static_cast<std::int32_t>(u32(field)); }
  double f64(const char* field) {
    need(8, field);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(byte(pos_ + i)) << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(bits);
  }
  diff::Tensor f64s(diff::Shape shape, const char* field) {
    need(8 * diff::element_count(shape), field);
    diff::Tensor t(std::move(shape));
    for (double& v : t.data()) v = f64(field);
    return t;
  }
  std::uint32_t dim(const char* field) {
    const std::uint32_t v = u32(field);
    if (v > kMaxDim) {
      throw ModelFileError(ModelErrorCode::kUnsupported,
                           where_ + ": " + field + " = " + std::to_string(v) + " is implausible");
    }
    return v;
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  unsigned char byte(std::size_t i) const { return static_cast<unsigned char>(bytes_[i]); }
  void need(std::size_t n, const char* field) const {
    if (bytes_.size() - pos_ < n) {
      throw ModelFileError(ModelErrorCode::kTruncated,
                           "model file truncated in " + where_ + ", field " + field);
    }
  }

  std::string bytes_;
  std::size_t pos_ = 0;
  std::string where_ = "header";
};

void write_stage(Writer& w, const PeriodicInr& s, bool with_kind) {
  const std::size_t n = s.frequency_count();
  if (with_kind) w.u32(s.periodic() ? 0 : 1);
  w.u32(static_cast<std::uint32_t>(n));
  w.u32(static_cast<std::uint32_t>(s.hidden.size()));
  for (const DenseLayer& layer : s.hidden) w.u32(static_cast<std::uint32_t>(layer.outputs()));
  w.u32(static_cast<std::uint32_t>(s.channels()));
  w.f64(s.period.p1);
  w.f64(s.period.p2);
  if (s.periodic()) {
    for (const IntFrequency& k : s.frequencies->multipliers()) {
      w.i32(k.k1);
      w.i32(k.k2);
    }
  } else {
    w.f64s(s.omega);
  }
  w.f64s(s.phase);
  for (const DenseLayer& layer : s.hidden) {
    w.f64s(layer.weight);
    w.f64s(layer.bias);
  }
  w.f64s(s.output.weight);
  w.f64s(s.output.bias);
}

PeriodicInr read_stage(Reader& r, std::size_t index, bool with_kind) {
  r.set_context("stage " + std::to_string(index));
  std::uint32_t kind = 0;
  if (with_kind) {
    kind = r.u32("kind");
    if (kind > 1) {
      throw ModelFileError(ModelErrorCode::kUnsupported,
                           "stage " + std::to_string(index) + ": unknown first-layer kind " +
                               std::to_string(kind));
    }
  }
  const std::uint32_t n = r.dim("n_freq");
  const std::uint32_t n_hidden = r.dim("n_hidden");
  std::vector<std::size_t> widths(n_hidden);
  for (auto& width : widths) width = r.dim("widths");
  const std::uint32_t channels = r.dim("channels");

  PeriodicInr s;
  s.period.p1 = r.f64("P");
  s.period.p2 = r.f64("P");
  if (kind == 0) {
    std::vector<IntFrequency> k(n);
    for (auto& f : k) {
      f.k1 = r.i32("K");
      f.k2 = r.i32("K");
    }
    try {
      FrequencySet set(std::move(k), s.period);
      s.omega = set.angular();
      s.frequencies = std::move(set);
    } catch (const ConfigError& e) {
      throw ModelFileError(ModelErrorCode::kUnsupported,
                           "stage " + std::to_string(index) + ": " + e.what());
    }
  } else {
    s.omega = r.f64s({n, 2}, "omega");
  }
  s.phase = r.f64s({1, n}, "phi");
  std::size_t fan_in = n;
  for (std::size_t l = 0; l < n_hidden; ++l) {
    DenseLayer layer;
    layer.weight = r.f64s({widths[l], fan_in}, "W");
    layer.bias = r.f64s({1, widths[l]}, "b");
    s.hidden.push_back(std::move(layer));
    fan_in = widths[l];
  }
  s.output.weight = r.f64s({channels, fan_in}, "C");
  s.output.bias = r.f64s({1, channels}, "c0");
  return s;
}

}  // namespace

std::string encode_model(const MrNet& net) {
  net.validate();
  const bool real = !net.periodic();
  Writer w;
  w.raw(kMagic, 4);
  w.u32(real ? kModelVersionReal : kModelVersion);
  w.u32(static_cast<std::uint32_t>(net.size()));
  for (const PeriodicInr& s : net.stages) write_stage(w, s, real);
  return w.take();
}

MrNet decode_model(const std::string& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw ModelFileError(ModelErrorCode::kBadMagic, "not a model file (bad magic)");
  }
  Reader r(bytes.substr(4));
  const std::uint32_t version = r.u32("version");
  if (version != kModelVersion && version != kModelVersionReal) {
    throw ModelFileError(ModelErrorCode::kVersionMismatch,
                         "unsupported model version " + std::to_string(version));
  }
  const std::uint32_t n_stages = r.dim("n_stages");
  if (n_stages == 0) throw ModelFileError(ModelErrorCode::kUnsupported, "model has no stages");
  MrNet net;
  for (std::uint32_t i = 0; i < n_stages; ++i) {
    net.stages.push_back(read_stage(r, i, version == kModelVersionReal));
  }
  if (!r.at_end()) {
    throw ModelFileError(ModelErrorCode::kUnsupported, "trailing bytes after the last stage");
  }
  try {
    net.validate();
  } catch (const std::exception& e) {
    throw ModelFileError(ModelErrorCode::kUnsupported, e.what());
  }
  return net;
}

void save_model(const MrNet& net, const std::filesystem::path& path) {
  const std::string bytes = encode_model(net);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ModelFileError(ModelErrorCode::kIo, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ModelFileError(ModelErrorCode::kIo, "write failed for " + path.string());
}

void save_model(const PeriodicInr& net, const std::filesystem::path& path) {
  MrNet wrapped;
  wrapped.stages.push_back(net);
  save_model(wrapped, path);
}

MrNet load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelFileError(ModelErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return decode_model(buffer.str());
}

}  // namespace pinr
