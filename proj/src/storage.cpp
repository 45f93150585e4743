#include "vns/storage.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

#include "vns/error.hpp"

namespace vns {
namespace {

constexpr const char* kModule = "storage";
constexpr char kEmbxMagic[4] = {'E', 'M', 'B', 'X'};
constexpr char kModelMagic[4] = {'V', 'N', 'S', 'M'};

[[noreturn]] void Fail(ErrorCode code, const std::filesystem::path& path,
                       const std::string& detail) {
  throw Error(code, kModule, path.string() + (detail.empty() ? "" : ": " + detail));
}

class ByteWriter {
 public:
  void Raw(const char* p, std::size_t n) { buf_.insert(buf_.end(), p, p + n); }
  void U32(std::uint32_t v) { Le(v, 4); }
  void U64(std::uint64_t v) { Le(v, 8); }
  void I32(std::int32_t v) { U32(static_cast<std::uint32_t>(v)); }
  void F32(float v) { U32(std::bit_cast<std::uint32_t>(v)); }
  void F64(double v) { U64(std::bit_cast<std::uint64_t>(v)); }

  void Flush(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) Fail(ErrorCode::kIoError, path, "cannot open for writing");
    out.write(reinterpret_cast<const char*>(buf_.data()),
              static_cast<std::streamsize>(buf_.size()));
    if (!out) Fail(ErrorCode::kIoError, path, "write failed");
  }

 private:
  void Le(std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  ByteReader(const std::vector<std::uint8_t>& buf, std::filesystem::path path)
      : buf_(buf), path_(std::move(path)) {}

  std::size_t remaining() const { return buf_.size() - pos_; }
  std::size_t position() const { return pos_; }

  void Need(std::size_t n) const {
    if (remaining() < n) {
      Fail(ErrorCode::kTruncatedFile, path_,
           "expected at least " + std::to_string(pos_ + n) + " bytes, found " +
               std::to_string(buf_.size()));
    }
  }
  std::uint64_t Le(int bytes) {
    Need(static_cast<std::size_t>(bytes));
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(buf_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(bytes);
    return v;
  }
  std::uint32_t U32() { return static_cast<std::uint32_t>(Le(4)); }
  std::uint64_t U64() { return Le(8); }
  std::int32_t I32() { return static_cast<std::int32_t>(U32()); }
  float F32() { return std::bit_cast<float>(U32()); }
  double F64() { return std::bit_cast<double>(U64()); }
  bool Magic(const char (&m)[4]) {
    Need(4);
    const bool ok = std::memcmp(buf_.data() + pos_, m, 4) == 0;
    pos_ += 4;
    return ok;
  }

 private:
  const std::vector<std::uint8_t>& buf_;
  std::filesystem::path path_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> Slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIoError, path, "cannot open for reading");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

float ToF32(double v, const std::filesystem::path& path) {
  const auto f = static_cast<float>(v);
  if (!std::isfinite(f)) Fail(ErrorCode::kNonFinitePayload, path, "value not representable");
  return f;
}

EmbxHeader ParseHeader(ByteReader& r, const std::filesystem::path& path,
                       std::size_t file_size) {
  if (file_size < kEmbxHeaderSize) {
    Fail(ErrorCode::kTruncatedFile, path,
         "expected " + std::to_string(kEmbxHeaderSize) + " header bytes, found " +
             std::to_string(file_size));
  }
  if (!r.Magic(kEmbxMagic)) Fail(ErrorCode::kBadMagic, path, "");
  EmbxHeader h;
  h.version = r.U32();
  if (h.version != kEmbxVersion) {
    Fail(ErrorCode::kBadVersion, path, "version " + std::to_string(h.version));
  }
  h.n = r.U64();
  h.d = r.U64();
  h.c = r.U32();
  h.flags = r.U32();
  if (h.flags & ~std::uint32_t{kHasLabels | kHasLogits | kRowsPrenormalized}) {
    Fail(ErrorCode::kBadVersion, path, "unknown flag bits " + std::to_string(h.flags));
  }
  if (h.n < 1 || h.d < 1) Fail(ErrorCode::kSizeMismatch, path, "n and d must be >= 1");
  if ((h.flags & kHasLogits) && h.c < 1) {
    Fail(ErrorCode::kSizeMismatch, path, "logits present with c = 0");
  }
  using Wide = unsigned __int128;
  const Wide n = h.n;
  Wide expected = kEmbxHeaderSize + n * h.d * 4;
  if (h.flags & kHasLabels) expected += n * 4;
  if (h.flags & kHasLogits) expected += n * h.c * 4;
  const Wide actual = file_size;
  auto show = [](Wide v) {
    return v > Wide{UINT64_MAX} ? std::string(">2^64") : std::to_string(static_cast<std::uint64_t>(v));
  };
  if (actual < expected) {
    Fail(ErrorCode::kTruncatedFile, path,
         "expected " + show(expected) + " bytes, found " + show(actual));
  }
  if (actual > expected) {
    Fail(ErrorCode::kSizeMismatch, path,
         "expected " + show(expected) + " bytes, found " + show(actual));
  }
  return h;
}

}  // namespace

void write_embx(const EmbeddingDataset& data, const std::filesystem::path& path) {
  data.Validate();
  const Index n = data.size();
  const Index d = data.dim();
  std::uint32_t flags = 0;
  if (data.labels) flags |= kHasLabels;
  if (data.logits) flags |= kHasLogits;
  if (data.features.normalized()) flags |= kRowsPrenormalized;

  ByteWriter w;
  w.Raw(kEmbxMagic, 4);
  w.U32(kEmbxVersion);
  w.U64(static_cast<std::uint64_t>(n));
  w.U64(static_cast<std::uint64_t>(d));
  w.U32(static_cast<std::uint32_t>(data.class_count));
  w.U32(flags);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) w.F32(ToF32(data.features.data()(i, j), path));
  }
  if (data.labels) {
    for (int y : *data.labels) w.I32(y);
  }
  if (data.logits) {
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < data.logits->cols(); ++j) w.F32(ToF32((*data.logits)(i, j), path));
    }
  }
  w.Flush(path);
}

EmbxHeader read_embx_header(const std::filesystem::path& path) {
  const auto buf = Slurp(path);
  ByteReader r(buf, path);
  return ParseHeader(r, path, buf.size());
}

EmbeddingDataset read_embx(const std::filesystem::path& path) {
  const auto buf = Slurp(path);
  ByteReader r(buf, path);
  const EmbxHeader h = ParseHeader(r, path, buf.size());
  const auto n = static_cast<Index>(h.n);
  const auto d = static_cast<Index>(h.d);

  RowMatrix feats(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) {
      const float v = r.F32();
      if (!std::isfinite(v)) {
        Fail(ErrorCode::kNonFinitePayload, path,
             "feature (" + std::to_string(i) + ", " + std::to_string(j) + ")");
      }
      feats(i, j) = v;
    }
  }
  if (h.flags & kRowsPrenormalized) {
    for (Index i = 0; i < n; ++i) {
      if (std::abs(feats.row(i).norm() - 1.0) > 1e-5) {
        Fail(ErrorCode::kNotNormalized, path,
             "row " + std::to_string(i) + " flagged prenormalized");
      }
    }
  }

  EmbeddingDataset out;
  out.features = FeatureMatrix(std::move(feats), false);
  out.class_count = static_cast<int>(h.c);
  if (h.flags & kHasLabels) {
    std::vector<int> labels(static_cast<size_t>(n));
    for (auto& y : labels) {
      y = r.I32();
      if (y < kUnlabeled || (y >= 0 && static_cast<std::uint32_t>(y) >= h.c)) {
        Fail(ErrorCode::kLabelOutOfRange, path,
             "label " + std::to_string(y) + " with c = " + std::to_string(h.c));
      }
    }
    out.labels = std::move(labels);
  }
  if (h.flags & kHasLogits) {
    RowMatrix logits(n, static_cast<Index>(h.c));
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < logits.cols(); ++j) {
        const float v = r.F32();
        if (!std::isfinite(v)) {
          Fail(ErrorCode::kNonFinitePayload, path, "logit row " + std::to_string(i));
        }
        logits(i, j) = v;
      }
    }
    out.logits = std::move(logits);
  }
  return out;
}

EmbeddingDataset read_csv(const std::filesystem::path& path, const CsvOptions& opts) {
  if (opts.d < 1) Fail(ErrorCode::kConfigError, path, "d must be >= 1");
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIoError, path, "cannot open for reading");
  const Index c = opts.class_count.value_or(0);
  const Index expected_fields = opts.d + (opts.has_label ? 1 : 0) + c;

  std::vector<double> feats;
  std::vector<int> labels;
  std::vector<double> logits;
  std::string line;
  std::size_t line_no = 0;
  Index rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && opts.skip_header) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Index field = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string_view tok = std::string_view(line).substr(
          start, comma == std::string::npos ? std::string::npos : comma - start);
      auto where = [&] {
        return "line " + std::to_string(line_no) + ", column " + std::to_string(field + 1);
      };
      if (field >= expected_fields) {
        Fail(ErrorCode::kParseError, path, where() + ": too many fields");
      }
      const bool is_label = opts.has_label && field == opts.d;
      if (is_label) {
        int y = 0;
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), y);
        if (ec != std::errc() || ptr != tok.data() + tok.size()) {
          Fail(ErrorCode::kParseError, path, where() + ": bad label");
        }
        labels.push_back(y);
      } else {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
          Fail(ErrorCode::kParseError, path, where() + ": bad number");
        }
        (field < opts.d ? feats : logits).push_back(v);
      }
      ++field;
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (field != expected_fields) {
      Fail(ErrorCode::kParseError, path,
           "line " + std::to_string(line_no) + ", column " + std::to_string(field + 1) +
               ": expected " + std::to_string(expected_fields) + " fields");
    }
    ++rows;
  }
  if (rows == 0) Fail(ErrorCode::kEmptyInput, path, "no rows");

  EmbeddingDataset out;
  out.features = FeatureMatrix(Eigen::Map<const RowMatrix>(feats.data(), rows, opts.d));
  if (c > 0) {
    out.class_count = static_cast<int>(c);
    out.logits = Eigen::Map<const RowMatrix>(logits.data(), rows, c);
  }
  if (opts.has_label) {
    if (c == 0) {
      int max_label = kUnlabeled;
      for (int y : labels) max_label = std::max(max_label, y);
      out.class_count = max_label + 1;
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] < kUnlabeled || labels[i] >= out.class_count) {
        Fail(ErrorCode::kLabelOutOfRange, path,
             "row " + std::to_string(i) + " label " + std::to_string(labels[i]) +
                 " with C = " + std::to_string(out.class_count));
      }
    }
    out.labels = std::move(labels);
  }
  out.Validate();
  return out;
}

void write_model(const FittedDetector& fitted, const std::filesystem::path& path) {
  const Index d = fitted.dim;
  ByteWriter w;
  w.Raw(kModelMagic, 4);
  w.U32(kModelVersion);
  w.U64(static_cast<std::uint64_t>(d));
  w.U32(static_cast<std::uint32_t>(fitted.rank));
  w.U32(static_cast<std::uint32_t>(fitted.class_count()));

  const GlobalModel& g = fitted.global_model;
  w.U64(static_cast<std::uint64_t>(g.n));
  w.F64(g.lambda_max);
  for (Index j = 0; j < d; ++j) w.F64(g.u_max[j]);
  for (Index j = 0; j < d; ++j) w.F64(g.mean[j]);

  for (const ClassSpectralModel& m : fitted.class_models) {
    w.U64(static_cast<std::uint64_t>(m.n_c));
    w.U32(static_cast<std::uint32_t>(m.eigenvalues.size()));
    for (double l : m.eigenvalues) w.F64(l);
    for (Index k = 0; k < m.eigenvectors.cols(); ++k) {
      for (Index j = 0; j < d; ++j) w.F64(m.eigenvectors(j, k));
    }
    for (Index j = 0; j < d; ++j) w.F64(m.mean[j]);
  }

  std::uint32_t flags = 0;
  if (g.shared_covariance && g.global_covariance) flags |= 1u;
  if (fitted.train_features) flags |= 2u;
  w.U32(flags);
  if (flags & 1u) {
    for (const Matrix* cov : {&*g.shared_covariance, &*g.global_covariance}) {
      for (Index i = 0; i < d; ++i) {
        for (Index j = 0; j < d; ++j) w.F64((*cov)(i, j));
      }
    }
  }
  if (flags & 2u) {
    const RowMatrix& x = fitted.train_features->data();
    w.U64(static_cast<std::uint64_t>(x.rows()));
    for (Index i = 0; i < x.rows(); ++i) {
      for (Index j = 0; j < d; ++j) w.F64(x(i, j));
    }
  }
  w.Flush(path);
}

FittedDetector read_model(const std::filesystem::path& path) {
  const auto buf = Slurp(path);
  ByteReader r(buf, path);
  if (!r.Magic(kModelMagic)) Fail(ErrorCode::kBadMagic, path, "not a model file");
  const std::uint32_t version = r.U32();
  if (version != kModelVersion) {
    Fail(ErrorCode::kBadVersion, path, "model version " + std::to_string(version));
  }
  FittedDetector f;
  f.dim = static_cast<Index>(r.U64());
  f.rank = static_cast<int>(r.U32());
  const std::uint32_t classes = r.U32();
  const Index d = f.dim;
  if (d < 1 || f.rank < 1 || f.rank > d || classes < 1) {
    Fail(ErrorCode::kSizeMismatch, path, "bad model dimensions");
  }
  // Every class needs at least (8 + 4 + 8 r + 8 r d + 8 d) bytes.
  r.Need(static_cast<std::size_t>(classes) * static_cast<std::size_t>(d) * 8);

  GlobalModel& g = f.global_model;
  g.n = static_cast<Index>(r.U64());
  g.lambda_max = r.F64();
  g.u_max.resize(d);
  g.mean.resize(d);
  for (Index j = 0; j < d; ++j) g.u_max[j] = r.F64();
  for (Index j = 0; j < d; ++j) g.mean[j] = r.F64();

  f.class_models.resize(classes);
  for (std::uint32_t c = 0; c < classes; ++c) {
    ClassSpectralModel& m = f.class_models[c];
    m.class_id = static_cast<int>(c);
    m.n_c = static_cast<Index>(r.U64());
    const std::uint32_t rank = r.U32();
    if (rank != static_cast<std::uint32_t>(f.rank)) {
      Fail(ErrorCode::kSizeMismatch, path, "class " + std::to_string(c) + " rank");
    }
    m.eigenvalues.resize(rank);
    for (double& l : m.eigenvalues) l = r.F64();
    m.eigenvectors.resize(d, rank);
    for (Index k = 0; k < static_cast<Index>(rank); ++k) {
      for (Index j = 0; j < d; ++j) m.eigenvectors(j, k) = r.F64();
    }
    m.mean.resize(d);
    for (Index j = 0; j < d; ++j) m.mean[j] = r.F64();
  }

  const std::uint32_t flags = r.U32();
  if (flags & 1u) {
    Matrix shared(d, d);
    Matrix global(d, d);
    for (Matrix* cov : {&shared, &global}) {
      for (Index i = 0; i < d; ++i) {
        for (Index j = 0; j < d; ++j) (*cov)(i, j) = r.F64();
      }
    }
    g.shared_covariance = std::move(shared);
    g.global_covariance = std::move(global);
  }
  if (flags & 2u) {
    const auto rows = static_cast<Index>(r.U64());
    r.Need(static_cast<std::size_t>(rows) * static_cast<std::size_t>(d) * 8);
    RowMatrix x(rows, d);
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < d; ++j) x(i, j) = r.F64();
    }
    f.train_features = FeatureMatrix(std::move(x), true);
  }
  if (r.remaining() != 0) {
    Fail(ErrorCode::kSizeMismatch, path, std::to_string(r.remaining()) + " trailing bytes");
  }
  return f;
}

}  // namespace vns
