#pragma once

// EMBX embedding container (little-endian, no padding):
//
//   offset  size  field
//   0       4     magic "EMBX"
//   4       4     u32 version = 1
//   8       8     u64 n (rows)
//   16      8     u64 d (feature dimension)
//   24      4     u32 c (class count; >= 1 when logits are present)
//   28      4     u32 flags: bit0 has_labels, bit1 has_logits,
//                            bit2 rows_prenormalized
//   32      4nd   f32 features, row-major
//           4n    i32 labels (-1 = unlabeled)            if has_labels
//           4nc   f32 logits, row-major                  if has_logits
//
// Features are 32-bit on disk and 64-bit in memory.

#include <cstdint>
#include <filesystem>
#include <optional>

#include "vns/dataset.hpp"
#include "vns/fitting.hpp"

namespace vns {

inline constexpr std::uint32_t kEmbxVersion = 1;
inline constexpr std::size_t kEmbxHeaderSize = 32;

enum EmbxFlags : std::uint32_t {
  kHasLabels = 1u << 0,
  kHasLogits = 1u << 1,
  kRowsPrenormalized = 1u << 2,
};

struct EmbxHeader {
  std::uint32_t version = kEmbxVersion;
  std::uint64_t n = 0;
  std::uint64_t d = 0;
  std::uint32_t c = 0;
  std::uint32_t flags = 0;
};

void write_embx(const EmbeddingDataset& data, const std::filesystem::path& path);

// Validates magic, version, flags and size arithmetic before touching the
// payload. The prenormalized flag is checked (row norms within 1e-5) but the
// returned features are left as stored.
EmbeddingDataset read_embx(const std::filesystem::path& path);

EmbxHeader read_embx_header(const std::filesystem::path& path);

struct CsvOptions {
  Index d = 0;
  bool has_label = false;
  std::optional<int> class_count;  // number of logit columns when present
  bool skip_header = false;
};

// Rows: d features, then an optional label, then optional C logits.
// Without logits, class_count defaults to max(label) + 1.
EmbeddingDataset read_csv(const std::filesystem::path& path, const CsvOptions& opts);

// Fitted detector sidecar: magic "VNSM", u32 version 1, then the class and
// global statistics as little-endian f64.
inline constexpr std::uint32_t kModelVersion = 1;

void write_model(const FittedDetector& fitted, const std::filesystem::path& path);
FittedDetector read_model(const std::filesystem::path& path);

}  // namespace vns
