#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ecs/core.hpp"
#include "ecs/metrics.hpp"
#include "ecs/normality.hpp"
#include "ecs/samplers.hpp"

namespace ecs::io {

inline constexpr std::string_view kToolVersion = "ecs 0.1.0";

/// Comma-separated numeric matrix. A first row holding any non-numeric token
/// is treated as a header. Row coordinates in errors are 0-based file lines.
EmbeddingMatrix read_csv(const std::filesystem::path& path);
EmbeddingMatrix parse_csv(std::string_view text);

/// ECSB layout, all little-endian:
///   "ECSB1\n" | rows: u64 | cols: u64 | rows*cols binary64, row-major
inline constexpr std::string_view kBinaryMagic{"ECSB1\n", 6};

EmbeddingMatrix read_binary(const std::filesystem::path& path);
void write_binary(const EmbeddingMatrix& x, const std::filesystem::path& path);
std::string encode_binary(const EmbeddingMatrix& x);
EmbeddingMatrix decode_binary(std::string_view bytes);

/// Comma-separated rows with shortest round-trip decimals, no header.
std::string format_csv(const EmbeddingMatrix& x);
void write_csv(const EmbeddingMatrix& x, const std::filesystem::path& path);

/// ECSB when the file starts with the magic, CSV otherwise.
EmbeddingMatrix read_embeddings(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary and renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string sha256_hex(std::string_view bytes);

struct InputRecord {
  std::string role;
  std::string path;
  std::string sha256;
  std::size_t rows = 0;
  std::size_t cols = 0;

  bool operator==(const InputRecord&) const = default;
};

struct TailRecord {
  std::string input;
  std::size_t feature = 0;
  TailBound bound;

  bool operator==(const TailRecord&) const = default;
};

struct SimulationRecord {
  std::size_t n = 0;
  std::size_t reps = 0;
  std::size_t p = 0;
  std::vector<Table1Row> rows;

  bool operator==(const SimulationRecord&) const = default;
};

struct ReportDocument {
  std::string tool_version{kToolVersion};
  std::vector<InputRecord> inputs;
  std::map<std::string, std::string> timestamps;
  std::optional<EcsResult> ecs;
  std::optional<FrechetResult> frechet;
  std::optional<std::vector<NormalityTestResult>> normality;
  std::optional<std::vector<TailRecord>> tail;
  std::optional<SimulationRecord> simulation;
  std::optional<std::uint64_t> rng_seed;

  bool operator==(const ReportDocument&) const = default;
};

/// Key-sorted JSON, two-space indent, trailing newline.
std::string serialize_report(const ReportDocument& doc);
ReportDocument parse_report(std::string_view text);
void write_report(const ReportDocument& doc, const std::filesystem::path& path);

/// Plot-ready CSV with columns group,pc1,pc2; rows of `a` then rows of `b`.
std::string format_scatter(const Eigen::MatrixXd& scores_a, const Eigen::MatrixXd& scores_b);
void write_scatter(const Eigen::MatrixXd& scores_a, const Eigen::MatrixXd& scores_b,
                   const std::filesystem::path& path);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace ecs::io
