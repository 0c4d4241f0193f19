#include "ecs/io.hpp"

#include <bit>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <system_error>

#include <unistd.h>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

namespace ecs::io {

using json = nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_number(std::string_view token) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  if (token.empty()) return std::nullopt;
  double value = 0.0;
  const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec == std::errc::result_out_of_range) {
    // Overflowing literals such as 1e400 are numbers, just not finite ones.
    return token.front() == '-' ? -std::numeric_limits<double>::infinity()
                                : std::numeric_limits<double>::infinity();
  }
  if (ec != std::errc() || end != token.data() + token.size()) return std::nullopt;
  return value;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::uint64_t load_le64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int b = 7; b >= 0; --b) v = (v << 8) | p[b];
  return v;
}

void store_le64(std::string& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
}

}  // namespace

EmbeddingMatrix parse_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    std::string_view line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw Error(ErrorCode::EmptyMatrix, "CSV input has no rows");

  std::size_t first_data = 0;
  std::size_t width = 0;
  {
    const auto fields = split_fields(lines[0]);
    width = fields.size();
    for (const auto field : fields) {
      if (!trim(field).empty() && !parse_number(field)) {
        first_data = 1;
        break;
      }
    }
  }

  std::vector<double> values;
  values.reserve((lines.size() - first_data) * width);
  for (std::size_t li = first_data; li < lines.size(); ++li) {
    const auto fields = split_fields(lines[li]);
    if (fields.size() != width) {
      throw Error(ErrorCode::RaggedRows,
                  "row " + std::to_string(li) + " has " + std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(width),
                  li);
    }
    for (std::size_t col = 0; col < fields.size(); ++col) {
      const auto value = parse_number(fields[col]);
      if (!value) {
        throw Error(ErrorCode::NonNumeric,
                    "non-numeric field '" + std::string(trim(fields[col])) + "' at row " + std::to_string(li) +
                        ", column " + std::to_string(col),
                    li, col);
      }
      if (!std::isfinite(*value)) {
        throw Error(ErrorCode::NonFinite,
                    "non-finite value at row " + std::to_string(li) + ", column " + std::to_string(col), li, col);
      }
      values.push_back(*value);
    }
  }
  const std::size_t rows = lines.size() - first_data;
  if (rows == 0) throw Error(ErrorCode::EmptyMatrix, "CSV input has a header but no data rows");
  return EmbeddingMatrix(rows, width, std::move(values));
}

std::string read_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::FileNotFound, "cannot open '" + path.string() + "'");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoError, "failed reading '" + path.string() + "'");
  return std::move(buffer).str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp-" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot create '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::filesystem::remove(tmp);
      throw Error(ErrorCode::IoError, "failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error(ErrorCode::IoError, "cannot rename onto '" + path.string() + "': " + ec.message());
  }
}

EmbeddingMatrix read_csv(const std::filesystem::path& path) { return parse_csv(read_file(path)); }

std::string format_csv(const EmbeddingMatrix& x) {
  std::string out;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_double(x(i, j));
    }
    out += '\n';
  }
  return out;
}

void write_csv(const EmbeddingMatrix& x, const std::filesystem::path& path) {
  write_file_atomic(path, format_csv(x));
}

std::string encode_binary(const EmbeddingMatrix& x) {
  std::string out(kBinaryMagic);
  out.reserve(kBinaryMagic.size() + 16 + 8 * x.values().size());
  store_le64(out, x.rows());
  store_le64(out, x.cols());
  for (double v : x.values()) store_le64(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

EmbeddingMatrix decode_binary(std::string_view bytes) {
  const std::size_t head = std::min(bytes.size(), kBinaryMagic.size());
  if (bytes.substr(0, head) != kBinaryMagic.substr(0, head)) {
    throw Error(ErrorCode::BadMagic, "missing ECSB1 magic");
  }
  constexpr std::size_t header = 6 + 8 + 8;
  if (bytes.size() < header) throw Error(ErrorCode::TruncatedFile, "file shorter than the ECSB header");
  const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint64_t rows = load_le64(raw + 6);
  const std::uint64_t cols = load_le64(raw + 14);
  if (rows == 0 || cols == 0) {
    throw Error(ErrorCode::EmptyMatrix, "header declares " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  const std::uint64_t available = (bytes.size() - header) / 8;
  if (cols > available || rows > available / cols) {
    throw Error(ErrorCode::TruncatedFile, "header declares " + std::to_string(rows) + "x" + std::to_string(cols) +
                                              " values but the payload holds " + std::to_string(available));
  }
  if (header + 8 * rows * cols != bytes.size()) {
    throw Error(ErrorCode::TrailingData, "unexpected bytes after the ECSB payload");
  }
  std::vector<double> values(rows * cols);
  for (std::size_t k = 0; k < values.size(); ++k) {
    values[k] = std::bit_cast<double>(load_le64(raw + header + 8 * k));
  }
  return EmbeddingMatrix(rows, cols, std::move(values));
}

EmbeddingMatrix read_binary(const std::filesystem::path& path) { return decode_binary(read_file(path)); }

void write_binary(const EmbeddingMatrix& x, const std::filesystem::path& path) {
  write_file_atomic(path, encode_binary(x));
}

EmbeddingMatrix read_embeddings(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.starts_with(kBinaryMagic)) return decode_binary(bytes);
  return parse_csv(bytes);
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::IoError, "SHA-256 computation failed");
  }
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < length; ++i) os << std::setw(2) << static_cast<int>(digest[i]);
  return os.str();
}

std::string format_double(double value) {
  char buffer[64];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  if (ec != std::errc()) throw Error(ErrorCode::IoError, "number formatting failed");
  return std::string(buffer, end);
}

}  // namespace ecs::io

// JSON mappings. Free functions live next to the types for ADL.
namespace ecs {

void to_json(io::json& j, const EcsAtFrequency& v) {
  j = io::json{{"t", v.t}, {"value", v.value}, {"per_feature", v.per_feature}};
}
void from_json(const io::json& j, EcsAtFrequency& v) {
  j.at("t").get_to(v.t);
  j.at("value").get_to(v.value);
  j.at("per_feature").get_to(v.per_feature);
}

void to_json(io::json& j, const EcsResult& v) { j = io::json{{"n", v.n}, {"m", v.m}, {"per_t", v.per_t}}; }
void from_json(const io::json& j, EcsResult& v) {
  j.at("n").get_to(v.n);
  j.at("m").get_to(v.m);
  j.at("per_t").get_to(v.per_t);
}

void to_json(io::json& j, const FrechetResult& v) {
  j = io::json{{"fid", v.fid}, {"fid_per_dimension", v.fid_per_dimension}, {"p", v.p}};
}
void from_json(const io::json& j, FrechetResult& v) {
  j.at("fid").get_to(v.fid);
  j.at("fid_per_dimension").get_to(v.fid_per_dimension);
  j.at("p").get_to(v.p);
}

void to_json(io::json& j, const NormalityTestResult& v) {
  j = io::json{{"test", std::string(to_string(v.test))},
               {"statistic", v.statistic},
               {"p_value", v.p_value},
               {"n", v.n},
               {"p", v.p},
               {"n_used", v.n_used},
               {"subsampled", v.subsampled}};
}
void from_json(const io::json& j, NormalityTestResult& v) {
  v.test = parse_normality_test(j.at("test").get<std::string>());
  j.at("statistic").get_to(v.statistic);
  j.at("p_value").get_to(v.p_value);
  j.at("n").get_to(v.n);
  j.at("p").get_to(v.p);
  j.at("n_used").get_to(v.n_used);
  j.at("subsampled").get_to(v.subsampled);
}

void to_json(io::json& j, const TailBound& v) {
  j = io::json{{"s", v.s},
               {"bound_exact", v.bound_exact},
               {"bound_trapezoid", v.bound_trapezoid},
               {"empirical_tail", v.empirical_tail}};
}
void from_json(const io::json& j, TailBound& v) {
  j.at("s").get_to(v.s);
  j.at("bound_exact").get_to(v.bound_exact);
  j.at("bound_trapezoid").get_to(v.bound_trapezoid);
  j.at("empirical_tail").get_to(v.empirical_tail);
}

void to_json(io::json& j, const Table1Row& v) {
  j = io::json{{"df", v.df}, {"t", v.t}, {"mean_ecs", v.mean_ecs}, {"stderr", nullptr}};
  if (v.std_error) j["stderr"] = *v.std_error;
}
void from_json(const io::json& j, Table1Row& v) {
  j.at("df").get_to(v.df);
  j.at("t").get_to(v.t);
  j.at("mean_ecs").get_to(v.mean_ecs);
  const auto& se = j.at("stderr");
  v.std_error = se.is_null() ? std::nullopt : std::optional<double>(se.get<double>());
}

namespace io {

void to_json(json& j, const InputRecord& v) {
  j = json{{"role", v.role}, {"path", v.path}, {"sha256", v.sha256}, {"rows", v.rows}, {"cols", v.cols}};
}
void from_json(const json& j, InputRecord& v) {
  j.at("role").get_to(v.role);
  j.at("path").get_to(v.path);
  j.at("sha256").get_to(v.sha256);
  j.at("rows").get_to(v.rows);
  j.at("cols").get_to(v.cols);
}

void to_json(json& j, const TailRecord& v) {
  j = json(v.bound);
  j["input"] = v.input;
  j["feature"] = v.feature;
}
void from_json(const json& j, TailRecord& v) {
  j.get_to(v.bound);
  j.at("input").get_to(v.input);
  j.at("feature").get_to(v.feature);
}

void to_json(json& j, const SimulationRecord& v) {
  j = json{{"n", v.n}, {"reps", v.reps}, {"p", v.p}, {"rows", v.rows}};
}
void from_json(const json& j, SimulationRecord& v) {
  j.at("n").get_to(v.n);
  j.at("reps").get_to(v.reps);
  j.at("p").get_to(v.p);
  j.at("rows").get_to(v.rows);
}

std::string serialize_report(const ReportDocument& doc) {
  json j;
  j["tool_version"] = doc.tool_version;
  j["inputs"] = doc.inputs;
  j["timestamps"] = doc.timestamps;
  if (doc.ecs) j["ecs"] = *doc.ecs;
  if (doc.frechet) j["frechet"] = *doc.frechet;
  if (doc.normality) j["normality"] = *doc.normality;
  if (doc.tail) j["tail"] = *doc.tail;
  if (doc.simulation) j["simulation"] = *doc.simulation;
  if (doc.rng_seed) j["rng_seed"] = *doc.rng_seed;
  return j.dump(2) + "\n";
}

ReportDocument parse_report(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed report: ") + e.what());
  }
  ReportDocument doc;
  try {
    j.at("tool_version").get_to(doc.tool_version);
    j.at("inputs").get_to(doc.inputs);
    j.at("timestamps").get_to(doc.timestamps);
    if (j.contains("ecs")) doc.ecs = j["ecs"].get<EcsResult>();
    if (j.contains("frechet")) doc.frechet = j["frechet"].get<FrechetResult>();
    if (j.contains("normality")) doc.normality = j["normality"].get<std::vector<NormalityTestResult>>();
    if (j.contains("tail")) doc.tail = j["tail"].get<std::vector<TailRecord>>();
    if (j.contains("simulation")) doc.simulation = j["simulation"].get<SimulationRecord>();
    if (j.contains("rng_seed")) doc.rng_seed = j["rng_seed"].get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed report: ") + e.what());
  }
  return doc;
}

void write_report(const ReportDocument& doc, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_report(doc));
}

std::string format_scatter(const Eigen::MatrixXd& scores_a, const Eigen::MatrixXd& scores_b) {
  if (scores_a.cols() < 2 || scores_b.cols() < 2) {
    throw Error(ErrorCode::InvalidArgument, "scatter output needs two score columns");
  }
  std::string out = "group,pc1,pc2\n";
  const auto emit = [&out](const char* group, const Eigen::MatrixXd& scores) {
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
      out += group;
      out += ',';
      out += format_double(scores(i, 0));
      out += ',';
      out += format_double(scores(i, 1));
      out += '\n';
    }
  };
  emit("a", scores_a);
  emit("b", scores_b);
  return out;
}

void write_scatter(const Eigen::MatrixXd& scores_a, const Eigen::MatrixXd& scores_b,
                   const std::filesystem::path& path) {
  write_file_atomic(path, format_scatter(scores_a, scores_b));
}

}  // namespace io
}  // namespace ecs
