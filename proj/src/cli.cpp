#include "ecs/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ecs/io.hpp"
#include "ecs/metrics.hpp"
#include "ecs/normality.hpp"
#include "ecs/samplers.hpp"
#include "ecs/stats.hpp"

namespace ecs::cli {

namespace {

struct Globals {
  unsigned threads = 1;
  bool no_timestamps = false;
};

struct LoadedInput {
  EmbeddingMatrix matrix;
  io::InputRecord record;
};

LoadedInput load_input(const std::string& path, const std::string& role) {
  try {
    const std::string bytes = io::read_file(path);
    EmbeddingMatrix matrix = bytes.starts_with(io::kBinaryMagic) ? io::decode_binary(bytes) : io::parse_csv(bytes);
    io::InputRecord record{role, path, io::sha256_hex(bytes), matrix.rows(), matrix.cols()};
    return {std::move(matrix), std::move(record)};
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what(), e.row(), e.col());
  }
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

io::ReportDocument new_report(const Globals& g) {
  io::ReportDocument doc;
  if (!g.no_timestamps) doc.timestamps["created"] = utc_now();
  return doc;
}

void emit_report(const io::ReportDocument& doc, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << io::serialize_report(doc);
  } else {
    io::write_report(doc, out_path);
  }
}

// ---------------------------------------------------------------- compare

struct CompareOptions {
  std::string real;
  std::string synthetic;
  std::vector<double> ts = {0.5, 1.0};
  std::vector<std::string> metrics = {"ecs", "fid"};
  std::vector<double> tail_s;
  int quad_points = kDefaultQuadPoints;
  std::string out;
};

int cmd_compare(const CompareOptions& o, const Globals& g, std::ostream& out) {
  const Execution exec{g.threads};
  const LoadedInput real = load_input(o.real, "real");
  const LoadedInput synthetic = load_input(o.synthetic, "synthetic");
  validate_pair(real.matrix, synthetic.matrix);

  io::ReportDocument doc = new_report(g);
  doc.inputs = {real.record, synthetic.record};
  const auto wants = [&](std::string_view m) {
    return std::find(o.metrics.begin(), o.metrics.end(), m) != o.metrics.end();
  };
  if (wants("ecs")) doc.ecs = ecs(real.matrix, synthetic.matrix, FrequencySet(o.ts), exec);
  if (wants("fid")) {
    doc.frechet = frechet_distance(gaussian_summary(real.matrix, exec), gaussian_summary(synthetic.matrix, exec));
  }
  if (!o.tail_s.empty()) {
    std::vector<io::TailRecord> tail;
    for (const LoadedInput* input : {&real, &synthetic}) {
      for (std::size_t j = 0; j < input->matrix.cols(); ++j) {
        const auto column = input->matrix.column(j);
        for (double s : o.tail_s) tail.push_back({input->record.role, j, tail_bound(column, s, o.quad_points)});
      }
    }
    doc.tail = std::move(tail);
  }
  emit_report(doc, o.out, out);
  if (!o.out.empty()) {
    if (doc.ecs) {
      for (const auto& at : doc.ecs->per_t) out << "ECS(T=" << at.t << ") = " << at.value << "\n";
    }
    if (doc.frechet) {
      out << "FID = " << doc.frechet->fid << " (per dimension " << doc.frechet->fid_per_dimension << ")\n";
    }
  }
  return kExitOk;
}

// --------------------------------------------------------------- simulate

struct SimulateOptions {
  bool table1 = false;
  std::size_t n = 100000;
  std::size_t reps = 5;
  std::size_t p = 32;
  std::vector<double> ts = {0.5, 1.0};
  std::vector<double> dfs = {100.0, 10.0, 5.0, 3.0, 2.01};
  std::uint64_t seed = 42;
  bool full_scale = false;
  std::string out;
};

void print_table(const std::vector<Table1Row>& rows, std::ostream& out) {
  char line[128];
  std::snprintf(line, sizeof line, "%-8s %-6s %-12s %s\n", "df", "T", "mean_ecs", "stderr");
  out << line;
  for (const auto& row : rows) {
    const std::string se = row.std_error ? io::format_double(*row.std_error) : "n/a";
    std::snprintf(line, sizeof line, "%-8g %-6g %-12.6f %s\n", row.df, row.t, row.mean_ecs, se.c_str());
    out << line;
  }
}

int cmd_simulate(const SimulateOptions& o, const Globals& g, std::ostream& out) {
  Table1Config config;
  config.n = o.full_scale ? kFullScaleSamples : o.n;
  config.reps = o.reps;
  config.p = o.p;
  config.ts = o.ts;
  config.dfs = o.dfs;
  config.seed = o.seed;
  const auto rows = replicate_table1(config, Execution{g.threads});

  print_table(rows, out);
  if (!o.out.empty()) {
    io::ReportDocument doc = new_report(g);
    doc.simulation = io::SimulationRecord{config.n, config.reps, config.p, rows};
    doc.rng_seed = config.seed;
    io::write_report(doc, o.out);
  }
  return kExitOk;
}

// -------------------------------------------------------------- normality

struct NormalityOptionsCli {
  std::string input;
  std::vector<std::string> tests = {"mardia", "hz"};
  std::size_t max_rows = 20000;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_normality(const NormalityOptionsCli& o, const Globals& g, std::ostream& out) {
  const LoadedInput input = load_input(o.input, "input");
  io::ReportDocument doc = new_report(g);
  doc.inputs = {input.record};
  std::vector<NormalityTestResult> results;
  NormalityOptions options;
  options.max_rows = o.max_rows;
  options.subsample_seed = o.seed;
  options.exec.threads = g.threads;
  for (const auto& name : o.tests) {
    switch (parse_normality_test(name)) {
      case NormalityTest::MardiaKurtosis:
        results.push_back(mardia_kurtosis(input.matrix));
        break;
      case NormalityTest::HenzeZirkler:
        results.push_back(henze_zirkler(input.matrix, options));
        if (results.back().subsampled) doc.rng_seed = o.seed;
        break;
    }
  }
  doc.normality = std::move(results);
  emit_report(doc, o.out, out);
  if (!o.out.empty()) {
    for (const auto& r : *doc.normality) {
      out << to_string(r.test) << ": statistic = " << r.statistic << ", p-value = " << r.p_value
          << (r.subsampled ? " (subsampled to " + std::to_string(r.n_used) + " rows)" : "") << "\n";
    }
  }
  return kExitOk;
}

// -------------------------------------------------------------------- pca

struct PcaOptions {
  std::string a;
  std::string b;
  std::string out;
};

int cmd_pca(const PcaOptions& o, std::ostream& out) {
  const LoadedInput a = load_input(o.a, "a");
  const LoadedInput b = load_input(o.b, "b");
  validate_pair(a.matrix, b.matrix);
  const PcaProjection projection = pca_project(a.matrix, b.matrix, 2);
  io::write_scatter(projection.scores_a, projection.scores_b, o.out);
  out << "wrote " << a.matrix.rows() + b.matrix.rows() << " points to " << o.out << "\n";
  return kExitOk;
}

// ----------------------------------------------------------------- sample

struct SampleOptions {
  std::string family = "normal";
  double df = 0.0;
  std::size_t p = 32;
  std::size_t n = 100000;
  std::uint64_t seed = 42;
  std::string out;
};

int cmd_sample(const SampleOptions& o, const Globals& g, std::ostream& out) {
  const DistributionSpec spec = o.family == "normal" ? DistributionSpec::standard_normal(o.p)
                                                     : DistributionSpec::student_t(o.df, o.p, IdentityCovariance{});
  const EmbeddingMatrix x = sample(spec, o.n, SeededRng(o.seed), Execution{g.threads});
  const std::filesystem::path path(o.out);
  if (path.extension() == ".ecsb") {
    io::write_binary(x, path);
  } else {
    io::write_csv(x, path);
  }
  out << "wrote " << x.rows() << "x" << x.cols() << " sample to " << o.out << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Embedded characteristic score toolkit: distributional comparison of embedding sets"};
  app.name("ecs");
  app.require_subcommand(1);

  Globals globals;
  app.add_option("--threads", globals.threads, "Worker threads (results do not depend on it)")
      ->check(CLI::Range(1u, 1024u));
  app.add_flag("--no-timestamps", globals.no_timestamps, "Omit wall-clock timestamps from reports");

  CompareOptions compare;
  auto* compare_cmd = app.add_subcommand("compare", "ECS and Frechet distance between two embedding files");
  compare_cmd->add_option("--real", compare.real, "Real embeddings (CSV or ECSB)")->required();
  compare_cmd->add_option("--synthetic", compare.synthetic, "Synthetic embeddings (CSV or ECSB)")->required();
  compare_cmd->add_option("--t", compare.ts, "Frequencies T")->delimiter(',')->capture_default_str();
  compare_cmd->add_option("--metrics", compare.metrics, "Metrics to compute")
      ->delimiter(',')
      ->check(CLI::IsMember({"ecs", "fid"}))
      ->capture_default_str();
  compare_cmd->add_option("--tail", compare.tail_s, "Tail-bound scales s, per feature")->delimiter(',');
  compare_cmd->add_option("--quad-points", compare.quad_points, "Simpson points for the tail bound")
      ->capture_default_str();
  compare_cmd->add_option("--out", compare.out, "Report path (stdout when omitted)");

  SimulateOptions simulate;
  auto* simulate_cmd = app.add_subcommand("simulate", "Normal versus multivariate t replication study");
  simulate_cmd->add_flag("--table1", simulate.table1, "Run the normal-vs-t ECS table (the only study)");
  simulate_cmd->add_option("--n", simulate.n, "Samples per distribution")->capture_default_str();
  simulate_cmd->add_option("--reps", simulate.reps, "Replicates")->check(CLI::PositiveNumber)->capture_default_str();
  simulate_cmd->add_option("--p", simulate.p, "Dimension")->check(CLI::PositiveNumber)->capture_default_str();
  simulate_cmd->add_option("--t", simulate.ts, "Frequencies T")->delimiter(',')->capture_default_str();
  simulate_cmd->add_option("--df", simulate.dfs, "Degrees of freedom grid")->delimiter(',')->capture_default_str();
  simulate_cmd->add_option("--seed", simulate.seed, "RNG seed")->capture_default_str();
  simulate_cmd->add_flag("--full-scale", simulate.full_scale, "Use n = 1000000");
  simulate_cmd->add_option("--out", simulate.out, "Report path");

  NormalityOptionsCli normality;
  auto* normality_cmd = app.add_subcommand("normality", "Multivariate normality tests");
  normality_cmd->add_option("--input", normality.input, "Embeddings (CSV or ECSB)")->required();
  normality_cmd->add_option("--tests", normality.tests, "Tests to run")
      ->delimiter(',')
      ->check(CLI::IsMember({"mardia", "hz", "mardia_kurtosis", "henze_zirkler"}))
      ->capture_default_str();
  normality_cmd->add_option("--max-rows", normality.max_rows, "Henze-Zirkler subsampling threshold")
      ->capture_default_str();
  normality_cmd->add_option("--seed", normality.seed, "Subsampling seed")->capture_default_str();
  normality_cmd->add_option("--out", normality.out, "Report path (stdout when omitted)");

  PcaOptions pca;
  auto* pca_cmd = app.add_subcommand("pca", "Pooled two-component PCA scatter data");
  pca_cmd->add_option("--a", pca.a, "First embedding file")->required();
  pca_cmd->add_option("--b", pca.b, "Second embedding file")->required();
  pca_cmd->add_option("--out", pca.out, "Scatter CSV path")->required();

  SampleOptions sampling;
  auto* sample_cmd = app.add_subcommand("sample", "Draw a seeded normal or identity-covariance t sample");
  sample_cmd->add_option("--family", sampling.family, "normal or t")
      ->check(CLI::IsMember({"normal", "t"}))
      ->capture_default_str();
  sample_cmd->add_option("--df", sampling.df, "Degrees of freedom (t only, > 2)");
  sample_cmd->add_option("--p", sampling.p, "Dimension")->check(CLI::PositiveNumber)->capture_default_str();
  sample_cmd->add_option("--n", sampling.n, "Rows")->check(CLI::PositiveNumber)->capture_default_str();
  sample_cmd->add_option("--seed", sampling.seed, "RNG seed")->capture_default_str();
  sample_cmd->add_option("--out", sampling.out, "Output path; .ecsb selects the binary format")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*compare_cmd) return cmd_compare(compare, globals, out);
    if (*simulate_cmd) return cmd_simulate(simulate, globals, out);
    if (*normality_cmd) return cmd_normality(normality, globals, out);
    if (*pca_cmd) return cmd_pca(pca, out);
    if (*sample_cmd) return cmd_sample(sampling, globals, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_input_error(e.code()) ? kExitInput : kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitInput;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace ecs::cli
