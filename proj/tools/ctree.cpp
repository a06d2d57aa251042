// ctree: contour trees, branch decompositions and lambda advice for regular grids.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ctree/distributed/lambda.hpp"
#include "ctree/run.hpp"

namespace {

using namespace ctree;

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(s.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::int64_t parse_int(const std::string& s, const std::string& what) {
  std::int64_t v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw UsageError("invalid " + what + " '" + s + "'");
  return v;
}

std::array<std::int64_t, 3> parse_triple(const std::string& s, const std::string& what) {
  const auto parts = split_commas(s);
  if (parts.empty() || parts.size() > 3) throw UsageError(what + " must be X[,Y[,Z]]");
  std::array<std::int64_t, 3> out{1, 1, 1};
  for (std::size_t i = 0; i < parts.size(); ++i) out[i] = parse_int(parts[i], what);
  return out;
}

/// Plain number of bytes or a number followed by KB, MB, GB, TB, KiB, MiB, GiB, TiB.
double parse_size(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw UsageError("invalid " + what + " '" + s + "'");
  }
  const std::string unit = s.substr(pos);
  static const std::vector<std::pair<std::string, double>> units{
      {"", 1.0},      {"B", 1.0},      {"KB", 1e3},     {"MB", 1e6},          {"GB", 1e9},
      {"TB", 1e12},   {"KiB", 1024.0}, {"MiB", 1048576.0}, {"GiB", dist::kGiB}, {"TiB", dist::kGiB * 1024.0}};
  for (const auto& [name, scale] : units) {
    if (unit == name) return v * scale;
  }
  throw UsageError("unknown size unit in " + what + " '" + s + "'");
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
  if (!out) throw UsageError("failed writing " + path);
}

struct RunArgs {
  std::string input;
  std::string synthetic;
  std::string dims;
  std::string dtype = "f32";
  std::string endian = "little";
  std::string blocks = "1,1,1";
  std::int64_t lambda = 0;
  std::optional<std::int64_t> top_branches;
  std::optional<std::int64_t> threshold;
  std::string branches_out;
  std::string metrics_out;
  std::string sweep_out;
  std::string tree_dump;
  std::string lambda_sweep;
  bool oracle_check = false;
  std::uint64_t seed = 1;
  std::string mode = "serial";
  bool timings = false;
  bool concurrent = false;
};

int do_run(const RunArgs& a) {
  RunConfig c;
  if (!a.input.empty()) c.input = a.input;
  if (!a.synthetic.empty()) c.synthetic = a.synthetic;
  const auto d = parse_triple(a.dims, "--dims");
  c.dims = {d[0], d[1], d[2]};
  c.scalar_bits = a.dtype == "f64" ? 64 : 32;
  c.byte_order = a.endian == "big" ? ByteOrder::big : ByteOrder::little;
  c.seed = a.seed;
  c.mode = a.mode == "distributed" ? Mode::distributed : Mode::serial;
  const auto b = parse_triple(a.blocks, "--blocks");
  c.splits = {static_cast<int>(b[0]), static_cast<int>(b[1]), static_cast<int>(b[2])};
  c.lambda = a.lambda;
  if (a.top_branches) {
    if (*a.top_branches < 1) throw UsageError("--top-branches must be at least 1");
    c.top_branches = static_cast<std::size_t>(*a.top_branches);
  }
  c.threshold = a.threshold;
  if (!a.lambda_sweep.empty()) {
    for (const auto& part : split_commas(a.lambda_sweep)) c.lambda_sweep.push_back(parse_int(part, "--lambda-sweep value"));
  }
  c.oracle_check = a.oracle_check;
  c.timings = a.timings;
  c.concurrent = a.concurrent;
  c.tree_dump = !a.tree_dump.empty();

  const auto out = run_pipeline(c);

  const bool sweep_to_stdout = !c.lambda_sweep.empty() && a.sweep_out.empty();
  if (!a.branches_out.empty()) {
    write_file(a.branches_out, out.branch_csv);
  } else if (!sweep_to_stdout) {
    std::cout << out.branch_csv;
  }
  if (!c.lambda_sweep.empty()) {
    if (sweep_to_stdout) {
      std::cout << out.sweep_csv;
    } else {
      write_file(a.sweep_out, out.sweep_csv);
    }
  }
  if (!a.metrics_out.empty()) write_file(a.metrics_out, out.metrics.dump(2) + "\n");
  if (!a.tree_dump.empty()) write_file(a.tree_dump, out.tree_dump);
  if (!out.warning.empty()) std::cerr << "ctree: warning: " << out.warning << "\n";
  if (out.oracle_failed) {
    std::cerr << "ctree: error: oracle_check: results disagree with brute-force references\n"
              << out.metrics["oracle_check"].dump() << "\n";
    return 3;
  }
  return 0;
}

struct AdviseArgs {
  std::optional<std::int64_t> vertices;
  std::string dims;
  std::int64_t ranks = 0;
  std::string mem_per_rank;
  std::string base_mem = "0";
  std::string bytes_per_ap;
  std::string run_a;
  std::string run_b;
  double c = 1.0;
  bool json = false;
};

int do_advise(const AdviseArgs& a) {
  double n = 0;
  if (a.vertices && !a.dims.empty()) throw UsageError("give one of --vertices or --dims");
  if (a.vertices) {
    n = static_cast<double>(*a.vertices);
  } else if (!a.dims.empty()) {
    const auto d = parse_triple(a.dims, "--dims");
    n = static_cast<double>(d[0]) * static_cast<double>(d[1]) * static_cast<double>(d[2]);
  } else {
    throw UsageError("give --vertices or --dims");
  }
  if (a.mem_per_rank.empty()) throw UsageError("--mem-per-rank is required");

  double bytes_per_ap = 0;
  if (!a.bytes_per_ap.empty()) {
    if (!a.run_a.empty() || !a.run_b.empty()) throw UsageError("give --bytes-per-ap or --run-a/--run-b, not both");
    bytes_per_ap = parse_size(a.bytes_per_ap, "--bytes-per-ap");
  } else {
    if (a.run_a.empty() || a.run_b.empty()) throw UsageError("give --bytes-per-ap or both --run-a and --run-b");
    auto parse_run = [](const std::string& s, const std::string& what) {
      const auto parts = split_commas(s);
      if (parts.size() != 2) throw UsageError(what + " must be MEMORY,COUNT");
      return std::pair{parse_size(parts[0], what), parse_size(parts[1], what)};
    };
    const auto [ma, ca] = parse_run(a.run_a, "--run-a");
    const auto [mb, cb] = parse_run(a.run_b, "--run-b");
    bytes_per_ap = dist::estimate_bytes_per_ap(ma, ca, mb, cb);
  }

  const double mem = parse_size(a.mem_per_rank, "--mem-per-rank");
  const double base = parse_size(a.base_mem, "--base-mem");
  const auto advice = dist::advise_lambda(n, static_cast<double>(a.ranks), mem, bytes_per_ap, base, a.c);
  const double bound = dist::attachment_point_bound(n, static_cast<double>(a.ranks), static_cast<double>(advice.memory_min));

  if (a.json) {
    nlohmann::ordered_json j{{"vertices", static_cast<std::int64_t>(n)},
                             {"ranks", a.ranks},
                             {"bytes_per_attachment_point", bytes_per_ap},
                             {"lambda_min_memory", advice.memory_min},
                             {"attachment_point_bound", bound},
                             {"communication_floor", advice.communication_floor},
                             {"recommended_lambda_min", advice.recommended_min}};
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "bytes per attachment point: " << format_value(bytes_per_ap) << "\n"
              << "memory lower bound on lambda: " << advice.memory_min << " (at most " << format_value(bound)
              << " attachment points per rank)\n"
              << "communication floor on lambda: " << advice.communication_floor << "\n"
              << "recommended lambda: [" << advice.recommended_min
              << ", smallest selected branch volume)\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contour trees, branch decompositions and pre-simplification advice for regular scalar grids"};
  app.require_subcommand(1);

  RunArgs r;
  auto* run = app.add_subcommand("run", "Compute the contour tree and its most important branches");
  auto* source = run->add_option_group("source");
  source->add_option("--input", r.input, "Raw scalar file, x fastest");
  source->add_option("--synthetic", r.synthetic, "Generated field")
      ->check(CLI::IsMember({"uniform", "integer", "gaussian", "monotone"}));
  source->require_option(1);
  run->add_option("--dims", r.dims, "Grid size X,Y,Z")->required();
  run->add_option("--dtype", r.dtype, "Scalar type of --input")->check(CLI::IsMember({"f32", "f64"}))->capture_default_str();
  run->add_option("--endian", r.endian, "Byte order of --input")->check(CLI::IsMember({"little", "big"}))->capture_default_str();
  run->add_option("--blocks", r.blocks, "Block splits BX,BY,BZ (one simulated rank per block)")->capture_default_str();
  run->add_option("--lambda", r.lambda, "Pre-simplification threshold on interior subtree size")->capture_default_str();
  auto* select = run->add_option_group("selection");
  select->add_option("--top-branches", r.top_branches, "Keep the B most voluminous branches (default 100)");
  select->add_option("--threshold", r.threshold, "Keep branches with volume above V");
  select->require_option(0, 1);
  run->add_option("--branches-out", r.branches_out, "Branch CSV path (default stdout)");
  run->add_option("--metrics-out", r.metrics_out, "Metrics JSON path");
  run->add_flag("--oracle-check", r.oracle_check, "Cross-check against brute-force references (slow)");
  run->add_option("--seed", r.seed, "Seed for --synthetic")->capture_default_str();
  run->add_option("--mode", r.mode, "Pipeline")->check(CLI::IsMember({"serial", "distributed"}))->capture_default_str();
  run->add_option("--lambda-sweep", r.lambda_sweep, "Comma-separated lambdas; writes per-lambda communication maxima");
  run->add_option("--sweep-out", r.sweep_out, "Sweep CSV path (default stdout, replacing the branch table)");
  run->add_option("--tree-dump", r.tree_dump, "Write the final contour tree in text form");
  run->add_flag("--timings", r.timings, "Include per-phase wall-clock maxima in the metrics");
  run->add_flag("--concurrent", r.concurrent, "Run simulated ranks on separate threads");

  AdviseArgs v;
  auto* advise = app.add_subcommand("advise", "Estimate a lambda range from memory and communication budgets");
  advise->add_option("--vertices", v.vertices, "Total grid vertices");
  advise->add_option("--dims", v.dims, "Grid size X,Y,Z instead of --vertices");
  advise->add_option("--ranks", v.ranks, "Number of ranks")->required();
  advise->add_option("--mem-per-rank", v.mem_per_rank, "Memory per rank, e.g. 512GB")->required();
  advise->add_option("--base-mem", v.base_mem, "Memory used without attachment points, e.g. 133.26GiB");
  advise->add_option("--bytes-per-ap", v.bytes_per_ap, "Bytes per attachment point");
  advise->add_option("--run-a", v.run_a, "MEMORY,COUNT of a measured run");
  advise->add_option("--run-b", v.run_b, "MEMORY,COUNT of a second measured run");
  advise->add_option("--c", v.c, "Scale of the communication floor")->capture_default_str();
  advise->add_flag("--json", v.json, "Print JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) return do_run(r);
    return do_advise(v);
  } catch (const Error& e) {
    std::cerr << "ctree: error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "ctree: error: " << e.what() << "\n";
    return 3;
  }
}
