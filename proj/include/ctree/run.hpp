#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctree/analysis.hpp"
#include "ctree/contour_tree.hpp"
#include "ctree/distributed/pipeline.hpp"
#include "ctree/grid.hpp"
#include "ctree/oracle.hpp"

namespace ctree {

enum class Mode { serial, distributed };

struct RunConfig {
  // Exactly one of input / synthetic.
  std::optional<std::filesystem::path> input;
  std::optional<std::string> synthetic;  // uniform | integer | gaussian | monotone
  Dims dims;
  int scalar_bits = 32;
  ByteOrder byte_order = ByteOrder::little;
  std::uint64_t seed = 1;

  Mode mode = Mode::serial;
  dist::Splits splits{1, 1, 1};
  std::int64_t lambda = 0;
  std::optional<std::size_t> top_branches;  // default 100 when no threshold
  std::optional<std::int64_t> threshold;
  std::vector<std::int64_t> lambda_sweep;

  bool oracle_check = false;
  bool timings = false;
  bool concurrent = false;
  bool tree_dump = false;
};

struct RunOutputs {
  std::string branch_csv;
  nlohmann::ordered_json metrics;
  std::string sweep_csv;  // empty without a sweep
  std::string tree_dump;  // empty unless requested
  std::string warning;
  bool oracle_failed = false;
};

// Fixed per-entry sizes for the byte estimate of exchanged records.
inline constexpr std::int64_t kAttachmentPointBytes = 40;  // id, value, superparent, measure, owner
inline constexpr std::int64_t kBestUpDownBytes = 32;       // node, arc, volume, peak
inline constexpr std::int64_t kBranchInfoBytes = 40;       // saddle, leaf, volume, parent, index

namespace detail {

template <class Fn>
auto in_phase(std::string_view phase, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (...) {
    rethrow_tagged(std::current_exception(), phase);
  }
}

inline void validate(const RunConfig& c) {
  if (c.input.has_value() == c.synthetic.has_value()) throw UsageError("give exactly one of --input or --synthetic");
  if (c.lambda < 0) throw UsageError("lambda must be non-negative");
  if (c.top_branches && c.threshold) throw UsageError("--top-branches and --threshold are exclusive");
  if (c.top_branches && *c.top_branches == 0) throw UsageError("--top-branches must be at least 1");
  if (c.threshold && *c.threshold < 0) throw UsageError("--threshold must be non-negative");
  for (auto l : c.lambda_sweep) {
    if (l < 0) throw UsageError("lambda sweep values must be non-negative");
  }
  if (c.mode == Mode::serial) {
    if (c.splits != dist::Splits{1, 1, 1}) throw UsageError("--blocks requires --mode distributed");
    if (!c.lambda_sweep.empty()) throw UsageError("--lambda-sweep requires --mode distributed");
  }
}

inline ScalarGrid load_grid(const RunConfig& c) {
  if (c.input) return load_raw(*c.input, c.dims, c.scalar_bits, c.byte_order);
  const auto& name = *c.synthetic;
  if (name == "uniform") return uniform_random_grid(c.dims, c.seed);
  if (name == "integer") return integer_random_grid(c.dims, c.seed, 8);
  if (name == "gaussian") return gaussian_mixture_grid(c.dims, c.seed, 16);
  if (name == "monotone") return monotone_grid(c.dims);
  throw UsageError("unknown synthetic field '" + name + "' (uniform, integer, gaussian, monotone)");
}

inline nlohmann::ordered_json counts_json(const dist::CommCounts& c) {
  return {{"attachment_points_recv", c.attachment_points_recv},
          {"bestupdown_recv", c.bestupdown_recv},
          {"branchinfo_recv", c.branchinfo_recv},
          {"bytes_estimate", c.attachment_points_recv * kAttachmentPointBytes + c.bestupdown_recv * kBestUpDownBytes +
                                 c.branchinfo_recv * kBranchInfoBytes}};
}

inline std::int64_t counted_vertices(const ContourTree& ct, const VolumeAnnotation& vol) {
  std::int64_t sum = vol.root_mass(ct);
  for (auto c : vol.count) sum += c;
  return sum;
}

struct OracleReport {
  nlohmann::ordered_json json = nlohmann::ordered_json::object();
  bool failed = false;

  void record(const std::string& name, std::int64_t checked, std::int64_t mismatches) {
    json[name] = {{"checked", checked}, {"mismatches", mismatches}};
    failed = failed || mismatches != 0;
  }
};

inline OracleReport oracle_checks(const ScalarGrid& g, const ContourTree& serial_ct, const VolumeAnnotation& serial_vol,
                                  const BranchDecomposition& serial_bd, const dist::DistributedRun* run) {
  OracleReport report;
  const auto order = sos_order(g);
  std::int64_t mismatches = 0;
  for (std::int64_t gap = 0; gap + 1 < g.dims().size(); ++gap) {
    const VertexId below = order.by_rank[static_cast<std::size_t>(gap)];
    mismatches += serial_ct.count_straddling(g.key(below)) != oracle::count_contours(g, gap);
  }
  report.record("level_sets", std::max<std::int64_t>(0, g.dims().size() - 1), mismatches);

  mismatches = 0;
  std::int64_t checked = 0;
  for (std::size_t a = 0; a < serial_ct.supernode_count(); ++a) {
    if (serial_ct.inner[a] < 0) continue;
    ++checked;
    mismatches += serial_vol.outward[a] != oracle::brute_subtree_volume(serial_ct, static_cast<int>(a));
  }
  report.record("subtree_volumes", checked, mismatches);

  if (run) {
    const auto& ct = run->tree();
    const auto& vol = run->final_volumes();
    mismatches = 0;
    checked = 0;
    for (std::size_t a = 0; a < ct.supernode_count(); ++a) {
      if (ct.inner[a] < 0) continue;
      const int arc = static_cast<int>(a);
      const int in = ct.inner[a];
      ++checked;
      mismatches += vol.volume_from(ct, in, arc) != oracle::side_volume(serial_ct, ct.node_id(arc), ct.node_id(in));
    }
    report.record("distributed_volumes", checked, mismatches);

    std::vector<std::tuple<VertexId, std::int64_t, std::optional<VertexId>>> want;
    std::vector<std::tuple<VertexId, std::int64_t, std::optional<VertexId>>> got;
    for (const auto& b : serial_bd.branches) {
      if (b.is_trunk() || b.volume > run->lambda) want.emplace_back(b.id, b.volume, b.parent);
    }
    for (const auto& b : run->decomposition_result().branches) {
      if (b.is_trunk() || b.volume > run->lambda) got.emplace_back(b.id, b.volume, b.parent);
    }
    mismatches = 0;
    for (std::size_t i = 0; i < std::max(want.size(), got.size()); ++i) {
      mismatches += i >= want.size() || i >= got.size() || want[i] != got[i];
    }
    report.record("branches_above_lambda", static_cast<std::int64_t>(want.size()), mismatches);
  }
  return report;
}

}  // namespace detail

/// Runs the configured pipeline and renders every output in memory.
inline RunOutputs run_pipeline(const RunConfig& config) {
  detail::validate(config);
  const auto grid = detail::in_phase("input", [&] { return detail::load_grid(config); });
  const std::int64_t n = grid.dims().size();

  RunOutputs out;
  auto& m = out.metrics;
  m["mode"] = config.mode == Mode::serial ? "serial" : "distributed";
  m["dims"] = {grid.dims().nx, grid.dims().ny, grid.dims().nz};
  m["vertices"] = n;
  m["blocks"] = {config.splits[0], config.splits[1], config.splits[2]};
  m["lambda"] = config.lambda;

  const ContourTree* tree = nullptr;
  const VolumeAnnotation* volumes = nullptr;
  const BranchDecomposition* bd = nullptr;
  ContourTree serial_ct;
  VolumeAnnotation serial_vol;
  BranchDecomposition serial_bd;
  std::optional<dist::DistributedRun> run;

  const bool need_serial = config.mode == Mode::serial || config.oracle_check;
  if (need_serial) {
    serial_ct = detail::in_phase("local_tree", [&] { return compute_contour_tree(grid); });
    serial_vol = detail::in_phase("hypersweep", [&] { return compute_volumes(serial_ct); });
    serial_bd = detail::in_phase("branch_decomposition", [&] { return branch_decomposition(serial_ct, serial_vol); });
  }
  if (config.mode == Mode::serial) {
    tree = &serial_ct;
    volumes = &serial_vol;
    bd = &serial_bd;
  } else {
    detail::in_phase("decomposition", [&] { dist::decompose(grid.dims(), config.splits); });
    // Rank phases tag their own errors.
    run = dist::run_distributed(grid, {config.splits, config.lambda, config.concurrent});
    tree = &run->tree();
    volumes = &run->final_volumes();
    bd = &run->decomposition_result();
  }

  const auto represented = detail::counted_vertices(*tree, *volumes);
  if (represented != n) {
    throw InternalError("conservation: tree accounts for " + std::to_string(represented) + " of " +
                        std::to_string(n) + " vertices");
  }

  BranchSelection sel = detail::in_phase("top_branch_selection", [&] {
    if (config.threshold) {
      auto s = select_above_threshold(*bd, *config.threshold);
      if (config.mode == Mode::distributed && config.lambda > *config.threshold) {
        s.warning = true;
        s.message = "lambda " + std::to_string(config.lambda) + " exceeds the volume threshold " +
                    std::to_string(*config.threshold) + "; selection may be unreliable";
      }
      return s;
    }
    const std::size_t b = config.top_branches.value_or(100);
    if (config.mode == Mode::distributed) return dist::select_top_branches_distributed(*bd, b, config.lambda);
    return select_top_branches(*bd, b);
  });
  out.warning = sel.message;

  std::ostringstream csv;
  write_branch_csv(csv, sel.branches);
  out.branch_csv = csv.str();

  m["supernodes"] = tree->supernode_count();
  m["branches_total"] = bd->branches.size();
  m["branches_selected"] = sel.branches.size();
  m["smallest_selected_volume"] = sel.smallest_volume;
  m["conservation"] = {{"counted_vertices", represented}, {"expected", n}, {"ok", true}};
  m["warning"] = sel.warning ? nlohmann::ordered_json(sel.message) : nlohmann::ordered_json(nullptr);

  if (run) {
    m["retained_vertices"] = run->tree().vertex_count();
    m["shared_vertices"] = run->trees.front().shared.vertex_count();
    std::int64_t records = 0;
    for (const auto& s : run->states) records += static_cast<std::int64_t>(s.records.size());
    m["interior_records"] = records;
    auto comm = run->log.to_json(config.timings);
    for (auto p : dist::kPhases) {
      comm["phases"][std::string(dist::phase_name(p))]["max"] = detail::counts_json(run->log.max(p));
    }
    comm["max_total"] = detail::counts_json(run->log.max_total());
    m["communication"] = std::move(comm);
  }

  if (!config.lambda_sweep.empty()) {
    std::ostringstream sweep;
    sweep << "lambda,max_attachment_points_recv,max_bestupdown_recv,max_branchinfo_recv\n";
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (auto l : config.lambda_sweep) {
      const auto r = dist::run_distributed(grid, {config.splits, l, config.concurrent});
      const auto c = r.log.max_total();
      sweep << l << ',' << c.attachment_points_recv << ',' << c.bestupdown_recv << ',' << c.branchinfo_recv << '\n';
      auto row = detail::counts_json(c);
      row.erase("bytes_estimate");
      nlohmann::ordered_json entry{{"lambda", l}};
      entry.update(row);
      rows.push_back(std::move(entry));
    }
    out.sweep_csv = sweep.str();
    m["lambda_sweep"] = std::move(rows);
  }

  if (config.oracle_check) {
    auto report = detail::in_phase("oracle_check", [&] {
      return detail::oracle_checks(grid, serial_ct, serial_vol, serial_bd, run ? &*run : nullptr);
    });
    m["oracle_check"] = std::move(report.json);
    out.oracle_failed = report.failed;
  }

  if (config.tree_dump) {
    std::ostringstream os;
    dump(*tree, os);
    out.tree_dump = os.str();
  }
  return out;
}

}  // namespace ctree
