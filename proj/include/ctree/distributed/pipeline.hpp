#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ctree/analysis.hpp"
#include "ctree/contour_tree.hpp"
#include "ctree/distributed/block_state.hpp"
#include "ctree/distributed/decomposition.hpp"
#include "ctree/distributed/transport.hpp"

namespace ctree::dist {

/// Where one of this rank's interior records goes in the shared tree.
struct AttachmentTarget {
  int record = 0;
  VertexId attachment = kNoVertex;
  int superparent = -1;  // superarc (or supernode) of the shared tree; -1 when nested in another record
};

/// One rank's view after fan-out, extended by augmentation.
struct HierarchicalTree {
  int rank = 0;
  BoundaryTree shared_piece;   // final boundary tree, same on every rank
  ContourTree shared;          // its contour tree; never rooted at a vertex with hanging mass
  std::vector<AttachmentTarget> attachments;

  // Filled by augment_distributed().
  ContourTree augmented_shared;  // shared tree with listed attachment points as supernodes
  ContourTree retained;          // shared tree plus every listed record
  std::vector<int> holder;       // per retained vertex: rank that holds it
  std::vector<InteriorRecord> received;
};

/// Everything one distributed run produces; per-rank results are kept so
/// callers can check that ranks agree.
struct DistributedRun {
  BlockDecomposition decomposition;
  std::int64_t lambda = 0;
  std::vector<BlockState> states;
  std::vector<HierarchicalTree> trees;
  std::vector<VolumeAnnotation> shared_volumes;  // pre-augmentation, per rank
  std::vector<std::vector<int>> listed;          // per rank: indices of listed own records
  std::vector<VolumeAnnotation> volumes;         // post-augmentation, per rank
  std::vector<BranchDecomposition> branches;     // per rank
  CommLog log;

  const ContourTree& tree() const { return trees.front().retained; }
  const VolumeAnnotation& final_volumes() const { return volumes.front(); }
  const BranchDecomposition& decomposition_result() const { return branches.front(); }
};

// ---------------------------------------------------------------------------
// Phases

inline std::vector<BlockState> local_phase_all(const ScalarGrid& grid, const BlockDecomposition& d,
                                               RankExecutor& exec) {
  std::vector<BlockState> states(static_cast<std::size_t>(d.block_count()));
  exec.run(Phase::local_tree, [&](int r) {
    states[static_cast<std::size_t>(r)] = local_phase(grid, d.blocks[static_cast<std::size_t>(r)]);
  });
  return states;
}

/// Pairwise reduction of boundary trees; the final one ends on rank 0.
inline void fan_in(std::vector<BlockState>& states, const BlockDecomposition& d, Transport& transport,
                   RankExecutor& exec) {
  const auto schedule = reduction_schedule(d);
  for (std::size_t round = 0; round < schedule.size(); ++round) {
    const auto& merges = schedule[round];
    std::vector<int> partner(static_cast<std::size_t>(exec.ranks()), -1);
    std::vector<char> sending(static_cast<std::size_t>(exec.ranks()), 0);
    for (const auto& m : merges) {
      partner[static_cast<std::size_t>(m.receiver)] = m.sender;
      sending[static_cast<std::size_t>(m.sender)] = 1;
    }
    exec.run(Phase::fan_in, [&](int r) {
      if (!sending[static_cast<std::size_t>(r)]) return;
      for (const auto& m : merges) {
        if (m.sender == r) transport.send(r, m.receiver, states[static_cast<std::size_t>(r)].boundary);
      }
    });
    exec.run(Phase::fan_in, [&](int r) {
      const int from = partner[static_cast<std::size_t>(r)];
      if (from < 0) return;
      const auto incoming = transport.receive<BoundaryTree>(r, from);
      merge_boundary(states[static_cast<std::size_t>(r)], incoming, d.dims, static_cast<int>(round) + 1);
    });
  }
}

inline ContourTree shared_contour_tree(const BoundaryTree& b, std::span<const char> force = {}) {
  std::vector<char> avoid(b.piece.ids.size(), 0);
  for (std::size_t i = 0; i < b.piece.ids.size(); ++i) avoid[i] = b.hanging.count(b.piece.ids[i]) > 0;
  return contour_tree_from_piece(b.piece, avoid, force);
}

/// Rank 0 broadcasts the final boundary tree; each rank records its interior
/// records against it.
inline std::vector<HierarchicalTree> fan_out(const std::vector<BlockState>& states, Transport& transport,
                                             RankExecutor& exec) {
  const int ranks = exec.ranks();
  std::vector<HierarchicalTree> trees(static_cast<std::size_t>(ranks));
  exec.run(Phase::fan_out, [&](int r) {
    if (r != 0) return;
    for (int to = 1; to < ranks; ++to) transport.send(0, to, states[0].boundary);
  });
  exec.run(Phase::fan_out, [&](int r) {
    auto& t = trees[static_cast<std::size_t>(r)];
    t.rank = r;
    t.shared_piece = r == 0 ? states[0].boundary : transport.receive<BoundaryTree>(r, 0);
    t.shared = shared_contour_tree(t.shared_piece);
    const auto& records = states[static_cast<std::size_t>(r)].records;
    for (const auto& rec : records) {
      const int local = t.shared.local(rec.attachment);
      t.attachments.push_back(
          {rec.index, rec.attachment, local < 0 ? -1 : t.shared.superparent[static_cast<std::size_t>(local)]});
    }
  });
  return trees;
}

namespace detail {

struct Contribution {
  std::vector<std::int64_t> mass;
  std::vector<VertexKey> peak;

  explicit Contribution(std::size_t n = 0) : mass(n, 0), peak(n) {}
  void add(std::size_t i, std::int64_t m, const VertexKey& p) {
    mass[i] += m;
    peak[i] = max_key(peak[i], p);
  }
  void add(const Contribution& o) {
    for (std::size_t i = 0; i < mass.size(); ++i) add(i, o.mass[i], o.peak[i]);
  }
};

/// Sum of per-rank contributions, delivered to every rank through rank 0.
inline std::vector<Contribution> all_reduce(std::vector<Contribution> local, Transport& transport, RankExecutor& exec,
                                            Phase phase) {
  const int ranks = exec.ranks();
  exec.run(phase, [&](int r) { transport.send(r, 0, local[static_cast<std::size_t>(r)]); });
  exec.run(phase, [&](int r) {
    if (r != 0) return;
    Contribution sum(local[0].mass.size());
    for (int from = 0; from < ranks; ++from) sum.add(transport.receive<Contribution>(0, from));
    for (int to = 0; to < ranks; ++to) transport.send(0, to, sum);
  });
  std::vector<Contribution> out(static_cast<std::size_t>(ranks));
  exec.run(phase, [&](int r) { out[static_cast<std::size_t>(r)] = transport.receive<Contribution>(r, 0); });
  return out;
}

/// Folds per-vertex masses into supernode and superarc masses.
inline VolumeAnnotation annotate_vertices(const ContourTree& ct, const Contribution& c) {
  const std::size_t t = ct.supernode_count();
  std::vector<std::int64_t> node_mass(t, 0);
  std::vector<std::int64_t> arc_mass(t, 0);
  std::vector<VertexKey> node_peak(t);
  std::vector<VertexKey> arc_peak(t);
  for (std::size_t v = 0; v < ct.vertex_count(); ++v) {
    const auto s = static_cast<std::size_t>(ct.superparent[v]);
    if (ct.supernode_index[v] >= 0) {
      node_mass[s] += c.mass[v];
      node_peak[s] = max_key(node_peak[s], c.peak[v]);
    } else {
      arc_mass[s] += c.mass[v];
      arc_peak[s] = max_key(arc_peak[s], c.peak[v]);
    }
  }
  auto vol = annotate_masses(ct, std::move(node_mass), std::move(arc_mass), std::move(node_peak), std::move(arc_peak));
  hypersweep(ct, vol);
  return vol;
}

}  // namespace detail

/// Volumes on the shared tree before any attachment point is inserted: shared
/// vertices count at their owner block, interior records at their attachment.
inline std::vector<VolumeAnnotation> pre_augmentation_hypersweep(const std::vector<HierarchicalTree>& trees,
                                                                 const std::vector<BlockState>& states,
                                                                 const BlockDecomposition& d, Transport& transport,
                                                                 RankExecutor& exec) {
  const int ranks = exec.ranks();
  std::vector<detail::Contribution> local(static_cast<std::size_t>(ranks));
  exec.run(Phase::pre_augmentation_hypersweep, [&](int r) {
    const auto& ct = trees[static_cast<std::size_t>(r)].shared;
    detail::Contribution c(ct.vertex_count());
    for (std::size_t v = 0; v < ct.vertex_count(); ++v) {
      if (d.owner(ct.ids[v]) == r) c.add(v, 1, ct.key(static_cast<int>(v)));
    }
    for (const auto& rec : states[static_cast<std::size_t>(r)].records) {
      const int at = ct.local(rec.attachment);
      if (at >= 0) c.add(static_cast<std::size_t>(at), rec.measure, rec.peak);
    }
    local[static_cast<std::size_t>(r)] = std::move(c);
  });
  const auto sums = detail::all_reduce(std::move(local), transport, exec, Phase::pre_augmentation_hypersweep);
  std::vector<VolumeAnnotation> out(static_cast<std::size_t>(ranks));
  exec.run(Phase::pre_augmentation_hypersweep, [&](int r) {
    out[static_cast<std::size_t>(r)] =
        detail::annotate_vertices(trees[static_cast<std::size_t>(r)].shared, sums[static_cast<std::size_t>(r)]);
  });
  return out;
}

/// Own records whose measure exceeds lambda.
inline std::vector<int> list_attachment_points(const BlockState& state, std::int64_t lambda) {
  if (lambda < 0) throw UsageError("lambda must be non-negative");
  std::vector<int> out;
  for (const auto& rec : state.records) {
    if (rec.measure > lambda) out.push_back(rec.index);
  }
  return out;
}

/// Exchanges listed records, then builds on every rank the shared tree with
/// listed attachment points as supernodes and the retained tree (shared tree
/// plus all listed records).
inline void augment_distributed(std::vector<HierarchicalTree>& trees, const std::vector<BlockState>& states,
                                const std::vector<std::vector<int>>& listed, const BlockDecomposition& d,
                                Transport& transport, RankExecutor& exec, CommLog& log) {
  const int ranks = exec.ranks();
  exec.run(Phase::augmentation, [&](int r) {
    std::vector<InteriorRecord> mine;
    for (int i : listed[static_cast<std::size_t>(r)]) {
      mine.push_back(states[static_cast<std::size_t>(r)].records[static_cast<std::size_t>(i)]);
    }
    for (int to = 0; to < ranks; ++to) {
      if (to != r) transport.send(r, to, mine);
    }
  });
  exec.run(Phase::augmentation, [&](int r) {
    auto& t = trees[static_cast<std::size_t>(r)];
    std::vector<const InteriorRecord*> all;
    for (int from = 0; from < ranks; ++from) {
      if (from == r) continue;
      auto batch = transport.receive<std::vector<InteriorRecord>>(r, from);
      log.at(Phase::augmentation, r).attachment_points_recv += static_cast<std::int64_t>(batch.size());
      for (auto& rec : batch) t.received.push_back(std::move(rec));
    }
    for (const auto& rec : t.received) all.push_back(&rec);
    for (int i : listed[static_cast<std::size_t>(r)]) {
      all.push_back(&states[static_cast<std::size_t>(r)].records[static_cast<std::size_t>(i)]);
    }
    std::sort(all.begin(), all.end(), [](const InteriorRecord* a, const InteriorRecord* b) {
      return std::pair(a->owner, a->index) < std::pair(b->owner, b->index);
    });

    // Shared tree with top-level listed attachment points forced in.
    const auto& shared_piece = t.shared_piece.piece;
    std::map<VertexId, std::size_t> shared_index;
    for (std::size_t i = 0; i < shared_piece.ids.size(); ++i) shared_index.emplace(shared_piece.ids[i], i);
    std::vector<char> force(shared_piece.ids.size(), 0);
    for (const auto* rec : all) {
      auto it = shared_index.find(rec->attachment);
      if (it != shared_index.end()) force[it->second] = 1;
    }
    t.augmented_shared = shared_contour_tree(t.shared_piece, force);

    // Retained tree: every listed record must hang from the shared tree or
    // from another listed record.
    std::vector<const TreePiece*> pieces{&shared_piece};
    std::map<VertexId, int> holder_of;
    for (VertexId v : shared_piece.ids) holder_of.emplace(v, d.owner(v));
    for (const auto* rec : all) {
      for (std::size_t i = 1; i < rec->piece.ids.size(); ++i) holder_of.emplace(rec->piece.ids[i], rec->owner);
    }
    for (const auto* rec : all) {
      if (!holder_of.count(rec->attachment)) {
        throw InternalError("attachment point " + std::to_string(rec->attachment) + " has no target superarc");
      }
      pieces.push_back(&rec->piece);
    }
    t.retained = contour_tree_from_piece(merge_pieces(pieces));
    t.holder.resize(t.retained.vertex_count());
    for (std::size_t v = 0; v < t.retained.vertex_count(); ++v) t.holder[v] = holder_of.at(t.retained.ids[v]);
  });
}

/// Volumes on the retained tree: unlisted records fold into the vertex they
/// hang from. Re-roots each retained tree away from folded mass.
inline std::vector<VolumeAnnotation> post_augmentation_hypersweep(std::vector<HierarchicalTree>& trees,
                                                                  const std::vector<BlockState>& states,
                                                                  const std::vector<std::vector<int>>& listed,
                                                                  const BlockDecomposition& d,
                                                                  Transport& transport, RankExecutor& exec) {
  const int ranks = exec.ranks();
  std::vector<detail::Contribution> local(static_cast<std::size_t>(ranks));
  exec.run(Phase::post_augmentation_hypersweep, [&](int r) {
    const auto& t = trees[static_cast<std::size_t>(r)];
    const auto& ct = t.retained;
    const auto& records = states[static_cast<std::size_t>(r)].records;
    detail::Contribution c(ct.vertex_count());
    for (VertexId v : t.shared_piece.piece.ids) {
      if (d.owner(v) == r) {
        const auto l = static_cast<std::size_t>(ct.local(v));
        c.add(l, 1, ct.key(static_cast<int>(l)));
      }
    }
    std::vector<char> is_listed(records.size(), 0);
    for (int i : listed[static_cast<std::size_t>(r)]) is_listed[static_cast<std::size_t>(i)] = 1;
    for (const auto& rec : records) {
      if (is_listed[static_cast<std::size_t>(rec.index)]) {
        for (std::size_t i = 1; i < rec.piece.ids.size(); ++i) {
          const auto l = static_cast<std::size_t>(ct.local(rec.piece.ids[i]));
          c.add(l, 1, ct.key(static_cast<int>(l)));
        }
      } else if (const int at = ct.local(rec.attachment); at >= 0) {
        c.add(static_cast<std::size_t>(at), rec.measure, rec.peak);
      }
    }
    local[static_cast<std::size_t>(r)] = std::move(c);
  });
  const auto sums = detail::all_reduce(std::move(local), transport, exec, Phase::post_augmentation_hypersweep);
  std::vector<VolumeAnnotation> out(static_cast<std::size_t>(ranks));
  exec.run(Phase::post_augmentation_hypersweep, [&](int r) {
    auto& t = trees[static_cast<std::size_t>(r)];
    const auto& c = sums[static_cast<std::size_t>(r)];
    std::int64_t represented = 0;
    for (auto m : c.mass) represented += m;
    if (represented != d.dims.size()) {
      throw InternalError("retained tree represents " + std::to_string(represented) + " of " +
                          std::to_string(d.dims.size()) + " vertices");
    }
    std::vector<char> avoid(t.retained.vertex_count(), 0);
    for (std::size_t v = 0; v < avoid.size(); ++v) avoid[v] = c.mass[v] > 1;
    t.retained = contour_tree_from_piece(to_piece(t.retained), avoid);
    out[static_cast<std::size_t>(r)] = detail::annotate_vertices(t.retained, c);
  });
  return out;
}

namespace detail {

struct BestEntry {
  int node = 0;
  int arc = 0;
  bool up = false;
  ArcScore score;
};

struct BranchInfo {
  int index = 0;  // position in the (replicated) branch ordering
  VertexId id = kTrunk;
  std::int64_t volume = 0;
  VertexId outer_leaf = kNoVertex;
  std::optional<VertexId> parent;
};

inline int arc_holder(const HierarchicalTree& t, int arc) {
  return t.holder[static_cast<std::size_t>(t.retained.supernodes[static_cast<std::size_t>(arc)])];
}
inline int node_holder(const HierarchicalTree& t, int node) { return arc_holder(t, node); }

}  // namespace detail

/// Branch decomposition on the retained tree. Supernodes and superarcs are
/// held by the rank holding their (outer) vertex; best-arc candidates and
/// branch descriptions travel between holders and are counted on receipt.
inline std::vector<BranchDecomposition> distributed_branch_decomposition(const std::vector<HierarchicalTree>& trees,
                                                                         const std::vector<VolumeAnnotation>& volumes,
                                                                         Transport& transport, RankExecutor& exec,
                                                                         CommLog& log) {
  using detail::BestEntry;
  const int ranks = exec.ranks();
  std::vector<BestArcs> best(static_cast<std::size_t>(ranks));
  std::vector<BranchDecomposition> out(static_cast<std::size_t>(ranks));

  // Candidates from arc holders to node holders.
  exec.run(Phase::branch_decomposition, [&](int r) {
    const auto& t = trees[static_cast<std::size_t>(r)];
    const auto& ct = t.retained;
    const auto& vol = volumes[static_cast<std::size_t>(r)];
    best[static_cast<std::size_t>(r)] = best_arcs(ct, vol);
    const auto children = ct.children();
    std::vector<std::vector<BestEntry>> outbox(static_cast<std::size_t>(ranks));
    for (std::size_t xs = 0; xs < ct.supernode_count(); ++xs) {
      const int x = static_cast<int>(xs);
      const int owner = detail::node_holder(t, x);
      if (owner == r) continue;
      std::optional<BestEntry> up;
      std::optional<BestEntry> down;
      for_each_incident_arc(ct, children, x, [&](int arc, int neighbour) {
        if (detail::arc_holder(t, arc) != r) return;
        const bool is_up = ct.node_key(x) < ct.node_key(neighbour);
        const ArcScore score{vol.volume_from(ct, x, arc), vol.peak_from(ct, x, arc)};
        auto& slot = is_up ? up : down;
        if (!slot || slot->score < score) slot = BestEntry{x, arc, is_up, score};
      });
      if (up) outbox[static_cast<std::size_t>(owner)].push_back(*up);
      if (down) outbox[static_cast<std::size_t>(owner)].push_back(*down);
    }
    for (int to = 0; to < ranks; ++to) {
      if (to != r) transport.send(r, to, std::move(outbox[static_cast<std::size_t>(to)]));
    }
  });

  // Node holders settle the best arcs and return them to contributing ranks.
  exec.run(Phase::branch_decomposition, [&](int r) {
    const auto& t = trees[static_cast<std::size_t>(r)];
    const auto& b = best[static_cast<std::size_t>(r)];
    std::vector<std::vector<BestEntry>> outbox(static_cast<std::size_t>(ranks));
    for (int from = 0; from < ranks; ++from) {
      if (from == r) continue;
      const auto batch = transport.receive<std::vector<BestEntry>>(r, from);
      log.at(Phase::branch_decomposition, r).bestupdown_recv += static_cast<std::int64_t>(batch.size());
      for (const auto& e : batch) {
        const int settled = (e.up ? b.up : b.down)[static_cast<std::size_t>(e.node)];
        if (settled < 0) throw InternalError("candidate best arc at a node without one");
        auto& box = outbox[static_cast<std::size_t>(from)];
        if (!box.empty() && box.back().node == e.node) continue;
        const auto& ct = t.retained;
        const auto& vol = volumes[static_cast<std::size_t>(r)];
        for (int arc : {b.up[static_cast<std::size_t>(e.node)], b.down[static_cast<std::size_t>(e.node)]}) {
          if (arc < 0) continue;
          const int other = arc == e.node ? ct.inner[static_cast<std::size_t>(arc)] : arc;
          box.push_back({e.node, arc, ct.node_key(e.node) < ct.node_key(other),
                         {vol.volume_from(ct, e.node, arc), vol.peak_from(ct, e.node, arc)}});
        }
      }
    }
    for (int to = 0; to < ranks; ++to) {
      if (to != r) transport.send(r, to, std::move(outbox[static_cast<std::size_t>(to)]));
    }
  });

  // Contributors check the settled entries, then collapse chains locally.
  exec.run(Phase::branch_decomposition, [&](int r) {
    const auto& b = best[static_cast<std::size_t>(r)];
    for (int from = 0; from < ranks; ++from) {
      if (from == r) continue;
      const auto batch = transport.receive<std::vector<BestEntry>>(r, from);
      log.at(Phase::branch_decomposition, r).bestupdown_recv += static_cast<std::int64_t>(batch.size());
      for (const auto& e : batch) {
        if ((e.up ? b.up : b.down)[static_cast<std::size_t>(e.node)] != e.arc) {
          throw InternalError("ranks disagree on a best arc");
        }
      }
    }
    const auto& t = trees[static_cast<std::size_t>(r)];
    out[static_cast<std::size_t>(r)] = branch_decomposition(t.retained, volumes[static_cast<std::size_t>(r)], b);
  });

  // The holder of a branch's saddle arc describes the branch to every other
  // rank holding part of it.
  exec.run(Phase::branch_decomposition, [&](int r) {
    const auto& t = trees[static_cast<std::size_t>(r)];
    const auto& bd = out[static_cast<std::size_t>(r)];
    const std::size_t nb = bd.branches.size();
    std::vector<int> resolver(nb, -1);
    std::vector<std::vector<char>> touches(nb, std::vector<char>(static_cast<std::size_t>(ranks), 0));
    for (std::size_t s = 0; s < bd.branch_of_arc.size(); ++s) {
      const int br = bd.branch_of_arc[s];
      if (br < 0) continue;
      const int h = detail::arc_holder(t, static_cast<int>(s));
      touches[static_cast<std::size_t>(br)][static_cast<std::size_t>(h)] = 1;
      const auto& branch = bd.branches[static_cast<std::size_t>(br)];
      if (branch.saddle_arc == static_cast<int>(s) || (branch.is_trunk() && resolver[static_cast<std::size_t>(br)] < 0)) {
        resolver[static_cast<std::size_t>(br)] = h;
      }
    }
    std::vector<std::vector<detail::BranchInfo>> outbox(static_cast<std::size_t>(ranks));
    for (std::size_t i = 0; i < nb; ++i) {
      if (resolver[i] != r) continue;
      const auto& br = bd.branches[i];
      for (int h = 0; h < ranks; ++h) {
        if (h != r && touches[i][static_cast<std::size_t>(h)]) {
          outbox[static_cast<std::size_t>(h)].push_back({static_cast<int>(i), br.id, br.volume, br.outer_leaf, br.parent});
        }
      }
    }
    for (int to = 0; to < ranks; ++to) {
      if (to != r) transport.send(r, to, std::move(outbox[static_cast<std::size_t>(to)]));
    }
  });
  exec.run(Phase::branch_decomposition, [&](int r) {
    const auto& bd = out[static_cast<std::size_t>(r)];
    for (int from = 0; from < ranks; ++from) {
      if (from == r) continue;
      const auto batch = transport.receive<std::vector<detail::BranchInfo>>(r, from);
      log.at(Phase::branch_decomposition, r).branchinfo_recv += static_cast<std::int64_t>(batch.size());
      for (const auto& info : batch) {
        const auto i = static_cast<std::size_t>(info.index);
        if (i >= bd.branches.size() || bd.branches[i].id != info.id || bd.branches[i].volume != info.volume ||
            bd.branches[i].outer_leaf != info.outer_leaf || bd.branches[i].parent != info.parent) {
          throw InternalError("ranks disagree on branch " + std::to_string(info.id));
        }
      }
    }
  });
  return out;
}

/// Top-b branches among those with volume above lambda (the trunk always
/// counts). Warns when lambda exceeds the smallest retained volume or when the
/// lambda filter left fewer than b branches.
inline BranchSelection select_top_branches_distributed(const BranchDecomposition& bd, std::size_t b,
                                                       std::int64_t lambda) {
  if (b == 0) throw UsageError("number of branches to keep must be at least 1");
  if (lambda < 0) throw UsageError("lambda must be non-negative");
  BranchSelection sel;
  bool filtered = false;
  for (const auto& br : bd.branches) {
    if (!br.is_trunk() && br.volume <= lambda) {
      filtered = true;
      continue;
    }
    if (sel.branches.size() < b) sel.branches.push_back(br);
  }
  sel.smallest_volume = sel.branches.empty() ? 0 : sel.branches.back().volume;
  if (lambda > sel.smallest_volume) {
    sel.warning = true;
    sel.message = "lambda " + std::to_string(lambda) + " exceeds the smallest selected volume " +
                  std::to_string(sel.smallest_volume) + "; selection may be unreliable";
  } else if (filtered && sel.branches.size() < b) {
    sel.warning = true;
    sel.message = "only " + std::to_string(sel.branches.size()) + " branches have volume above lambda " +
                  std::to_string(lambda) + "; selection may be unreliable";
  }
  return sel;
}

// ---------------------------------------------------------------------------
// Driver

struct DistributedOptions {
  Splits splits{1, 1, 1};
  std::int64_t lambda = 0;
  bool concurrent = false;
};

inline DistributedRun run_distributed(const ScalarGrid& grid, const DistributedOptions& options) {
  if (options.lambda < 0) throw UsageError("lambda must be non-negative");
  DistributedRun run;
  run.decomposition = decompose(grid.dims(), options.splits);
  run.lambda = options.lambda;
  const int ranks = run.decomposition.block_count();
  run.log = CommLog(ranks);
  Transport transport(ranks);
  RankExecutor exec(ranks, options.concurrent, &run.log);

  run.states = local_phase_all(grid, run.decomposition, exec);
  fan_in(run.states, run.decomposition, transport, exec);
  run.trees = fan_out(run.states, transport, exec);
  run.shared_volumes = pre_augmentation_hypersweep(run.trees, run.states, run.decomposition, transport, exec);
  run.listed.assign(static_cast<std::size_t>(ranks), {});
  exec.run(Phase::augmentation, [&](int r) {
    run.listed[static_cast<std::size_t>(r)] = list_attachment_points(run.states[static_cast<std::size_t>(r)], options.lambda);
  });
  augment_distributed(run.trees, run.states, run.listed, run.decomposition, transport, exec, run.log);
  run.volumes = post_augmentation_hypersweep(run.trees, run.states, run.listed, run.decomposition, transport, exec);
  run.branches = distributed_branch_decomposition(run.trees, run.volumes, transport, exec, run.log);
  return run;
}

}  // namespace ctree::dist
