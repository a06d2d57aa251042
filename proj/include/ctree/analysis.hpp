#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "ctree/contour_tree.hpp"
#include "ctree/errors.hpp"
#include "ctree/union_find.hpp"

namespace ctree {

/// Vertex-count measures on a contour tree.
///
/// Counting convention: superarc `s` counts the mass of its regular vertices plus
/// the mass of its outer-end supernode; the root is counted by no superarc, so
/// the counts plus the root's mass sum to the total. Masses are 1 per vertex in
/// a plain tree; a pre-simplified subtree adds its vertex count to the mass of
/// the position (supernode or superarc) where it was collapsed.
///
/// Each mass also carries a peak: the highest vertex key it contains. Peaks
/// break ties between equal volumes in a way that survives collapsing.
struct VolumeAnnotation {
  std::int64_t total = 0;
  std::vector<std::int64_t> node_mass;
  std::vector<std::int64_t> arc_mass;
  std::vector<VertexKey> node_peak;
  std::vector<VertexKey> arc_peak;
  std::vector<std::int64_t> count;

  // Filled by hypersweep().
  std::vector<std::int64_t> subtree;   // supernode plus everything beyond it
  std::vector<std::int64_t> outward;   // superarc cut at its inner end: outer side
  std::vector<std::int64_t> inward;    // total - outward
  std::vector<VertexKey> subtree_peak;
  std::vector<VertexKey> outward_peak;
  std::vector<VertexKey> complement_peak;  // peak of everything outside subtree

  bool swept() const { return !outward.empty(); }

  /// Mass beyond superarc `arc` as seen from its endpoint `at`.
  std::int64_t volume_from(const ContourTree& ct, int at, int arc) const {
    if (at == arc) return total - subtree[static_cast<std::size_t>(arc)];
    if (ct.inner[static_cast<std::size_t>(arc)] != at) throw UsageError("vertex is not an end of the superarc");
    return outward[static_cast<std::size_t>(arc)];
  }
  VertexKey peak_from(const ContourTree& ct, int at, int arc) const {
    if (at == arc) return complement_peak[static_cast<std::size_t>(arc)];
    if (ct.inner[static_cast<std::size_t>(arc)] != at) throw UsageError("vertex is not an end of the superarc");
    return outward_peak[static_cast<std::size_t>(arc)];
  }

  std::int64_t root_mass(const ContourTree& ct) const { return node_mass[static_cast<std::size_t>(ct.root)]; }
};

/// Per-superarc masses from explicit node/arc masses.
inline VolumeAnnotation annotate_masses(const ContourTree& ct, std::vector<std::int64_t> node_mass,
                                        std::vector<std::int64_t> arc_mass,
                                        std::vector<VertexKey> node_peak, std::vector<VertexKey> arc_peak) {
  const std::size_t t = ct.supernode_count();
  VolumeAnnotation vol;
  vol.node_mass = std::move(node_mass);
  vol.arc_mass = std::move(arc_mass);
  vol.node_peak = std::move(node_peak);
  vol.arc_peak = std::move(arc_peak);
  vol.count.assign(t, 0);
  for (std::size_t s = 0; s < t; ++s) {
    vol.total += vol.node_mass[s] + vol.arc_mass[s];
    if (ct.inner[s] >= 0) vol.count[s] = vol.arc_mass[s] + vol.node_mass[s];
  }
  return vol;
}

/// Each vertex contributes one to its superparent; supernodes to the superarc
/// they are the outer end of; the root to none.
inline VolumeAnnotation superarc_counts(const ContourTree& ct) {
  if (!ct.augmented()) throw UsageError("superarc_counts requires an augmented contour tree");
  const std::size_t t = ct.supernode_count();
  std::vector<std::int64_t> node_mass(t, 1);
  std::vector<std::int64_t> arc_mass(t, 0);
  std::vector<VertexKey> node_peak(t);
  std::vector<VertexKey> arc_peak(t);
  for (std::size_t s = 0; s < t; ++s) node_peak[s] = ct.node_key(static_cast<int>(s));
  for (std::size_t v = 0; v < ct.vertex_count(); ++v) {
    if (ct.supernode_index[v] >= 0) continue;
    const auto s = static_cast<std::size_t>(ct.superparent[v]);
    ++arc_mass[s];
    arc_peak[s] = max_key(arc_peak[s], ct.key(static_cast<int>(v)));
  }
  return annotate_masses(ct, std::move(node_mass), std::move(arc_mass), std::move(node_peak),
                         std::move(arc_peak));
}

/// Leafward aggregation of counts into subtree volumes, then a rootward pass for
/// the peak of each complement. Results do not depend on traversal order.
inline void hypersweep(const ContourTree& ct, VolumeAnnotation& vol) {
  const std::size_t t = ct.supernode_count();
  if (vol.count.size() != t) throw UsageError("volume annotation does not match the tree");
  const auto children = ct.children();

  std::vector<int> order;  // root first, parents before children
  order.reserve(t);
  order.push_back(ct.root);
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (int c : children[static_cast<std::size_t>(order[i])]) order.push_back(c);
  }

  vol.subtree.assign(t, 0);
  vol.outward.assign(t, 0);
  vol.inward.assign(t, 0);
  vol.subtree_peak.assign(t, VertexKey{});
  vol.outward_peak.assign(t, VertexKey{});
  vol.complement_peak.assign(t, VertexKey{});
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const auto s = static_cast<std::size_t>(*it);
    vol.subtree[s] = vol.node_mass[s];
    vol.subtree_peak[s] = vol.node_peak[s];
    for (int c : children[s]) {
      vol.subtree[s] += vol.outward[static_cast<std::size_t>(c)];
      vol.subtree_peak[s] = max_key(vol.subtree_peak[s], vol.outward_peak[static_cast<std::size_t>(c)]);
    }
    if (ct.inner[s] >= 0) {
      vol.outward[s] = vol.subtree[s] + vol.arc_mass[s];
      vol.outward_peak[s] = max_key(vol.subtree_peak[s], vol.arc_peak[s]);
    }
  }
  for (std::size_t s = 0; s < t; ++s) {
    vol.inward[s] = ct.inner[s] >= 0 ? vol.total - vol.outward[s] : vol.total;
  }
  for (int sv : order) {
    const auto s = static_cast<std::size_t>(sv);
    const auto& kids = children[s];
    // Two largest child peaks, so each child can exclude itself.
    VertexKey first{};
    VertexKey second{};
    int first_child = -1;
    for (int c : kids) {
      const auto& p = vol.outward_peak[static_cast<std::size_t>(c)];
      if (first < p) {
        second = first;
        first = p;
        first_child = c;
      } else if (second < p) {
        second = p;
      }
    }
    const VertexKey around = max_key(vol.complement_peak[s], vol.node_peak[s]);
    for (int c : kids) {
      const VertexKey siblings = c == first_child ? second : first;
      vol.complement_peak[static_cast<std::size_t>(c)] =
          max_key(max_key(around, siblings), vol.arc_peak[static_cast<std::size_t>(c)]);
    }
  }
}

inline VolumeAnnotation compute_volumes(const ContourTree& ct) {
  auto vol = superarc_counts(ct);
  hypersweep(ct, vol);
  return vol;
}

// ---------------------------------------------------------------------------
// Branch decomposition

inline constexpr VertexId kTrunk = -1;

struct Branch {
  VertexId id = kTrunk;  // saddle vertex id, kTrunk for the trunk
  int saddle_node = -1;
  int saddle_arc = -1;  // superarc of this branch ending at the saddle
  VertexId outer_leaf = kNoVertex;
  int leaf_node = -1;
  std::int64_t volume = 0;
  std::optional<VertexId> parent;  // empty for the trunk
  int parent_index = -1;
  double saddle_value = 0.0;
  double leaf_value = 0.0;

  bool is_trunk() const { return id == kTrunk; }
};

struct BranchDecomposition {
  std::vector<Branch> branches;     // trunk first, then volume descending, saddle key ascending
  std::vector<int> branch_of_arc;   // per superarc (outer supernode index); -1 at the root
  int trunk = 0;
};

/// Best up and best down superarc at each supernode (-1 when none).
struct BestArcs {
  std::vector<int> up;
  std::vector<int> down;
};

/// Candidate ordering: larger far-side volume wins, then the higher far-side peak.
struct ArcScore {
  std::int64_t volume = -1;
  VertexKey peak{};

  friend bool operator<(const ArcScore& a, const ArcScore& b) {
    return a.volume < b.volume || (a.volume == b.volume && a.peak < b.peak);
  }
};

template <class Fn>
void for_each_incident_arc(const ContourTree& ct, const std::vector<std::vector<int>>& children, int x, Fn&& fn) {
  if (ct.inner[static_cast<std::size_t>(x)] >= 0) fn(x, ct.inner[static_cast<std::size_t>(x)]);
  for (int c : children[static_cast<std::size_t>(x)]) fn(c, c);
}

inline BestArcs best_arcs(const ContourTree& ct, const VolumeAnnotation& vol) {
  if (!vol.swept()) throw UsageError("best_arcs requires hypersweep volumes");
  const std::size_t t = ct.supernode_count();
  const auto children = ct.children();
  BestArcs best{std::vector<int>(t, -1), std::vector<int>(t, -1)};
  for (std::size_t xs = 0; xs < t; ++xs) {
    const int x = static_cast<int>(xs);
    ArcScore best_up;
    ArcScore best_down;
    for_each_incident_arc(ct, children, x, [&](int arc, int neighbour) {
      const ArcScore score{vol.volume_from(ct, x, arc), vol.peak_from(ct, x, arc)};
      const bool up = ct.node_key(x) < ct.node_key(neighbour);
      if (up && best_up < score) {
        best_up = score;
        best.up[xs] = arc;
      } else if (!up && best_down < score) {
        best_down = score;
        best.down[xs] = arc;
      }
    });
  }
  return best;
}

/// Chains arcs that are simultaneously the best up- and best down-arc at a
/// shared supernode. A branch's saddle is the end where its arc is not the best
/// in its direction; the trunk is the one branch without such an end.
inline BranchDecomposition branch_decomposition(const ContourTree& ct, const VolumeAnnotation& vol,
                                                const BestArcs& best) {
  const std::size_t t = ct.supernode_count();
  BranchDecomposition bd;
  bd.branch_of_arc.assign(t, -1);
  if (t <= 1) {
    Branch trunk;
    trunk.volume = vol.total;
    if (t == 1) {
      trunk.outer_leaf = ct.node_id(0);
      trunk.leaf_node = 0;
      trunk.leaf_value = ct.node_value(0);
    }
    bd.branches.push_back(trunk);
    return bd;
  }

  auto is_up = [&](int at, int arc) {
    const int other = at == arc ? ct.inner[static_cast<std::size_t>(arc)] : arc;
    return ct.node_key(at) < ct.node_key(other);
  };
  auto is_best = [&](int at, int arc) {
    return (is_up(at, arc) ? best.up : best.down)[static_cast<std::size_t>(at)] == arc;
  };
  auto linked = [&](int at, int arc) {
    const auto a = static_cast<std::size_t>(at);
    return best.up[a] >= 0 && best.down[a] >= 0 && (best.up[a] == arc || best.down[a] == arc);
  };

  UnionFind chains(t);
  for (std::size_t x = 0; x < t; ++x) {
    if (best.up[x] >= 0 && best.down[x] >= 0) {
      chains.unite(static_cast<std::size_t>(best.up[x]), static_cast<std::size_t>(best.down[x]));
    }
  }

  struct Ends {
    std::vector<std::pair<int, int>> open;  // (supernode, arc) where the chain stops
  };
  std::vector<int> group_of(t, -1);
  std::vector<Ends> groups;
  for (std::size_t a = 0; a < t; ++a) {
    if (ct.inner[a] < 0) continue;
    const auto r = chains.find(a);
    if (group_of[r] < 0) {
      group_of[r] = static_cast<int>(groups.size());
      groups.emplace_back();
    }
    auto& g = groups[static_cast<std::size_t>(group_of[r])];
    const int arc = static_cast<int>(a);
    for (int end : {arc, ct.inner[a]}) {
      if (!linked(end, arc)) g.open.emplace_back(end, arc);
    }
  }

  std::vector<Branch> branches;
  std::vector<int> saddle_arc;  // per branch: arc at the saddle (direction for parent lookup)
  int trunk_count = 0;
  for (const auto& g : groups) {
    if (g.open.size() != 2) throw InternalError("branch chain does not have exactly two ends");
    int saddle_slot = -1;
    for (int i = 0; i < 2; ++i) {
      if (!is_best(g.open[static_cast<std::size_t>(i)].first, g.open[static_cast<std::size_t>(i)].second)) {
        if (saddle_slot >= 0) throw InternalError("branch chain with two attachment saddles");
        saddle_slot = i;
      }
    }
    Branch b;
    if (saddle_slot < 0) {
      ++trunk_count;
      b.volume = vol.total;
      // Report the higher-keyed end as the trunk's leaf.
      const auto& e0 = g.open[0];
      const auto& e1 = g.open[1];
      b.leaf_node = (ct.node_key(e0.first) < ct.node_key(e1.first) ? e1 : e0).first;
      saddle_arc.push_back(-1);
    } else {
      const auto& s = g.open[static_cast<std::size_t>(saddle_slot)];
      const auto& leaf = g.open[static_cast<std::size_t>(1 - saddle_slot)];
      b.saddle_node = s.first;
      b.id = ct.node_id(s.first);
      b.saddle_value = ct.node_value(s.first);
      b.volume = vol.volume_from(ct, s.first, s.second);
      b.leaf_node = leaf.first;
      b.saddle_arc = s.second;
      saddle_arc.push_back(s.second);
    }
    b.outer_leaf = ct.node_id(b.leaf_node);
    b.leaf_value = ct.node_value(b.leaf_node);
    branches.push_back(b);
  }
  if (trunk_count != 1) {
    throw InternalError("branch decomposition found " + std::to_string(trunk_count) + " trunks");
  }

  // Parent: branch holding the best arc at the saddle in the child's direction.
  std::vector<int> group_parent(branches.size(), -1);
  for (std::size_t i = 0; i < branches.size(); ++i) {
    if (branches[i].is_trunk()) continue;
    const int x = branches[i].saddle_node;
    const int arc = saddle_arc[i];
    const int through = (is_up(x, arc) ? best.up : best.down)[static_cast<std::size_t>(x)];
    group_parent[i] = group_of[chains.find(static_cast<std::size_t>(through))];
  }

  std::vector<int> order(branches.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& ba = branches[static_cast<std::size_t>(a)];
    const auto& bb = branches[static_cast<std::size_t>(b)];
    if (ba.is_trunk() != bb.is_trunk()) return ba.is_trunk();
    if (ba.volume != bb.volume) return ba.volume > bb.volume;
    return ct.node_key(ba.saddle_node) < ct.node_key(bb.saddle_node);
  });
  std::vector<int> position(branches.size());
  for (std::size_t i = 0; i < order.size(); ++i) position[static_cast<std::size_t>(order[i])] = static_cast<int>(i);

  bd.branches.reserve(branches.size());
  for (int g : order) {
    Branch b = branches[static_cast<std::size_t>(g)];
    const int p = group_parent[static_cast<std::size_t>(g)];
    if (p >= 0) {
      b.parent_index = position[static_cast<std::size_t>(p)];
      b.parent = branches[static_cast<std::size_t>(p)].id;
    }
    bd.branches.push_back(b);
  }
  for (std::size_t a = 0; a < t; ++a) {
    if (ct.inner[a] >= 0) bd.branch_of_arc[a] = position[static_cast<std::size_t>(group_of[chains.find(a)])];
  }
  bd.trunk = 0;
  return bd;
}

inline BranchDecomposition branch_decomposition(const ContourTree& ct, const VolumeAnnotation& vol) {
  return branch_decomposition(ct, vol, best_arcs(ct, vol));
}

// ---------------------------------------------------------------------------
// Simplification

struct BranchSelection {
  std::vector<Branch> branches;
  std::int64_t smallest_volume = 0;  // volume of the last retained branch
  bool warning = false;
  std::string message;
};

/// Top-b branches by (volume desc, saddle key asc); the trunk counts toward b.
inline BranchSelection select_top_branches(const BranchDecomposition& bd, std::size_t b) {
  if (b == 0) throw UsageError("number of branches to keep must be at least 1");
  BranchSelection sel;
  const std::size_t keep = std::min(b, bd.branches.size());
  sel.branches.assign(bd.branches.begin(), bd.branches.begin() + static_cast<std::ptrdiff_t>(keep));
  sel.smallest_volume = sel.branches.empty() ? 0 : sel.branches.back().volume;
  return sel;
}

/// All branches with volume strictly above the threshold, plus the trunk.
inline BranchSelection select_above_threshold(const BranchDecomposition& bd, std::int64_t threshold) {
  if (threshold < 0) throw UsageError("volume threshold must be non-negative");
  BranchSelection sel;
  for (const auto& b : bd.branches) {
    if (b.is_trunk() || b.volume > threshold) sel.branches.push_back(b);
  }
  sel.smallest_volume = sel.branches.empty() ? 0 : sel.branches.back().volume;
  return sel;
}

/// CSV: branch_id,saddle_value,outer_leaf,leaf_value,volume,parent
inline void write_branch_csv(std::ostream& os, const std::vector<Branch>& branches) {
  os << "branch_id,saddle_value,outer_leaf,leaf_value,volume,parent\n";
  for (const auto& b : branches) {
    os << b.id << ',' << (b.is_trunk() ? std::string{} : format_value(b.saddle_value)) << ','
       << b.outer_leaf << ',' << format_value(b.leaf_value) << ',' << b.volume << ',';
    if (b.parent) os << *b.parent;
    os << '\n';
  }
}

}  // namespace ctree
