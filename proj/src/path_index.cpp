#include "gnnpe/path_index.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace gnnpe {

bool dominates(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dominates: dimension mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
  }
  return true;
}

double l1_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += std::abs(v);
  return s;
}

PathRecord make_path_record(const TrainedEmbedder& t, const Graph& g, const Path& p,
                            std::size_t partition) {
  PathRecord r;
  r.path = p;
  r.partition = partition;
  r.auxiliary.resize(t.auxiliary.size());
  for (VertexId v : p.vertices) {
    auto e = node_embedding(t, g, v, 0);
    r.primary.insert(r.primary.end(), e.begin(), e.end());
    for (std::size_t i = 0; i < t.auxiliary.size(); ++i) {
      auto a = node_embedding(t, g, v, i + 1);
      r.auxiliary[i].insert(r.auxiliary[i].end(), a.begin(), a.end());
    }
    auto l = label_embedding(t, g.label(v));
    if (!l) throw GraphError("path vertex label missing from the label table");
    r.label.insert(r.label.end(), l->begin(), l->end());
  }
  return r;
}

QueryPathRecord make_query_record(const TrainedEmbedder& t, const Graph& q,
                                  std::span<const VertexId> query_path) {
  QueryPathRecord r;
  r.query_vertices.assign(query_path.begin(), query_path.end());
  r.auxiliary.resize(t.auxiliary.size());
  const std::size_t d = t.config.embedding_dim;
  for (VertexId u : query_path) {
    const Label lu = q.label(u);
    auto l = label_embedding(t, lu);
    if (!l || lu > t.label_domain) {
      r.matchable = false;
      r.label.insert(r.label.end(), d, 0.0);
      r.primary.insert(r.primary.end(), d, 0.0);
      for (auto& a : r.auxiliary) a.insert(a.end(), d, 0.0);
      continue;
    }
    r.label.insert(r.label.end(), l->begin(), l->end());
    std::vector<Label> nbr;
    bool known = true;
    for (VertexId w : q.neighbors(u)) {
      if (q.label(w) < 1 || q.label(w) > t.label_domain) known = false;
      nbr.push_back(q.label(w));
    }
    if (!known) {
      // A neighbor label the partition has never seen: no data vertex can
      // carry it, so the star cannot be contained anywhere here.
      r.matchable = false;
      r.primary.insert(r.primary.end(), d, 0.0);
      for (auto& a : r.auxiliary) a.insert(a.end(), d, 0.0);
      continue;
    }
    auto e = embed_with(t, 0, lu, nbr);
    r.primary.insert(r.primary.end(), e.begin(), e.end());
    for (std::size_t i = 0; i < t.auxiliary.size(); ++i) {
      auto a = embed_with(t, i + 1, lu, nbr);
      r.auxiliary[i].insert(r.auxiliary[i].end(), a.begin(), a.end());
    }
  }
  return r;
}

bool record_survives(const PathRecord& r, const QueryPathRecord& q) {
  if (!q.matchable) return false;
  if (r.label != q.label) return false;
  if (!dominates(q.primary, r.primary)) return false;
  for (std::size_t i = 0; i < q.auxiliary.size(); ++i) {
    if (!dominates(q.auxiliary[i], r.auxiliary.at(i))) return false;
  }
  return true;
}

std::vector<std::uint32_t> linear_scan_candidates(std::span<const PathRecord> records,
                                                  const QueryPathRecord& q) {
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (record_survives(records[i], q)) out.push_back(static_cast<std::uint32_t>(i));
  }
  return out;
}

std::vector<std::vector<std::uint32_t>> linear_scan_serial(std::span<const PathRecord> records,
                                                           std::span<const QueryPathRecord> qs) {
  std::vector<std::vector<std::uint32_t>> out;
  out.reserve(qs.size());
  for (const auto& q : qs) out.push_back(linear_scan_candidates(records, q));
  return out;
}

std::vector<std::vector<std::uint32_t>> linear_scan_parallel(std::span<const PathRecord> records,
                                                             std::span<const QueryPathRecord> qs) {
  const auto n = static_cast<std::ptrdiff_t>(records.size());
  std::vector<std::vector<char>> hit(qs.size(), std::vector<char>(records.size(), 0));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto ri = static_cast<std::size_t>(i);
    for (std::size_t j = 0; j < qs.size(); ++j) hit[j][ri] = record_survives(records[ri], qs[j]);
  }
  std::vector<std::vector<std::uint32_t>> out(qs.size());
  for (std::size_t j = 0; j < qs.size(); ++j) {
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (hit[j][i]) out[j].push_back(static_cast<std::uint32_t>(i));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void extend(Box& b, const Box& o) {
  if (b.lo.empty()) {
    b = o;
    return;
  }
  for (std::size_t i = 0; i < b.lo.size(); ++i) {
    b.lo[i] = std::min(b.lo[i], o.lo[i]);
    b.hi[i] = std::max(b.hi[i], o.hi[i]);
  }
}

// Geometry below only looks at the first `dim` coordinates (the primary block).
double area(const Box& b, std::size_t dim) {
  double a = 1.0;
  for (std::size_t i = 0; i < dim; ++i) a *= b.hi[i] - b.lo[i];
  return a;
}

double margin(const Box& b, std::size_t dim) {
  double m = 0.0;
  for (std::size_t i = 0; i < dim; ++i) m += b.hi[i] - b.lo[i];
  return m;
}

double union_area(const Box& a, const Box& b, std::size_t dim) {
  double r = 1.0;
  for (std::size_t i = 0; i < dim; ++i) {
    r *= std::max(a.hi[i], b.hi[i]) - std::min(a.lo[i], b.lo[i]);
  }
  return r;
}

double overlap(const Box& a, const Box& b, std::size_t dim) {
  double r = 1.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double w = std::min(a.hi[i], b.hi[i]) - std::max(a.lo[i], b.lo[i]);
    if (w <= 0.0) return 0.0;
    r *= w;
  }
  return r;
}

double overlap_with_union(const Box& a, const Box& add, const Box& b, std::size_t dim) {
  double r = 1.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double lo = std::min(a.lo[i], add.lo[i]), hi = std::max(a.hi[i], add.hi[i]);
    const double w = std::min(hi, b.hi[i]) - std::max(lo, b.lo[i]);
    if (w <= 0.0) return 0.0;
    r *= w;
  }
  return r;
}

double primary_max_l1(const Box& b, std::size_t dim) {
  return l1_norm(std::span<const double>(b.hi).first(dim));
}

bool box_equal(const Box& a, const Box& b) { return a.lo == b.lo && a.hi == b.hi; }

}  // namespace

ARTree::ARTree(std::size_t block_dim, std::size_t auxiliary, IndexParams params)
    : block_(block_dim), aux_(auxiliary), total_((2 + auxiliary) * block_dim), params_(params) {
  if (block_dim == 0) throw std::invalid_argument("aR-tree: zero block dimension");
  if (params_.max_fanout < 4) throw std::invalid_argument("aR-tree: fanout must be at least 4");
  if (!(params_.min_fill > 0.0 && params_.min_fill <= 0.5)) {
    throw std::invalid_argument("aR-tree: min_fill must lie in (0, 0.5]");
  }
  if (!(params_.reinsert_fraction >= 0.0 && params_.reinsert_fraction < 1.0)) {
    throw std::invalid_argument("aR-tree: reinsert_fraction must lie in [0, 1)");
  }
  min_entries_ = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::floor(params_.min_fill * static_cast<double>(params_.max_fanout))));
  min_entries_ = std::min(min_entries_, params_.max_fanout / 2);
  nodes_.push_back(Node{0, {}});
  root_ = 0;
}

ARTree ARTree::build(std::vector<PathRecord> records, IndexParams params) {
  if (records.empty()) return ARTree(1, 0, params);
  ARTree t(records.front().primary.size(), records.front().auxiliary.size(), params);
  for (auto& r : records) t.insert(std::move(r));
  return t;
}

Box ARTree::point_box(const PathRecord& r) const {
  Box b;
  b.lo.reserve(total_);
  b.lo.insert(b.lo.end(), r.primary.begin(), r.primary.end());
  for (const auto& a : r.auxiliary) b.lo.insert(b.lo.end(), a.begin(), a.end());
  b.lo.insert(b.lo.end(), r.label.begin(), r.label.end());
  b.hi = b.lo;
  return b;
}

Box ARTree::bound(std::uint32_t node) const {
  Box b;
  for (const auto& e : nodes_[node].entries) extend(b, e.box);
  return b;
}

std::vector<std::pair<std::uint32_t, std::size_t>> ARTree::choose_path(const Box& box,
                                                                       std::uint32_t level) const {
  // (node, index of the entry taken in that node); the last pair has no entry.
  std::vector<std::pair<std::uint32_t, std::size_t>> path;
  std::uint32_t n = root_;
  constexpr std::size_t kOverlapCandidates = 32;
  while (nodes_[n].level > level) {
    const auto& es = nodes_[n].entries;
    std::size_t best = 0;
    if (nodes_[n].level == 1) {
      // Children are leaves: least overlap enlargement, among the entries
      // with the smallest area enlargement.
      std::vector<std::size_t> order(es.size());
      std::iota(order.begin(), order.end(), 0);
      std::vector<double> enlarge(es.size());
      for (std::size_t i = 0; i < es.size(); ++i) {
        enlarge[i] = union_area(es[i].box, box, block_) - area(es[i].box, block_);
      }
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return enlarge[a] < enlarge[b]; });
      const std::size_t k = std::min(order.size(), kOverlapCandidates);
      double best_ov = std::numeric_limits<double>::infinity();
      double best_en = best_ov, best_ar = best_ov;
      for (std::size_t c = 0; c < k; ++c) {
        const std::size_t i = order[c];
        double ov = 0.0;
        for (std::size_t j = 0; j < es.size(); ++j) {
          if (j == i) continue;
          ov += overlap_with_union(es[i].box, box, es[j].box, block_) -
                overlap(es[i].box, es[j].box, block_);
        }
        const double ar = area(es[i].box, block_);
        if (ov < best_ov || (ov == best_ov && (enlarge[i] < best_en ||
                                               (enlarge[i] == best_en && ar < best_ar)))) {
          best = i;
          best_ov = ov;
          best_en = enlarge[i];
          best_ar = ar;
        }
      }
    } else {
      double best_en = std::numeric_limits<double>::infinity(), best_ar = best_en;
      for (std::size_t i = 0; i < es.size(); ++i) {
        const double ar = area(es[i].box, block_);
        const double en = union_area(es[i].box, box, block_) - ar;
        if (en < best_en || (en == best_en && ar < best_ar)) {
          best = i;
          best_en = en;
          best_ar = ar;
        }
      }
    }
    path.emplace_back(n, best);
    n = es[best].child;
  }
  path.emplace_back(n, 0);
  return path;
}

std::uint32_t ARTree::split(std::uint32_t node) {
  auto entries = std::move(nodes_[node].entries);
  const std::size_t total = entries.size();
  const std::size_t m = min_entries_;
  const std::size_t dists = total - 2 * m + 1;

  auto sorted_by = [&](std::size_t axis, bool by_upper) {
    std::vector<std::size_t> idx(total);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      const auto& A = entries[a].box;
      const auto& B = entries[b].box;
      if (by_upper) {
        if (A.hi[axis] != B.hi[axis]) return A.hi[axis] < B.hi[axis];
        return A.lo[axis] < B.lo[axis];
      }
      if (A.lo[axis] != B.lo[axis]) return A.lo[axis] < B.lo[axis];
      return A.hi[axis] < B.hi[axis];
    });
    return idx;
  };
  // Prefix and suffix bounds of one ordering; groups are [0, m+k) and the rest.
  auto bounds = [&](const std::vector<std::size_t>& idx, std::vector<Box>& pre,
                    std::vector<Box>& suf) {
    pre.assign(total, Box{});
    suf.assign(total, Box{});
    Box acc;
    for (std::size_t i = 0; i < total; ++i) {
      extend(acc, entries[idx[i]].box);
      pre[i] = acc;
    }
    acc = Box{};
    for (std::size_t i = total; i-- > 0;) {
      extend(acc, entries[idx[i]].box);
      suf[i] = acc;
    }
  };

  std::size_t best_axis = 0;
  double best_s = std::numeric_limits<double>::infinity();
  std::vector<Box> pre, suf;
  for (std::size_t axis = 0; axis < block_; ++axis) {
    double s = 0.0;
    for (bool upper : {false, true}) {
      bounds(sorted_by(axis, upper), pre, suf);
      for (std::size_t k = 0; k < dists; ++k) {
        s += margin(pre[m + k - 1], block_) + margin(suf[m + k], block_);
      }
    }
    if (s < best_s) {
      best_s = s;
      best_axis = axis;
    }
  }

  std::vector<std::size_t> best_idx;
  std::size_t best_cut = m;
  double best_ov = std::numeric_limits<double>::infinity(), best_ar = best_ov;
  for (bool upper : {false, true}) {
    auto idx = sorted_by(best_axis, upper);
    bounds(idx, pre, suf);
    for (std::size_t k = 0; k < dists; ++k) {
      const std::size_t cut = m + k;
      const double ov = overlap(pre[cut - 1], suf[cut], block_);
      const double ar = area(pre[cut - 1], block_) + area(suf[cut], block_);
      if (ov < best_ov || (ov == best_ov && ar < best_ar)) {
        best_ov = ov;
        best_ar = ar;
        best_cut = cut;
        best_idx = idx;
      }
    }
  }

  Node second{nodes_[node].level, {}};
  for (std::size_t i = 0; i < total; ++i) {
    auto& dst = i < best_cut ? nodes_[node].entries : second.entries;
    dst.push_back(std::move(entries[best_idx[i]]));
  }
  nodes_.push_back(std::move(second));
  return static_cast<std::uint32_t>(nodes_.size() - 1);
}

void ARTree::insert_entry(Entry e, std::uint32_t level, std::vector<char>& reinserted,
                          std::vector<std::pair<Entry, std::uint32_t>>& pending) {
  auto path = choose_path(e.box, level);
  nodes_[path.back().first].entries.push_back(std::move(e));
  const std::size_t M = params_.max_fanout;

  for (std::size_t i = path.size(); i-- > 0;) {
    const std::uint32_t n = path[i].first;
    if (nodes_[n].entries.size() > M) {
      const std::uint32_t lvl = nodes_[n].level;
      const std::size_t p = static_cast<std::size_t>(
          std::lround(params_.reinsert_fraction * static_cast<double>(M)));
      if (n != root_ && !reinserted[lvl] && p > 0) {
        reinserted[lvl] = 1;
        const Box nb = bound(n);
        std::vector<double> center(block_);
        for (std::size_t a = 0; a < block_; ++a) center[a] = 0.5 * (nb.lo[a] + nb.hi[a]);
        auto& es = nodes_[n].entries;
        std::vector<std::pair<double, std::size_t>> dist(es.size());
        for (std::size_t j = 0; j < es.size(); ++j) {
          double s = 0.0;
          for (std::size_t a = 0; a < block_; ++a) {
            const double c = 0.5 * (es[j].box.lo[a] + es[j].box.hi[a]) - center[a];
            s += c * c;
          }
          dist[j] = {s, j};
        }
        // Farthest p leave; they re-enter closest first.
        std::stable_sort(dist.begin(), dist.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        std::vector<char> out(es.size(), 0);
        for (std::size_t j = 0; j < p; ++j) out[dist[j].second] = 1;
        std::vector<Entry> keep;
        for (std::size_t j = 0; j < es.size(); ++j) {
          if (!out[j]) keep.push_back(std::move(es[j]));
        }
        for (std::size_t j = p; j-- > 0;) {
          pending.emplace_back(std::move(es[dist[j].second]), lvl);
        }
        es = std::move(keep);
      } else {
        const std::uint32_t fresh = split(n);
        if (n == root_) {
          Node r{nodes_[n].level + 1, {}};
          r.entries.push_back(Entry{bound(n), n});
          r.entries.push_back(Entry{bound(fresh), fresh});
          nodes_.push_back(std::move(r));
          root_ = static_cast<std::uint32_t>(nodes_.size() - 1);
          reinserted.push_back(0);
        } else {
          nodes_[path[i - 1].first].entries.push_back(Entry{bound(fresh), fresh});
        }
      }
    }
    if (i > 0) {
      nodes_[path[i - 1].first].entries[path[i - 1].second].box = bound(n);
    }
  }
}

void ARTree::insert(PathRecord record) {
  if (record.primary.size() != block_ || record.label.size() != block_ ||
      record.auxiliary.size() != aux_) {
    throw std::invalid_argument("aR-tree: record shape does not match the tree");
  }
  for (const auto& a : record.auxiliary) {
    if (a.size() != block_) throw std::invalid_argument("aR-tree: record shape does not match");
  }
  const auto id = static_cast<std::uint32_t>(records_.size());
  Entry e{point_box(record), id};
  records_.push_back(std::move(record));

  std::vector<char> reinserted(height(), 0);
  std::vector<std::pair<Entry, std::uint32_t>> pending;
  insert_entry(std::move(e), 0, reinserted, pending);
  while (!pending.empty()) {
    auto [entry, lvl] = std::move(pending.front());
    pending.erase(pending.begin());
    insert_entry(std::move(entry), lvl, reinserted, pending);
  }
}

std::string ARTree::audit() const {
  std::ostringstream err;
  std::vector<int> seen(records_.size(), 0);
  std::vector<int> visited(nodes_.size(), 0);
  // Returns the exact bound of the subtree rooted at n.
  auto walk = [&](auto&& self, std::uint32_t n, bool is_root) -> Box {
    if (n >= nodes_.size()) {
      err << "dangling node " << n << "; ";
      return {};
    }
    if (visited[n]++) err << "node " << n << " reachable twice; ";
    const auto& node = nodes_[n];
    if (node.entries.size() > params_.max_fanout) err << "node " << n << " overflows; ";
    if (!is_root && node.entries.size() < min_entries_) err << "node " << n << " underfull; ";
    if (is_root && node.level > 0 && node.entries.size() < 2) err << "root has one child; ";
    Box b;
    for (const auto& e : node.entries) {
      Box exact;
      if (node.level == 0) {
        if (e.child >= records_.size()) {
          err << "bad record id " << e.child << "; ";
          continue;
        }
        ++seen[e.child];
        exact = point_box(records_[e.child]);
      } else {
        if (e.child < nodes_.size() && nodes_[e.child].level + 1 != node.level) {
          err << "level mismatch under node " << n << "; ";
        }
        exact = self(self, e.child, false);
      }
      if (!box_equal(exact, e.box)) err << "stale box in node " << n << "; ";
      extend(b, exact);
    }
    return b;
  };
  if (!nodes_.empty()) walk(walk, root_, true);
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (seen[i] != 1) {
      err << "record " << i << " indexed " << seen[i] << " times; ";
      break;
    }
  }
  return err.str();
}

std::vector<std::vector<std::uint32_t>> ARTree::traverse(std::span<const QueryPathRecord> queries,
                                                         TraversalStats* stats) const {
  std::vector<std::vector<std::uint32_t>> out(queries.size());
  if (records_.empty()) return out;
  TraversalStats local;
  std::vector<std::uint32_t> live;
  double min_q = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (!queries[i].matchable) continue;
    if (queries[i].primary.size() != block_) {
      throw std::invalid_argument("aR-tree: query shape does not match the tree");
    }
    live.push_back(static_cast<std::uint32_t>(i));
    min_q = std::min(min_q, l1_norm(queries[i].primary));
  }
  if (live.empty() || records_.empty()) {
    if (stats) *stats = local;
    return out;
  }

  const std::size_t label_off = (1 + aux_) * block_;
  auto box_may_hold = [&](const Box& b, const QueryPathRecord& q) {
    for (std::size_t t = 0; t < block_; ++t) {
      if (q.label[t] < b.lo[label_off + t] || q.label[t] > b.hi[label_off + t]) return false;
    }
    for (std::size_t t = 0; t < block_; ++t) {
      if (q.primary[t] > b.hi[t]) return false;
    }
    for (std::size_t a = 0; a < aux_; ++a) {
      for (std::size_t t = 0; t < block_; ++t) {
        if (q.auxiliary[a][t] > b.hi[(1 + a) * block_ + t]) return false;
      }
    }
    return true;
  };

  struct Item {
    double key;
    std::uint32_t node;
    std::vector<std::uint32_t> queries;
  };
  auto cmp = [](const Item& a, const Item& b) {
    if (a.key != b.key) return a.key < b.key;
    return a.node > b.node;
  };
  std::priority_queue<Item, std::vector<Item>, decltype(cmp)> heap(cmp);
  heap.push(Item{primary_max_l1(bound(root_), block_), root_, live});

  while (!heap.empty()) {
    Item it = heap.top();
    heap.pop();
    // Keys are L1 norms of MBR upper corners, which only shrink going down;
    // a query needs o_q ⪯ upper corner, hence ‖o_q‖₁ <= key.
    if (it.key < min_q) break;
    ++local.nodes_visited;
    const auto& node = nodes_[it.node];
    if (node.level == 0) {
      for (const auto& e : node.entries) {
        for (std::uint32_t qi : it.queries) {
          ++local.records_compared;
          if (record_survives(records_[e.child], queries[qi])) out[qi].push_back(e.child);
        }
      }
      continue;
    }
    for (const auto& e : node.entries) {
      std::vector<std::uint32_t> sub;
      for (std::uint32_t qi : it.queries) {
        if (box_may_hold(e.box, queries[qi])) sub.push_back(qi);
      }
      if (!sub.empty()) heap.push(Item{primary_max_l1(e.box, block_), e.child, std::move(sub)});
    }
  }
  for (auto& c : out) std::sort(c.begin(), c.end());
  if (stats) *stats = local;
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void put_double(std::ostringstream& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out << ' ' << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
}

double get_double(std::istream& in) {
  std::string tok;
  if (!(in >> tok)) throw std::runtime_error("index file: truncated");
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw std::runtime_error("index file: bad number '" + tok + "'");
  }
  return v;
}

template <typename T>
T get(std::istream& in) {
  T v{};
  if (!(in >> v)) throw std::runtime_error("index file: truncated");
  return v;
}

void expect(std::istream& in, const char* word) {
  std::string tok;
  if (!(in >> tok) || tok != word) {
    throw std::runtime_error(std::string("index file: expected '") + word + "', got '" + tok + "'");
  }
}

}  // namespace

std::string ARTree::serialize(std::size_t partition, std::size_t length) const {
  std::ostringstream out;
  out << "gnnpe-index 1\n";
  out << "partition " << partition << " length " << length << " block " << block_
      << " auxiliary " << aux_ << " fanout " << params_.max_fanout << " min_fill";
  put_double(out, params_.min_fill);
  out << " reinsert";
  put_double(out, params_.reinsert_fraction);
  out << "\nrecords " << records_.size() << '\n';
  for (const auto& r : records_) {
    out << "r " << r.partition << ' ' << r.path.vertices.size();
    for (VertexId v : r.path.vertices) out << ' ' << v;
    for (double v : r.primary) put_double(out, v);
    for (const auto& a : r.auxiliary) {
      for (double v : a) put_double(out, v);
    }
    for (double v : r.label) put_double(out, v);
    out << '\n';
  }
  out << "nodes " << nodes_.size() << " root " << root_ << '\n';
  for (std::size_t n = 0; n < nodes_.size(); ++n) {
    out << "n " << nodes_[n].level << ' ' << nodes_[n].entries.size();
    for (const auto& e : nodes_[n].entries) out << ' ' << e.child;
    out << '\n';
  }
  return out.str();
}

ARTree ARTree::deserialize(const std::string& text) {
  std::istringstream in(text);
  expect(in, "gnnpe-index");
  if (get<int>(in) != 1) throw std::runtime_error("index file: unsupported version");
  expect(in, "partition");
  get<std::size_t>(in);
  expect(in, "length");
  get<std::size_t>(in);
  expect(in, "block");
  const auto block = get<std::size_t>(in);
  expect(in, "auxiliary");
  const auto aux = get<std::size_t>(in);
  IndexParams p;
  expect(in, "fanout");
  p.max_fanout = get<std::size_t>(in);
  expect(in, "min_fill");
  p.min_fill = get_double(in);
  expect(in, "reinsert");
  p.reinsert_fraction = get_double(in);
  ARTree t(std::max<std::size_t>(block, 1), aux, p);
  t.nodes_.clear();
  expect(in, "records");
  const auto nr = get<std::size_t>(in);
  t.records_.resize(nr);
  for (auto& r : t.records_) {
    expect(in, "r");
    r.partition = get<std::size_t>(in);
    r.path.vertices.resize(get<std::size_t>(in));
    for (auto& v : r.path.vertices) v = get<VertexId>(in);
    r.primary.resize(block);
    for (double& v : r.primary) v = get_double(in);
    r.auxiliary.assign(aux, Embedding(block));
    for (auto& a : r.auxiliary) {
      for (double& v : a) v = get_double(in);
    }
    r.label.resize(block);
    for (double& v : r.label) v = get_double(in);
  }
  expect(in, "nodes");
  const auto nn = get<std::size_t>(in);
  expect(in, "root");
  t.root_ = get<std::uint32_t>(in);
  if (nn == 0 || t.root_ >= nn) throw std::runtime_error("index file: bad root");
  t.nodes_.resize(nn);
  for (auto& node : t.nodes_) {
    expect(in, "n");
    node.level = get<std::uint32_t>(in);
    node.entries.resize(get<std::size_t>(in));
    for (auto& e : node.entries) e.child = get<std::uint32_t>(in);
  }
  // Boxes are not stored; rebuild them bottom-up from the records.
  std::vector<char> done(nn, 0);
  auto fill = [&](auto&& self, std::uint32_t n, std::size_t depth) -> void {
    if (n >= nn || depth > nn) throw std::runtime_error("index file: malformed node structure");
    if (done[n]) return;
    for (auto& e : t.nodes_[n].entries) {
      if (t.nodes_[n].level == 0) {
        if (e.child >= nr) throw std::runtime_error("index file: bad record id");
        e.box = t.point_box(t.records_[e.child]);
      } else {
        self(self, e.child, depth + 1);
        e.box = t.bound(e.child);
      }
    }
    done[n] = 1;
  };
  fill(fill, t.root_, 0);
  if (auto why = t.audit(); !why.empty()) throw std::runtime_error("index file: " + why);
  return t;
}

}  // namespace gnnpe
