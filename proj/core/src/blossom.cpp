#include "crossmatch/detail/blossom.hpp"

#include <algorithm>
#include <cassert>
#include <limits>

#include "crossmatch/error.hpp"

namespace crossmatch::detail {

namespace {

// Vertices are 0..n-1, non-trivial blossoms n..2n-1. An edge k has two
// endpoints 2k and 2k+1; endpoint p refers to vertex endpoint_[p], and p^1 is
// the opposite endpoint of the same edge.
class BlossomSolver {
 public:
  BlossomSolver(std::size_t n, std::span<const WeightedEdge> edges, bool max_cardinality,
                MatchingDuals* duals_out)
      : duals_out_(duals_out),
        n_(static_cast<int>(n)),
        m_(static_cast<int>(edges.size())),
        max_cardinality_(max_cardinality),
        edges_(edges) {
    std::int64_t max_weight = 0;
    for (const auto& e : edges) {
      if (e.u >= n || e.v >= n || e.u == e.v) throw UsageError("invalid edge in matching graph");
      max_weight = std::max(max_weight, e.weight);
    }
    endpoint_.resize(2 * static_cast<std::size_t>(m_));
    std::vector<int> degree(n_, 0);
    for (int k = 0; k < m_; ++k) {
      endpoint_[2 * k] = static_cast<int>(edges[k].u);
      endpoint_[2 * k + 1] = static_cast<int>(edges[k].v);
      ++degree[edges[k].u];
      ++degree[edges[k].v];
    }
    neighbor_start_.assign(n_ + 1, 0);
    for (int v = 0; v < n_; ++v) neighbor_start_[v + 1] = neighbor_start_[v] + degree[v];
    neighbend_.resize(neighbor_start_[n_]);
    std::vector<int> fill(neighbor_start_.begin(), neighbor_start_.end() - 1);
    for (int k = 0; k < m_; ++k) {
      neighbend_[fill[edges[k].u]++] = 2 * k + 1;
      neighbend_[fill[edges[k].v]++] = 2 * k;
    }

    const int nb = 2 * n_;
    mate_.assign(n_, -1);
    label_.assign(nb, 0);
    labelend_.assign(nb, -1);
    inblossom_.resize(n_);
    for (int v = 0; v < n_; ++v) inblossom_[v] = v;
    blossomparent_.assign(nb, -1);
    blossomchilds_.assign(nb, {});
    blossombase_.assign(nb, -1);
    for (int v = 0; v < n_; ++v) blossombase_[v] = v;
    blossomendps_.assign(nb, {});
    bestedge_.assign(nb, -1);
    blossombestedges_.assign(nb, {});
    has_bestedges_.assign(nb, 0);
    for (int b = nb - 1; b >= n_; --b) unused_.push_back(b);
    dualvar_.assign(nb, 0);
    for (int v = 0; v < n_; ++v) dualvar_[v] = max_weight;
    allowedge_.assign(m_, 0);
    bestedgeto_.assign(nb, -1);
    listed_.assign(nb, 0);
    listed_best_.assign(n_, 0);
  }

  std::vector<std::int64_t> solve() {
    for (int stage = 0; stage < n_; ++stage) {
      std::fill(label_.begin(), label_.end(), 0);
      std::fill(bestedge_.begin(), bestedge_.end(), -1);
      for (int b = n_; b < 2 * n_; ++b) {
        blossombestedges_[b].clear();
        has_bestedges_[b] = 0;
      }
      std::fill(allowedge_.begin(), allowedge_.end(), 0);
      queue_.clear();
      for (int x : stage_labeled_) listed_[x] = 0;
      stage_labeled_.clear();
      for (int x : stage_bestedge_) listed_best_[x] = 0;
      stage_bestedge_.clear();

      for (int v = 0; v < n_; ++v)
        if (mate_[v] == -1 && label_[inblossom_[v]] == 0) assign_label(v, 1, -1);

      bool augmented = false;
      while (true) {
        while (!queue_.empty() && !augmented) {
          const int v = queue_.back();
          queue_.pop_back();
          assert(label_[inblossom_[v]] == 1);
          for (int idx = neighbor_start_[v]; idx < neighbor_start_[v + 1]; ++idx) {
            const int p = neighbend_[idx];
            const int k = p / 2;
            const int w = endpoint_[p];
            if (inblossom_[v] == inblossom_[w]) continue;
            std::int64_t kslack = 0;
            if (!allowedge_[k]) {
              kslack = slack(k);
              if (kslack <= 0) allowedge_[k] = 1;
            }
            if (allowedge_[k]) {
              if (label_[inblossom_[w]] == 0) {
                assign_label(w, 2, p ^ 1);
              } else if (label_[inblossom_[w]] == 1) {
                const int base = scan_blossom(v, w);
                if (base >= 0) {
                  add_blossom(base, k);
                } else {
                  augment_matching(k);
                  augmented = true;
                  break;
                }
              } else if (label_[w] == 0) {
                label_[w] = 2;
                labelend_[w] = p ^ 1;
              }
            } else if (label_[inblossom_[w]] == 1) {
              const int b = inblossom_[v];
              if (bestedge_[b] == -1 || kslack < slack(bestedge_[b])) bestedge_[b] = k;
            } else if (label_[w] == 0) {
              if (bestedge_[w] == -1 || kslack < slack(bestedge_[w])) {
                bestedge_[w] = k;
                note_bestedge(w);
              }
            }
          }
        }
        if (augmented) break;

        int deltatype = -1;
        std::int64_t delta = 0;
        int deltaedge = -1;
        int deltablossom = -1;

        if (!max_cardinality_) {
          deltatype = 1;
          delta = *std::min_element(dualvar_.begin(), dualvar_.begin() + n_);
        }
        for (int v : stage_bestedge_) {
          if (label_[inblossom_[v]] == 0 && bestedge_[v] != -1) {
            const std::int64_t d = slack(bestedge_[v]);
            if (deltatype == -1 || d < delta) {
              delta = d;
              deltatype = 2;
              deltaedge = bestedge_[v];
            }
          }
        }
        // Only blossoms labelled during this stage can be S- or T-blossoms.
        for (int b : stage_labeled_) {
          if (blossomparent_[b] != -1) continue;
          if (label_[b] == 1 && bestedge_[b] != -1) {
            const std::int64_t kslack = slack(bestedge_[b]);
            assert(kslack % 2 == 0);
            const std::int64_t d = kslack / 2;
            if (deltatype == -1 || d < delta) {
              delta = d;
              deltatype = 3;
              deltaedge = bestedge_[b];
            }
          }
        }
        for (int b : stage_labeled_) {
          if (b >= n_ && blossombase_[b] >= 0 && blossomparent_[b] == -1 && label_[b] == 2 &&
              (deltatype == -1 || dualvar_[b] < delta)) {
            delta = dualvar_[b];
            deltatype = 4;
            deltablossom = b;
          }
        }
        if (deltatype == -1) {
          // No further improvement possible; optimum reached in max-cardinality mode.
          deltatype = 1;
          delta = std::max<std::int64_t>(0, *std::min_element(dualvar_.begin(), dualvar_.begin() + n_));
        }

        for (int b : stage_labeled_) {
          if (blossomparent_[b] != -1) continue;
          const int l = label_[b];
          if (l != 1 && l != 2) continue;
          const std::int64_t step = l == 1 ? -delta : delta;
          if (b < n_) {
            dualvar_[b] += step;
          } else {
            if (blossombase_[b] < 0) continue;
            leaves_scratch_.clear();
            blossom_leaves(b, leaves_scratch_);
            for (int v : leaves_scratch_) dualvar_[v] += step;
            dualvar_[b] -= step;
          }
        }

        if (deltatype == 1) {
          break;
        } else if (deltatype == 2) {
          allowedge_[deltaedge] = 1;
          int i = endpoint_[2 * deltaedge];
          int j = endpoint_[2 * deltaedge + 1];
          if (label_[inblossom_[i]] == 0) std::swap(i, j);
          assert(label_[inblossom_[i]] == 1);
          queue_.push_back(i);
        } else if (deltatype == 3) {
          allowedge_[deltaedge] = 1;
          const int i = endpoint_[2 * deltaedge];
          assert(label_[inblossom_[i]] == 1);
          queue_.push_back(i);
        } else {
          expand_blossom(deltablossom, false);
        }
      }

      if (!augmented) break;

      for (int b = n_; b < 2 * n_; ++b) {
        if (blossomparent_[b] == -1 && blossombase_[b] >= 0 && label_[b] == 1 && dualvar_[b] == 0)
          expand_blossom(b, true);
      }
    }

    if (duals_out_) {
      duals_out_->dual = dualvar_;
      duals_out_->parent = blossomparent_;
      for (int b = n_; b < 2 * n_; ++b)
        if (blossombase_[b] < 0) duals_out_->dual[b] = 0;
    }

    std::vector<std::int64_t> result(n_, -1);
    for (int v = 0; v < n_; ++v)
      if (mate_[v] >= 0) result[v] = endpoint_[mate_[v]];
    return result;
  }

 private:
  std::int64_t slack(int k) const {
    const auto& e = edges_[k];
    return dualvar_[e.u] + dualvar_[e.v] - 2 * e.weight;
  }

  void blossom_leaves(int b, std::vector<int>& out) const {
    if (b < n_) {
      out.push_back(b);
      return;
    }
    for (int c : blossomchilds_[b]) blossom_leaves(c, out);
  }

  void note_labeled(int x) {
    if (!listed_[x]) {
      listed_[x] = 1;
      stage_labeled_.push_back(x);
    }
  }

  void note_bestedge(int v) {
    if (!listed_best_[v]) {
      listed_best_[v] = 1;
      stage_bestedge_.push_back(v);
    }
  }

  std::vector<int> leaves_of(int b) const {
    std::vector<int> out;
    blossom_leaves(b, out);
    return out;
  }

  void assign_label(int w, int t, int p) {
    // Iterative form of the T-label -> S-label recursion through the mate.
    while (true) {
      const int b = inblossom_[w];
      assert(label_[w] == 0 && label_[b] == 0);
      label_[w] = label_[b] = t;
      labelend_[w] = labelend_[b] = p;
      bestedge_[w] = bestedge_[b] = -1;
      note_labeled(b);
      if (t == 1) {
        blossom_leaves(b, queue_);
        return;
      }
      const int base = blossombase_[b];
      assert(mate_[base] >= 0);
      const int mp = mate_[base];
      w = endpoint_[mp];
      t = 1;
      p = mp ^ 1;
    }
  }

  int scan_blossom(int v, int w) {
    std::vector<int> path;
    int base = -1;
    while (v != -1 || w != -1) {
      int b = inblossom_[v];
      if (label_[b] & 4) {
        base = blossombase_[b];
        break;
      }
      assert(label_[b] == 1);
      path.push_back(b);
      label_[b] = 5;
      if (labelend_[b] == -1) {
        v = -1;
      } else {
        v = endpoint_[labelend_[b]];
        b = inblossom_[v];
        assert(label_[b] == 2);
        v = endpoint_[labelend_[b]];
      }
      if (w != -1) std::swap(v, w);
    }
    for (int b : path) label_[b] = 1;
    return base;
  }

  void add_blossom(int base, int k) {
    int v = endpoint_[2 * k];
    int w = endpoint_[2 * k + 1];
    const int bb = inblossom_[base];
    int bv = inblossom_[v];
    int bw = inblossom_[w];
    const int b = unused_.back();
    unused_.pop_back();
    blossombase_[b] = base;
    blossomparent_[b] = -1;
    blossomparent_[bb] = b;
    auto& path = blossomchilds_[b];
    auto& endps = blossomendps_[b];
    path.clear();
    endps.clear();
    while (bv != bb) {
      blossomparent_[bv] = b;
      path.push_back(bv);
      endps.push_back(labelend_[bv]);
      v = endpoint_[labelend_[bv]];
      bv = inblossom_[v];
    }
    path.push_back(bb);
    std::reverse(path.begin(), path.end());
    std::reverse(endps.begin(), endps.end());
    endps.push_back(2 * k);
    while (bw != bb) {
      blossomparent_[bw] = b;
      path.push_back(bw);
      endps.push_back(labelend_[bw] ^ 1);
      w = endpoint_[labelend_[bw]];
      bw = inblossom_[w];
    }
    assert(label_[bb] == 1);
    label_[b] = 1;
    labelend_[b] = labelend_[bb];
    dualvar_[b] = 0;
    note_labeled(b);
    for (int leaf : leaves_of(b)) {
      if (label_[inblossom_[leaf]] == 2) queue_.push_back(leaf);
      inblossom_[leaf] = b;
    }

    // Compute the least-slack edge from the new blossom to each neighbouring S-blossom.
    std::vector<int> touched;
    auto consider = [&](int edge) {
      int i = endpoint_[2 * edge];
      int j = endpoint_[2 * edge + 1];
      if (inblossom_[j] == b) std::swap(i, j);
      const int bj = inblossom_[j];
      if (bj != b && label_[bj] == 1) {
        if (bestedgeto_[bj] == -1) {
          bestedgeto_[bj] = edge;
          touched.push_back(bj);
        } else if (slack(edge) < slack(bestedgeto_[bj])) {
          bestedgeto_[bj] = edge;
        }
      }
    };
    for (int sub : path) {
      if (!has_bestedges_[sub]) {
        for (int leaf : leaves_of(sub))
          for (int idx = neighbor_start_[leaf]; idx < neighbor_start_[leaf + 1]; ++idx)
            consider(neighbend_[idx] / 2);
      } else {
        for (int edge : blossombestedges_[sub]) consider(edge);
      }
      blossombestedges_[sub].clear();
      has_bestedges_[sub] = 0;
      bestedge_[sub] = -1;
    }
    std::sort(touched.begin(), touched.end());
    auto& best = blossombestedges_[b];
    best.clear();
    for (int bj : touched) {
      best.push_back(bestedgeto_[bj]);
      bestedgeto_[bj] = -1;
    }
    has_bestedges_[b] = 1;
    bestedge_[b] = -1;
    for (int edge : best)
      if (bestedge_[b] == -1 || slack(edge) < slack(bestedge_[b])) bestedge_[b] = edge;
  }

  void expand_blossom(int b, bool endstage) {
    for (int s : blossomchilds_[b]) {
      blossomparent_[s] = -1;
      if (s < n_) {
        inblossom_[s] = s;
      } else if (endstage && dualvar_[s] == 0) {
        expand_blossom(s, endstage);
      } else {
        for (int leaf : leaves_of(s)) inblossom_[leaf] = s;
      }
    }
    if (!endstage && label_[b] == 2) {
      const auto& childs = blossomchilds_[b];
      const auto& endps = blossomendps_[b];
      const int len = static_cast<int>(childs.size());
      auto at = [len](const std::vector<int>& vec, int idx) { return vec[((idx % len) + len) % len]; };

      const int entrychild = inblossom_[endpoint_[labelend_[b] ^ 1]];
      int j = static_cast<int>(std::find(childs.begin(), childs.end(), entrychild) - childs.begin());
      int jstep;
      int endptrick;
      if (j & 1) {
        j -= len;
        jstep = 1;
        endptrick = 0;
      } else {
        jstep = -1;
        endptrick = 1;
      }
      int p = labelend_[b];
      while (j != 0) {
        label_[endpoint_[p ^ 1]] = 0;
        label_[endpoint_[at(endps, j - endptrick) ^ endptrick ^ 1]] = 0;
        assign_label(endpoint_[p ^ 1], 2, p);
        allowedge_[at(endps, j - endptrick) / 2] = 1;
        j += jstep;
        p = at(endps, j - endptrick) ^ endptrick;
        allowedge_[p / 2] = 1;
        j += jstep;
      }
      int bv = at(childs, j);
      label_[endpoint_[p ^ 1]] = label_[bv] = 2;
      labelend_[endpoint_[p ^ 1]] = labelend_[bv] = p;
      bestedge_[bv] = -1;
      note_labeled(bv);
      j += jstep;
      while (at(childs, j) != entrychild) {
        bv = at(childs, j);
        if (label_[bv] == 1) {
          j += jstep;
          continue;
        }
        int found = -1;
        for (int leaf : leaves_of(bv)) {
          if (label_[leaf] != 0) {
            found = leaf;
            break;
          }
        }
        if (found != -1) {
          assert(label_[found] == 2);
          assert(inblossom_[found] == bv);
          label_[found] = 0;
          label_[endpoint_[mate_[blossombase_[bv]]]] = 0;
          assign_label(found, 2, labelend_[found]);
        }
        j += jstep;
      }
    }
    label_[b] = -1;
    labelend_[b] = -1;
    blossomchilds_[b].clear();
    blossomendps_[b].clear();
    blossombase_[b] = -1;
    blossombestedges_[b].clear();
    has_bestedges_[b] = 0;
    bestedge_[b] = -1;
    unused_.push_back(b);
  }

  void augment_blossom(int b, int v) {
    int t = v;
    while (blossomparent_[t] != b) t = blossomparent_[t];
    if (t >= n_) augment_blossom(t, v);
    auto& childs = blossomchilds_[b];
    auto& endps = blossomendps_[b];
    const int len = static_cast<int>(childs.size());
    auto at = [len](const std::vector<int>& vec, int idx) { return vec[((idx % len) + len) % len]; };

    const int i = static_cast<int>(std::find(childs.begin(), childs.end(), t) - childs.begin());
    int j = i;
    int jstep;
    int endptrick;
    if (i & 1) {
      j -= len;
      jstep = 1;
      endptrick = 0;
    } else {
      jstep = -1;
      endptrick = 1;
    }
    while (j != 0) {
      j += jstep;
      t = at(childs, j);
      const int p = at(endps, j - endptrick) ^ endptrick;
      if (t >= n_) augment_blossom(t, endpoint_[p]);
      j += jstep;
      t = at(childs, j);
      if (t >= n_) augment_blossom(t, endpoint_[p ^ 1]);
      mate_[endpoint_[p]] = p ^ 1;
      mate_[endpoint_[p ^ 1]] = p;
    }
    std::rotate(childs.begin(), childs.begin() + i, childs.end());
    std::rotate(endps.begin(), endps.begin() + i, endps.end());
    blossombase_[b] = blossombase_[childs[0]];
    assert(blossombase_[b] == v);
  }

  void augment_matching(int k) {
    const int v = endpoint_[2 * k];
    const int w = endpoint_[2 * k + 1];
    const std::pair<int, int> starts[2] = {{v, 2 * k + 1}, {w, 2 * k}};
    for (auto [s, p] : starts) {
      while (true) {
        const int bs = inblossom_[s];
        assert(label_[bs] == 1);
        if (bs >= n_) augment_blossom(bs, s);
        mate_[s] = p;
        if (labelend_[bs] == -1) break;
        const int t = endpoint_[labelend_[bs]];
        const int bt = inblossom_[t];
        assert(label_[bt] == 2);
        s = endpoint_[labelend_[bt]];
        const int j = endpoint_[labelend_[bt] ^ 1];
        assert(blossombase_[bt] == t);
        if (bt >= n_) augment_blossom(bt, j);
        mate_[j] = labelend_[bt];
        p = labelend_[bt] ^ 1;
      }
    }
  }

  MatchingDuals* duals_out_;
  int n_;
  int m_;
  bool max_cardinality_;
  std::span<const WeightedEdge> edges_;

  std::vector<int> endpoint_;
  std::vector<int> neighbor_start_;
  std::vector<int> neighbend_;
  std::vector<int> mate_;
  std::vector<int> label_;
  std::vector<int> labelend_;
  std::vector<int> inblossom_;
  std::vector<int> blossomparent_;
  std::vector<std::vector<int>> blossomchilds_;
  std::vector<int> blossombase_;
  std::vector<std::vector<int>> blossomendps_;
  std::vector<int> bestedge_;
  std::vector<std::vector<int>> blossombestedges_;
  std::vector<char> has_bestedges_;
  std::vector<int> unused_;
  std::vector<std::int64_t> dualvar_;
  std::vector<char> allowedge_;
  std::vector<int> queue_;
  std::vector<int> bestedgeto_;
  // Vertices/blossoms labelled, and vertices given a best edge, in the current stage.
  std::vector<int> stage_labeled_;
  std::vector<char> listed_;
  std::vector<int> stage_bestedge_;
  std::vector<char> listed_best_;
  std::vector<int> leaves_scratch_;
};

}  // namespace

std::int64_t MatchingDuals::reduced_cost(std::uint32_t i, std::uint32_t j, std::int64_t weight) const {
  std::int64_t slack = dual[i] + dual[j] - 2 * weight;
  int bi = parent[i];
  if (bi < 0 || parent[j] < 0) return slack;
  // Blossoms containing both endpoints: common ancestors in the nesting forest.
  for (; bi >= 0; bi = parent[bi]) {
    for (int bj = parent[j]; bj >= 0; bj = parent[bj]) {
      if (bj == bi) {
        for (int b = bi; b >= 0; b = parent[b]) slack += 2 * dual[b];
        return slack;
      }
    }
  }
  return slack;
}

std::vector<std::int64_t> max_weight_matching(std::size_t vertex_count,
                                              std::span<const WeightedEdge> edges,
                                              bool max_cardinality, MatchingDuals* duals) {
  if (vertex_count == 0) return {};
  if (vertex_count > static_cast<std::size_t>(std::numeric_limits<int>::max() / 2) ||
      edges.size() > static_cast<std::size_t>(std::numeric_limits<int>::max() / 2))
    throw UsageError("matching graph too large");
  BlossomSolver solver(vertex_count, edges, max_cardinality, duals);
  return solver.solve();
}

}  // namespace crossmatch::detail
