// Copyright (C) 2026 rigidtraj contributors
// SPDX-License-Identifier: Apache-2.0
//
#include "rigidtraj/moteval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace rigidtraj::mot {

namespace {

constexpr double kForbidden = 1e7;  // >> any admissible total distance

/// O(n^3) Hungarian algorithm (potentials / shortest augmenting path) on a
/// square cost matrix. Returns column assigned to each row.
std::vector<int> solve_square_assignment(const MatX& cost) {
  const int n = static_cast<int>(cost.rows());
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
    std::vector<char> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = std::numeric_limits<double>::infinity();
      int j1 = -1;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace

Assignment hungarian_match(const std::vector<Vec3>& gt,
                           const std::vector<Vec3>& pred, double threshold) {
  if (threshold <= 0.0) throw Error("hungarian_match: threshold must be > 0");
  Assignment out;
  const int ng = static_cast<int>(gt.size());
  const int np = static_cast<int>(pred.size());
  if (ng == 0 || np == 0) return out;

  const int n = std::max(ng, np);
  MatX cost = MatX::Constant(n, n, kForbidden);
  for (int i = 0; i < ng; ++i) {
    for (int j = 0; j < np; ++j) {
      const double d = (gt[i] - pred[j]).norm();
      if (d <= threshold) cost(i, j) = d;
    }
  }

  const auto row_to_col = solve_square_assignment(cost);
  for (int i = 0; i < ng; ++i) {
    const int j = row_to_col[i];
    if (j >= 0 && j < np && cost(i, j) < kForbidden) {
      out.pairs.emplace_back(i, j);
      out.total_distance += cost(i, j);
    }
  }
  return out;
}

double mota_from_counts(long objects, long fp, long fn, long switches) {
  if (objects <= 0) return std::numeric_limits<double>::quiet_NaN();
  return 1.0 - static_cast<double>(fp + fn + switches) /
                   static_cast<double>(objects);
}

namespace {

ThresholdMetrics evaluate_threshold(const std::vector<TrackFrame>& gt,
                                    const std::vector<const TrackFrame*>& pred,
                                    double threshold) {
  ThresholdMetrics m;
  m.threshold = threshold;
  m.frames = static_cast<long>(gt.size());

  std::map<int, int> last_partner;  // gt id -> most recent matched pred id
  std::map<int, int> active;        // correspondences carried frame to frame
  double distance_sum = 0.0;

  for (size_t f = 0; f < gt.size(); ++f) {
    const auto& gt_entries = gt[f].entries;
    std::vector<TrackEntry> pred_entries;
    if (pred[f] != nullptr) pred_entries = pred[f]->entries;

    m.objects += static_cast<long>(gt_entries.size());
    m.predictions += static_cast<long>(pred_entries.size());

    // Sorted copies make the result independent of entry order in the file.
    std::vector<TrackEntry> gts = gt_entries;
    std::sort(gts.begin(), gts.end(),
              [](const TrackEntry& a, const TrackEntry& b) {
                return a.track_id < b.track_id;
              });
    std::sort(pred_entries.begin(), pred_entries.end(),
              [](const TrackEntry& a, const TrackEntry& b) {
                return a.track_id < b.track_id;
              });
    std::unordered_map<int, const TrackEntry*> pred_by_id;
    for (const auto& e : pred_entries) pred_by_id[e.track_id] = &e;

    // Continuity: keep the previous partner while it stays in range.
    std::vector<std::tuple<int, int, double>> corr;  // gt id, pred id, dist
    std::unordered_set<int> used_pred;
    std::unordered_set<int> matched_gt;
    for (const auto& g : gts) {
      const auto it = active.find(g.track_id);
      if (it == active.end()) continue;
      const auto pit = pred_by_id.find(it->second);
      if (pit == pred_by_id.end()) continue;
      const double d = (g.position - pit->second->position).norm();
      if (d <= threshold) {
        corr.emplace_back(g.track_id, it->second, d);
        used_pred.insert(it->second);
        matched_gt.insert(g.track_id);
      }
    }

    // Hungarian assignment of the remainder.
    std::vector<const TrackEntry*> rem_gt, rem_pred;
    for (const auto& g : gts) {
      if (matched_gt.count(g.track_id) == 0) rem_gt.push_back(&g);
    }
    for (const auto& e : pred_entries) {
      if (used_pred.count(e.track_id) == 0) rem_pred.push_back(&e);
    }
    if (!rem_gt.empty() && !rem_pred.empty()) {
      std::vector<Vec3> pg, pp;
      for (const auto* e : rem_gt) pg.push_back(e->position);
      for (const auto* e : rem_pred) pp.push_back(e->position);
      const Assignment assign = hungarian_match(pg, pp, threshold);
      for (const auto& [i, j] : assign.pairs) {
        corr.emplace_back(rem_gt[i]->track_id, rem_pred[j]->track_id,
                          (pg[i] - pp[j]).norm());
      }
    }

    active.clear();
    for (const auto& [gid, pid, d] : corr) {
      const auto it = last_partner.find(gid);
      if (it != last_partner.end() && it->second != pid) m.switches += 1;
      last_partner[gid] = pid;
      active[gid] = pid;
      m.matches += 1;
      distance_sum += d;
    }
    m.false_positives +=
        static_cast<long>(pred_entries.size()) - static_cast<long>(corr.size());
    m.false_negatives +=
        static_cast<long>(gts.size()) - static_cast<long>(corr.size());
  }

  m.mota = mota_from_counts(m.objects, m.false_positives, m.false_negatives,
                            m.switches);
  m.motp = m.matches > 0 ? distance_sum / static_cast<double>(m.matches) : 0.0;
  m.recall = m.objects > 0
                 ? static_cast<double>(m.matches) / static_cast<double>(m.objects)
                 : 0.0;
  m.precision = m.predictions > 0 ? static_cast<double>(m.matches) /
                                        static_cast<double>(m.predictions)
                                  : 0.0;
  return m;
}

}  // namespace

TrackingReport evaluate(const std::vector<TrackFrame>& gt,
                        const std::vector<TrackFrame>& pred,
                        const std::vector<double>& thresholds) {
  // Align prediction frames to the ground-truth time grid.
  std::map<double, const TrackFrame*> pred_by_time;
  for (const auto& f : pred) pred_by_time[f.timestamp] = &f;
  std::unordered_set<const TrackFrame*> consumed;

  std::vector<const TrackFrame*> aligned(gt.size(), nullptr);
  for (size_t i = 0; i < gt.size(); ++i) {
    const auto it = pred_by_time.find(gt[i].timestamp);
    if (it != pred_by_time.end()) {
      aligned[i] = it->second;
      consumed.insert(it->second);
    }
  }
  for (const auto& f : pred) {
    if (consumed.count(&f) == 0 && !f.entries.empty()) {
      throw Error("evaluate: prediction timestamp not in ground truth");
    }
  }

  TrackingReport report;
  long total_objects = 0;
  for (const auto& f : gt) total_objects += static_cast<long>(f.entries.size());
  report.empty_ground_truth = total_objects == 0;

  for (double threshold : thresholds) {
    report.per_threshold.push_back(evaluate_threshold(gt, aligned, threshold));
  }
  return report;
}

}  // namespace rigidtraj::mot
