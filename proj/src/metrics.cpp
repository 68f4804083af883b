#include "obt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "obt/assignment.hpp"

namespace obt {

namespace {

// Views of one class's instances, frame by frame.
struct ClassView {
  std::vector<std::vector<const LabeledInstance*>> gt;
  std::vector<std::vector<const LabeledInstance*>> pred;
};

std::map<int, ClassView> split_by_class(const LabeledFrameSet& gt, const LabeledFrameSet& pred) {
  const int n = std::max(gt.frame_count(), pred.frame_count());
  std::map<int, ClassView> views;
  auto view_of = [&](int cls) -> ClassView& {
    auto it = views.find(cls);
    if (it == views.end()) {
      it = views.emplace(cls, ClassView{}).first;
      it->second.gt.resize(n);
      it->second.pred.resize(n);
    }
    return it->second;
  };
  for (int f = 0; f < gt.frame_count(); ++f) {
    for (const auto& inst : gt.frames[f]) view_of(inst.class_id).gt[f].push_back(&inst);
  }
  for (int f = 0; f < pred.frame_count(); ++f) {
    for (const auto& inst : pred.frames[f]) view_of(inst.class_id).pred[f].push_back(&inst);
  }
  return views;
}

std::vector<std::vector<double>> similarity(const std::vector<const LabeledInstance*>& gt,
                                            const std::vector<const LabeledInstance*>& pred) {
  std::vector<std::vector<double>> sim(gt.size(), std::vector<double>(pred.size(), 0.0));
  for (std::size_t i = 0; i < gt.size(); ++i) {
    for (std::size_t j = 0; j < pred.size(); ++j) {
      sim[i][j] = riou(gt[i]->box, pred[j]->box);
    }
  }
  return sim;
}

ClearResult clear_for_class(const ClassView& view, double alpha) {
  ClearResult res;
  std::map<int, int> carried;    // gt id -> pred id matched in previous frame
  std::map<int, int> last_pred;  // gt id -> last matched pred id ever
  for (std::size_t f = 0; f < view.gt.size(); ++f) {
    const auto& gts = view.gt[f];
    const auto& preds = view.pred[f];
    res.gt_count += static_cast<long long>(gts.size());
    const auto sim = similarity(gts, preds);

    std::vector<int> match_of_gt(gts.size(), -1);
    std::vector<char> pred_taken(preds.size(), 0);

    // Continuity: keep last frame's pairing when it still clears alpha.
    for (std::size_t i = 0; i < gts.size(); ++i) {
      auto it = carried.find(gts[i]->track_id);
      if (it == carried.end()) continue;
      for (std::size_t j = 0; j < preds.size(); ++j) {
        if (!pred_taken[j] && preds[j]->track_id == it->second && sim[i][j] >= alpha) {
          match_of_gt[i] = static_cast<int>(j);
          pred_taken[j] = 1;
          break;
        }
      }
    }

    // Optimal assignment on the remainder.
    std::vector<int> free_gt, free_pred;
    for (std::size_t i = 0; i < gts.size(); ++i) {
      if (match_of_gt[i] < 0) free_gt.push_back(static_cast<int>(i));
    }
    for (std::size_t j = 0; j < preds.size(); ++j) {
      if (!pred_taken[j]) free_pred.push_back(static_cast<int>(j));
    }
    if (!free_gt.empty() && !free_pred.empty()) {
      std::vector<std::vector<double>> sub(free_gt.size(),
                                           std::vector<double>(free_pred.size(), 0.0));
      for (std::size_t a = 0; a < free_gt.size(); ++a) {
        for (std::size_t b = 0; b < free_pred.size(); ++b) {
          sub[a][b] = sim[free_gt[a]][free_pred[b]];
        }
      }
      const Assignment assigned = solve_lap(gate_by_riou(sub, alpha));
      for (auto [a, b] : assigned.matches) {
        match_of_gt[free_gt[a]] = free_pred[b];
        pred_taken[free_pred[b]] = 1;
      }
    }

    carried.clear();
    long long matched = 0;
    for (std::size_t i = 0; i < gts.size(); ++i) {
      if (match_of_gt[i] < 0) continue;
      ++matched;
      const int gid = gts[i]->track_id;
      const int pid = preds[match_of_gt[i]]->track_id;
      auto it = last_pred.find(gid);
      if (it != last_pred.end() && it->second != pid) ++res.idsw;
      last_pred[gid] = pid;
      carried[gid] = pid;
    }
    res.fn += static_cast<long long>(gts.size()) - matched;
    res.fp += static_cast<long long>(preds.size()) - matched;
  }
  res.mota = res.gt_count > 0
                 ? 1.0 - static_cast<double>(res.fp + res.fn + res.idsw) /
                             static_cast<double>(res.gt_count)
                 : 0.0;
  return res;
}

double idf1_for_class(const ClassView& view, double alpha) {
  std::map<int, int> gt_frames, pred_frames;           // id -> frame count
  std::map<std::pair<int, int>, int> overlap;          // (gt id, pred id) -> frames
  for (std::size_t f = 0; f < view.gt.size(); ++f) {
    for (const auto* g : view.gt[f]) ++gt_frames[g->track_id];
    for (const auto* p : view.pred[f]) ++pred_frames[p->track_id];
    for (const auto* g : view.gt[f]) {
      for (const auto* p : view.pred[f]) {
        if (riou(g->box, p->box) >= alpha) ++overlap[{g->track_id, p->track_id}];
      }
    }
  }
  long long total_gt = 0, total_pred = 0;
  for (auto& [id, n] : gt_frames) total_gt += n;
  for (auto& [id, n] : pred_frames) total_pred += n;
  if (total_gt + total_pred == 0) return 0.0;

  std::vector<int> gt_ids, pred_ids;
  for (auto& [id, n] : gt_frames) gt_ids.push_back(id);
  for (auto& [id, n] : pred_frames) pred_ids.push_back(id);
  std::vector<std::vector<double>> w(gt_ids.size(), std::vector<double>(pred_ids.size(), 0.0));
  for (std::size_t i = 0; i < gt_ids.size(); ++i) {
    for (std::size_t j = 0; j < pred_ids.size(); ++j) {
      auto it = overlap.find({gt_ids[i], pred_ids[j]});
      if (it != overlap.end()) w[i][j] = static_cast<double>(it->second);
    }
  }
  long long idtp = 0;
  for (auto [i, j] : max_weight_matching(w)) {
    idtp += static_cast<long long>(w[i][j]);
  }
  return 2.0 * static_cast<double>(idtp) / static_cast<double>(total_gt + total_pred);
}

HotaResult hota_for_class(const ClassView& view) {
  std::map<int, long long> gt_count, pred_count;
  std::map<std::pair<int, int>, double> potential;

  const std::size_t nframes = view.gt.size();
  for (std::size_t f = 0; f < nframes; ++f) {
    const auto& gts = view.gt[f];
    const auto& preds = view.pred[f];
    for (const auto* g : gts) ++gt_count[g->track_id];
    for (const auto* p : preds) ++pred_count[p->track_id];
    if (gts.empty() || preds.empty()) continue;
    const auto sim = similarity(gts, preds);
    std::vector<double> row_sum(gts.size(), 0.0), col_sum(preds.size(), 0.0);
    for (std::size_t i = 0; i < gts.size(); ++i) {
      for (std::size_t j = 0; j < preds.size(); ++j) {
        row_sum[i] += sim[i][j];
        col_sum[j] += sim[i][j];
      }
    }
    for (std::size_t i = 0; i < gts.size(); ++i) {
      for (std::size_t j = 0; j < preds.size(); ++j) {
        const double denom = row_sum[i] + col_sum[j] - sim[i][j];
        if (denom > 1e-12 && sim[i][j] > 0.0) {
          potential[{gts[i]->track_id, preds[j]->track_id}] += sim[i][j] / denom;
        }
      }
    }
  }

  auto alignment = [&](int gid, int pid) {
    auto it = potential.find({gid, pid});
    if (it == potential.end()) return 0.0;
    const double denom = static_cast<double>(gt_count[gid] + pred_count[pid]) - it->second;
    return denom > 1e-12 ? it->second / denom : 0.0;
  };

  std::array<long long, kHotaAlphaCount> tp{}, fp{}, fn{};
  std::array<std::map<std::pair<int, int>, long long>, kHotaAlphaCount> matches;

  for (std::size_t f = 0; f < nframes; ++f) {
    const auto& gts = view.gt[f];
    const auto& preds = view.pred[f];
    std::vector<std::pair<int, int>> matched;
    if (!gts.empty() && !preds.empty()) {
      const auto sim = similarity(gts, preds);
      // Association-aware scores steer ties toward globally consistent ids.
      std::vector<std::vector<double>> cost(gts.size(), std::vector<double>(preds.size(), 0.0));
      for (std::size_t i = 0; i < gts.size(); ++i) {
        for (std::size_t j = 0; j < preds.size(); ++j) {
          cost[i][j] = 1.0 - alignment(gts[i]->track_id, preds[j]->track_id) * sim[i][j];
        }
      }
      const Assignment assigned = solve_lap(CostMatrix{cost, {}});
      for (int a = 0; a < kHotaAlphaCount; ++a) {
        const double alpha = hota_alpha(a);
        long long count = 0;
        for (auto [i, j] : assigned.matches) {
          if (sim[i][j] > alpha) {
            ++count;
            ++matches[a][{gts[i]->track_id, preds[j]->track_id}];
          }
        }
        tp[a] += count;
        fn[a] += static_cast<long long>(gts.size()) - count;
        fp[a] += static_cast<long long>(preds.size()) - count;
      }
    } else {
      for (int a = 0; a < kHotaAlphaCount; ++a) {
        fn[a] += static_cast<long long>(gts.size());
        fp[a] += static_cast<long long>(preds.size());
      }
    }
  }

  HotaResult res;
  double hota_sum = 0.0, deta_sum = 0.0, assa_sum = 0.0;
  for (int a = 0; a < kHotaAlphaCount; ++a) {
    res.tp_per_alpha[a] = tp[a];
    const long long denom = tp[a] + fp[a] + fn[a];
    const double deta = denom > 0 ? static_cast<double>(tp[a]) / static_cast<double>(denom) : 0.0;
    double assa = 0.0;
    if (tp[a] > 0) {
      double acc = 0.0;
      for (const auto& [pair, count] : matches[a]) {
        const double uni =
            static_cast<double>(gt_count[pair.first] + pred_count[pair.second] - count);
        acc += static_cast<double>(count) * (static_cast<double>(count) / uni);
      }
      assa = acc / static_cast<double>(tp[a]);
    }
    deta_sum += deta;
    assa_sum += assa;
    hota_sum += std::sqrt(deta * assa);
  }
  res.deta = deta_sum / kHotaAlphaCount;
  res.assa = assa_sum / kHotaAlphaCount;
  res.hota = hota_sum / kHotaAlphaCount;
  return res;
}

}  // namespace

std::map<int, ClearResult> clear_metrics(const LabeledFrameSet& gt, const LabeledFrameSet& pred,
                                         double alpha) {
  std::map<int, ClearResult> out;
  for (const auto& [cls, view] : split_by_class(gt, pred)) {
    out[cls] = clear_for_class(view, alpha);
  }
  return out;
}

std::map<int, double> idf1(const LabeledFrameSet& gt, const LabeledFrameSet& pred, double alpha) {
  std::map<int, double> out;
  for (const auto& [cls, view] : split_by_class(gt, pred)) {
    out[cls] = idf1_for_class(view, alpha);
  }
  return out;
}

std::map<int, HotaResult> hota(const LabeledFrameSet& gt, const LabeledFrameSet& pred) {
  std::map<int, HotaResult> out;
  for (const auto& [cls, view] : split_by_class(gt, pred)) {
    out[cls] = hota_for_class(view);
  }
  return out;
}

AggregatePair aggregate(const std::map<int, ClassMetrics>& per_class) {
  AggregatePair out;
  long long total = 0;
  int classes = 0;
  for (const auto& [cls, m] : per_class) {
    if (m.gt_count <= 0) continue;  // no ground truth: excluded from both
    ++classes;
    total += m.gt_count;
    out.class_averaged.hota += m.hota;
    out.class_averaged.mota += m.mota;
    out.class_averaged.idf1 += m.idf1;
    out.class_averaged.deta += m.deta;
    out.class_averaged.assa += m.assa;
    const double w = static_cast<double>(m.gt_count);
    out.detection_averaged.hota += w * m.hota;
    out.detection_averaged.mota += w * m.mota;
    out.detection_averaged.idf1 += w * m.idf1;
    out.detection_averaged.deta += w * m.deta;
    out.detection_averaged.assa += w * m.assa;
  }
  if (total == 0) {
    throw std::domain_error("aggregate: no ground-truth instances in any class");
  }
  const double inv_c = 1.0 / static_cast<double>(classes);
  const double inv_t = 1.0 / static_cast<double>(total);
  out.class_averaged.hota *= inv_c;
  out.class_averaged.mota *= inv_c;
  out.class_averaged.idf1 *= inv_c;
  out.class_averaged.deta *= inv_c;
  out.class_averaged.assa *= inv_c;
  out.detection_averaged.hota *= inv_t;
  out.detection_averaged.mota *= inv_t;
  out.detection_averaged.idf1 *= inv_t;
  out.detection_averaged.deta *= inv_t;
  out.detection_averaged.assa *= inv_t;
  return out;
}

MetricsReport evaluate(const LabeledFrameSet& gt, const LabeledFrameSet& pred,
                       double clear_alpha) {
  MetricsReport report;
  const auto clear = clear_metrics(gt, pred, clear_alpha);
  const auto id = idf1(gt, pred, clear_alpha);
  const auto h = hota(gt, pred);
  std::set<int> classes;
  for (const auto& [c, v] : clear) classes.insert(c);
  for (int c : classes) {
    ClassMetrics m;
    const ClearResult& cr = clear.at(c);
    m.mota = cr.mota;
    m.fp = cr.fp;
    m.fn = cr.fn;
    m.idsw = cr.idsw;
    m.gt_count = cr.gt_count;
    m.idf1 = id.at(c);
    const HotaResult& hr = h.at(c);
    m.hota = hr.hota;
    m.deta = hr.deta;
    m.assa = hr.assa;
    m.tp_per_alpha = hr.tp_per_alpha;
    report.per_class[c] = m;
  }
  const AggregatePair agg = aggregate(report.per_class);
  report.class_averaged = agg.class_averaged;
  report.detection_averaged = agg.detection_averaged;
  return report;
}

}  // namespace obt
