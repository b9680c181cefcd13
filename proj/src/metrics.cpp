#include "groundattn/metrics.hpp"

#include <algorithm>
#include <cstdio>

#include "groundattn/error.hpp"

namespace groundattn {

std::string_view to_string(Task t) { return t == Task::kRsrec ? "rsrec" : "rsres"; }

Overlap mask_overlap(const BinaryMask& pred, const BinaryMask& gt) {
  if (pred.rows() != gt.rows() || pred.cols() != gt.cols()) {
    throw Error(ErrorCode::kResolutionMismatch, "prediction and ground-truth masks differ in size");
  }
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] != 0;
    const bool g = gt[i] != 0;
    inter += (p && g) ? 1 : 0;
    uni += (p || g) ? 1 : 0;
  }
  return {static_cast<double>(inter), static_cast<double>(uni)};
}

double mask_iou(const BinaryMask& pred, const BinaryMask& gt) { return mask_overlap(pred, gt).iou(); }

Overlap box_overlap(const std::optional<BBox>& pred, const BBox& gt) {
  if (!pred) return {0.0, static_cast<double>(gt.area())};
  const long long iw = std::max(0, std::min(pred->x2, gt.x2) - std::max(pred->x1, gt.x1));
  const long long ih = std::max(0, std::min(pred->y2, gt.y2) - std::max(pred->y1, gt.y1));
  const long long inter = iw * ih;
  return {static_cast<double>(inter), static_cast<double>(pred->area() + gt.area() - inter)};
}

double box_iou(const BBox& a, const BBox& b) { return box_overlap(a, b).iou(); }

EvalRecord make_record(std::string sample_id, Task task, const Overlap& overlap) {
  return {std::move(sample_id), task, overlap.iou(), overlap.intersection, overlap.union_area};
}

TaskMetrics summarize_task(std::span<const EvalRecord> records) {
  if (records.empty()) throw Error(ErrorCode::kEmptyRecords, "no records to summarize");
  std::size_t hits[3] = {0, 0, 0};
  double iou_sum = 0.0;
  double inter_sum = 0.0;
  double union_sum = 0.0;
  for (const auto& rec : records) {
    for (std::size_t i = 0; i < 3; ++i) hits[i] += rec.iou >= kPrecisionThresholds[i] ? 1 : 0;
    iou_sum += rec.iou;
    inter_sum += rec.intersection;
    union_sum += rec.union_area;
  }
  const double n = static_cast<double>(records.size());
  TaskMetrics m;
  m.pr30 = 100.0 * static_cast<double>(hits[0]) / n;
  m.pr50 = 100.0 * static_cast<double>(hits[1]) / n;
  m.pr70 = 100.0 * static_cast<double>(hits[2]) / n;
  m.miou = 100.0 * iou_sum / n;
  m.oiou = union_sum > 0.0 ? 100.0 * inter_sum / union_sum : 100.0;
  m.n_samples = records.size();
  return m;
}

MetricsReport summarize(std::span<const EvalRecord> records) {
  if (records.empty()) throw Error(ErrorCode::kEmptyRecords, "no records to summarize");
  std::vector<EvalRecord> rec;
  std::vector<EvalRecord> res;
  for (const auto& r : records) (r.task == Task::kRsrec ? rec : res).push_back(r);
  MetricsReport report;
  if (!rec.empty()) report.rsrec = summarize_task(rec);
  if (!res.empty()) report.rsres = summarize_task(res);
  return report;
}

std::string format_table(const std::vector<std::pair<std::string, TaskMetrics>>& rows) {
  std::size_t label_width = 5;
  for (const auto& [label, m] : rows) label_width = std::max(label_width, label.size());
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-*s | %7s %7s %7s %7s %7s | %5s\n", static_cast<int>(label_width), "Setting",
                "Pr@0.3", "Pr@0.5", "Pr@0.7", "mIoU", "oIoU", "n");
  out += buf;
  out += std::string(label_width, '-') + "-+-" + std::string(39, '-') + "-+-" + std::string(5, '-') + "\n";
  for (const auto& [label, m] : rows) {
    std::snprintf(buf, sizeof(buf), "%-*s | %7.2f %7.2f %7.2f %7.2f %7.2f | %5zu\n", static_cast<int>(label_width),
                  label.c_str(), m.pr30, m.pr50, m.pr70, m.miou, m.oiou, m.n_samples);
    out += buf;
  }
  return out;
}

}  // namespace groundattn
