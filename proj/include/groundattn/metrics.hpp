#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "groundattn/types.hpp"

namespace groundattn {

enum class Task { kRsrec, kRsres };

std::string_view to_string(Task t);

// Raw counts behind an IoU so that dataset-level oIoU can be accumulated.
struct Overlap {
  double intersection = 0.0;
  double union_area = 0.0;

  // Both empty counts as a perfect match.
  double iou() const { return union_area > 0.0 ? intersection / union_area : 1.0; }
};

Overlap mask_overlap(const BinaryMask& pred, const BinaryMask& gt);
double mask_iou(const BinaryMask& pred, const BinaryMask& gt);

Overlap box_overlap(const std::optional<BBox>& pred, const BBox& gt);
double box_iou(const BBox& a, const BBox& b);

struct EvalRecord {
  std::string sample_id;
  Task task = Task::kRsres;
  double iou = 0.0;
  double intersection = 0.0;
  double union_area = 0.0;
};

EvalRecord make_record(std::string sample_id, Task task, const Overlap& overlap);

inline constexpr double kPrecisionThresholds[] = {0.3, 0.5, 0.7};

// Percentages in [0, 100].
struct TaskMetrics {
  double pr30 = 0.0;
  double pr50 = 0.0;
  double pr70 = 0.0;
  double miou = 0.0;
  double oiou = 0.0;
  std::size_t n_samples = 0;
};

// Pr@X counts iou >= X. Throws kEmptyRecords on an empty list.
TaskMetrics summarize_task(std::span<const EvalRecord> records);

struct MetricsReport {
  std::optional<TaskMetrics> rsrec;
  std::optional<TaskMetrics> rsres;
};

// Splits by task and summarizes each present task.
MetricsReport summarize(std::span<const EvalRecord> records);

// Aligned plain-text table; one row per (label, metrics) pair.
std::string format_table(const std::vector<std::pair<std::string, TaskMetrics>>& rows);

}  // namespace groundattn
