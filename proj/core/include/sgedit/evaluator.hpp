// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgedit/image.hpp"
#include "sgedit/llm/chat.hpp"
#include "sgedit/scene_graph.hpp"

namespace sgedit {

enum class Metric { ElementComposition, RelationAlignment, ImageQuality };

std::string_view metric_name(Metric m) noexcept;

struct ChecklistItem {
    std::string description;
    int scale = 0;
    std::optional<double> score;
};

struct Checklist {
    Metric metric = Metric::ElementComposition;
    std::vector<ChecklistItem> items;

    /// mean(score / scale); 1.0 for an empty list. Throws
    /// PreconditionViolation while any item is unscored.
    [[nodiscard]] double normalized() const;
};

struct ChecklistSet {
    Checklist ec{Metric::ElementComposition, {}};
    Checklist ra{Metric::RelationAlignment, {}};
    Checklist iq{Metric::ImageQuality, {}};
};

inline constexpr int kCompositionScale = 3;
inline constexpr int kRelationScale = 3;
inline constexpr int kQualityScale = 2;

/// EC: one add item per added node, one remove item per removed node, a pair
/// for each replacement, and one preserve item per untouched source node.
/// RA: the target graph's triples. IQ: four fixed quality aspects.
ChecklistSet build_checklists(const SceneGraph& source, const GraphDelta& delta, const SceneGraph& target);

struct EvaluationReport {
    std::string edit_id;
    double ec = 0.0;
    double ra = 0.0;
    double iq = 0.0;
    ChecklistSet checklists;
    std::vector<std::string> warnings;
};

/// Scores every checklist with one model call carrying both images. Scores
/// outside an item's scale are clamped with a warning; relation scores snap
/// to 0 or 3. Throws MalformedReply when the score count differs.
EvaluationReport score_with_llm(ChecklistSet checklists, const Image& before, const Image& after,
                                llm::ChatProvider& provider, std::string edit_id);

/// Sample Pearson coefficient. Throws DimensionMismatch for unequal lengths,
/// PreconditionViolation for fewer than two points, DegenerateInput for a
/// constant series.
double pearson(std::span<const double> xs, std::span<const double> ys);

struct BackgroundMetrics {
    double psnr = 0.0;
    double mse = 0.0;
    double ssim = 0.0;
};

inline constexpr double kPsnrCap = 100.0;

/// Metrics over pixels outside `exclude`, values in [0,1]. SSIM uses an
/// 11x11 Gaussian window (sigma 1.5) restricted to included pixels. Throws
/// DimensionMismatch, EmptyRegion.
BackgroundMetrics background_metrics(const Image& source, const Image& edited, const RegionMask& exclude);

nlohmann::json report_to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const nlohmann::json& j);

/// `edit_id,ec,ra,iq` header plus one row per report.
std::string reports_to_csv(std::span<const EvaluationReport> reports);

}  // namespace sgedit
