// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgedit/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "sgedit/error.hpp"
#include "sgedit/llm/prompt_template.hpp"
#include "sgedit/llm/reply_parser.hpp"
#include "sgedit/prompt_library.hpp"

namespace sgedit {

using Json = nlohmann::json;

std::string_view metric_name(Metric m) noexcept {
    switch (m) {
        case Metric::ElementComposition: return "element_composition";
        case Metric::RelationAlignment: return "relation_alignment";
        case Metric::ImageQuality: return "image_quality";
    }
    return "unknown";
}

double Checklist::normalized() const {
    if (items.empty()) return 1.0;
    double sum = 0.0;
    for (const auto& it : items) {
        if (!it.score) throw Error(ErrorCode::PreconditionViolation, "checklist item is unscored", it.description);
        sum += *it.score / it.scale;
    }
    return sum / static_cast<double>(items.size());
}

ChecklistSet build_checklists(const SceneGraph& source, const GraphDelta& delta, const SceneGraph& target) {
    ChecklistSet set;
    std::set<std::string> touched;
    auto label_in = [](const SceneGraph& g, const std::string& id) {
        const ObjectNode* n = g.find(id);
        return n ? n->label : id;
    };
    auto item = [](std::string d, int scale) { return ChecklistItem{std::move(d), scale, std::nullopt}; };
    for (const auto& action : delta.actions) {
        if (const auto* a = std::get_if<AddNode>(&action)) {
            set.ec.items.push_back(item("add: " + a->label, kCompositionScale));
        } else if (const auto* r = std::get_if<RemoveNode>(&action)) {
            touched.insert(r->id);
            set.ec.items.push_back(item("remove: " + label_in(source, r->id), kCompositionScale));
        } else if (const auto* p = std::get_if<ReplaceNode>(&action)) {
            touched.insert(p->id);
            set.ec.items.push_back(item("remove: " + label_in(source, p->id), kCompositionScale));
            set.ec.items.push_back(item("add: " + p->label, kCompositionScale));
        }
    }
    for (const auto& n : source.nodes) {
        if (!touched.contains(n.id)) set.ec.items.push_back(item("preserve: " + n.label, kCompositionScale));
    }
    for (const auto& e : target.edges) {
        set.ra.items.push_back(
            item("(" + label_in(target, e.subject) + ", " + e.predicate + ", " + label_in(target, e.object) + ")", kRelationScale));
    }
    for (const char* aspect : {"anomalies", "foreground texture and color", "background lighting", "overall realism"}) {
        set.iq.items.push_back(item(aspect, kQualityScale));
    }
    return set;
}

namespace {

const llm::PromptTemplate& template_for(Metric m) {
    switch (m) {
        case Metric::ElementComposition: return prompts::score_element_composition();
        case Metric::RelationAlignment: return prompts::score_relation_alignment();
        case Metric::ImageQuality: break;
    }
    return prompts::score_image_quality();
}

void score_checklist(Checklist& list, const std::vector<llm::Attachment>& images, llm::ChatProvider& provider,
                     std::vector<std::string>& warnings) {
    if (list.items.empty()) return;
    std::string text;
    for (std::size_t i = 0; i < list.items.size(); ++i) {
        if (i) text += "\n";
        text += std::to_string(i + 1) + ". " + list.items[i].description;
    }
    const auto req = llm::render_template(template_for(list.metric), {{"items", text}}, images);
    const auto reply = llm::complete_chat(req, provider);
    const auto scores = llm::parse_reply_as<llm::ChecklistReplyValue>(reply, llm::ReplySchema::ChecklistReply).scores;
    if (scores.size() != list.items.size()) {
        throw Error(ErrorCode::MalformedReply, "score count does not match the checklist",
                    std::string(metric_name(list.metric)) + ": " + std::to_string(scores.size()) + " vs " +
                        std::to_string(list.items.size()));
    }
    for (std::size_t i = 0; i < scores.size(); ++i) {
        auto& it = list.items[i];
        double s = scores[i];
        if (s < 0.0 || s > it.scale) {
            warnings.push_back(std::string(metric_name(list.metric)) + " item " + std::to_string(i + 1) + ": score " +
                               std::to_string(s) + " clamped to [0," + std::to_string(it.scale) + "]");
            s = std::clamp(s, 0.0, static_cast<double>(it.scale));
        }
        if (list.metric == Metric::RelationAlignment && s != 0.0 && s != it.scale) {
            const double snapped = s * 2.0 >= it.scale ? it.scale : 0.0;
            warnings.push_back("relation_alignment item " + std::to_string(i + 1) + ": score " + std::to_string(s) +
                               " snapped to " + std::to_string(static_cast<int>(snapped)));
            s = snapped;
        }
        it.score = s;
    }
}

}  // namespace

EvaluationReport score_with_llm(ChecklistSet checklists, const Image& before, const Image& after,
                                llm::ChatProvider& provider, std::string edit_id) {
    const std::vector<llm::Attachment> images{{"image/png", encode_png(before)}, {"image/png", encode_png(after)}};
    EvaluationReport r;
    r.edit_id = std::move(edit_id);
    for (Checklist* c : {&checklists.ec, &checklists.ra, &checklists.iq}) score_checklist(*c, images, provider, r.warnings);
    r.ec = checklists.ec.normalized();
    r.ra = checklists.ra.normalized();
    r.iq = checklists.iq.normalized();
    r.checklists = std::move(checklists);
    return r;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw Error(ErrorCode::DimensionMismatch, "series lengths differ");
    if (xs.size() < 2) throw Error(ErrorCode::PreconditionViolation, "pearson needs at least two points");
    const double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw Error(ErrorCode::DegenerateInput, "constant series");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

BackgroundMetrics background_metrics(const Image& source, const Image& edited, const RegionMask& exclude) {
    if (source.width != edited.width || source.height != edited.height || source.channels != edited.channels) {
        throw Error(ErrorCode::DimensionMismatch, "images differ in size");
    }
    if (exclude.size() != source.size()) throw Error(ErrorCode::DimensionMismatch, "exclude mask does not match the image");
    const int w = source.width, h = source.height, ch = source.channels;
    std::size_t included = 0;
    double sq = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (exclude.at(x, y)) continue;
            ++included;
            for (int c = 0; c < ch; ++c) {
                const double d = source.at(x, y, c) - edited.at(x, y, c);
                sq += d * d;
            }
        }
    }
    if (included == 0) throw Error(ErrorCode::EmptyRegion, "every pixel is excluded");
    BackgroundMetrics m;
    m.mse = sq / static_cast<double>(included * static_cast<std::size_t>(ch));
    m.psnr = m.mse == 0.0 ? kPsnrCap : std::min(kPsnrCap, 10.0 * std::log10(1.0 / m.mse));

    constexpr int kRadius = 5;
    constexpr double kSigma = 1.5;
    constexpr double kC1 = 0.01 * 0.01;
    constexpr double kC2 = 0.03 * 0.03;
    double g[2 * kRadius + 1];
    for (int i = -kRadius; i <= kRadius; ++i) g[i + kRadius] = std::exp(-(i * i) / (2.0 * kSigma * kSigma));

    double total = 0.0;
    for (int c = 0; c < ch; ++c) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (exclude.at(x, y)) continue;
                double wsum = 0, mx = 0, my = 0, xx = 0, yy = 0, xy = 0;
                for (int dy = -kRadius; dy <= kRadius; ++dy) {
                    const int yy_ = y + dy;
                    if (yy_ < 0 || yy_ >= h) continue;
                    for (int dx = -kRadius; dx <= kRadius; ++dx) {
                        const int xx_ = x + dx;
                        if (xx_ < 0 || xx_ >= w || exclude.at(xx_, yy_)) continue;
                        const double wt = g[dy + kRadius] * g[dx + kRadius];
                        const double a = source.at(xx_, yy_, c), b = edited.at(xx_, yy_, c);
                        wsum += wt;
                        mx += wt * a;
                        my += wt * b;
                        xx += wt * a * a;
                        yy += wt * b * b;
                        xy += wt * a * b;
                    }
                }
                mx /= wsum;
                my /= wsum;
                const double vx = std::max(0.0, xx / wsum - mx * mx);
                const double vy = std::max(0.0, yy / wsum - my * my);
                const double cxy = xy / wsum - mx * my;
                total += ((2 * mx * my + kC1) * (2 * cxy + kC2)) / ((mx * mx + my * my + kC1) * (vx + vy + kC2));
            }
        }
    }
    m.ssim = total / static_cast<double>(included * static_cast<std::size_t>(ch));
    return m;
}

namespace {

Json checklist_to_json(const Checklist& c) {
    Json items = Json::array();
    for (const auto& it : c.items) {
        Json j = {{"description", it.description}, {"scale", it.scale}};
        j["score"] = it.score ? Json(*it.score) : Json(nullptr);
        items.push_back(std::move(j));
    }
    return {{"metric", std::string(metric_name(c.metric))}, {"items", items}};
}

Checklist checklist_from_json(const Json& j) {
    Checklist c;
    const auto name = j.at("metric").get<std::string>();
    if (name == "element_composition") c.metric = Metric::ElementComposition;
    else if (name == "relation_alignment") c.metric = Metric::RelationAlignment;
    else if (name == "image_quality") c.metric = Metric::ImageQuality;
    else throw Error(ErrorCode::InvalidFormat, "unknown metric", name);
    for (const auto& it : j.at("items")) {
        ChecklistItem item{it.at("description").get<std::string>(), it.at("scale").get<int>(), std::nullopt};
        if (!it.at("score").is_null()) item.score = it.at("score").get<double>();
        c.items.push_back(std::move(item));
    }
    return c;
}

}  // namespace

Json report_to_json(const EvaluationReport& r) {
    return {{"edit_id", r.edit_id},
            {"ec", r.ec},
            {"ra", r.ra},
            {"iq", r.iq},
            {"checklists", {checklist_to_json(r.checklists.ec), checklist_to_json(r.checklists.ra), checklist_to_json(r.checklists.iq)}},
            {"warnings", r.warnings}};
}

EvaluationReport report_from_json(const Json& j) {
    EvaluationReport r;
    r.edit_id = j.at("edit_id").get<std::string>();
    r.ec = j.at("ec").get<double>();
    r.ra = j.at("ra").get<double>();
    r.iq = j.at("iq").get<double>();
    for (const auto& c : j.at("checklists")) {
        Checklist list = checklist_from_json(c);
        switch (list.metric) {
            case Metric::ElementComposition: r.checklists.ec = std::move(list); break;
            case Metric::RelationAlignment: r.checklists.ra = std::move(list); break;
            case Metric::ImageQuality: r.checklists.iq = std::move(list); break;
        }
    }
    r.warnings = j.value("warnings", std::vector<std::string>{});
    return r;
}

std::string reports_to_csv(std::span<const EvaluationReport> reports) {
    std::string out = "edit_id,ec,ra,iq\n";
    char buf[96];
    for (const auto& r : reports) {
        std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%.6f\n", r.ec, r.ra, r.iq);
        out += r.edit_id + buf;
    }
    return out;
}

}  // namespace sgedit
