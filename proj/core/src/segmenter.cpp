// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgedit/segmenter.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <algorithm>

#include "sgedit/error.hpp"
#include "sgedit/graph_json.hpp"
#include "sgedit/hash.hpp"

namespace sgedit {

Json segment_request_to_json(const SegmentRequest& req) {
    Json j = {{"image_id", req.image_id}, {"phrase", req.phrase}};
    if (req.box) j["box"] = box_to_json(*req.box);
    return j;
}

SegmentRequest segment_request_from_json(const Json& j) {
    SegmentRequest r;
    r.image_id = j.at("image_id").get<std::string>();
    r.phrase = j.at("phrase").get<std::string>();
    if (j.contains("box") && !j["box"].is_null()) r.box = box_from_json(j["box"]);
    return r;
}

Json candidates_to_json(const std::vector<SegmentCandidate>& candidates) {
    Json arr = Json::array();
    for (const auto& c : candidates) {
        arr.push_back({{"mask", c.mask.to_rle()}, {"bbox", box_to_json(c.bbox)}, {"score", c.score}});
    }
    return {{"candidates", arr}};
}

std::vector<SegmentCandidate> candidates_from_json(const Json& j, ImageSize size) {
    std::vector<SegmentCandidate> out;
    const Json& arr = j.is_array() ? j : j.at("candidates");
    for (const auto& c : arr) {
        SegmentCandidate cand{RegionMask::from_rle(c.at("mask").get<std::string>(), size), box_from_json(c.at("bbox")),
                              c.at("score").get<double>()};
        if (!(cand.score >= 0.0 && cand.score <= 1.0)) {
            throw Error(ErrorCode::InvalidFormat, "segment candidate score must lie in [0,1]");
        }
        out.push_back(std::move(cand));
    }
    return out;
}

std::string image_id(const Image& image) { return "img-" + sha256_hex(encode_png(image)).substr(0, 16); }

const SegmentCandidate* select_best(const std::vector<SegmentCandidate>& candidates) {
    const SegmentCandidate* best = nullptr;
    auto better = [](const SegmentCandidate& a, const SegmentCandidate& b) {
        if (a.score != b.score) return a.score > b.score;
        const auto area_a = a.mask.count(), area_b = b.mask.count();
        if (area_a != area_b) return area_a > area_b;
        if (a.bbox.y0 != b.bbox.y0) return a.bbox.y0 < b.bbox.y0;
        return a.bbox.x0 < b.bbox.x0;
    };
    for (const auto& c : candidates) {
        if (best == nullptr || better(c, *best)) best = &c;
    }
    return best;
}

MockSegmenter::MockSegmenter(ImageSize size, std::map<std::string, std::vector<SegmentCandidate>> seeds,
                             bool box_fallback)
    : size_(size), seeds_(std::move(seeds)), box_fallback_(box_fallback) {}

MockSegmenter MockSegmenter::from_json(const Json& j) {
    const auto& sz = j.at("image_size");
    ImageSize size{sz.at(0).get<int>(), sz.at(1).get<int>()};
    std::map<std::string, std::vector<SegmentCandidate>> seeds;
    for (const auto& [label, cands] : j.at("labels").items()) seeds[label] = candidates_from_json(cands, size);
    return MockSegmenter(size, std::move(seeds), j.value("box_fallback", true));
}

MockSegmenter MockSegmenter::load(const std::string& path) { return from_json(parse_json(read_text_file(path))); }

Json MockSegmenter::to_json() const {
    Json labels = Json::object();
    for (const auto& [label, cands] : seeds_) labels[label] = candidates_to_json(cands)["candidates"];
    return {{"image_size", {size_.width, size_.height}}, {"labels", labels}, {"box_fallback", box_fallback_}};
}

namespace {

bool overlaps(const BoundingBox& a, const BoundingBox& b) {
    return a.x0 < b.x1 && b.x0 < a.x1 && a.y0 < b.y1 && b.y0 < a.y1;
}

}  // namespace

std::vector<SegmentCandidate> MockSegmenter::segment(const Image& image, const SegmentRequest& request) {
    if (auto it = seeds_.find(request.phrase); it != seeds_.end()) {
        std::vector<SegmentCandidate> out;
        for (const auto& c : it->second) {
            if (c.mask.size() != image.size()) continue;
            if (request.box && !overlaps(c.bbox, *request.box)) continue;
            out.push_back(c);
        }
        if (!out.empty() || !request.box) return out;
    }
    if (box_fallback_ && request.box && request.box->valid()) {
        auto mask = RegionMask::from_box(image.size(), *request.box);
        if (mask.empty()) return {};
        return {SegmentCandidate{std::move(mask), *request.box, 1.0}};
    }
    return {};
}

std::vector<SegmentCandidate> UnavailableSegmenter::segment(const Image&, const SegmentRequest& request) {
    throw Error(ErrorCode::SegmenterUnavailable, "segmenter worker is not reachable", request.phrase);
}

std::vector<SegmentCandidate> HttpSegmenter::segment(const Image& image, const SegmentRequest& request) {
    httplib::Client client(base_url_);
    client.set_read_timeout(60, 0);
    const auto id = request.image_id.empty() ? image_id(image) : request.image_id;
    {
        std::lock_guard lock(mutex_);
        if (!uploaded_.contains(id)) {
            const auto png = encode_png(image);
            auto res = client.Put("/images/" + id, reinterpret_cast<const char*>(png.data()), png.size(), "image/png");
            if (!res || res->status / 100 != 2) {
                throw Error(ErrorCode::SegmenterUnavailable, "image upload to segmenter failed", base_url_);
            }
            uploaded_.insert(id);
        }
    }
    SegmentRequest wire = request;
    wire.image_id = id;
    auto res = client.Post("/segment", segment_request_to_json(wire).dump(), "application/json");
    if (!res || res->status != 200) throw Error(ErrorCode::SegmenterUnavailable, "segment request failed", base_url_);
    try {
        return candidates_from_json(Json::parse(res->body), image.size());
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::SegmenterUnavailable, std::string("bad segmenter reply: ") + e.what());
    }
}

}  // namespace sgedit
