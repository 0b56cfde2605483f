// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgedit/image.hpp"
#include "sgedit/mask.hpp"

namespace sgedit {

struct SegmentCandidate {
    RegionMask mask;
    BoundingBox bbox;
    double score = 0.0;
};

/// Wire request `{image_id, phrase, box?}`; `box` restricts the search to an
/// insertion region.
struct SegmentRequest {
    std::string image_id;
    std::string phrase;
    std::optional<BoundingBox> box;
};

nlohmann::json segment_request_to_json(const SegmentRequest& req);
SegmentRequest segment_request_from_json(const nlohmann::json& j);
/// `{candidates:[{mask:"rle:...", bbox:[...], score}]}`
nlohmann::json candidates_to_json(const std::vector<SegmentCandidate>& candidates);
std::vector<SegmentCandidate> candidates_from_json(const nlohmann::json& j, ImageSize size);

/// Content id used as `image_id` on the wire.
std::string image_id(const Image& image);

class Segmenter {
  public:
    virtual ~Segmenter() = default;
    /// Zero or more candidates with score in [0,1]. Throws SegmenterUnavailable.
    virtual std::vector<SegmentCandidate> segment(const Image& image, const SegmentRequest& request) = 0;
};

/// Highest score, then larger mask area, then top-most/left-most box.
/// Returns nullptr for an empty list.
const SegmentCandidate* select_best(const std::vector<SegmentCandidate>& candidates);

/// Returns pre-seeded candidates per label. Seed file:
/// `{"image_size":[W,H],"labels":{"<label>":[{"mask","bbox","score"}]},"box_fallback":true}`.
/// A request box keeps only candidates whose box overlaps it. With
/// box_fallback, a boxed request left without candidates gets the box as mask.
class MockSegmenter : public Segmenter {
  public:
    MockSegmenter() = default;
    MockSegmenter(ImageSize size, std::map<std::string, std::vector<SegmentCandidate>> seeds, bool box_fallback = true);
    static MockSegmenter from_json(const nlohmann::json& j);
    static MockSegmenter load(const std::string& path);
    [[nodiscard]] nlohmann::json to_json() const;

    std::vector<SegmentCandidate> segment(const Image& image, const SegmentRequest& request) override;

  private:
    ImageSize size_;
    std::map<std::string, std::vector<SegmentCandidate>> seeds_;
    bool box_fallback_ = true;
};

/// Always fails; stands in for an unreachable worker.
class UnavailableSegmenter : public Segmenter {
  public:
    std::vector<SegmentCandidate> segment(const Image&, const SegmentRequest&) override;
};

/// Client for a segmenter worker: `PUT /images/{image_id}` (PNG body) once per
/// image, then `POST /segment` with the wire request.
class HttpSegmenter : public Segmenter {
  public:
    explicit HttpSegmenter(std::string base_url) : base_url_(std::move(base_url)) {}
    std::vector<SegmentCandidate> segment(const Image& image, const SegmentRequest& request) override;

  private:
    std::string base_url_;
    std::mutex mutex_;
    std::set<std::string> uploaded_;
};

}  // namespace sgedit
