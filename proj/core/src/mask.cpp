// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgedit/mask.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "sgedit/error.hpp"

namespace sgedit {

namespace {

void require_positive(ImageSize size) {
    if (size.width <= 0 || size.height <= 0) {
        throw Error(ErrorCode::DimensionMismatch, "mask dimensions must be positive");
    }
}

std::string_view strip_rle_prefix(std::string_view rle) {
    constexpr std::string_view prefix = "rle:";
    if (!rle.starts_with(prefix)) {
        throw Error(ErrorCode::InvalidFormat, "run-length string must start with 'rle:'", std::string(rle.substr(0, 16)));
    }
    return rle.substr(prefix.size());
}

std::size_t parse_count(std::string_view token, std::string_view whole) {
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
        throw Error(ErrorCode::InvalidFormat, "bad run length", std::string(whole));
    }
    return value;
}

template <typename Fn>
void for_each_token(std::string_view body, Fn&& fn) {
    if (body.empty()) return;
    std::size_t start = 0;
    while (start <= body.size()) {
        auto comma = body.find(',', start);
        if (comma == std::string_view::npos) comma = body.size();
        fn(body.substr(start, comma - start));
        start = comma + 1;
    }
}

}  // namespace

bool BoundingBox::valid() const noexcept {
    auto in_unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
    return in_unit(x0) && in_unit(y0) && in_unit(x1) && in_unit(y1) && x0 < x1 && y0 < y1;
}

BoundingBox BoundingBox::clipped() const noexcept {
    auto clamp01 = [](double v) { return std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0; };
    return {clamp01(x0), clamp01(y0), clamp01(x1), clamp01(y1)};
}

PixelRect BoundingBox::rasterize(ImageSize size) const noexcept {
    // First pixel index whose center (i + 0.5) / n is >= lo, and first whose
    // center is >= hi.
    auto first_at_or_after = [](double v, int n) {
        double idx = std::ceil(v * n - 0.5);
        return static_cast<int>(std::clamp(idx, 0.0, static_cast<double>(n)));
    };
    PixelRect r;
    r.x0 = first_at_or_after(x0, size.width);
    r.x1 = first_at_or_after(x1, size.width);
    r.y0 = first_at_or_after(y0, size.height);
    r.y1 = first_at_or_after(y1, size.height);
    if (r.x1 < r.x0) r.x1 = r.x0;
    if (r.y1 < r.y0) r.y1 = r.y0;
    return r;
}

BoundingBox BoundingBox::from_pixels(const PixelRect& rect, ImageSize size) noexcept {
    return {static_cast<double>(rect.x0) / size.width, static_cast<double>(rect.y0) / size.height,
            static_cast<double>(rect.x1) / size.width, static_cast<double>(rect.y1) / size.height};
}

RegionMask::RegionMask(int width, int height) : size_{width, height} {
    require_positive(size_);
    bits_.assign(size_.area(), 0);
}

RegionMask::RegionMask(ImageSize size, std::vector<std::uint8_t> bits) : size_(size), bits_(std::move(bits)) {
    require_positive(size_);
    if (bits_.size() != size_.area()) {
        throw Error(ErrorCode::DimensionMismatch, "mask bit count does not match dimensions");
    }
    for (auto& b : bits_) {
        if (b > 1) throw Error(ErrorCode::InvalidFormat, "mask values must be binary");
    }
}

RegionMask RegionMask::from_rect(ImageSize size, const PixelRect& rect) {
    RegionMask m(size);
    for (int y = std::max(0, rect.y0); y < std::min(size.height, rect.y1); ++y) {
        for (int x = std::max(0, rect.x0); x < std::min(size.width, rect.x1); ++x) m.set(x, y);
    }
    return m;
}

RegionMask RegionMask::from_box(ImageSize size, const BoundingBox& box) {
    return from_rect(size, box.rasterize(size));
}

std::size_t RegionMask::count() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::optional<PixelRect> RegionMask::tight_bounds() const {
    PixelRect r{size_.width, size_.height, 0, 0};
    bool any = false;
    for (int y = 0; y < size_.height; ++y) {
        for (int x = 0; x < size_.width; ++x) {
            if (!at(x, y)) continue;
            any = true;
            r.x0 = std::min(r.x0, x);
            r.y0 = std::min(r.y0, y);
            r.x1 = std::max(r.x1, x + 1);
            r.y1 = std::max(r.y1, y + 1);
        }
    }
    if (!any) return std::nullopt;
    return r;
}

RegionMask RegionMask::inverted() const {
    RegionMask out(size_);
    for (std::size_t i = 0; i < bits_.size(); ++i) out.bits_[i] = bits_[i] ? 0 : 1;
    return out;
}

RegionMask RegionMask::resample(ImageSize target) const {
    require_positive(target);
    if (target == size_) return *this;
    RegionMask out(target);
    const double sx = static_cast<double>(size_.width) / target.width;
    const double sy = static_cast<double>(size_.height) / target.height;
    for (int ty = 0; ty < target.height; ++ty) {
        const double fy0 = ty * sy, fy1 = (ty + 1) * sy;
        for (int tx = 0; tx < target.width; ++tx) {
            const double fx0 = tx * sx, fx1 = (tx + 1) * sx;
            double covered = 0.0;
            for (int y = static_cast<int>(fy0); y < size_.height && y < fy1; ++y) {
                const double oy = std::min<double>(y + 1, fy1) - std::max<double>(y, fy0);
                for (int x = static_cast<int>(fx0); x < size_.width && x < fx1; ++x) {
                    if (!at(x, y)) continue;
                    const double ox = std::min<double>(x + 1, fx1) - std::max<double>(x, fx0);
                    covered += ox * oy;
                }
            }
            if (covered >= 0.5 * sx * sy) out.set(tx, ty);
        }
    }
    return out;
}

std::string RegionMask::to_rle() const {
    std::string out = "rle:";
    std::uint8_t current = 0;
    std::size_t run = 0;
    bool first = true;
    auto flush = [&] {
        if (!first) out.push_back(',');
        out += std::to_string(run);
        first = false;
    };
    for (auto b : bits_) {
        if (b == current) {
            ++run;
        } else {
            flush();
            current = b;
            run = 1;
        }
    }
    flush();
    return out;
}

RegionMask RegionMask::from_rle(std::string_view rle, ImageSize size) {
    auto body = strip_rle_prefix(rle);
    require_positive(size);
    std::vector<std::uint8_t> bits;
    bits.reserve(size.area());
    std::uint8_t value = 0;
    for_each_token(body, [&](std::string_view tok) {
        auto n = parse_count(tok, rle);
        if (bits.size() + n > size.area()) {
            throw Error(ErrorCode::InvalidFormat, "run lengths exceed mask area", std::string(rle.substr(0, 32)));
        }
        bits.insert(bits.end(), n, value);
        value ^= 1;
    });
    if (bits.size() != size.area()) {
        throw Error(ErrorCode::InvalidFormat, "run lengths do not cover the mask", std::string(rle.substr(0, 32)));
    }
    return RegionMask(size, std::move(bits));
}

SegmentMap::SegmentMap(ImageSize size) : size_(size) {
    require_positive(size_);
    labels_.assign(size_.area(), 0);
}

SegmentMap::SegmentMap(ImageSize size, std::vector<int> labels) : size_(size), labels_(std::move(labels)) {
    require_positive(size_);
    if (labels_.size() != size_.area()) {
        throw Error(ErrorCode::DimensionMismatch, "segment label count does not match dimensions");
    }
    for (int l : labels_) {
        if (l < 0) throw Error(ErrorCode::InvalidFormat, "segment labels must be non-negative");
    }
}

int SegmentMap::max_label() const noexcept {
    return labels_.empty() ? 0 : *std::max_element(labels_.begin(), labels_.end());
}

std::size_t SegmentMap::area(int label) const noexcept {
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
}

RegionMask SegmentMap::segment(int label) const {
    RegionMask m(size_);
    for (int y = 0; y < size_.height; ++y) {
        for (int x = 0; x < size_.width; ++x) {
            if (at(x, y) == label) m.set(x, y);
        }
    }
    return m;
}

bool SegmentMap::all_present(std::span<const int> wanted) const noexcept {
    std::set<int> present(labels_.begin(), labels_.end());
    return std::all_of(wanted.begin(), wanted.end(), [&](int l) { return present.contains(l); });
}

std::string SegmentMap::to_rle() const {
    std::string out = "rle:";
    for (std::size_t i = 0; i < labels_.size();) {
        std::size_t j = i;
        while (j < labels_.size() && labels_[j] == labels_[i]) ++j;
        if (i != 0) out.push_back(',');
        out += std::to_string(labels_[i]) + ":" + std::to_string(j - i);
        i = j;
    }
    return out;
}

SegmentMap SegmentMap::from_rle(std::string_view rle, ImageSize size) {
    auto body = strip_rle_prefix(rle);
    require_positive(size);
    std::vector<int> labels;
    labels.reserve(size.area());
    for_each_token(body, [&](std::string_view tok) {
        auto colon = tok.find(':');
        if (colon == std::string_view::npos) {
            throw Error(ErrorCode::InvalidFormat, "segment run must be label:length", std::string(tok));
        }
        auto label = parse_count(tok.substr(0, colon), rle);
        auto n = parse_count(tok.substr(colon + 1), rle);
        if (labels.size() + n > size.area()) {
            throw Error(ErrorCode::InvalidFormat, "segment runs exceed map area");
        }
        labels.insert(labels.end(), n, static_cast<int>(label));
    });
    if (labels.size() != size.area()) {
        throw Error(ErrorCode::InvalidFormat, "segment runs do not cover the map");
    }
    return SegmentMap(size, std::move(labels));
}

RegionMask mask_union(std::span<const RegionMask> masks) {
    if (masks.empty()) throw Error(ErrorCode::InvalidFormat, "mask_union needs at least one mask");
    const auto size = masks.front().size();
    std::vector<std::uint8_t> bits(size.area(), 0);
    for (const auto& m : masks) {
        if (m.size() != size) throw Error(ErrorCode::DimensionMismatch, "masks differ in size");
        auto src = m.bits();
        for (std::size_t i = 0; i < bits.size(); ++i) bits[i] |= src[i];
    }
    return RegionMask(size, std::move(bits));
}

SegmentMap compose_generation_map(std::span<const LabeledBox> boxes, ImageSize size) {
    SegmentMap map(size);
    std::set<int> seen;
    for (const auto& lb : boxes) {
        if (lb.segment_id < 1) throw Error(ErrorCode::InvalidFormat, "segment ids must be >= 1");
        if (!seen.insert(lb.segment_id).second) {
            throw Error(ErrorCode::InvalidFormat, "segment ids must be distinct", std::to_string(lb.segment_id));
        }
        if (!lb.box.valid()) throw Error(ErrorCode::InvalidBox, "insertion box is not a valid box");
        auto rect = lb.box.rasterize(size);
        if (rect.empty()) {
            throw Error(ErrorCode::EmptyBox, "box rasterizes to zero pixels", std::to_string(lb.segment_id));
        }
        for (int y = rect.y0; y < rect.y1; ++y) {
            for (int x = rect.x0; x < rect.x1; ++x) map.set(x, y, lb.segment_id);
        }
    }
    return map;
}

}  // namespace sgedit
