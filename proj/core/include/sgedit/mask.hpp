// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sgedit {

struct ImageSize {
    int width = 0;
    int height = 0;

    friend bool operator==(const ImageSize&, const ImageSize&) = default;
    [[nodiscard]] std::size_t area() const noexcept {
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }
};

/// Inclusive-exclusive pixel rectangle [x0,x1) x [y0,y1).
struct PixelRect {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;

    friend bool operator==(const PixelRect&, const PixelRect&) = default;
    [[nodiscard]] bool empty() const noexcept { return x1 <= x0 || y1 <= y0; }
    [[nodiscard]] bool contains(const PixelRect& o) const noexcept {
        return o.x0 >= x0 && o.y0 >= y0 && o.x1 <= x1 && o.y1 <= y1;
    }
};

/// Axis-aligned box in normalized image coordinates.
struct BoundingBox {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;

    [[nodiscard]] bool valid() const noexcept;
    [[nodiscard]] double width() const noexcept { return x1 - x0; }
    [[nodiscard]] double height() const noexcept { return y1 - y0; }

    /// Clamps every coordinate into [0,1]; the result may be degenerate.
    [[nodiscard]] BoundingBox clipped() const noexcept;

    /// Pixels whose centers fall inside the box: x0 <= (x+0.5)/W < x1.
    [[nodiscard]] PixelRect rasterize(ImageSize size) const noexcept;

    /// Smallest normalized box whose rasterization is exactly `rect`.
    static BoundingBox from_pixels(const PixelRect& rect, ImageSize size) noexcept;
};

/// Binary H x W grid, row-major.
class RegionMask {
  public:
    RegionMask(int width, int height);
    RegionMask(ImageSize size) : RegionMask(size.width, size.height) {}
    RegionMask(ImageSize size, std::vector<std::uint8_t> bits);

    static RegionMask from_rect(ImageSize size, const PixelRect& rect);
    static RegionMask from_box(ImageSize size, const BoundingBox& box);

    [[nodiscard]] int width() const noexcept { return size_.width; }
    [[nodiscard]] int height() const noexcept { return size_.height; }
    [[nodiscard]] ImageSize size() const noexcept { return size_; }

    [[nodiscard]] bool at(int x, int y) const noexcept {
        return bits_[static_cast<std::size_t>(y) * size_.width + x] != 0;
    }
    void set(int x, int y, bool on = true) noexcept {
        bits_[static_cast<std::size_t>(y) * size_.width + x] = on ? 1 : 0;
    }
    [[nodiscard]] std::span<const std::uint8_t> bits() const noexcept { return bits_; }

    [[nodiscard]] std::size_t count() const noexcept;
    [[nodiscard]] bool empty() const noexcept { return count() == 0; }
    [[nodiscard]] bool full() const noexcept { return count() == size_.area(); }

    /// Tight pixel bounds of the set pixels, absent for an empty mask.
    [[nodiscard]] std::optional<PixelRect> tight_bounds() const;

    [[nodiscard]] RegionMask inverted() const;

    /// Area-threshold resampling: an output pixel is on when at least half of
    /// the source area it covers is on.
    [[nodiscard]] RegionMask resample(ImageSize target) const;

    /// "rle:" followed by comma-separated run lengths, row-major, alternating
    /// zero/one runs and starting with a (possibly empty) zero run.
    [[nodiscard]] std::string to_rle() const;
    static RegionMask from_rle(std::string_view rle, ImageSize size);

    friend bool operator==(const RegionMask&, const RegionMask&) = default;

  private:
    ImageSize size_;
    std::vector<std::uint8_t> bits_;
};

/// Labeled canvas. Label 0 is the non-object region, k > 0 is object segment k.
class SegmentMap {
  public:
    SegmentMap(ImageSize size);
    SegmentMap(ImageSize size, std::vector<int> labels);

    [[nodiscard]] ImageSize size() const noexcept { return size_; }
    [[nodiscard]] int width() const noexcept { return size_.width; }
    [[nodiscard]] int height() const noexcept { return size_.height; }
    [[nodiscard]] int at(int x, int y) const noexcept {
        return labels_[static_cast<std::size_t>(y) * size_.width + x];
    }
    [[nodiscard]] int at(std::size_t flat) const noexcept { return labels_[flat]; }
    void set(int x, int y, int label) noexcept {
        labels_[static_cast<std::size_t>(y) * size_.width + x] = label;
    }
    [[nodiscard]] std::span<const int> labels() const noexcept { return labels_; }

    [[nodiscard]] int max_label() const noexcept;
    [[nodiscard]] std::size_t area(int label) const noexcept;
    [[nodiscard]] RegionMask segment(int label) const;
    /// Complement of every object segment (label 0).
    [[nodiscard]] RegionMask non_object() const { return segment(0); }
    /// True when `label` names a non-empty segment for every label in `labels`.
    [[nodiscard]] bool all_present(std::span<const int> labels) const noexcept;

    /// "rle:" followed by comma-separated `label:run` pairs, row-major.
    [[nodiscard]] std::string to_rle() const;
    static SegmentMap from_rle(std::string_view rle, ImageSize size);

    friend bool operator==(const SegmentMap&, const SegmentMap&) = default;

  private:
    ImageSize size_;
    std::vector<int> labels_;
};

/// Bitwise OR. Throws DimensionMismatch if sizes differ, InvalidFormat if empty.
RegionMask mask_union(std::span<const RegionMask> masks);

struct LabeledBox {
    BoundingBox box;
    int segment_id = 0;
};

/// Rasterizes insertion boxes into a segment map; later boxes overwrite
/// earlier ones where they overlap.
SegmentMap compose_generation_map(std::span<const LabeledBox> boxes, ImageSize size);

}  // namespace sgedit
