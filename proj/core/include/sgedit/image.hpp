// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sgedit/mask.hpp"

namespace sgedit {

/// Planar-interleaved RGB image with channel values nominally in [0,1].
struct Image {
    int width = 0;
    int height = 0;
    int channels = 3;
    std::vector<double> pixels;  // row-major, channels interleaved

    Image() = default;
    Image(int w, int h, int c = 3, double fill = 0.0)
        : width(w), height(h), channels(c), pixels(static_cast<std::size_t>(w) * h * c, fill) {}

    [[nodiscard]] ImageSize size() const noexcept { return {width, height}; }
    [[nodiscard]] double& at(int x, int y, int c) noexcept {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    [[nodiscard]] double at(int x, int y, int c) const noexcept {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    friend bool operator==(const Image&, const Image&) = default;
};

/// 8-bit PNG decoding to RGB with any input color type. Throws InvalidFormat on bad input.
Image decode_png(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_png(const Image& image);

/// Quantizes to 8 bits the same way encode_png does.
Image quantize8(const Image& image);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

}  // namespace sgedit
