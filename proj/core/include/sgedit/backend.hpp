// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "sgedit/attention.hpp"
#include "sgedit/image.hpp"
#include "sgedit/mask.hpp"

namespace sgedit {

/// Latent grid stored as (width*height) x channels, pixels row-major.
struct Latent {
    int width = 0;
    int height = 0;
    attn::Matrix values;

    Latent() = default;
    Latent(int w, int h, int channels) : width(w), height(h), values(attn::Matrix::Zero(w * h, channels)) {}

    [[nodiscard]] ImageSize size() const noexcept { return {width, height}; }
    [[nodiscard]] int channels() const noexcept { return static_cast<int>(values.cols()); }

    friend bool operator==(const Latent& a, const Latent& b) {
        return a.width == b.width && a.height == b.height && a.values.rows() == b.values.rows() &&
               a.values.cols() == b.values.cols() && a.values == b.values;
    }
};

/// Largest absolute elementwise difference; throws DimensionMismatch.
double max_abs_diff(const Latent& a, const Latent& b);

/// Self-attention K/V captured at one step of one hooked layer.
struct KvCache {
    attn::Matrix keys;
    attn::Matrix values;
};

/// Swap the step's self-attention keys/values for cached source features and
/// exclude the masked key positions.
struct KvSubstitution {
    const KvCache* cache = nullptr;
    const RegionMask* mask = nullptr;  // latent resolution
};

/// Region enhancement for self and cross attention. `token_segments[j]` is
/// the segment of prompt token j.
struct RegionModulation {
    const SegmentMap* segments = nullptr;  // latent resolution
    std::vector<int> token_segments;
    double lambda = 0.0;
};

struct StepHooks {
    std::optional<KvSubstitution> substitute;
    std::optional<RegionModulation> modulate;
    std::string phase;  // trace tag only
};

struct StepResult {
    Latent latent;
    KvCache cache;  // self-attention features of the input latent
};

struct TraceEntry {
    std::string op;  // "denoise", "invert", "predict"
    int step = 0;
    std::string prompt;
    std::string phase;
    bool modulated = false;
    bool substituted = false;
};

/// Step k maps z_k to z_{k-1} (denoise) or back (invert), k = N..1, at
/// normalized time k/N.
class DenoisingBackend {
  public:
    virtual ~DenoisingBackend() = default;

    [[nodiscard]] virtual std::string name() const = 0;
    [[nodiscard]] virtual int steps() const = 0;
    [[nodiscard]] virtual ImageSize latent_size(ImageSize image) const = 0;

    virtual Latent encode(const Image& image) = 0;
    virtual Image decode(const Latent& latent) = 0;
    virtual std::vector<std::string> tokenize(std::string_view prompt) = 0;

    virtual StepResult denoise_step(const Latent& z, int k, std::string_view prompt, const StepHooks& hooks) = 0;
    virtual StepResult invert_step(const Latent& z_prev, int k, std::string_view prompt) = 0;
    /// Estimate of the clean latent z_0 from z_k.
    virtual Latent predict_clean(const Latent& z, int k, std::string_view prompt) = 0;

    [[nodiscard]] const std::vector<TraceEntry>& trace() const noexcept { return trace_; }
    void clear_trace() { trace_.clear(); }

  protected:
    void record(TraceEntry entry) { trace_.push_back(std::move(entry)); }

  private:
    std::vector<TraceEntry> trace_;
};

struct ToyConfig {
    int steps = 20;
    int factor = 8;          // image pixels per latent cell along each axis
    double retain = 0.85;    // share of z_k carried into z_{k-1}
    double w_base = 0.3;     // prompt mean embedding
    double w_self = 0.4;     // self-attention
    double w_cross = 0.3;    // cross-attention over prompt tokens
    double locality = 40.0;  // positional sharpness of self-attention
    double content = 0.2;    // feature weight inside self-attention queries/keys
};

/// Deterministic reference backend: 4-channel latents (r, g, b, luma) at
/// 1/factor resolution, each step a contraction toward a prompt-dependent
/// estimate built from real attention calls.
class ToyBackend final : public DenoisingBackend {
  public:
    static constexpr int kChannels = 4;

    explicit ToyBackend(ToyConfig config = {});

    [[nodiscard]] std::string name() const override { return "toy"; }
    [[nodiscard]] int steps() const override { return config_.steps; }
    [[nodiscard]] ImageSize latent_size(ImageSize image) const override;
    [[nodiscard]] const ToyConfig& config() const noexcept { return config_; }

    Latent encode(const Image& image) override;
    Image decode(const Latent& latent) override;
    std::vector<std::string> tokenize(std::string_view prompt) override;

    StepResult denoise_step(const Latent& z, int k, std::string_view prompt, const StepHooks& hooks) override;
    StepResult invert_step(const Latent& z_prev, int k, std::string_view prompt) override;
    Latent predict_clean(const Latent& z, int k, std::string_view prompt) override;

    /// Embedding of one token, deterministic in the token text.
    static Eigen::RowVector4d embed_token(std::string_view token);

  private:
    struct Estimate {
        attn::Matrix x0;
        KvCache cache;
    };
    Estimate estimate(const Latent& z, std::string_view prompt, const StepHooks* hooks) const;
    KvCache self_features(const Latent& z) const;

    ToyConfig config_;
};

/// Standard normal draws: Box-Muller over mt19937_64, identical on every
/// platform for a given seed.
class NormalRng {
  public:
    explicit NormalRng(std::uint64_t seed) : engine_(seed) {}
    double next();

  private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

/// Derives an independent stream seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

}  // namespace sgedit
