// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "sgedit/backend.hpp"
#include "sgedit/error.hpp"
#include "sgedit/hash.hpp"

namespace sgedit {

double max_abs_diff(const Latent& a, const Latent& b) {
    if (a.width != b.width || a.height != b.height || a.values.cols() != b.values.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "latent shapes differ");
    }
    if (a.values.size() == 0) return 0.0;
    return (a.values - b.values).cwiseAbs().maxCoeff();
}

ToyBackend::ToyBackend(ToyConfig config) : config_(config) {
    if (config_.steps < 1 || config_.factor < 1) throw Error(ErrorCode::ConfigError, "toy backend needs steps >= 1 and factor >= 1");
    if (!(config_.retain > 0.0 && config_.retain < 1.0)) throw Error(ErrorCode::ConfigError, "retain must lie in (0,1)");
}

ImageSize ToyBackend::latent_size(ImageSize image) const {
    if (image.width <= 0 || image.height <= 0 || image.width % config_.factor != 0 || image.height % config_.factor != 0) {
        throw Error(ErrorCode::DimensionMismatch, "image size must be a positive multiple of the latent factor",
                    std::to_string(image.width) + "x" + std::to_string(image.height));
    }
    return {image.width / config_.factor, image.height / config_.factor};
}

Latent ToyBackend::encode(const Image& image) {
    if (image.channels != 3) throw Error(ErrorCode::DimensionMismatch, "toy backend encodes RGB images");
    const ImageSize ls = latent_size(image.size());
    const int f = config_.factor;
    Latent z(ls.width, ls.height, kChannels);
    const double inv = 1.0 / (f * f);
    for (int ly = 0; ly < ls.height; ++ly) {
        for (int lx = 0; lx < ls.width; ++lx) {
            double rgb[3] = {0, 0, 0};
            for (int y = ly * f; y < (ly + 1) * f; ++y) {
                for (int x = lx * f; x < (lx + 1) * f; ++x) {
                    for (int c = 0; c < 3; ++c) rgb[c] += image.at(x, y, c);
                }
            }
            const Eigen::Index i = ly * ls.width + lx;
            for (int c = 0; c < 3; ++c) z.values(i, c) = rgb[c] * inv;
            z.values(i, 3) = (z.values(i, 0) + z.values(i, 1) + z.values(i, 2)) / 3.0;
        }
    }
    return z;
}

Image ToyBackend::decode(const Latent& latent) {
    if (latent.channels() != kChannels) throw Error(ErrorCode::DimensionMismatch, "toy latents have 4 channels");
    const int f = config_.factor;
    Image out(latent.width * f, latent.height * f);
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            const Eigen::Index i = (y / f) * latent.width + x / f;
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = std::clamp(latent.values(i, c), 0.0, 1.0);
        }
    }
    return out;
}

namespace {

std::vector<std::string> split_tokens(std::string_view prompt) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < prompt.size()) {
        const char ch = prompt[i];
        if (ch == '<') {
            const auto close = prompt.find('>', i);
            if (close != std::string_view::npos) {
                std::string tok(prompt.substr(i, close - i + 1));
                std::transform(tok.begin(), tok.end(), tok.begin(), [](unsigned char c) { return std::tolower(c); });
                tokens.push_back(std::move(tok));
                i = close + 1;
                continue;
            }
        }
        if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_') {
            std::string tok;
            while (i < prompt.size() && (std::isalnum(static_cast<unsigned char>(prompt[i])) || prompt[i] == '_')) {
                tok.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(prompt[i]))));
                ++i;
            }
            tokens.push_back(std::move(tok));
            continue;
        }
        ++i;
    }
    return tokens;
}

}  // namespace

std::vector<std::string> ToyBackend::tokenize(std::string_view prompt) { return split_tokens(prompt); }

Eigen::RowVector4d ToyBackend::embed_token(std::string_view token) {
    const std::uint64_t h = fnv1a64(token);
    Eigen::RowVector4d e;
    for (int c = 0; c < 3; ++c) e(c) = static_cast<double>((h >> (8 * c)) & 0xffU) / 255.0;
    e(3) = (e(0) + e(1) + e(2)) / 3.0;
    return e;
}

KvCache ToyBackend::self_features(const Latent& z) const {
    const Eigen::Index n = z.values.rows();
    const double g = std::sqrt(2.0 * config_.locality);
    KvCache kv{attn::Matrix(n, kChannels + 3), z.values};
    for (Eigen::Index i = 0; i < n; ++i) {
        const double px = static_cast<double>(i % z.width);
        const double py = static_cast<double>(i / z.width);
        kv.keys.block(i, 0, 1, kChannels) = config_.content * z.values.row(i);
        kv.keys(i, kChannels) = g * px;
        kv.keys(i, kChannels + 1) = g * py;
        kv.keys(i, kChannels + 2) = -config_.locality * (px * px + py * py);
    }
    return kv;
}

ToyBackend::Estimate ToyBackend::estimate(const Latent& z, std::string_view prompt, const StepHooks* hooks) const {
    if (z.channels() != kChannels || z.values.rows() != static_cast<Eigen::Index>(z.size().area())) {
        throw Error(ErrorCode::DimensionMismatch, "latent shape is not a toy latent");
    }
    if (!z.values.allFinite()) throw Error(ErrorCode::BackendFailure, "latent has non-finite entries");
    const Eigen::Index n = z.values.rows();
    const RegionModulation* mod = hooks && hooks->modulate ? &*hooks->modulate : nullptr;
    const KvSubstitution* sub = hooks && hooks->substitute ? &*hooks->substitute : nullptr;
    if (mod && sub) throw Error(ErrorCode::PreconditionViolation, "a step takes either K/V substitution or region modulation");

    Estimate est;
    est.cache = self_features(z);
    attn::Matrix q = est.cache.keys;
    q.col(kChannels + 2).setOnes();

    attn::Matrix self;
    if (sub) {
        if (!sub->cache || !sub->mask) throw Error(ErrorCode::PreconditionViolation, "substitution needs a cache and a mask");
        if (sub->cache->keys.rows() != n || sub->cache->keys.cols() != q.cols() || sub->mask->size() != z.size()) {
            throw Error(ErrorCode::ShapeMismatch, "cached features do not match the latent");
        }
        self = attn::removal_attention(q, sub->cache->keys, sub->cache->values, *sub->mask);
    } else if (mod) {
        if (!mod->segments || mod->segments->size() != z.size()) throw Error(ErrorCode::ShapeMismatch, "segment map does not match the latent");
        const auto corr = attn::build_correspondence(*mod->segments, attn::KeyKind::Self);
        self = attn::modulated_attention({q, est.cache.keys, est.cache.values}, corr, mod->lambda);
    } else {
        self = attn::attention({q, est.cache.keys, est.cache.values});
    }

    const auto tokens = split_tokens(prompt);
    Eigen::RowVector4d base = Eigen::RowVector4d::Zero();
    attn::Matrix cross = attn::Matrix::Zero(n, kChannels);
    if (!tokens.empty()) {
        attn::Matrix emb(static_cast<Eigen::Index>(tokens.size()), kChannels);
        for (std::size_t j = 0; j < tokens.size(); ++j) emb.row(static_cast<Eigen::Index>(j)) = embed_token(tokens[j]);
        base = emb.colwise().mean();
        if (mod) {
            if (mod->token_segments.size() != tokens.size()) {
                throw Error(ErrorCode::UnmappedToken, "token segment list does not cover the prompt",
                            std::to_string(mod->token_segments.size()) + " vs " + std::to_string(tokens.size()));
            }
            const auto corr = attn::build_correspondence(*mod->segments, attn::KeyKind::Cross, mod->token_segments);
            cross = attn::modulated_attention({z.values, emb, emb}, corr, mod->lambda);
        } else {
            cross = attn::attention({z.values, emb, emb});
        }
    }
    est.x0 = config_.w_self * self + config_.w_cross * cross;
    est.x0.rowwise() += config_.w_base * base;
    return est;
}

StepResult ToyBackend::denoise_step(const Latent& z, int k, std::string_view prompt, const StepHooks& hooks) {
    if (k < 1 || k > config_.steps) throw Error(ErrorCode::OutOfRange, "step index outside 1..N");
    auto est = estimate(z, prompt, &hooks);
    StepResult out{Latent(z.width, z.height, kChannels), std::move(est.cache)};
    out.latent.values = config_.retain * z.values + (1.0 - config_.retain) * est.x0;
    record({"denoise", k, std::string(prompt), hooks.phase, hooks.modulate.has_value(), hooks.substitute.has_value()});
    return out;
}

StepResult ToyBackend::invert_step(const Latent& z_prev, int k, std::string_view prompt) {
    if (k < 1 || k > config_.steps) throw Error(ErrorCode::OutOfRange, "step index outside 1..N");
    const double a = config_.retain;
    Latent z = z_prev;
    for (int iter = 0; iter < 200; ++iter) {
        auto est = estimate(z, prompt, nullptr);
        attn::Matrix next = (z_prev.values - (1.0 - a) * est.x0) / a;
        const double delta = (next - z.values).cwiseAbs().maxCoeff();
        const double scale = std::max(1.0, next.cwiseAbs().maxCoeff());
        z.values = std::move(next);
        if (delta <= 1e-15 * scale) {
            record({"invert", k, std::string(prompt), "", false, false});
            return {z, self_features(z)};
        }
    }
    throw Error(ErrorCode::BackendFailure, "inversion fixed point did not converge", "step " + std::to_string(k));
}

Latent ToyBackend::predict_clean(const Latent& z, int k, std::string_view prompt) {
    if (k < 0 || k > config_.steps) throw Error(ErrorCode::OutOfRange, "step index outside 0..N");
    auto est = estimate(z, prompt, nullptr);
    Latent out(z.width, z.height, kChannels);
    out.values = std::move(est.x0);
    record({"predict", k, std::string(prompt), "", false, false});
    return out;
}

double NormalRng::next() {
    if (spare_) {
        const double v = *spare_;
        spare_.reset();
        return v;
    }
    constexpr double kInv53 = 1.0 / 9007199254740992.0;
    const double u1 = (static_cast<double>(engine_() >> 11) + 0.5) * kInv53;
    const double u2 = (static_cast<double>(engine_() >> 11) + 0.5) * kInv53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    return r * std::cos(theta);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    auto mix = [](std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    };
    return mix(seed ^ mix(stream));
}

}  // namespace sgedit
