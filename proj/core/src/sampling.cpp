// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgedit/sampling.hpp"

#include <cmath>

#include "sgedit/error.hpp"

namespace sgedit {

void PhaseSchedule::validate() const {
    if (steps < 1) throw Error(ErrorCode::ConfigError, "schedule needs at least one step");
    if (!(t_m < 1.0 && t_m > t_n && t_n > 0.0)) {
        throw Error(ErrorCode::ConfigError, "schedule requires 1 > T_m > T_n > 0",
                    "T_m=" + std::to_string(t_m) + " T_n=" + std::to_string(t_n));
    }
    if (object_steps() + combined_steps() + blend_steps() != steps) {
        throw Error(ErrorCode::ConfigError, "rounded phase lengths do not sum to N", std::to_string(steps));
    }
}

int PhaseSchedule::object_steps() const { return static_cast<int>(std::lround((1.0 - t_m) * steps)); }
int PhaseSchedule::combined_steps() const { return static_cast<int>(std::lround((t_m - t_n) * steps)); }
int PhaseSchedule::blend_steps() const { return static_cast<int>(std::lround(t_n * steps)); }

Phase PhaseSchedule::phase_of(int k) const {
    if (k > steps - object_steps()) return Phase::PerObject;
    if (k > blend_steps()) return Phase::Combined;
    return Phase::Blend;
}

SamplingTrajectory ddim_invert(const Latent& z0, std::string_view prompt, DenoisingBackend& backend) {
    const int n = backend.steps();
    SamplingTrajectory traj;
    traj.latents.reserve(static_cast<std::size_t>(n) + 1);
    traj.caches.reserve(static_cast<std::size_t>(n));
    traj.latents.push_back(z0);
    for (int k = 1; k <= n; ++k) {
        auto r = backend.invert_step(traj.latents.back(), k, prompt);
        traj.latents.push_back(std::move(r.latent));
        traj.caches.push_back(std::move(r.cache));
    }
    return traj;
}

SamplingTrajectory ddim_invert(const Image& image, std::string_view prompt, DenoisingBackend& backend) {
    return ddim_invert(backend.encode(image), prompt, backend);
}

Latent sample(const Latent& z_T, std::string_view prompt, DenoisingBackend& backend) {
    Latent z = z_T;
    for (int k = backend.steps(); k >= 1; --k) z = backend.denoise_step(z, k, prompt, {}).latent;
    return z;
}

namespace {

RegionMask to_latent(const RegionMask& mask, ImageSize latent) {
    return mask.size() == latent ? mask : mask.resample(latent);
}

void fill_noise(Latent& z, const RegionMask& where, NormalRng& rng) {
    for (Eigen::Index i = 0; i < z.values.rows(); ++i) {
        if (!where.bits()[static_cast<std::size_t>(i)]) continue;
        for (Eigen::Index c = 0; c < z.values.cols(); ++c) z.values(i, c) = rng.next();
    }
}

// Takes rows of `src` where `labels[i] == label`.
void take_rows(Latent& dst, const Latent& src, const SegmentMap& labels, int label) {
    for (Eigen::Index i = 0; i < dst.values.rows(); ++i) {
        if (labels.at(static_cast<std::size_t>(i)) == label) dst.values.row(i) = src.values.row(i);
    }
}

}  // namespace

Latent run_removal(const SamplingTrajectory& source, const RegionMask& m_rm, std::string_view y_non,
                   DenoisingBackend& backend, std::uint64_t seed) {
    const int n = source.steps();
    if (n != backend.steps() || static_cast<int>(source.caches.size()) != n) {
        throw Error(ErrorCode::ConfigError, "trajectory length does not match the backend");
    }
    const RegionMask mask = to_latent(m_rm, source.noise().size());
    if (mask.full()) throw Error(ErrorCode::AllMasked, "removal mask covers the whole latent");

    Latent z = source.noise();
    NormalRng rng(seed);
    fill_noise(z, mask, rng);
    for (int k = n; k >= 1; --k) {
        StepHooks hooks;
        hooks.substitute = KvSubstitution{&source.caches[static_cast<std::size_t>(k - 1)], &mask};
        hooks.phase = "removal";
        z = backend.denoise_step(z, k, y_non, hooks).latent;
    }
    return z;
}

std::vector<int> map_prompt_tokens(const std::vector<std::string>& prompt_tokens,
                                   const std::vector<std::pair<int, std::vector<std::string>>>& names) {
    std::vector<int> out(prompt_tokens.size(), 0);
    for (const auto& [segment, name] : names) {
        if (name.empty() || name.size() > prompt_tokens.size()) continue;
        for (std::size_t i = 0; i + name.size() <= prompt_tokens.size(); ++i) {
            bool hit = true;
            for (std::size_t j = 0; j < name.size() && hit; ++j) hit = prompt_tokens[i + j] == name[j];
            if (hit) {
                for (std::size_t j = 0; j < name.size(); ++j) out[i + j] = segment;
            }
        }
    }
    return out;
}

InsertionResult run_insertion(const SamplingTrajectory& background, const EditPlan& plan, const InsertionOptions& options,
                              DenoisingBackend& backend, Segmenter* segmenter) {
    if (plan.insertions.empty()) throw Error(ErrorCode::EmptyInsertion, "plan has no insertion");
    const PhaseSchedule& sched = options.schedule;
    sched.validate();
    const int n = background.steps();
    if (n != sched.steps || n != backend.steps() || static_cast<int>(background.caches.size()) != n) {
        throw Error(ErrorCode::ConfigError, "schedule, trajectory and backend disagree on N",
                    std::to_string(sched.steps) + "/" + std::to_string(n) + "/" + std::to_string(backend.steps()));
    }
    const ImageSize lsize = background.noise().size();

    std::vector<LabeledBox> boxes;
    std::vector<std::pair<int, std::vector<std::string>>> names;
    for (std::size_t i = 0; i < plan.insertions.size(); ++i) {
        const auto& ins = plan.insertions[i];
        const int id = static_cast<int>(i) + 1;
        boxes.push_back({ins.bbox, id});
        names.emplace_back(id, backend.tokenize(ins.name.empty() ? ins.label : ins.name));
    }
    const SegmentMap gen = compose_generation_map(boxes, lsize);
    std::vector<int> ids;
    for (const auto& b : boxes) ids.push_back(b.segment_id);
    const bool modulate = gen.all_present(ids);

    InsertionResult result;
    if (!modulate) result.notes.push_back("generation map degenerate at latent resolution; modulation skipped");

    auto hooks_for = [&](std::string_view prompt, double lambda, const std::string& phase,
                         const std::vector<std::pair<int, std::vector<std::string>>>& prompt_names) {
        StepHooks h;
        h.phase = phase;
        if (modulate) h.modulate = RegionModulation{&gen, map_prompt_tokens(backend.tokenize(prompt), prompt_names), lambda};
        return h;
    };

    NormalRng rng(options.seed);
    Latent z = background.noise();
    fill_noise(z, gen.non_object().inverted(), rng);

    const std::string y_gen = plan.combined_prompt;
    const std::string y_non = plan.non_object_prompt;
    const int k_seg = sched.blend_steps();

    for (int k = n; k > k_seg; --k) {
        const double lambda = attn::lambda_schedule(static_cast<double>(k) / n, options.lambda_max);
        Latent next = backend.denoise_step(z, k, y_non, StepHooks{std::nullopt, std::nullopt, "non"}).latent;
        if (sched.phase_of(k) == Phase::PerObject) {
            for (std::size_t i = 0; i < plan.insertions.size(); ++i) {
                const auto& prompt = plan.insertions[i].prompt;
                const auto obj = backend.denoise_step(z, k, prompt, hooks_for(prompt, lambda, "object", {names[i]}));
                take_rows(next, obj.latent, gen, static_cast<int>(i) + 1);
            }
        } else {
            const auto comb = backend.denoise_step(z, k, y_gen, hooks_for(y_gen, lambda, "combined", names));
            for (std::size_t i = 0; i < plan.insertions.size(); ++i) take_rows(next, comb.latent, gen, static_cast<int>(i) + 1);
        }
        z = std::move(next);
    }

    const Image preview = backend.decode(backend.predict_clean(z, k_seg, y_gen));
    const std::string pid = image_id(preview);
    std::vector<RegionMask> seg_masks;
    for (const auto& ins : plan.insertions) {
        std::optional<RegionMask> found;
        if (segmenter) {
            try {
                const auto cands = segmenter->segment(preview, {pid, ins.label, ins.bbox});
                const auto* best = select_best(cands);
                if (best && best->mask.size() == options.image_size && !best->mask.empty()) found = best->mask;
            } catch (const Error& e) {
                if (options.require_segmenter || e.code() != ErrorCode::SegmenterUnavailable) throw;
            }
        } else if (options.require_segmenter) {
            throw Error(ErrorCode::SegmenterUnavailable, "no segmenter configured");
        }
        if (!found) {
            result.notes.push_back("segmentation fell back to the box for " + ins.node_id);
            found = RegionMask::from_box(options.image_size, ins.bbox);
        }
        result.masks.emplace(ins.node_id, *found);
        seg_masks.push_back(*found);
    }
    const RegionMask m_seg = to_latent(mask_union(seg_masks), lsize);
    const auto inside = m_seg.bits();

    for (int k = k_seg; k >= 1; --k) {
        Latent next = backend.denoise_step(z, k, y_gen, StepHooks{std::nullopt, std::nullopt, "blend"}).latent;
        const Latent& bg = background.latents[static_cast<std::size_t>(k - 1)];
        for (Eigen::Index i = 0; i < next.values.rows(); ++i) {
            if (!inside[static_cast<std::size_t>(i)]) next.values.row(i) = bg.values.row(i);
        }
        z = std::move(next);
    }
    result.latent = std::move(z);
    return result;
}

void check_plan_receipt(const EditPlan& plan, const FinetuneReceipt* receipt) {
    for (const auto& ins : plan.insertions) {
        const ObjectNode* node = plan.target.find(ins.node_id);
        if (!node || !node->token) continue;
        const bool used = ins.prompt.find(*node->token) != std::string::npos ||
                          plan.combined_prompt.find(*node->token) != std::string::npos;
        if (!used) continue;
        if (!receipt) throw Error(ErrorCode::MissingReceipt, "prompt uses a learned token but no receipt is present", ins.node_id);
        const auto it = receipt->token_handles.find(ins.node_id);
        if (it == receipt->token_handles.end() || it->second != *node->token) {
            throw Error(ErrorCode::InvalidReceipt, "receipt has no matching handle", ins.node_id);
        }
    }
}

void refresh_inserted_nodes(SceneGraph& graph, const std::map<std::string, RegionMask>& masks) {
    for (const auto& [id, mask] : masks) {
        for (auto& node : graph.nodes) {
            if (node.id != id) continue;
            if (const auto rect = mask.tight_bounds()) node.bbox = BoundingBox::from_pixels(*rect, mask.size());
            node.mask = mask;
            node.ungrounded = false;
        }
    }
}

ExecutionResult execute_plan(const EditPlan& plan, const Image& image, const ExecutionOptions& options,
                             DenoisingBackend& backend, Segmenter* segmenter) {
    ExecutionResult out{image, plan.target, false, false, {}};
    if (plan.empty()) return out;
    check_plan_receipt(plan, options.receipt);
    if (!plan.insertions.empty()) options.schedule.validate();

    if (!plan.removals.empty()) {
        std::vector<RegionMask> masks;
        for (const auto& r : plan.removals) masks.push_back(r.mask);
        const RegionMask m_rm = mask_union(masks);
        if (m_rm.size() != image.size()) throw Error(ErrorCode::DimensionMismatch, "removal mask does not match the image");
        const auto traj = ddim_invert(out.image, plan.non_object_prompt, backend);
        out.image = backend.decode(run_removal(traj, m_rm, plan.non_object_prompt, backend, derive_seed(options.seed, 1)));
        out.ran_removal = true;
    }

    if (!plan.insertions.empty()) {
        const auto bg = ddim_invert(out.image, plan.non_object_prompt, backend);
        InsertionOptions io{options.schedule, options.lambda_max, derive_seed(options.seed, 2), image.size(),
                            options.require_segmenter};
        auto ins = run_insertion(bg, plan, io, backend, segmenter);
        out.image = backend.decode(ins.latent);
        out.ran_insertion = true;
        refresh_inserted_nodes(out.graph, ins.masks);
        out.notes = std::move(ins.notes);
    }
    return out;
}

}  // namespace sgedit
