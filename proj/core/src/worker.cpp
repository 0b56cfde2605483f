// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgedit/worker.hpp"

#include <set>
#include <sstream>

#include "sgedit/error.hpp"
#include "sgedit/graph_json.hpp"
#include "sgedit/hash.hpp"

namespace sgedit {

namespace {

std::string png_b64(const Image& image) { return base64_encode(encode_png(image)); }

Image image_from_b64(const std::string& text) {
    const auto bytes = base64_decode(text);
    return decode_png(bytes);
}

ImageSize size_from_json(const Json& j) { return {j.at(0).get<int>(), j.at(1).get<int>()}; }

Json error_line(const Error& e) {
    return {{"status", "error"}, {"code", std::string(to_string(e.code()))}, {"message", e.what()}, {"detail", e.detail()}};
}

Json insertion_to_json(const Insertion& ins) {
    return {{"id", ins.node_id}, {"label", ins.label}, {"name", ins.name}, {"bbox", box_to_json(ins.bbox)}, {"prompt", ins.prompt}};
}

}  // namespace

Json modulation_to_json(const ModulationSpec& spec) {
    Json masks = Json::object();
    for (const auto& [k, m] : spec.masks) masks[k] = m.to_rle();
    Json j = {{"image_size", {spec.image_size.width, spec.image_size.height}},
              {"masks", masks},
              {"lambda", {{"name", spec.lambda_name}, {"max", spec.lambda_max}}}};
    if (spec.segment_map) j["segment_map"] = spec.segment_map->to_rle();
    if (spec.schedule) j["phase_schedule"] = {{"t_m", spec.schedule->t_m}, {"t_n", spec.schedule->t_n}, {"steps", spec.schedule->steps}};
    return j;
}

ModulationSpec modulation_from_json(const Json& j) {
    ModulationSpec spec;
    spec.image_size = size_from_json(j.at("image_size"));
    const Json masks = j.value("masks", Json::object());
    for (const auto& [k, v] : masks.items()) {
        spec.masks.emplace(k, RegionMask::from_rle(v.get<std::string>(), spec.image_size));
    }
    if (j.contains("segment_map")) spec.segment_map = SegmentMap::from_rle(j.at("segment_map").get<std::string>(), spec.image_size);
    if (j.contains("lambda")) {
        spec.lambda_name = j.at("lambda").value("name", "quartic");
        spec.lambda_max = j.at("lambda").value("max", 1.0);
    }
    if (spec.lambda_name != "quartic") throw Error(ErrorCode::ConfigError, "unknown lambda schedule", spec.lambda_name);
    if (j.contains("phase_schedule")) {
        const auto& p = j.at("phase_schedule");
        spec.schedule = PhaseSchedule{p.at("t_m").get<double>(), p.at("t_n").get<double>(), p.at("steps").get<int>()};
    }
    return spec;
}

Json make_invert_message(const Image& image, const std::string& prompt, int steps) {
    return {{"op", "invert"}, {"image", png_b64(image)}, {"image_id", image_id(image)}, {"prompt", prompt}, {"steps", steps}};
}

Json make_removal_message(const std::string& trajectory_id, const RegionMask& m_rm, const std::string& y_non,
                          std::uint64_t seed) {
    ModulationSpec spec;
    spec.image_size = m_rm.size();
    spec.masks.emplace("removal", m_rm);
    return {{"op", "sample"}, {"mode", "removal"}, {"latents", trajectory_id}, {"prompt", y_non},
            {"seed", seed},   {"modulation_spec", modulation_to_json(spec)}};
}

Json make_insertion_message(const std::string& trajectory_id, const EditPlan& plan, const PhaseSchedule& schedule,
                            double lambda_max, std::uint64_t seed) {
    ModulationSpec spec;
    spec.image_size = plan.target.image_size;
    std::vector<LabeledBox> boxes;
    Json insertions = Json::array();
    for (std::size_t i = 0; i < plan.insertions.size(); ++i) {
        boxes.push_back({plan.insertions[i].bbox, static_cast<int>(i) + 1});
        insertions.push_back(insertion_to_json(plan.insertions[i]));
    }
    spec.segment_map = compose_generation_map(boxes, spec.image_size);
    spec.lambda_max = lambda_max;
    spec.schedule = schedule;
    return {{"op", "sample"},
            {"mode", "insertion"},
            {"latents", trajectory_id},
            {"prompt", plan.combined_prompt},
            {"non_object_prompt", plan.non_object_prompt},
            {"insertions", insertions},
            {"seed", seed},
            {"modulation_spec", modulation_to_json(spec)}};
}

Json make_finetune_message(const FinetuneJobSpec& job, ImageSize size) {
    Json j = job_to_json(job);
    j["image_size"] = {size.width, size.height};
    return j;
}

const Json& final_reply(const std::vector<Json>& lines) {
    if (lines.empty() || !lines.back().contains("status")) throw Error(ErrorCode::BackendFailure, "worker reply has no final line");
    const Json& last = lines.back();
    if (last.at("status") == "done") return last;
    const auto code = error_code_from_string(last.value("code", "")).value_or(ErrorCode::BackendFailure);
    throw Error(code, "worker: " + last.value("message", std::string("unknown failure")), last.value("detail", ""));
}

std::string reply_to_ndjson(const std::vector<Json>& lines) {
    std::string out;
    for (const auto& l : lines) out += l.dump() + "\n";
    return out;
}

ToyWorker::ToyWorker(ToyConfig config, std::shared_ptr<Segmenter> segmenter)
    : backend_(config), segmenter_(std::move(segmenter)) {}

std::vector<Json> ToyWorker::send(const Json& message) {
    std::lock_guard lock(mutex_);
    backend_.clear_trace();
    std::vector<Json> out;
    try {
        out = handle(message);
    } catch (const Error& e) {
        out.push_back(error_line(e));
    } catch (const Json::exception& e) {
        out.push_back(error_line(Error(ErrorCode::InvalidFormat, "malformed worker message", e.what())));
    }
    last_trace_ = backend_.trace();
    return out;
}

std::vector<TraceEntry> ToyWorker::last_trace() const {
    std::lock_guard lock(mutex_);
    return last_trace_;
}

std::vector<Json> ToyWorker::handle(const Json& msg) {
    const std::string op = msg.at("op").get<std::string>();
    std::vector<Json> out;
    auto step_acks = [&](const char* kind) {
        std::set<int> seen;
        for (const auto& t : backend_.trace()) {
            if (t.op == "denoise" && seen.insert(t.step).second) out.push_back({{"ack", kind}, {"step", t.step}});
        }
    };

    if (op == "invert") {
        const Image image = image_from_b64(msg.at("image").get<std::string>());
        const std::string id = image_id(image);
        if (msg.contains("image_id") && msg.at("image_id") != id) throw Error(ErrorCode::InvalidFormat, "image_id does not match the image");
        if (msg.value("steps", backend_.steps()) != backend_.steps()) throw Error(ErrorCode::ConfigError, "step count differs from the worker's");
        const std::string prompt = msg.at("prompt").get<std::string>();
        auto traj = ddim_invert(image, prompt, backend_);
        const std::string artifact = "traj-" + sha256_hex(id + "\n" + prompt).substr(0, 16);
        for (int k = 1; k <= traj.steps(); ++k) out.push_back({{"ack", "invert"}, {"step", k}});
        trajectories_.insert_or_assign(artifact, std::move(traj));
        out.push_back({{"status", "done"}, {"artifact_id", artifact}, {"steps", backend_.steps()}});
        return out;
    }

    if (op == "sample") {
        const std::string tid = msg.at("latents").get<std::string>();
        const auto it = trajectories_.find(tid);
        if (it == trajectories_.end()) throw Error(ErrorCode::NotFound, "unknown trajectory artifact", tid);
        const ModulationSpec spec = modulation_from_json(msg.at("modulation_spec"));
        const auto seed = msg.value("seed", std::uint64_t{0});
        const std::string mode = msg.value("mode", "");
        Image image;
        Json masks = Json::object();
        Json notes = Json::array();
        if (mode == "removal") {
            const auto m = spec.masks.find("removal");
            if (m == spec.masks.end()) throw Error(ErrorCode::InvalidFormat, "removal needs a removal mask");
            image = backend_.decode(run_removal(it->second, m->second, msg.at("prompt").get<std::string>(), backend_, seed));
            step_acks("sample");
        } else if (mode == "insertion") {
            EditPlan plan;
            plan.combined_prompt = msg.at("prompt").get<std::string>();
            plan.non_object_prompt = msg.value("non_object_prompt", std::string(kNonObjectPrompt));
            for (const auto& i : msg.at("insertions")) {
                Insertion ins;
                ins.node_id = i.at("id").get<std::string>();
                ins.label = i.at("label").get<std::string>();
                ins.name = i.value("name", ins.label);
                ins.bbox = box_from_json(i.at("bbox"));
                ins.prompt = i.at("prompt").get<std::string>();
                plan.insertions.push_back(std::move(ins));
            }
            if (!spec.schedule) throw Error(ErrorCode::InvalidFormat, "insertion needs a phase schedule");
            InsertionOptions io{*spec.schedule, spec.lambda_max, seed, spec.image_size, false};
            auto res = run_insertion(it->second, plan, io, backend_, segmenter_.get());
            image = backend_.decode(res.latent);
            for (const auto& [id, m] : res.masks) masks[id] = m.to_rle();
            for (const auto& n : res.notes) notes.push_back(n);
            step_acks("sample");
        } else {
            throw Error(ErrorCode::InvalidFormat, "unknown sample mode", mode);
        }
        const std::string png = png_b64(image);
        out.push_back({{"status", "done"},
                       {"artifact_id", "img-" + sha256_hex(png).substr(0, 16)},
                       {"image", png},
                       {"masks", masks},
                       {"notes", notes}});
        return out;
    }

    if (op == "finetune") {
        const auto job = job_from_json(msg, size_from_json(msg.at("image_size")));
        out.push_back({{"status", "done"}, {"receipt", receipt_to_json(complete_instantly(job))}});
        return out;
    }
    throw Error(ErrorCode::InvalidFormat, "unknown worker op", op);
}

LocalExecutor::LocalExecutor(std::shared_ptr<DenoisingBackend> backend, std::shared_ptr<Segmenter> segmenter)
    : backend_(std::move(backend)), segmenter_(std::move(segmenter)) {
    if (!backend_) throw Error(ErrorCode::ConfigError, "executor needs a backend");
}

ExecutionResult LocalExecutor::execute(const EditPlan& plan, const Image& image, const ExecutionOptions& options) {
    std::lock_guard lock(mutex_);
    return execute_plan(plan, image, options, *backend_, segmenter_.get());
}

FinetuneReceipt LocalExecutor::finetune(const FinetuneJobSpec& job, ImageSize) {
    auto receipt = complete_instantly(job);
    validate_receipt(job, receipt);
    return receipt;
}

ExecutionResult WorkerExecutor::execute(const EditPlan& plan, const Image& image, const ExecutionOptions& options) {
    ExecutionResult out{image, plan.target, false, false, {}};
    if (plan.empty()) return out;
    check_plan_receipt(plan, options.receipt);
    if (!plan.insertions.empty()) options.schedule.validate();

    auto invert = [&](const Image& img) {
        return final_reply(transport_->send(make_invert_message(img, plan.non_object_prompt, steps_))).at("artifact_id").get<std::string>();
    };
    if (!plan.removals.empty()) {
        std::vector<RegionMask> masks;
        for (const auto& r : plan.removals) masks.push_back(r.mask);
        const RegionMask m_rm = mask_union(masks);
        if (m_rm.size() != image.size()) throw Error(ErrorCode::DimensionMismatch, "removal mask does not match the image");
        const auto tid = invert(out.image);
        const auto lines = transport_->send(make_removal_message(tid, m_rm, plan.non_object_prompt, derive_seed(options.seed, 1)));
        const auto& done = final_reply(lines);
        out.image = image_from_b64(done.at("image").get<std::string>());
        out.ran_removal = true;
    }
    if (!plan.insertions.empty()) {
        const auto tid = invert(out.image);
        const auto lines = transport_->send(make_insertion_message(tid, plan, options.schedule, options.lambda_max, derive_seed(options.seed, 2)));
        const auto& done = final_reply(lines);
        out.image = image_from_b64(done.at("image").get<std::string>());
        std::map<std::string, RegionMask> masks;
        for (const auto& [id, rle] : done.at("masks").items()) masks.emplace(id, RegionMask::from_rle(rle.get<std::string>(), image.size()));
        refresh_inserted_nodes(out.graph, masks);
        for (const auto& n : done.value("notes", Json::array())) out.notes.push_back(n.get<std::string>());
        out.ran_insertion = true;
    }
    return out;
}

FinetuneReceipt WorkerExecutor::finetune(const FinetuneJobSpec& job, ImageSize size) {
    auto receipt = receipt_from_json(final_reply(transport_->send(make_finetune_message(job, size))).at("receipt"));
    validate_receipt(job, receipt);
    return receipt;
}

}  // namespace sgedit
