// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgedit/service.hpp"

#include "sgedit/error.hpp"
#include "sgedit/graph_json.hpp"
#include "sgedit/hash.hpp"
#include "sgedit/scene_parser.hpp"

namespace sgedit {

namespace {

std::vector<std::uint8_t> to_bytes(const std::string& s) { return {s.begin(), s.end()}; }

std::string report_file(const std::string& edit_id) { return "reports/" + edit_id + ".json"; }

std::string_view note_kind(ParseNote::Kind k) {
    switch (k) {
        case ParseNote::Kind::UnresolvedRelation: return "unresolved_relation";
        case ParseNote::Kind::DroppedRelation: return "dropped_relation";
        case ParseNote::Kind::Ungrounded: return "ungrounded";
    }
    return "note";
}

int status_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::NotFound: return 404;
        case ErrorCode::Conflict: return 409;
        case ErrorCode::ProviderUnavailable:
        case ErrorCode::ReplayMiss:
        case ErrorCode::MalformedReply:
        case ErrorCode::SegmenterUnavailable:
        case ErrorCode::BackendFailure: return 502;
        case ErrorCode::InvalidFormat:
        case ErrorCode::InvalidDelta:
        case ErrorCode::UnknownId:
        case ErrorCode::BadRequest:
        case ErrorCode::MissingMask:
        case ErrorCode::InvalidBox:
        case ErrorCode::EmptyBox:
        case ErrorCode::DimensionMismatch: return 400;
        default: return 500;
    }
}

ApiResponse failure(int status, ErrorCode code, const std::string& message, const std::string& detail = {},
                    const std::string& stage = {}) {
    Json err = {{"code", std::string(to_string(code))}, {"message", message}, {"detail", detail}};
    if (!stage.empty()) err["stage"] = stage;
    return {status, {{"error", err}}};
}

ApiResponse failure(const Error& e, const std::string& stage = {}) {
    const int status = status_for(e.code());
    return failure(status, e.code(), e.what(), e.detail(), status == 502 ? stage : std::string{});
}

ApiResponse not_found(const std::string& what, const std::string& id) {
    return failure(404, ErrorCode::NotFound, what + " not found", id);
}

ApiResponse conflict(const std::string& message, const std::string& id) {
    return failure(409, ErrorCode::Conflict, message, id);
}

Json error_json(const Error& e, const std::string& stage) {
    return {{"code", std::string(to_string(e.code()))}, {"message", e.what()}, {"detail", e.detail()}, {"stage", stage}};
}

}  // namespace

const SceneGraph& Project::current_graph() const { return history.empty() ? parsed_graph : history.back().graph; }

const std::string& Project::current_image() const { return history.empty() ? source_image : history.back().result_image; }

Json project_to_json(const Project& p) {
    Json history = Json::array();
    for (const auto& h : p.history) {
        history.push_back({{"edit_id", h.edit_id},
                           {"delta", delta_to_json(h.delta)},
                           {"plan", plan_to_json(h.plan)},
                           {"result_image", h.result_image},
                           {"seed", h.seed},
                           {"graph", graph_to_json(h.graph)},
                           {"notes", h.notes},
                           {"report", h.report ? report_to_json(*h.report) : Json(nullptr)}});
    }
    Json files = Json::array();
    for (const auto& [name, bytes] : p.files) files.push_back(name);
    return {{"format", kProjectFormat},
            {"id", p.id},
            {"seed", p.seed},
            {"source_image", p.source_image},
            {"transcript", kTranscriptFile},
            {"parsed_graph", graph_to_json(p.parsed_graph)},
            {"parse_notes", p.parse_notes},
            {"finetune_job", p.finetune_job ? job_to_json(*p.finetune_job) : Json(nullptr)},
            {"receipt", p.receipt ? receipt_to_json(*p.receipt) : Json(nullptr)},
            {"graph", graph_to_json(p.current_graph())},
            {"history", history},
            {"files", files}};
}

Project project_from_json(const Json& j, std::map<std::string, std::vector<std::uint8_t>> files) {
    if (j.value("format", "") != kProjectFormat) throw Error(ErrorCode::InvalidFormat, "not a project document");
    Project p;
    p.id = j.at("id").get<std::string>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.source_image = j.at("source_image").get<std::string>();
    p.parsed_graph = graph_from_json(j.at("parsed_graph"));
    p.parse_notes = j.value("parse_notes", std::vector<std::string>{});
    if (!j.at("finetune_job").is_null()) p.finetune_job = job_from_json(j.at("finetune_job"), p.parsed_graph.image_size);
    if (!j.at("receipt").is_null()) p.receipt = receipt_from_json(j.at("receipt"));
    for (const auto& h : j.at("history")) {
        HistoryEntry e;
        e.edit_id = h.at("edit_id").get<std::string>();
        e.delta = delta_from_json(h.at("delta"));
        e.plan = plan_from_json(h.at("plan"));
        e.result_image = h.at("result_image").get<std::string>();
        e.seed = h.at("seed").get<std::uint64_t>();
        e.graph = graph_from_json(h.at("graph"));
        e.notes = h.value("notes", std::vector<std::string>{});
        if (!h.at("report").is_null()) e.report = report_from_json(h.at("report"));
        p.history.push_back(std::move(e));
    }
    for (const auto& name : j.at("files")) {
        if (!files.contains(name.get<std::string>())) throw Error(ErrorCode::InvalidFormat, "project references a missing file", name);
    }
    p.files = std::move(files);
    return p;
}

Json export_archive(const Project& project) {
    Json files = Json::object();
    for (const auto& [name, bytes] : project.files) files[name] = base64_encode(bytes);
    files["project.json"] = base64_encode(to_bytes(project_to_json(project).dump(2) + "\n"));
    return {{"format", kArchiveFormat}, {"files", files}};
}

Project import_archive(const Json& archive) {
    if (archive.value("format", "") != kArchiveFormat) throw Error(ErrorCode::InvalidFormat, "not an sgedit archive");
    std::map<std::string, std::vector<std::uint8_t>> files;
    for (const auto& [name, b64] : archive.at("files").items()) files.emplace(name, base64_decode(b64.get<std::string>()));
    const auto it = files.find("project.json");
    if (it == files.end()) throw Error(ErrorCode::InvalidFormat, "archive has no project.json");
    const Json doc = parse_json(std::string(it->second.begin(), it->second.end()));
    files.erase(it);
    return project_from_json(doc, std::move(files));
}

std::vector<std::string> verify_replay(const Project& project, Executor& executor, const ExecutionOptions& base) {
    std::vector<std::string> mismatched;
    std::string input = project.source_image;
    for (const auto& h : project.history) {
        ExecutionOptions opts = base;
        opts.seed = h.seed;
        opts.receipt = project.receipt ? &*project.receipt : nullptr;
        const auto result = executor.execute(h.plan, decode_png(project.files.at(input)), opts);
        if (encode_png(result.image) != project.files.at(h.result_image)) mismatched.push_back(h.edit_id);
        input = h.result_image;
    }
    return mismatched;
}

EditService::EditService(ServiceConfig config) : config_(std::move(config)) {
    if (!config_.provider) config_.provider = std::make_shared<llm::UnavailableProvider>();
    if (!config_.segmenter) config_.segmenter = std::make_shared<UnavailableSegmenter>();
    if (!config_.executor) throw Error(ErrorCode::ConfigError, "service needs an executor");
    config_.schedule.validate();
}

EditService::~EditService() {
    wait_idle();
    for (auto& t : threads_) {
        if (t.joinable()) t.join();
    }
}

void EditService::wait_idle() {
    std::unique_lock lock(mutex_);
    idle_.wait(lock, [&] { return running_ == 0; });
}

std::shared_ptr<const Project> EditService::snapshot(const std::string& id) const {
    std::lock_guard lock(mutex_);
    const auto it = slots_.find(id);
    return it == slots_.end() ? nullptr : it->second.project;
}

void EditService::commit(const std::string& project_id, const Project& updated) {
    auto& slot = slots_.at(project_id);
    auto copy = std::make_shared<Project>(updated);
    copy->files[kTranscriptFile] = to_bytes(slot.transcript->to_jsonl());
    slot.project = std::move(copy);
}

ApiResponse EditService::create_project(const Json& body) {
    if (body.contains("archive")) {
        Project p;
        try {
            p = import_archive(body.at("archive"));
        } catch (const Error& e) {
            return failure(e);
        } catch (const Json::exception& e) {
            return failure(400, ErrorCode::InvalidFormat, "malformed archive", e.what());
        }
        std::lock_guard lock(mutex_);
        if (slots_.contains(p.id)) return conflict("project already exists", p.id);
        auto transcript = std::make_shared<llm::Transcript>();
        if (const auto it = p.files.find(kTranscriptFile); it != p.files.end()) {
            *transcript = llm::Transcript::parse_jsonl(std::string(it->second.begin(), it->second.end()));
        }
        const std::string id = p.id;
        Json graph = graph_to_json(p.current_graph());
        slots_[id] = Slot{std::make_shared<const Project>(std::move(p)), transcript, {}, std::nullopt};
        return {201, {{"id", id}, {"graph", graph}, {"imported", true}}};
    }

    if (!body.contains("image") || !body.at("image").is_string()) {
        return failure(400, ErrorCode::BadRequest, "body needs a base64 PNG under \"image\"");
    }
    Project p;
    Image image;
    try {
        p.files[p.source_image] = base64_decode(body.at("image").get<std::string>());
        image = decode_png(p.files[p.source_image]);
        p.seed = body.value("seed", config_.default_seed);
    } catch (const Error& e) {
        return failure(400, e.code(), "undecodable image", e.detail());
    } catch (const Json::exception& e) {
        return failure(400, ErrorCode::BadRequest, "malformed request", e.what());
    }

    auto transcript = std::make_shared<llm::Transcript>();
    llm::RecordingProvider recorder(*config_.provider, transcript);
    Json status = Json::array();
    try {
        auto parsed = parse_scene(image, recorder, *config_.segmenter);
        p.parsed_graph = std::move(parsed.graph);
        for (const auto& n : parsed.notes) p.parse_notes.push_back(std::string(note_kind(n.kind)) + ": " + n.detail);
        status.push_back("parsed");
    } catch (const Error& e) {
        return failure(e, "scene-parser");
    }
    try {
        p.finetune_job = emit_finetune_job(p.parsed_graph);
        status.push_back("finetune submitted: " + p.finetune_job->job_id);
        p.receipt = config_.executor->finetune(*p.finetune_job, image.size());
        p.parsed_graph = apply_receipt(p.parsed_graph, *p.receipt);
        status.push_back("finetune complete: " + p.receipt->model_handle);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::EmptyJob || e.code() == ErrorCode::UnannotatedNode) {
            p.finetune_job.reset();
            status.push_back(std::string("finetune skipped: ") + e.what());
        } else {
            return failure(e, "concept-planner");
        }
    }

    const std::string base = "p-" + sha256_hex(p.files[p.source_image]).substr(0, 12);
    std::lock_guard lock(mutex_);
    p.id = base;
    for (int n = 2; slots_.contains(p.id); ++n) p.id = base + "-" + std::to_string(n);
    const std::string id = p.id;
    Json graph = graph_to_json(p.parsed_graph);
    slots_[id] = Slot{nullptr, transcript, {}, std::nullopt};
    commit(id, p);
    return {201, {{"id", id}, {"graph", graph}, {"status", status}, {"notes", p.parse_notes}}};
}

ApiResponse EditService::get_project(const std::string& id) const {
    std::shared_ptr<const Project> p = snapshot(id);
    if (!p) return not_found("project", id);
    Json body = project_to_json(*p);
    std::lock_guard lock(mutex_);
    const auto& slot = slots_.at(id);
    body["job"] = slot.running_job ? Json(*slot.running_job) : Json(nullptr);
    return {200, body};
}

ApiResponse EditService::preview_edit(const std::string& id, const Json& body) {
    std::shared_ptr<const Project> p;
    std::shared_ptr<llm::Transcript> transcript;
    {
        std::lock_guard lock(mutex_);
        const auto it = slots_.find(id);
        if (it == slots_.end()) return not_found("project", id);
        if (it->second.running_job) return conflict("a job is already running for this project", *it->second.running_job);
        p = it->second.project;
        transcript = it->second.transcript;
    }
    GraphDelta delta;
    try {
        delta = delta_from_json(body.contains("delta") ? body.at("delta") : body);
        delta = resolve_new_ids(p->current_graph(), delta);
        (void)apply_delta(p->current_graph(), delta);
    } catch (const Error& e) {
        return failure(e.code() == ErrorCode::NotFound ? 400 : status_for(e.code()), e.code(), e.what(), e.detail());
    } catch (const Json::exception& e) {
        return failure(400, ErrorCode::BadRequest, "malformed delta", e.what());
    }
    llm::RecordingProvider recorder(*config_.provider, transcript);
    EditPlan plan;
    try {
        plan = plan_edit(p->current_graph(), delta, recorder);
    } catch (const Error& e) {
        return failure(e, "edit-controller");
    }
    const std::string edit_id =
        "edit-" + std::to_string(p->history.size() + 1) + "-" + sha256_hex(delta_to_json(delta).dump()).substr(0, 8);
    Json preview = plan_to_json(plan);
    std::lock_guard lock(mutex_);
    auto& slot = slots_.at(id);
    if (slot.running_job) return conflict("a job is already running for this project", *slot.running_job);
    slot.pending[edit_id] = Pending{delta, std::move(plan), p->history.size()};
    return {200, {{"edit_id", edit_id}, {"plan", preview}}};
}

ApiResponse EditService::confirm_edit(const std::string& id, const std::string& edit_id) {
    std::lock_guard lock(mutex_);
    const auto it = slots_.find(id);
    if (it == slots_.end()) return not_found("project", id);
    auto& slot = it->second;
    const auto pit = slot.pending.find(edit_id);
    if (pit == slot.pending.end()) return not_found("edit", edit_id);
    if (slot.running_job) return conflict("a job is already running for this project", *slot.running_job);
    if (pit->second.base_history != slot.project->history.size()) {
        return conflict("the project changed since this edit was previewed", edit_id);
    }
    const std::string job_id = "job-" + std::to_string(++job_counter_);
    jobs_[job_id] = Job{job_id, id, edit_id, "running", nullptr};
    slot.running_job = job_id;
    Pending pending = std::move(pit->second);
    slot.pending.erase(pit);
    ++running_;
    threads_.emplace_back(&EditService::run_job, this, job_id, id, edit_id, std::move(pending), slot.project);
    return {202, {{"job_id", job_id}, {"status", "running"}}};
}

void EditService::run_job(std::string job_id, std::string project_id, std::string edit_id, Pending pending,
                          std::shared_ptr<const Project> base) {
    Json result;
    std::string status = "done";
    std::optional<Project> updated;
    try {
        Project p = *base;
        HistoryEntry entry;
        entry.edit_id = edit_id;
        entry.seed = derive_seed(p.seed, p.history.size() + 1);
        ExecutionOptions opts;
        opts.schedule = config_.schedule;
        opts.lambda_max = config_.lambda_max;
        opts.seed = entry.seed;
        opts.receipt = p.receipt ? &*p.receipt : nullptr;
        const Image input = decode_png(p.files.at(p.current_image()));
        auto out = config_.executor->execute(pending.plan, input, opts);
        entry.result_image = "edit-" + std::to_string(p.history.size() + 1) + ".png";
        p.files[entry.result_image] = encode_png(out.image);
        entry.delta = std::move(pending.delta);
        entry.plan = std::move(pending.plan);
        entry.graph = std::move(out.graph);
        entry.notes = std::move(out.notes);
        result = {{"edit_id", edit_id}, {"result_image", entry.result_image}, {"graph", graph_to_json(entry.graph)}};
        p.history.push_back(std::move(entry));
        updated = std::move(p);
    } catch (const Error& e) {
        status = "failed";
        result = {{"error", error_json(e, "sampling-orchestrator")}};
    } catch (const std::exception& e) {
        status = "failed";
        result = {{"error", {{"code", "BackendFailure"}, {"message", e.what()}, {"stage", "sampling-orchestrator"}}}};
    }
    std::lock_guard lock(mutex_);
    if (updated) commit(project_id, *updated);
    auto& job = jobs_.at(job_id);
    job.status = status;
    job.result = std::move(result);
    slots_.at(project_id).running_job.reset();
    --running_;
    idle_.notify_all();
}

ApiResponse EditService::get_job(const std::string& job_id) const {
    std::lock_guard lock(mutex_);
    const auto it = jobs_.find(job_id);
    if (it == jobs_.end()) return not_found("job", job_id);
    const Job& j = it->second;
    Json body = {{"id", j.id}, {"project_id", j.project_id}, {"edit_id", j.edit_id}, {"status", j.status}};
    if (!j.result.is_null()) body["result"] = j.result;
    return {200, body};
}

ApiResponse EditService::evaluate(const std::string& id, const Json& body) {
    std::shared_ptr<const Project> p;
    std::shared_ptr<llm::Transcript> transcript;
    {
        std::lock_guard lock(mutex_);
        const auto it = slots_.find(id);
        if (it == slots_.end()) return not_found("project", id);
        if (it->second.running_job) return conflict("a job is already running for this project", *it->second.running_job);
        p = it->second.project;
        transcript = it->second.transcript;
    }
    if (p->history.empty()) return not_found("edit", "project has no edits");
    std::size_t index = p->history.size() - 1;
    if (body.is_object() && body.contains("edit_id")) {
        const auto wanted = body.at("edit_id").get<std::string>();
        index = p->history.size();
        for (std::size_t i = 0; i < p->history.size(); ++i) {
            if (p->history[i].edit_id == wanted) index = i;
        }
        if (index == p->history.size()) return not_found("edit", wanted);
    }
    const HistoryEntry& entry = p->history[index];
    const std::string before_name = index == 0 ? p->source_image : p->history[index - 1].result_image;
    const Image before = decode_png(p->files.at(before_name));
    const Image after = decode_png(p->files.at(entry.result_image));

    llm::RecordingProvider recorder(*config_.provider, transcript);
    EvaluationReport report;
    try {
        report = score_with_llm(build_checklists(entry.plan.source, entry.delta, entry.graph), before, after, recorder,
                                entry.edit_id);
    } catch (const Error& e) {
        return failure(e, "evaluator");
    }

    std::vector<RegionMask> changed;
    for (const auto& r : entry.plan.removals) changed.push_back(r.mask);
    for (const auto& ins : entry.plan.insertions) {
        if (const ObjectNode* n = entry.graph.find(ins.node_id); n && n->mask) changed.push_back(*n->mask);
    }
    Json background = nullptr;
    try {
        const RegionMask exclude = changed.empty() ? RegionMask(before.size()) : mask_union(changed);
        const auto m = background_metrics(before, after, exclude);
        background = {{"psnr", m.psnr}, {"mse", m.mse}, {"ssim", m.ssim}};
    } catch (const Error&) {
        background = nullptr;
    }

    Json out = {{"report", report_to_json(report)}, {"background", background}};
    std::lock_guard lock(mutex_);
    auto& slot = slots_.at(id);
    if (slot.running_job) return conflict("a job is already running for this project", *slot.running_job);
    Project updated = *slot.project;
    updated.history[index].report = report;
    updated.files[report_file(entry.edit_id)] = to_bytes(out.dump(2) + "\n");
    commit(id, updated);
    return {200, out};
}

ApiResponse EditService::export_project(const std::string& id) const {
    std::shared_ptr<const Project> p;
    std::string transcript;
    {
        std::lock_guard lock(mutex_);
        const auto it = slots_.find(id);
        if (it == slots_.end()) return not_found("project", id);
        p = it->second.project;
        transcript = it->second.transcript->to_jsonl();
    }
    Project copy = *p;
    copy.files[kTranscriptFile] = to_bytes(transcript);
    return {200, export_archive(copy)};
}

}  // namespace sgedit
