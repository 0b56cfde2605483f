// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgedit/evaluator.hpp"
#include "sgedit/worker.hpp"

namespace sgedit {

struct HistoryEntry {
    std::string edit_id;
    GraphDelta delta;
    EditPlan plan;
    std::string result_image;  // file name inside the project
    std::uint64_t seed = 0;
    SceneGraph graph;          // graph after the edit
    std::vector<std::string> notes;
    std::optional<EvaluationReport> report;
};

/// Persistent session state. `files` holds every image, transcript and
/// report by name; the project JSON references them.
struct Project {
    std::string id;
    std::uint64_t seed = 0;
    std::string source_image = "source.png";
    SceneGraph parsed_graph;
    std::vector<std::string> parse_notes;
    std::optional<FinetuneJobSpec> finetune_job;
    std::optional<FinetuneReceipt> receipt;
    std::vector<HistoryEntry> history;
    std::map<std::string, std::vector<std::uint8_t>> files;

    /// Graph after the last edit, or the parsed graph.
    [[nodiscard]] const SceneGraph& current_graph() const;
    /// File name of the latest image.
    [[nodiscard]] const std::string& current_image() const;
};

inline constexpr const char* kProjectFormat = "sgedit-project/1";
inline constexpr const char* kArchiveFormat = "sgedit-archive/1";
inline constexpr const char* kTranscriptFile = "transcript.jsonl";

nlohmann::json project_to_json(const Project& project);
/// Reads the project JSON; `files` must already hold the referenced images.
Project project_from_json(const nlohmann::json& j, std::map<std::string, std::vector<std::uint8_t>> files);

/// `{"format":"sgedit-archive/1","files":{name: base64}}` with
/// "project.json" among the files.
nlohmann::json export_archive(const Project& project);
Project import_archive(const nlohmann::json& archive);

/// Re-executes every history entry from its plan and seed and names the
/// entries whose result image differs from the stored one.
std::vector<std::string> verify_replay(const Project& project, Executor& executor, const ExecutionOptions& base);

struct ApiResponse {
    int status = 200;
    nlohmann::json body;
};

struct ServiceConfig {
    std::shared_ptr<llm::ChatProvider> provider;
    std::shared_ptr<Segmenter> segmenter;
    std::shared_ptr<Executor> executor;
    PhaseSchedule schedule;
    double lambda_max = 1.0;
    std::uint64_t default_seed = 0;
};

/// Endpoint logic behind the HTTP routes; each method returns the status
/// code and JSON body of the matching route.
class EditService {
  public:
    explicit EditService(ServiceConfig config);
    ~EditService();
    EditService(const EditService&) = delete;
    EditService& operator=(const EditService&) = delete;

    /// POST /projects: `{"image": base64 PNG, "seed"?}` or `{"archive": {...}}`.
    ApiResponse create_project(const nlohmann::json& body);
    /// GET /projects/{id}
    ApiResponse get_project(const std::string& id) const;
    /// POST /projects/{id}/edits: `{"delta": {...}}` -> plan preview.
    ApiResponse preview_edit(const std::string& id, const nlohmann::json& body);
    /// POST /projects/{id}/edits/{eid}/confirm -> 202 with a job id.
    ApiResponse confirm_edit(const std::string& id, const std::string& edit_id);
    /// GET /jobs/{id}
    ApiResponse get_job(const std::string& job_id) const;
    /// POST /projects/{id}/evaluate: `{"edit_id"?}`, the latest edit when absent.
    ApiResponse evaluate(const std::string& id, const nlohmann::json& body);
    /// GET /projects/{id}/export
    ApiResponse export_project(const std::string& id) const;

    /// Blocks until no job is running.
    void wait_idle();
    [[nodiscard]] std::shared_ptr<const Project> snapshot(const std::string& id) const;

  private:
    struct Pending {
        GraphDelta delta;
        EditPlan plan;
        std::size_t base_history = 0;
    };
    struct Slot {
        std::shared_ptr<const Project> project;
        std::shared_ptr<llm::Transcript> transcript;
        std::map<std::string, Pending> pending;
        std::optional<std::string> running_job;
    };
    struct Job {
        std::string id;
        std::string project_id;
        std::string edit_id;
        std::string status = "running";
        nlohmann::json result;
    };

    void run_job(std::string job_id, std::string project_id, std::string edit_id, Pending pending,
                 std::shared_ptr<const Project> base);
    void commit(const std::string& project_id, const Project& updated);

    ServiceConfig config_;
    mutable std::mutex mutex_;
    std::condition_variable idle_;
    std::map<std::string, Slot> slots_;
    std::map<std::string, Job> jobs_;
    std::vector<std::thread> threads_;
    std::size_t running_ = 0;
    std::uint64_t job_counter_ = 0;
};

/// HTTP front end for either the edit service routes or a worker transport
/// (POST /v1/messages).
class HttpServer {
  public:
    explicit HttpServer(EditService& service);
    explicit HttpServer(WorkerTransport& worker);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds `port`, or any free port when 0; returns the bound port.
    int bind(const std::string& host, int port);
    /// Serves until stop().
    void listen();
    void stop();

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace sgedit
