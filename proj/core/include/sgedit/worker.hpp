// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgedit/sampling.hpp"

namespace sgedit {

/// Declarative attention modulation carried by a "sample" message.
struct ModulationSpec {
    ImageSize image_size;
    std::map<std::string, RegionMask> masks;  // "removal" -> M_rm
    std::optional<SegmentMap> segment_map;    // M_gen, image resolution
    std::string lambda_name = "quartic";
    double lambda_max = 1.0;
    std::optional<PhaseSchedule> schedule;
};

nlohmann::json modulation_to_json(const ModulationSpec& spec);
ModulationSpec modulation_from_json(const nlohmann::json& j);

/// Wire messages: `{op:"invert"|"sample"|"finetune", ...}`.
nlohmann::json make_invert_message(const Image& image, const std::string& prompt, int steps);
nlohmann::json make_removal_message(const std::string& trajectory_id, const RegionMask& m_rm, const std::string& y_non,
                                    std::uint64_t seed);
nlohmann::json make_insertion_message(const std::string& trajectory_id, const EditPlan& plan, const PhaseSchedule& schedule,
                                      double lambda_max, std::uint64_t seed);
nlohmann::json make_finetune_message(const FinetuneJobSpec& job, ImageSize size);

/// Sends one message and returns every reply line: zero or more
/// `{"ack":..., "step":k}` lines then a final `{"status":"done"|"error", ...}`.
class WorkerTransport {
  public:
    virtual ~WorkerTransport() = default;
    virtual std::vector<nlohmann::json> send(const nlohmann::json& message) = 0;
};

/// Final line of a reply; throws the carried Error for `"status":"error"`
/// and BackendFailure for a missing final line.
const nlohmann::json& final_reply(const std::vector<nlohmann::json>& lines);

/// In-process worker running the message handlers on the toy backend.
class ToyWorker final : public WorkerTransport {
  public:
    explicit ToyWorker(ToyConfig config = {}, std::shared_ptr<Segmenter> segmenter = nullptr);

    std::vector<nlohmann::json> send(const nlohmann::json& message) override;

    /// Trace of the most recent message handled.
    [[nodiscard]] std::vector<TraceEntry> last_trace() const;

  private:
    std::vector<nlohmann::json> handle(const nlohmann::json& message);

    mutable std::mutex mutex_;
    ToyBackend backend_;
    std::shared_ptr<Segmenter> segmenter_;
    std::map<std::string, SamplingTrajectory> trajectories_;
    std::vector<TraceEntry> last_trace_;
};

/// POSTs each message to `<base_url>/v1/messages`; the body of the reply is
/// one JSON document per line.
class HttpWorkerTransport final : public WorkerTransport {
  public:
    explicit HttpWorkerTransport(std::string base_url) : base_url_(std::move(base_url)) {}
    std::vector<nlohmann::json> send(const nlohmann::json& message) override;

  private:
    std::string base_url_;
};

/// Reply lines as the HTTP body a worker endpoint returns.
std::string reply_to_ndjson(const std::vector<nlohmann::json>& lines);

/// Runs edit plans and fine-tune jobs on some backend.
class Executor {
  public:
    virtual ~Executor() = default;
    [[nodiscard]] virtual std::string name() const = 0;
    virtual ExecutionResult execute(const EditPlan& plan, const Image& image, const ExecutionOptions& options) = 0;
    virtual FinetuneReceipt finetune(const FinetuneJobSpec& job, ImageSize size) = 0;
};

/// Runs in this process against a backend; the toy backend issues fine-tune
/// receipts immediately.
class LocalExecutor final : public Executor {
  public:
    LocalExecutor(std::shared_ptr<DenoisingBackend> backend, std::shared_ptr<Segmenter> segmenter);
    [[nodiscard]] std::string name() const override { return backend_->name(); }
    ExecutionResult execute(const EditPlan& plan, const Image& image, const ExecutionOptions& options) override;
    FinetuneReceipt finetune(const FinetuneJobSpec& job, ImageSize size) override;
    [[nodiscard]] DenoisingBackend& backend() noexcept { return *backend_; }

  private:
    std::mutex mutex_;
    std::shared_ptr<DenoisingBackend> backend_;
    std::shared_ptr<Segmenter> segmenter_;
};

/// Drives a worker over the wire protocol.
class WorkerExecutor final : public Executor {
  public:
    explicit WorkerExecutor(std::shared_ptr<WorkerTransport> transport, int steps = 50)
        : transport_(std::move(transport)), steps_(steps) {}
    [[nodiscard]] std::string name() const override { return "worker"; }
    ExecutionResult execute(const EditPlan& plan, const Image& image, const ExecutionOptions& options) override;
    FinetuneReceipt finetune(const FinetuneJobSpec& job, ImageSize size) override;

  private:
    std::shared_ptr<WorkerTransport> transport_;
    int steps_;
};

}  // namespace sgedit
