// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#include <csignal>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sgedit/backend.hpp"
#include "sgedit/error.hpp"
#include "sgedit/graph_json.hpp"
#include "sgedit/hash.hpp"
#include "sgedit/image.hpp"
#include "sgedit/service.hpp"

namespace {

using Json = nlohmann::json;
using namespace sgedit;

struct Globals {
    std::string transcript;
    std::string record;
    std::string backend = "toy";
    std::string segmenter;
    std::string llm_config;
    std::optional<std::uint64_t> seed;
    int worker_steps = 50;
};

std::shared_ptr<llm::ChatProvider> make_provider(const Globals& g) {
    if (!g.transcript.empty()) {
        auto t = std::make_shared<const llm::Transcript>(llm::Transcript::load(g.transcript));
        return std::make_shared<llm::ReplayProvider>(std::move(t));
    }
    if (!g.llm_config.empty()) return std::make_shared<llm::HttpChatProvider>(llm::ProviderConfig::from_file(g.llm_config));
    if (auto cfg = llm::ProviderConfig::from_env()) return std::make_shared<llm::HttpChatProvider>(*cfg);
    return std::make_shared<llm::UnavailableProvider>();
}

std::shared_ptr<Segmenter> make_segmenter(const Globals& g) {
    if (g.segmenter.empty()) return std::make_shared<UnavailableSegmenter>();
    if (g.segmenter.rfind("mock:", 0) == 0) return std::make_shared<MockSegmenter>(MockSegmenter::load(g.segmenter.substr(5)));
    if (g.segmenter.rfind("http://", 0) == 0 || g.segmenter.rfind("https://", 0) == 0) {
        return std::make_shared<HttpSegmenter>(g.segmenter);
    }
    throw Error(ErrorCode::ConfigError, "--segmenter takes mock:<seed.json> or an http(s) URL", g.segmenter);
}

std::shared_ptr<Executor> make_executor(const Globals& g, const std::shared_ptr<Segmenter>& segmenter) {
    if (g.backend == "toy") return std::make_shared<LocalExecutor>(std::make_shared<ToyBackend>(), segmenter);
    if (g.backend.rfind("worker:", 0) == 0) {
        return std::make_shared<WorkerExecutor>(std::make_shared<HttpWorkerTransport>(g.backend.substr(7)), g.worker_steps);
    }
    throw Error(ErrorCode::ConfigError, "--backend takes toy or worker:<url>", g.backend);
}

class Session {
  public:
    explicit Session(const Globals& g) {
        auto segmenter = make_segmenter(g);
        provider_ = make_provider(g);
        std::shared_ptr<llm::ChatProvider> provider = provider_;
        if (!g.record.empty()) {
            recorded_ = std::make_shared<llm::Transcript>();
            record_path_ = g.record;
            recorder_ = std::make_shared<llm::RecordingProvider>(*provider_, recorded_);
            provider = recorder_;
        }
        service_ = std::make_unique<EditService>(ServiceConfig{provider, segmenter, make_executor(g, segmenter), {}, 1.0,
                                                               g.seed.value_or(0)});
    }
    ~Session() {
        if (recorded_) recorded_->save(record_path_);
    }

    EditService& service() { return *service_; }

    std::string open(const std::string& path) {
        const auto r = service_->create_project({{"archive", parse_json(read_text_file(path))}});
        check(r);
        return r.body.at("id");
    }

    void save(const std::string& id, const std::string& path) {
        const auto r = service_->export_project(id);
        check(r);
        write_text_file(path, r.body.dump() + "\n");
    }

    static void check(const ApiResponse& r) {
        if (r.status >= 400) throw ApiFailure{r};
    }

    struct ApiFailure {
        ApiResponse response;
    };

  private:
    std::shared_ptr<llm::ChatProvider> provider_;
    std::shared_ptr<llm::Transcript> recorded_;
    std::shared_ptr<llm::RecordingProvider> recorder_;
    std::string record_path_;
    std::unique_ptr<EditService> service_;
};

Json load_delta(const std::string& arg) {
    const Json j = arg.starts_with("{") ? parse_json(arg) : parse_json(read_text_file(arg));
    return j.contains("delta") ? j.at("delta") : j;
}

void print(const Json& j) { std::cout << j.dump(2) << "\n"; }

HttpServer* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

int serve(HttpServer& server, const std::string& host, int port) {
    const int bound = server.bind(host, port);
    std::cerr << "listening on " << host << ":" << bound << "\n";
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    server.listen();
    g_server = nullptr;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scene-graph driven image editing"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--transcript", g.transcript, "Replay LLM replies from a JSONL transcript")->check(CLI::ExistingFile);
    app.add_option("--record", g.record, "Write this run's LLM exchanges to a JSONL transcript");
    app.add_option("--backend", g.backend, "toy or worker:<url>")->capture_default_str();
    app.add_option("--segmenter", g.segmenter, "mock:<seed.json> or a segmenter worker URL");
    app.add_option("--llm-config", g.llm_config, "Chat provider JSON config")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "Project seed for parse");
    app.add_option("--worker-steps", g.worker_steps, "Sampling steps of the remote worker")->capture_default_str();

    std::string project, image, delta, out_image, dir, edit_id, host = "127.0.0.1";
    bool csv = false;
    int port = 8080;

    auto* parse = app.add_subcommand("parse", "Parse an image into a project and print its scene graph");
    parse->add_option("image", image, "Source PNG")->required()->check(CLI::ExistingFile);
    parse->add_option("-p,--project", project, "Project archive to write")->required();

    auto* plan = app.add_subcommand("plan", "Preview the plan for a graph delta");
    plan->add_option("delta", delta, "Delta JSON file or inline JSON")->required();
    plan->add_option("-p,--project", project, "Project archive")->required()->check(CLI::ExistingFile);

    auto* apply = app.add_subcommand("apply", "Plan and execute a graph delta");
    apply->add_option("delta", delta, "Delta JSON file or inline JSON")->required();
    apply->add_option("-p,--project", project, "Project archive, updated in place")->required()->check(CLI::ExistingFile);
    apply->add_option("-o,--output", out_image, "Write the edited image here");

    auto* eval = app.add_subcommand("eval", "Score an applied edit");
    eval->add_option("-p,--project", project, "Project archive, updated in place")->required()->check(CLI::ExistingFile);
    eval->add_option("--edit-id", edit_id, "Edit to score; the latest when absent");
    eval->add_flag("--csv", csv, "Print a CSV row instead of JSON");

    auto* exp = app.add_subcommand("export", "Print the archive or unpack it into a directory");
    exp->add_option("-p,--project", project, "Project archive")->required()->check(CLI::ExistingFile);
    exp->add_option("-d,--dir", dir, "Unpack every file into this directory");

    auto* srv = app.add_subcommand("serve", "Run the HTTP edit service");
    auto* wrk = app.add_subcommand("worker", "Run a toy denoising worker over HTTP");
    for (auto* sub : {srv, wrk}) {
        sub->add_option("--host", host)->capture_default_str();
        sub->add_option("--port", port)->capture_default_str();
    }

    CLI11_PARSE(app, argc, argv);

    try {
        if (*wrk) {
            ToyWorker worker({}, make_segmenter(g));
            HttpServer server(worker);
            return serve(server, host, port);
        }
        Session session(g);
        EditService& svc = session.service();
        if (*srv) {
            HttpServer server(svc);
            return serve(server, host, port);
        }
        if (*parse) {
            Json body = {{"image", base64_encode(read_file(image))}};
            if (g.seed) body["seed"] = *g.seed;
            const auto r = svc.create_project(body);
            Session::check(r);
            session.save(r.body.at("id"), project);
            print(r.body);
            return 0;
        }
        const std::string id = session.open(project);
        if (*plan) {
            const auto r = svc.preview_edit(id, {{"delta", load_delta(delta)}});
            Session::check(r);
            print(r.body);
        } else if (*apply) {
            const auto preview = svc.preview_edit(id, {{"delta", load_delta(delta)}});
            Session::check(preview);
            const auto job = svc.confirm_edit(id, preview.body.at("edit_id"));
            Session::check(job);
            svc.wait_idle();
            const auto done = svc.get_job(job.body.at("job_id"));
            if (done.body.at("status") != "done") {
                std::cerr << done.body.dump(2) << "\n";
                return 1;
            }
            session.save(id, project);
            if (!out_image.empty()) {
                const auto p = svc.snapshot(id);
                write_file(out_image, p->files.at(p->current_image()));
            }
            print(done.body);
        } else if (*eval) {
            Json body = Json::object();
            if (!edit_id.empty()) body["edit_id"] = edit_id;
            const auto r = svc.evaluate(id, body);
            Session::check(r);
            session.save(id, project);
            if (csv) {
                const std::vector<EvaluationReport> reports{report_from_json(r.body.at("report"))};
                std::cout << reports_to_csv(reports);
            } else {
                print(r.body);
            }
        } else if (*exp) {
            const auto r = svc.export_project(id);
            Session::check(r);
            if (dir.empty()) {
                std::cout << r.body.dump() << "\n";
            } else {
                std::filesystem::create_directories(dir);
                for (const auto& [name, b64] : r.body.at("files").items()) {
                    const auto target = std::filesystem::path(dir) / name;
                    std::filesystem::create_directories(target.parent_path());
                    write_file(target.string(), base64_decode(b64.get<std::string>()));
                }
            }
        }
        return 0;
    } catch (const Session::ApiFailure& f) {
        std::cerr << f.response.body.dump(2) << "\n";
        return f.response.status >= 500 ? 3 : 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << (e.detail().empty() ? "" : ": " + e.detail()) << "\n";
        return 1;
    }
}
