// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "fixtures.hpp"

#include <set>

#include "sgedit/error.hpp"
#include "sgedit/graph_json.hpp"
#include "sgedit/hash.hpp"
#include "sgedit/service.hpp"

namespace sgedit::testing {

using Json = nlohmann::json;

namespace {

constexpr ImageSize kCanvas{64, 64};

struct Region {
    const char* label;
    PixelRect rect;
    double rgb[3];
};

// Cats first so they paint over the background.
const Region kCats[] = {
    {"ginger cat", {8, 24, 24, 48}, {0.90, 0.50, 0.15}},
    {"gray and white cat", {40, 24, 56, 48}, {0.60, 0.60, 0.62}},
};
const Region kWall{"wall", {0, 0, 64, 32}, {0.85, 0.78, 0.62}};
const Region kFloor{"floor", {0, 32, 64, 64}, {0.55, 0.38, 0.22}};

bool in_rect(const PixelRect& r, int x, int y) { return x >= r.x0 && x < r.x1 && y >= r.y0 && y < r.y1; }

RegionMask region_mask(const Region& region, bool background) {
    RegionMask m(kCanvas);
    for (int y = 0; y < kCanvas.height; ++y) {
        for (int x = 0; x < kCanvas.width; ++x) {
            if (!in_rect(region.rect, x, y)) continue;
            bool covered = false;
            if (background) {
                for (const auto& c : kCats) covered = covered || in_rect(c.rect, x, y);
            }
            if (!covered) m.set(x, y);
        }
    }
    return m;
}

}  // namespace

Image two_cats_image() {
    Image img(kCanvas.width, kCanvas.height);
    for (int y = 0; y < kCanvas.height; ++y) {
        for (int x = 0; x < kCanvas.width; ++x) {
            const Region* r = in_rect(kWall.rect, x, y) ? &kWall : &kFloor;
            for (const auto& c : kCats) {
                if (in_rect(c.rect, x, y)) r = &c;
            }
            for (int ch = 0; ch < 3; ++ch) img.at(x, y, ch) = r->rgb[ch];
        }
    }
    return img;
}

SceneScript two_cats_script() {
    SceneScript s;
    s.description =
        "A ginger cat and a gray and white cat sit side by side on a brown wooden floor in front of a beige wall. "
        "The ginger cat is on the left.";
    s.objects = {"ginger cat", "gray and white cat"};
    s.background = {"floor", "wall"};
    s.relations = {{"ginger cat", "sitting on", "floor"},
                   {"gray and white cat", "sitting on", "floor"},
                   {"ginger cat", "next to", "gray and white cat"}};
    s.captions = {{"ginger cat", "A fluffy ginger cat with amber eyes, sitting upright with its tail curled."},
                  {"gray and white cat", "A short-haired gray cat with a white chest and paws, sitting calmly."},
                  {"floor", "Brown wooden floorboards."},
                  {"wall", "A plain beige wall."}};
    return s;
}

Json two_cats_segmenter_seed() {
    std::map<std::string, std::vector<SegmentCandidate>> seeds;
    for (const auto& c : kCats) {
        seeds[c.label].push_back({region_mask(c, false), BoundingBox::from_pixels(c.rect, kCanvas), 0.97});
    }
    for (const Region* r : {&kWall, &kFloor}) {
        seeds[r->label].push_back({region_mask(*r, true), BoundingBox::from_pixels(r->rect, kCanvas), 0.9});
    }
    return MockSegmenter(kCanvas, std::move(seeds), true).to_json();
}

std::vector<Json> two_cats_session() {
    return {
        Json::parse(R"({"actions":[{"op":"modify_edge","edge":{"s":"ginger-cat","p":"next to","o":"gray-and-white-cat"},"predicate":"in front of"}]})"),
        Json::parse(R"({"actions":[{"op":"add","id":"","label":"teddy bear","relations":[{"s":"","p":"on","o":"floor"}]}]})"),
        Json::parse(R"({"actions":[{"op":"replace","id":"gray-and-white-cat","label":"white dog"}]})"),
        Json::parse(R"({"actions":[{"op":"remove","id":"teddy-bear"}]})"),
    };
}

OracleLlm two_cats_oracle() {
    OracleLlm oracle(two_cats_script());
    oracle.box_for["ginger-cat"] = {0.375, 0.625, 0.625, 0.875};
    oracle.box_for["teddy-bear"] = {0.0, 0.75, 0.125, 1.0};
    return oracle;
}

namespace {

struct SessionRun {
    Json parsed_graph;
    Json archive;
};

void expect_status(const ApiResponse& r, int status, const char* what) {
    if (r.status != status) throw Error(ErrorCode::PreconditionViolation, what, r.body.dump());
}

SessionRun run_session(const std::shared_ptr<llm::ChatProvider>& provider, const Json& segmenter_seed,
                       const std::vector<std::uint8_t>& png, std::uint64_t seed, const std::vector<Json>& edits) {
    auto segmenter = std::make_shared<MockSegmenter>(MockSegmenter::from_json(segmenter_seed));
    auto executor = std::make_shared<LocalExecutor>(std::make_shared<ToyBackend>(), segmenter);
    EditService service({provider, segmenter, executor, {}, 1.0, 0});

    auto created = service.create_project({{"image", base64_encode(png)}, {"seed", seed}});
    expect_status(created, 201, "session parse failed");
    const std::string id = created.body.at("id");
    for (const auto& delta : edits) {
        auto preview = service.preview_edit(id, {{"delta", delta}});
        expect_status(preview, 200, "session preview failed");
        auto job = service.confirm_edit(id, preview.body.at("edit_id"));
        expect_status(job, 202, "session confirm failed");
        service.wait_idle();
        auto done = service.get_job(job.body.at("job_id"));
        if (done.body.at("status") != "done") throw Error(ErrorCode::PreconditionViolation, "session job failed", done.body.dump());
        expect_status(service.evaluate(id, Json::object()), 200, "session evaluation failed");
    }
    auto exported = service.export_project(id);
    expect_status(exported, 200, "session export failed");
    return {created.body.at("graph"), exported.body};
}

}  // namespace

void write_two_cats_fixtures(const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto png = encode_png(two_cats_image());
    write_file((dir / "image.png").string(), png);
    const Json seed = two_cats_segmenter_seed();
    write_text_file((dir / "segmenter_seed.json").string(), seed.dump(2) + "\n");
    Json edits = Json::array();
    for (const auto& d : two_cats_session()) edits.push_back(d);
    write_text_file((dir / "session.json").string(), Json{{"seed", kTwoCatsSeed}, {"edits", edits}}.dump(2) + "\n");

    OracleLlm oracle = two_cats_oracle();
    auto inner = oracle.provider();
    auto transcript = std::make_shared<llm::Transcript>();
    auto recorder = std::make_shared<llm::RecordingProvider>(*inner, transcript);
    const auto run = run_session(recorder, seed, png, kTwoCatsSeed, two_cats_session());
    write_text_file((dir / "golden_graph.json").string(), dump_graph(graph_from_json(run.parsed_graph)));
    write_text_file((dir / "transcript.jsonl").string(), transcript->to_jsonl());
}

ReplayOutcome replay_two_cats(const std::filesystem::path& dir) {
    const auto session = parse_json(read_text_file((dir / "session.json").string()));
    std::vector<Json> edits(session.at("edits").begin(), session.at("edits").end());
    auto transcript = std::make_shared<const llm::Transcript>(llm::Transcript::load((dir / "transcript.jsonl").string()));
    auto replay = std::make_shared<llm::ReplayProvider>(transcript);
    const auto run = run_session(replay, parse_json(read_text_file((dir / "segmenter_seed.json").string())),
                                 read_file((dir / "image.png").string()), session.at("seed").get<std::uint64_t>(), edits);
    return {dump_graph(graph_from_json(run.parsed_graph)), run.archive.dump()};
}

std::filesystem::path fixture_dir() { return std::filesystem::path(SGEDIT_FIXTURE_DIR) / "two_cats"; }

SceneGraph random_graph(std::mt19937_64& rng, int max_nodes) {
    static const char* kLabels[] = {"cat", "dog", "table", "lamp", "sofa", "teddy bear", "vase", "chair", "floor", "wall", "window", "person"};
    static const char* kPredicates[] = {"on", "next to", "in front of", "behind", "holding", "under"};
    auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
    SceneGraph g;
    g.image_size = kCanvas;
    const int n = 1 + pick(max_nodes);
    for (int i = 0; i < n; ++i) {
        ObjectNode node;
        node.label = kLabels[pick(12)];
        node.id = unique_node_id(g, slugify(node.label));
        const int x0 = pick(7), y0 = pick(7);
        const int x1 = x0 + 1 + pick(8 - x0);
        const int y1 = y0 + 1 + pick(8 - y0);
        const PixelRect rect{x0 * 8, y0 * 8, x1 * 8, y1 * 8};
        node.bbox = BoundingBox::from_pixels(rect, kCanvas);
        node.mask = RegionMask::from_rect(kCanvas, rect);
        node.caption = "A " + node.label + ".";
        node.background = node.label == "floor" || node.label == "wall";
        g.nodes.push_back(std::move(node));
    }
    const int edges = pick(2 * n + 1);
    std::set<std::pair<std::string, std::string>> pairs;
    for (int e = 0; e < edges && n > 1; ++e) {
        const auto& s = g.nodes[static_cast<std::size_t>(pick(n))].id;
        const auto& o = g.nodes[static_cast<std::size_t>(pick(n))].id;
        if (s == o || !pairs.insert({s, o}).second) continue;
        g.edges.push_back({s, kPredicates[pick(6)], o});
    }
    return g;
}

}  // namespace sgedit::testing
