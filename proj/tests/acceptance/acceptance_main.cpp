// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "oracle_llm.hpp"
#include "sgedit/attention.hpp"
#include "sgedit/backend.hpp"
#include "sgedit/concept_planner.hpp"
#include "sgedit/edit_controller.hpp"
#include "sgedit/error.hpp"
#include "sgedit/evaluator.hpp"
#include "sgedit/graph_json.hpp"
#include "sgedit/sampling.hpp"

namespace {

using sgedit::attn::Matrix;
using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void check(bool ok, const std::string& what) {
        if (!ok && pass) detail << what;
        pass = pass && ok;
    }
};

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double scale) {
    std::normal_distribution<double> n(0.0, scale);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = n(rng);
    }
    return m;
}

// Reference softmax over the unmasked keys only.
Matrix oracle_masked_weights(const Matrix& q, const Matrix& k, const std::vector<bool>& keep) {
    const double inv = 1.0 / std::sqrt(static_cast<double>(q.cols()));
    Matrix w = Matrix::Zero(q.rows(), k.rows());
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
        double hi = -std::numeric_limits<double>::infinity();
        std::vector<double> s(static_cast<std::size_t>(k.rows()));
        for (Eigen::Index j = 0; j < k.rows(); ++j) {
            double dot = 0.0;
            for (Eigen::Index c = 0; c < q.cols(); ++c) dot += q(i, c) * k(j, c);
            s[static_cast<std::size_t>(j)] = dot * inv;
            if (keep[static_cast<std::size_t>(j)]) hi = std::max(hi, s[static_cast<std::size_t>(j)]);
        }
        double total = 0.0;
        for (Eigen::Index j = 0; j < k.rows(); ++j) {
            if (keep[static_cast<std::size_t>(j)]) total += std::exp(s[static_cast<std::size_t>(j)] - hi);
        }
        for (Eigen::Index j = 0; j < k.rows(); ++j) {
            if (keep[static_cast<std::size_t>(j)]) w(i, j) = std::exp(s[static_cast<std::size_t>(j)] - hi) / total;
        }
    }
    return w;
}

void criterion_removal(Outcome& out) {
    std::mt19937_64 rng(101);
    int instances = 0;
    while (instances < 1000) {
        const int nq = 1 + static_cast<int>(rng() % 16);
        const int nk = 1 + static_cast<int>(rng() % 16);
        const int d = 1 + static_cast<int>(rng() % 8);
        // Key masks are laid out as an nk x 1 column so the mask area equals the key count.
        sgedit::RegionMask mask(1, nk);
        std::vector<bool> keep(static_cast<std::size_t>(nk));
        for (int j = 0; j < nk; ++j) {
            const bool masked = rng() % 3 == 0;
            mask.set(0, j, masked);
            keep[static_cast<std::size_t>(j)] = !masked;
        }
        if (mask.full()) continue;
        ++instances;
        const Matrix q = random_matrix(rng, nq, d, 2.0);
        const Matrix k = random_matrix(rng, nk, d, 2.0);
        const Matrix v = random_matrix(rng, nk, 3, 1.0);

        const Matrix bias = sgedit::attn::removal_bias(mask, nq);
        const Matrix w = sgedit::attn::attention_weights(q, k, &bias);
        const Matrix ref = oracle_masked_weights(q, k, keep);
        for (Eigen::Index i = 0; i < nq; ++i) {
            out.check(std::abs(w.row(i).sum() - 1.0) <= 1e-9, "row sum off by more than 1e-9");
            for (int j = 0; j < nk; ++j) {
                if (!keep[static_cast<std::size_t>(j)]) out.check(w(i, j) == 0.0, "masked key weight not exactly 0");
            }
        }
        out.check((w - ref).cwiseAbs().maxCoeff() <= 1e-12, "weights differ from reference softmax");

        Matrix k2 = k, v2 = v;
        for (int j = 0; j < nk; ++j) {
            if (!keep[static_cast<std::size_t>(j)]) {
                k2.row(j) = random_matrix(rng, 1, d, 50.0);
                v2.row(j) = random_matrix(rng, 1, 3, 50.0);
            }
        }
        const Matrix a = sgedit::attn::removal_attention(q, k, v, mask);
        const Matrix b = sgedit::attn::removal_attention(q, k2, v2, mask);
        out.check(a == b, "output changed under masked-row perturbation");
    }
    out.detail << instances << " instances";
}

void criterion_insertion(Outcome& out) {
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int instances = 0;
    for (int it = 0; it < 1000; ++it) {
        const int w = 1 + static_cast<int>(rng() % 4), h = 1 + static_cast<int>(rng() % 4);
        const int labels = 1 + static_cast<int>(rng() % 3);
        sgedit::SegmentMap seg({w, h});
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) seg.set(x, y, static_cast<int>(rng() % static_cast<unsigned>(labels + 1)));
        }
        const bool cross = rng() % 2 == 0;
        std::vector<int> tokens;
        if (cross) {
            const int nt = 1 + static_cast<int>(rng() % 6);
            for (int j = 0; j < nt; ++j) {
                int s = static_cast<int>(rng() % static_cast<unsigned>(labels + 1));
                if (s > 0 && seg.area(s) == 0) s = 0;
                tokens.push_back(s);
            }
            if (seg.area(0) == 0) {
                for (auto& t : tokens) t = t == 0 ? seg.at(0, 0) : t;
            }
        }
        sgedit::attn::Correspondence corr;
        try {
            corr = sgedit::attn::build_correspondence(seg, cross ? sgedit::attn::KeyKind::Cross : sgedit::attn::KeyKind::Self, tokens);
        } catch (const sgedit::Error&) {
            continue;
        }
        ++instances;
        const Eigen::Index nq = corr.r.rows(), nk = corr.r.cols();
        const Matrix scores = random_matrix(rng, nq, nk, 3.0);
        const double lambda = unit(rng);
        const Matrix x = sgedit::attn::insertion_bias(scores, corr, lambda);
        const Matrix moved = scores + x;
        for (Eigen::Index i = 0; i < nq; ++i) {
            const double lo = scores.row(i).minCoeff(), hi = scores.row(i).maxCoeff();
            for (Eigen::Index j = 0; j < nk; ++j) {
                if (corr.r(i, j) == 1.0) out.check(x(i, j) >= 0.0, "X negative where R=1");
                if (corr.r(i, j) == 0.0) out.check(x(i, j) <= 0.0, "X positive where R=0");
                out.check(moved(i, j) >= lo && moved(i, j) <= hi, "modulated score left its row range");
            }
        }
        // At the edge of the safe range, R=1 entries reach the row maximum.
        Matrix s_zero = corr.s;
        s_zero.setZero();
        const sgedit::attn::Correspondence hard{corr.r, s_zero};
        const Matrix edge = scores + sgedit::attn::insertion_bias(scores, hard, 1.0);
        for (Eigen::Index i = 0; i < nq; ++i) {
            const double hi = scores.row(i).maxCoeff(), lo = scores.row(i).minCoeff();
            for (Eigen::Index j = 0; j < nk; ++j) {
                const double want = corr.r(i, j) == 1.0 ? hi : lo;
                out.check(std::abs(edge(i, j) - want) <= 1e-12, "lambda(1-S)=1 does not reach the row bound");
            }
        }
        out.check(sgedit::attn::insertion_bias(scores, corr, 0.0).isZero(0.0), "lambda=0 bias is not zero");
    }
    for (int it = 0; it < 200; ++it) {
        const double lmax = 0.1 + 4.0 * unit(rng);
        out.check(sgedit::attn::lambda_schedule(0.0, lmax) == 0.0, "lambda_t(0) != 0");
        out.check(sgedit::attn::lambda_schedule(1.0, lmax) == lmax, "lambda_t(1) != lambda_max");
        const double t = unit(rng);
        out.check(std::abs(sgedit::attn::lambda_schedule(t, lmax) - lmax * t * t * t * t) <= 1e-15, "lambda_t is not quartic");
    }
    out.detail << instances << " instances";
}

void criterion_constants(Outcome& out) {
    const int expected[] = {800, 800, 1000, 1200, 1200};
    for (int n = 1; n <= 5; ++n) {
        const auto s = sgedit::training_schedule(n);
        out.check(s.steps == expected[n - 1], "training steps for n=" + std::to_string(n));
        out.check(s.lr_token == 5e-4 && s.lr_joint == 2e-6, "learning rates");
    }
    const sgedit::PhaseSchedule d;
    out.check(d.t_m == 0.8 && d.t_n == 0.6, "default phase boundaries");
    out.check(sgedit::non_object_prompt() == "A photo with no objects or people, only the background.", "non-object prompt");
    out.detail << "schedule 800/800/1000/1200/1200, T_m=0.8, T_n=0.6";
}

std::set<std::string> removal_ids(const sgedit::EditPlan& p) {
    std::set<std::string> s;
    for (const auto& r : p.removals) s.insert(r.node_id);
    return s;
}

std::set<std::string> insertion_ids(const sgedit::EditPlan& p) {
    std::set<std::string> s;
    for (const auto& r : p.insertions) s.insert(r.node_id);
    return s;
}

void criterion_planner(Outcome& out) {
    std::mt19937_64 rng(404);
    sgedit::testing::OracleLlm oracle;
    auto provider = oracle.provider();
    int plans = 0;
    for (int g = 0; g < 200; ++g) {
        const auto graph = sgedit::testing::random_graph(rng, 8);
        const auto& x = graph.nodes[rng() % graph.nodes.size()];
        using Set = std::set<std::string>;

        const auto rm = sgedit::plan_edit(graph, {{sgedit::RemoveNode{x.id}}}, *provider);
        out.check(removal_ids(rm) == Set{x.id} && insertion_ids(rm).empty(), "remove plan");
        if (!rm.removals.empty()) out.check(rm.removals[0].mask == *x.mask, "removal mask is not the node mask");

        sgedit::AddNode add{"", "kite", {}};
        const auto ad = sgedit::plan_edit(graph, {{add}}, *provider);
        const auto new_id = sgedit::unique_node_id(graph, "kite");
        out.check(removal_ids(ad).empty() && insertion_ids(ad) == Set{new_id}, "add plan");

        const auto rp = sgedit::plan_edit(graph, {{sgedit::ReplaceNode{x.id, "robot"}}}, *provider);
        out.check(removal_ids(rp) == Set{x.id} && insertion_ids(rp) == Set{x.id}, "replace plan");
        if (!rp.insertions.empty()) out.check(rp.insertions[0].label == "robot", "replace inserts the new label");
        plans += 3;

        if (!graph.edges.empty()) {
            const auto& e = graph.edges[rng() % graph.edges.size()];
            std::string pred = "beside";
            while (graph.has_edge({e.subject, pred, e.object})) pred += "s";
            const auto me = sgedit::plan_edit(graph, {{sgedit::ModifyEdge{e, pred}}}, *provider);
            out.check(removal_ids(me) == Set{e.subject} && insertion_ids(me) == Set{e.subject}, "modify-edge plan");
            ++plans;
        }
    }
    out.detail << plans << " plans over 200 graphs";
}

double oracle_psnr(const sgedit::Image& a, const sgedit::Image& b, const sgedit::RegionMask& exclude) {
    double sum = 0.0;
    long n = 0;
    for (int y = 0; y < a.height; ++y) {
        for (int x = 0; x < a.width; ++x) {
            if (exclude.at(x, y)) continue;
            for (int c = 0; c < 3; ++c) {
                const double d = a.at(x, y, c) - b.at(x, y, c);
                sum += d * d;
                ++n;
            }
        }
    }
    const double mse = sum / static_cast<double>(n);
    return mse == 0.0 ? std::numeric_limits<double>::infinity() : 10.0 * std::log10(1.0 / mse);
}

sgedit::EditPlan two_cats_plan(const sgedit::GraphDelta& delta) {
    auto oracle = sgedit::testing::two_cats_oracle();
    auto provider = oracle.provider();
    const auto graph = sgedit::parse_graph(sgedit::read_text_file((sgedit::testing::fixture_dir() / "golden_graph.json").string()));
    return sgedit::plan_edit(graph, delta, *provider);
}

void criterion_toy(Outcome& out) {
    const auto img = sgedit::testing::two_cats_image();
    sgedit::ToyBackend backend;
    out.check(backend.steps() == 20, "toy backend is not N=20");
    const auto z0 = backend.encode(img);
    out.check(z0.width == 8 && z0.height == 8, "latent is not 8x8");

    const auto traj = sgedit::ddim_invert(img, sgedit::kNonObjectPrompt, backend);
    const double round_trip = sgedit::max_abs_diff(sgedit::sample(traj.noise(), sgedit::kNonObjectPrompt, backend), traj.clean());
    out.check(round_trip < 1e-6, "DDIM round trip error");

    const auto rm_plan = two_cats_plan({{sgedit::RemoveNode{"ginger-cat"}}});
    auto run_rm = [&] { return sgedit::execute_plan(rm_plan, img, {}, backend, nullptr); };
    const auto removed = run_rm();
    const double rm_psnr = oracle_psnr(img, removed.image, rm_plan.removals.at(0).mask);
    out.check(rm_psnr >= 60.0, "removal PSNR outside the mask");
    out.check(run_rm().image == removed.image, "removal not bit-identical under the same seed");

    sgedit::AddNode add{"", "teddy bear", {{"", "on", "floor"}}};
    const auto ins_plan = two_cats_plan({{add}});
    sgedit::MockSegmenter seg = sgedit::MockSegmenter::from_json(sgedit::testing::two_cats_segmenter_seed());
    sgedit::ExecutionOptions opts;
    opts.seed = 99;
    auto run_ins = [&] { return sgedit::execute_plan(ins_plan, img, opts, backend, &seg); };
    const auto inserted = run_ins();
    const auto* node = inserted.graph.find(ins_plan.insertions.at(0).node_id);
    out.check(node != nullptr && node->mask.has_value(), "inserted node has no mask");
    const double ins_psnr = node && node->mask ? oracle_psnr(img, inserted.image, *node->mask) : 0.0;
    out.check(ins_psnr >= 60.0, "insertion PSNR outside M_seg");
    out.check(run_ins().image == inserted.image, "insertion not bit-identical under the same seed");
    out.check(inserted.image != img, "insertion left the image unchanged");

    out.detail.precision(3);
    out.detail << "round trip " << round_trip << ", removal " << rm_psnr << " dB, insertion " << ins_psnr << " dB";
}

void criterion_phases(Outcome& out) {
    const auto img = sgedit::testing::two_cats_image();
    struct Case {
        int steps;
        double t_m, t_n;
    };
    const Case cases[] = {{20, 0.8, 0.6}, {50, 0.8, 0.6}, {10, 0.8, 0.6}, {20, 0.9, 0.3}, {40, 0.75, 0.5}};
    int verified = 0;
    for (const auto& c : cases) {
        sgedit::ToyConfig cfg;
        cfg.steps = c.steps;
        sgedit::ToyBackend backend(cfg);
        sgedit::AddNode a{"", "teddy bear", {{"", "on", "floor"}}};
        sgedit::AddNode b{"", "ball", {{"", "on", "floor"}}};
        const auto plan = two_cats_plan({{a, b}});
        sgedit::ExecutionOptions opts;
        opts.schedule = {c.t_m, c.t_n, c.steps};
        backend.clear_trace();
        sgedit::execute_plan(plan, img, opts, backend, nullptr);
        int object = 0, combined = 0, blend = 0;
        std::set<int> object_steps;
        for (const auto& t : backend.trace()) {
            if (t.op != "denoise") continue;
            if (t.phase == "object") {
                ++object;
                object_steps.insert(t.step);
            }
            combined += t.phase == "combined";
            blend += t.phase == "blend";
        }
        const auto n = static_cast<double>(c.steps);
        const int want_object = static_cast<int>(std::lround((1.0 - c.t_m) * n));
        const int want_combined = static_cast<int>(std::lround((c.t_m - c.t_n) * n));
        const int want_blend = static_cast<int>(std::lround(c.t_n * n));
        const std::string tag = " (N=" + std::to_string(c.steps) + ")";
        out.check(static_cast<int>(object_steps.size()) == want_object, "per-object step count" + tag);
        out.check(object == want_object * static_cast<int>(plan.insertions.size()), "per-object call count" + tag);
        out.check(combined == want_combined, "combined step count" + tag);
        out.check(blend == want_blend, "blend step count" + tag);
        ++verified;
    }
    out.detail << verified << " schedules traced";
}

void criterion_evaluator(Outcome& out) {
    sgedit::Checklist ec{sgedit::Metric::ElementComposition, {}};
    for (double s : {3.0, 3.0, 0.0, 3.0}) ec.items.push_back({"item", sgedit::kCompositionScale, s});
    out.check(std::abs(ec.normalized() - 0.75) <= 1e-12, "EC [3,3,0,3]");
    sgedit::Checklist iq{sgedit::Metric::ImageQuality, {}};
    for (double s : {2.0, 1.0, 0.0, 1.0}) iq.items.push_back({"item", sgedit::kQualityScale, s});
    out.check(std::abs(iq.normalized() - 0.5) <= 1e-12, "IQ [2,1,0,1]");
    sgedit::Checklist ra{sgedit::Metric::RelationAlignment, {}};
    for (double s : {3.0, 0.0, 0.0}) ra.items.push_back({"item", sgedit::kRelationScale, s});
    out.check(std::abs(ra.normalized() - 1.0 / 3.0) <= 1e-12, "RA [3,0,0]");

    const double xs[] = {1, 2, 3}, ys[] = {2, 4, 7};
    out.check(std::abs(sgedit::pearson(xs, ys) - 15.0 / std::sqrt(228.0)) <= 1e-9, "pearson (1,2),(2,4),(3,7)");
    const double ys_neg[] = {3, 2, 1};
    out.check(std::abs(sgedit::pearson(xs, ys_neg) + 1.0) <= 1e-9, "pearson perfect negative");
    const double zs[] = {5, 1, 5};
    out.check(std::abs(sgedit::pearson(xs, zs)) <= 1e-9, "pearson zero correlation");

    sgedit::Image a(32, 32, 3, 0.5), b(32, 32, 3, 0.6);
    const auto m = sgedit::background_metrics(a, b, sgedit::RegionMask(32, 32));
    out.check(std::abs(m.mse - 0.01) <= 1e-9, "uniform offset MSE");
    out.check(std::abs(m.psnr - 20.0) <= 1e-6, "uniform offset PSNR");
    out.detail << "EC 0.75, MSE " << m.mse << ", PSNR " << m.psnr << " dB";
}

void criterion_replay(Outcome& out) {
    const auto dir = sgedit::testing::fixture_dir();
    const auto first = sgedit::testing::replay_two_cats(dir);
    const auto second = sgedit::testing::replay_two_cats(dir);
    out.check(first.archive == second.archive, "archives differ across runs");
    out.check(first.parsed_graph == sgedit::read_text_file((dir / "golden_graph.json").string()), "parsed graph differs from golden");
    out.detail << first.archive.size() << "-byte archive";
}

struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<void(Outcome&)> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "attention removal invariants", 10.0, criterion_removal},
        {2, "insertion modulation", 10.0, criterion_insertion},
        {3, "training and phase constants", 0.0, criterion_constants},
        {4, "planner oracle equivalence", 0.0, criterion_planner},
        {5, "toy end-to-end", 30.0, criterion_toy},
        {6, "phase accounting", 0.0, criterion_phases},
        {7, "evaluator arithmetic", 0.0, criterion_evaluator},
        {8, "replay determinism", 0.0, criterion_replay},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Outcome out;
        const auto start = Clock::now();
        try {
            c.run(out);
        } catch (const std::exception& e) {
            out.check(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(Clock::now() - start).count();
        if (c.limit_s > 0.0) out.check(secs < c.limit_s, "runtime limit exceeded");
        std::printf("criterion %d %-32s %s  %.2fs  %s\n", c.id, c.name, out.pass ? "PASS" : "FAIL", secs, out.detail.str().c_str());
        failed += out.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
