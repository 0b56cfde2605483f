// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgedit/llm/chat.hpp"
#include "sgedit/llm/prompt_template.hpp"
#include "sgedit/llm/reply_parser.hpp"
#include "sgedit/prompt_library.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <thread>

#include <gtest/gtest.h>

#include "sgedit/error.hpp"

namespace sgedit::llm {
namespace {

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::PreconditionViolation;
}

TEST(PromptTemplate, RendersAndListsPlaceholders) {
    EXPECT_EQ(placeholders("a {{x}} b {{y}} {{x}}"), (std::vector<std::string>{"x", "y"}));
    EXPECT_EQ(render_text("a {{x}} b", {{"x", "1"}}), "a 1 b");
    EXPECT_EQ(code_of([] { render_text("{{missing}}", {}); }), ErrorCode::UnboundPlaceholder);
}

TEST(PromptTemplate, TurnLayout) {
    PromptTemplate t{"t", "sys", "q {{v}}", {{"in", "out"}}};
    const auto turns = render_template(t, {{"v", "7"}});
    ASSERT_EQ(turns.size(), 4u);
    EXPECT_EQ(turns[0].role, Role::System);
    EXPECT_EQ(turns[1].content, "in");
    EXPECT_EQ(turns[2].role, Role::Assistant);
    EXPECT_EQ(turns[3].content, "q 7");
}

TEST(PromptLibrary, ExamplesParseWithTheirSchema) {
    for (const auto& s : prompts::shipped_templates()) {
        EXPECT_FALSE(s.tpl->name.empty());
        EXPECT_FALSE(s.tpl->system.empty());
        if (!s.schema) continue;
        for (const auto& ex : s.tpl->examples) {
            EXPECT_NO_THROW((void)parse_tagged_reply(ex.reply, *s.schema)) << s.tpl->name << ": " << ex.reply;
        }
    }
}

TEST(ReplyParser, InlineAndFencedBlocks) {
    const auto a = parse_reply_as<ObjectListReply>("Sure.\nobjects: [\"cat\", \"dog\"]\nbackground: [\"floor\"]", ReplySchema::ObjectList);
    EXPECT_EQ(a.objects, (std::vector<std::string>{"cat", "dog"}));
    EXPECT_EQ(a.background, (std::vector<std::string>{"floor"}));
    const auto b = parse_reply_as<RelationListReply>("```relations\n[[\"cat\",\"on\",\"mat\"]]\n```", ReplySchema::RelationList);
    ASSERT_EQ(b.relations.size(), 1u);
    EXPECT_EQ(b.relations[0], (Triple{"cat", "on", "mat"}));
    const auto c = parse_reply_as<TextReply>(R"({"caption": "A cat."})", ReplySchema::Caption);
    EXPECT_EQ(c.text, "A cat.");
    const auto d = parse_reply_as<EditPlanReplyValue>(R"(plan: {"remove":["a"],"insert":[{"id":"b","bbox":[0,0,2,1]},{"id":"c"}]})",
                                                      ReplySchema::EditPlanReply);
    EXPECT_EQ(d.remove, (std::vector<std::string>{"a"}));
    ASSERT_EQ(d.insert.size(), 2u);
    EXPECT_EQ(d.insert[0].bbox, (std::array<double, 4>{0, 0, 2, 1}));
    EXPECT_FALSE(d.insert[1].bbox.has_value());
    EXPECT_EQ(parse_reply_as<ChecklistReplyValue>("scores: [3, 0, 1.5]", ReplySchema::ChecklistReply).scores,
              (std::vector<double>{3, 0, 1.5}));
}

TEST(ReplyParser, KeyMustBeWholeWord) {
    EXPECT_FALSE(find_tagged_block("subobjects: [1]", "objects").has_value());
    EXPECT_TRUE(find_tagged_block("x objects: [1]", "objects").has_value());
}

TEST(ReplyParser, Malformed) {
    EXPECT_EQ(code_of([] { parse_tagged_reply("nothing here", ReplySchema::ObjectList); }), ErrorCode::MalformedReply);
    EXPECT_EQ(code_of([] { parse_tagged_reply("relations: [[\"a\",\"b\"]]", ReplySchema::RelationList); }), ErrorCode::MalformedReply);
    EXPECT_EQ(code_of([] { parse_tagged_reply("bbox: [0.5, 0, 0.2, 1]", ReplySchema::BBoxReply); }), ErrorCode::MalformedReply);
    EXPECT_EQ(code_of([] { parse_tagged_reply("caption: \"  \"", ReplySchema::Caption); }), ErrorCode::MalformedReply);
    EXPECT_EQ(code_of([] { parse_tagged_reply("scores: [\"x\"]", ReplySchema::ChecklistReply); }), ErrorCode::MalformedReply);
}

std::vector<ChatTurn> request(std::string text, std::vector<std::uint8_t> image = {}) {
    std::vector<ChatTurn> t = {{Role::System, "sys", {}}, {Role::User, std::move(text), {}}};
    if (!image.empty()) t[1].attachments.push_back({"image/png", std::move(image)});
    return t;
}

TEST(Transcript, RecordThenReplay) {
    FunctionProvider echo([](const std::vector<ChatTurn>& t) { return "reply to " + t.back().content; });
    auto transcript = std::make_shared<Transcript>();
    RecordingProvider rec(echo, transcript);
    EXPECT_EQ(complete_chat(request("a"), rec), "reply to a");
    EXPECT_EQ(complete_chat(request("b", {1, 2}), rec), "reply to b");
    EXPECT_EQ(transcript->size(), 2u);

    auto loaded = std::make_shared<const Transcript>(Transcript::parse_jsonl(transcript->to_jsonl()));
    ReplayProvider replay(loaded);
    EXPECT_EQ(complete_chat(request("b", {1, 2}), replay), "reply to b");
    EXPECT_EQ(complete_chat(request("a"), replay), "reply to a");
    EXPECT_EQ(code_of([&] { complete_chat(request("b", {1, 3}), replay); }), ErrorCode::ReplayMiss);
    EXPECT_EQ(code_of([&] { complete_chat(request("c"), replay); }), ErrorCode::ReplayMiss);
}

TEST(Transcript, FingerprintUsesAttachmentHash) {
    EXPECT_EQ(fingerprint(request("x", {9})), fingerprint(request("x", {9})));
    EXPECT_NE(fingerprint(request("x", {9})), fingerprint(request("x", {8})));
    EXPECT_NE(fingerprint(request("x")), fingerprint(request("y")));
    const auto canon = canonical_request(request("x", {9})).dump();
    EXPECT_EQ(canon.find("\"bytes\""), std::string::npos);
}

TEST(Transcript, RejectsBadLines) {
    EXPECT_EQ(code_of([] { Transcript::parse_jsonl("{not json}\n"); }), ErrorCode::InvalidFormat);
    EXPECT_EQ(code_of([] { Transcript::parse_jsonl("{\"reply\":\"x\"}\n"); }), ErrorCode::InvalidFormat);
}

TEST(Chat, ValidatesTurns) {
    UnavailableProvider none;
    EXPECT_EQ(code_of([&] { complete_chat({}, none); }), ErrorCode::PreconditionViolation);
    EXPECT_EQ(code_of([&] { complete_chat(request("x"), none); }), ErrorCode::ProviderUnavailable);
}

class FakeChatServer : public ::testing::Test {
  protected:
    void SetUp() override {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            ++hits_;
            last_body_ = nlohmann::json::parse(req.body);
            last_auth_ = req.get_header_value("Authorization");
            if (fail_first_ && hits_ == 1) {
                res.status = 503;
                return;
            }
            res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"objects: [\"cat\"]"}}]})", "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    void TearDown() override {
        server_.stop();
        thread_.join();
    }

    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    int hits_ = 0;
    bool fail_first_ = false;
    nlohmann::json last_body_;
    std::string last_auth_;
};

TEST_F(FakeChatServer, PostsOpenAiFormat) {
    HttpChatProvider p({"http://127.0.0.1:" + std::to_string(port_), "m1", "k", 0, 5});
    EXPECT_EQ(p.complete(request("hi", {1, 2, 3})), "objects: [\"cat\"]");
    EXPECT_EQ(last_body_.at("model"), "m1");
    EXPECT_EQ(last_auth_, "Bearer k");
    const auto& user = last_body_.at("messages").at(1).at("content");
    ASSERT_TRUE(user.is_array());
    EXPECT_EQ(user.at(1).at("image_url").at("url"), "data:image/png;base64,AQID");
}

TEST_F(FakeChatServer, RetriesServerErrors) {
    fail_first_ = true;
    HttpChatProvider p({"http://127.0.0.1:" + std::to_string(port_), "m", "", 1, 5});
    EXPECT_EQ(p.complete(request("hi")), "objects: [\"cat\"]");
    EXPECT_EQ(hits_, 2);
}

TEST(HttpChatProvider, UnreachableIsUnavailable) {
    HttpChatProvider p({"http://127.0.0.1:1", "m", "", 0, 1});
    EXPECT_EQ(code_of([&] { p.complete(request("hi")); }), ErrorCode::ProviderUnavailable);
}

}  // namespace
}  // namespace sgedit::llm
