// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgedit/prompt_library.hpp"

namespace sgedit::prompts {

using llm::PromptTemplate;
using llm::ReplySchema;

const PromptTemplate& describe_scene() {
    static const PromptTemplate t{
        "describe_scene",
        "You are a careful visual analyst. You describe photographs precisely and never invent objects that are "
        "not visible.",
        "Describe the scene in the attached image in two or three sentences. Mention every distinct object, how "
        "the objects are arranged, and what the background consists of.",
        {},
    };
    return t;
}

const PromptTemplate& list_instances() {
    static const PromptTemplate t{
        "list_instances",
        "You turn scene descriptions into the node list of a scene graph. Rules: distinguish foreground instances "
        "of the same kind by their appearance (\"ginger cat\" and \"gray and white cat\", never \"cat 1\"); do not "
        "list accessory parts of an instance as separate instances (a saddle on a horse belongs to the horse); "
        "simplify the background into a few basic elements such as \"field\", \"floor\" or \"wall\". Answer with "
        "two tagged lists and nothing else:\nobjects: [\"...\"]\nbackground: [\"...\"]",
        "Scene description:\n{{description}}\n\nWhat are the main instances in the image?",
        {
            {"Scene description:\nA brown horse with a leather saddle grazes in a green field under a clear sky.\n\n"
             "What are the main instances in the image?",
             "objects: [\"brown horse\"]\nbackground: [\"field\", \"sky\"]"},
            {"Scene description:\nA woman in a red dress sits on a wooden bench next to a small white dog on a "
             "paved path.\n\nWhat are the main instances in the image?",
             "objects: [\"woman in red dress\", \"wooden bench\", \"white dog\"]\nbackground: [\"path\"]"},
        },
    };
    return t;
}

const PromptTemplate& list_relations() {
    static const PromptTemplate t{
        "list_relations",
        "You build the edges of a scene graph. Each edge is a triple [subject, predicate, object] where subject and "
        "object are copied verbatim from the instance list and the predicate is a short spatial or action phrase. "
        "Answer with one tagged list:\nrelations: [[\"subject\", \"predicate\", \"object\"]]",
        "Scene description:\n{{description}}\n\nInstances: {{instances}}\n\nWhat are the relationships between "
        "these instances?",
        {
            {"Scene description:\nA brown horse with a leather saddle grazes in a green field under a clear sky.\n\n"
             "Instances: [\"brown horse\", \"field\", \"sky\"]\n\nWhat are the relationships between these instances?",
             "relations: [[\"brown horse\", \"standing in\", \"field\"]]"},
        },
    };
    return t;
}

const PromptTemplate& caption_object() {
    static const PromptTemplate t{
        "caption_object",
        "You write detailed appearance descriptions of single objects for image generation. Describe attributes, "
        "colors, materials, clothing and anything attached to the object, and the pose when the object is a "
        "person or an animal. Do not describe the background. Answer with one tagged string:\ncaption: \"...\"",
        "Generate a detailed description of the {{label}} inside the region {{bbox}} of the attached image.",
        {
            {"Generate a detailed description of the woman inside the region [0.30, 0.10, 0.70, 0.95] of the "
             "attached image.",
             "caption: \"She is wearing sunglasses, a black puffer jacket, and light-colored pants.\""},
        },
    };
    return t;
}

const PromptTemplate& plan_operations() {
    static const PromptTemplate t{
        "plan_operations",
        "You are the editing controller of a scene-graph image editor. Every modification is carried out as "
        "removals followed by insertions. Removing a node removes its object. Adding a node inserts it. Replacing "
        "a node removes the old object and inserts the new one in its place. Changing a relation removes the "
        "subject and inserts it again according to the new relation. For every inserted object give a bounding "
        "box [x0, y0, x1, y1] in normalized image coordinates that fits the modified scene. Answer with one tagged "
        "object:\nplan: {\"remove\": [\"node id\"], \"insert\": [{\"id\": \"node id\", \"bbox\": [x0, y0, x1, y1]}]}",
        "Scene graph with bounding boxes:\n{{graph}}\n\nUser modifications:\n{{modifications}}\n\nWhich objects "
        "must be removed and which must be inserted, and where?",
        {
            {"Scene graph with bounding boxes:\n{\"nodes\": [{\"id\": \"cake\", \"label\": \"cake\", \"bbox\": [0.3, "
             "0.4, 0.6, 0.7]}, {\"id\": \"table\", \"label\": \"table\", \"bbox\": [0.0, 0.6, 1.0, 1.0]}], "
             "\"edges\": [{\"s\": \"cake\", \"p\": \"on\", \"o\": \"table\"}]}\n\nUser modifications:\n[{\"op\": "
             "\"remove\", \"id\": \"cake\"}]\n\nWhich objects must be removed and which must be inserted, and "
             "where?",
             "plan: {\"remove\": [\"cake\"], \"insert\": []}"},
        },
    };
    return t;
}

const PromptTemplate& combine_prompt() {
    static const PromptTemplate t{
        "combine_prompt",
        "You write a single text-to-image prompt that places several objects together in one photo, integrating "
        "the objects according to their relationships in the scene graph. Use each object name exactly as given, "
        "including any token in angle brackets. Answer with one tagged string:\nprompt: \"...\"",
        "Objects: {{objects}}\nRelationships: {{relations}}",
        {
            {"Objects: [\"<opt_2>\", \"teddy bear\"]\nRelationships: [[\"<opt_2>\", \"holding\", \"teddy bear\"]]",
             "prompt: \"A photo of <opt_2> holding a teddy bear\""},
        },
    };
    return t;
}

const PromptTemplate& score_element_composition() {
    static const PromptTemplate t{
        "score_element_composition",
        "You grade an image edit. The first attached image is the original, the second is the edited result. For "
        "every checklist item, count the matching elements in the edited image before scoring. Score each item "
        "from 0 to 3. Deduct when a required element is missing or over-represented, when an element that should "
        "be removed is still present, or when a preserved element changed its appearance. Answer with one tagged "
        "list holding one score per item, in order:\nscores: [n, ...]",
        "Checklist:\n{{items}}",
        {
            {"Checklist:\n1. add: teddy bear\n2. preserve: sofa", "scores: [3, 2]"},
        },
    };
    return t;
}

const PromptTemplate& score_relation_alignment() {
    static const PromptTemplate t{
        "score_relation_alignment",
        "You grade an image edit. The first attached image is the original, the second is the edited result. "
        "Review each (subject, predicate, object) relationship individually against the edited image: score 3 if "
        "it is depicted correctly and 0 if it is missing. Answer with one tagged list holding one score per item, "
        "in order:\nscores: [n, ...]",
        "Checklist:\n{{items}}",
        {
            {"Checklist:\n1. (teddy bear, on, sofa)", "scores: [3]"},
        },
    };
    return t;
}

const PromptTemplate& score_image_quality() {
    static const PromptTemplate t{
        "score_image_quality",
        "You grade the quality of an edited image (the second attached image; the first is the original). Score "
        "each checklist aspect from 0 (worst) to 2 (best). Answer with one tagged list holding one score per "
        "item, in order:\nscores: [n, ...]",
        "Checklist:\n{{items}}",
        {
            {"Checklist:\n1. anomalies\n2. foreground texture and color\n3. background lighting\n4. overall realism",
             "scores: [2, 1, 2, 2]"},
        },
    };
    return t;
}

std::vector<ShippedTemplate> shipped_templates() {
    return {
        {&describe_scene(), std::nullopt},
        {&list_instances(), ReplySchema::ObjectList},
        {&list_relations(), ReplySchema::RelationList},
        {&caption_object(), ReplySchema::Caption},
        {&plan_operations(), ReplySchema::EditPlanReply},
        {&combine_prompt(), ReplySchema::TextPrompt},
        {&score_element_composition(), ReplySchema::ChecklistReply},
        {&score_relation_alignment(), ReplySchema::ChecklistReply},
        {&score_image_quality(), ReplySchema::ChecklistReply},
    };
}

}  // namespace sgedit::prompts
