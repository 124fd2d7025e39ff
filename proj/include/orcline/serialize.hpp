#pragma once

#include <orcline/mts/product.hpp>
#include <orcline/orc/explore.hpp>
#include <orcline/orc/semantics.hpp>
#include <orcline/value.hpp>

#include <json.hpp>

#include <string>

// JSON views of runtime data. Values appear either plain (signal as null,
// tuples as arrays) or tagged as {"t": type, "v": plain}.

namespace orcline {

using Json = nlohmann::ordered_json;

inline Json plain_json(const Value& v)
{
    if (v.is_signal()) {
        return nullptr;
    }
    if (v.is_bool()) {
        return v.as_bool();
    }
    if (v.is_int()) {
        return v.as_int();
    }
    if (v.is_string()) {
        return v.as_string();
    }
    Json out = Json::array();
    for (const auto& x : v.as_tuple()) {
        out.push_back(plain_json(x));
    }
    return out;
}

inline Json tagged_json(const Value& v)
{
    return {{"t", v.type_name()}, {"v", plain_json(v)}};
}

inline Json bag_json(const ValueBag& bag)
{
    Json out = Json::array();
    for (const auto& v : bag) {
        out.push_back(plain_json(v));
    }
    return out;
}

namespace orc {

inline Json event_json(const Event& e)
{
    Json j{{"kind", event_kind(e)}};
    if (const auto* p = std::get_if<event::Publish>(&e)) {
        j["value"] = tagged_json(p->value);
    } else if (const auto* c = std::get_if<event::Call>(&e)) {
        j["site"] = c->site;
        j["handle"] = c->handle;
        Json args = Json::array();
        for (const auto& a : c->args) {
            args.push_back(tagged_json(a));
        }
        j["args"] = std::move(args);
    } else if (const auto* r = std::get_if<event::Return>(&e)) {
        j["handle"] = r->handle;
        j["value"] = tagged_json(r->value);
    }
    return j;
}

/// One JSON object per line.
inline std::string trace_jsonl(const Trace& t)
{
    std::string out;
    for (const auto& entry : t.events) {
        Json j{{"clock", entry.clock}};
        const Json ev = event_json(entry.event);
        for (const auto& [k, v] : ev.items()) {
            j[k] = v;
        }
        out += j.dump() + "\n";
    }
    return out;
}

inline const char* status_name(RunStatus s)
{
    switch (s) {
        case RunStatus::Halted: return "halted";
        case RunStatus::DepthTruncated: return "depth-truncated";
        case RunStatus::StepBoundExceeded: return "step-bound-exceeded";
    }
    return "?";
}

inline Json outcomes_json(const Outcomes& o)
{
    Json complete = Json::array();
    for (const auto& bag : o.complete) {
        complete.push_back(bag_json(bag));
    }
    Json truncated = Json::array();
    for (const auto& bag : o.truncated) {
        truncated.push_back(bag_json(bag));
    }
    return {{"complete", complete}, {"truncated", truncated}};
}

inline const char* status_name(StateStatus s)
{
    switch (s) {
        case StateStatus::Expanded: return "expanded";
        case StateStatus::Halted: return "halted";
        case StateStatus::DepthTruncated: return "depth-truncated";
        case StateStatus::Unexpanded: return "unexpanded";
    }
    return "?";
}

inline Json explored_json(const ExploredLts& lts)
{
    Json states = Json::array();
    for (std::size_t i = 0; i < lts.states.size(); ++i) {
        states.push_back({{"id", "s" + std::to_string(i)},
                          {"status", status_name(lts.status[i])},
                          {"expr", render(lts.states[i].expr)},
                          {"clock", lts.states[i].clock}});
    }
    Json transitions = Json::array();
    for (const auto& t : lts.transitions) {
        Json j{{"source", "s" + std::to_string(t.source)},
               {"target", "s" + std::to_string(t.target)},
               {"label", event_label(t.event)},
               {"rule", t.rule}};
        if (t.hidden_by) {
            j["hidden_by"] = *t.hidden_by;
        }
        transitions.push_back(std::move(j));
    }
    return {{"initial", "s0"},
            {"states", states},
            {"transitions", transitions},
            {"truncated", lts.truncated},
            {"outcomes", outcomes_json(lts.outcomes)}};
}

}  // namespace orc

namespace mts {

inline Json product_check_json(const ProductCheck& c, const Lts& p, const Mts& f)
{
    auto pair_json = [&](StateId qp, StateId qf) {
        return Json::array({p.states().name(qp), f.states().name(qf)});
    };
    Json j{{"product", c.holds}, {"rounds", c.rounds}, {"relation_sizes", c.relation_sizes}};
    if (c.holds) {
        Json w = Json::array();
        for (const auto& [qp, qf] : c.witness.pairs) {
            w.push_back(pair_json(qp, qf));
        }
        j["witness"] = std::move(w);
    }
    if (c.failure) {
        j["failure"] = {{"clause", c.failure->clause == Clause::MustPreserved ? "i" : "ii"},
                        {"description", clause_name(c.failure->clause)},
                        {"pair", pair_json(c.failure->product_state, c.failure->family_state)},
                        {"action", c.failure->action},
                        {"round", c.failure->round}};
    }
    Json local = Json::array();
    for (const auto& v : c.first_round) {
        local.push_back({{"clause", v.clause == Clause::MustPreserved ? "i" : "ii"},
                         {"pair", pair_json(v.product_state, v.family_state)},
                         {"action", v.action}});
    }
    j["first_round"] = std::move(local);
    Json defects = Json::array();
    for (const auto& v : c.reachable_defects) {
        defects.push_back({{"clause", v.clause == Clause::MustPreserved ? "i" : "ii"},
                           {"pair", pair_json(v.product_state, v.family_state)},
                           {"action", v.action}});
    }
    j["reachable_defects"] = std::move(defects);
    return j;
}

}  // namespace mts

}  // namespace orcline
