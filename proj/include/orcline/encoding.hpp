#pragma once

#include <orcline/diagnostics.hpp>
#include <orcline/fm/model.hpp>
#include <orcline/orc/ast.hpp>

#include <json.hpp>

#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

// Compiles a feature model into an Orc goal expression:
//
//   mandatory siblings      P | Q
//   optional child          Parent <x< Child
//   requires a b            site(a) >x> site(b)   at b's leaf
//   excludes a b            site(a) ; site(b)     at a's leaf, b's leaf dropped
//   alternative {M, N}      flag pattern, see encode_alternative

namespace orcline::encoding {

class UnsupportedGroupSize : public Error
{
   public:
    using Error::Error;
};

class MissingTrigger : public Error
{
   public:
    using Error::Error;
};

class PlanMismatch : public Error
{
   public:
    using Error::Error;
};

struct EncodingPlan {
    std::map<fm::FeatureName, std::string> feature_to_site;
    std::map<std::string, std::pair<std::string, std::string>> trigger_sites;  // by group id
};

namespace detail {

inline bool is_identifier(const std::string& s)
{
    if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) {
        return false;
    }
    for (char c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') {
            return false;
        }
    }
    return true;
}

class Namer
{
   public:
    void reserve(const std::string& name) { used_.insert(name); }

    std::string fresh(const std::string& stem)
    {
        if (used_.insert(stem).second) {
            return stem;
        }
        for (int i = 2;; ++i) {
            std::string name = stem + std::to_string(i);
            if (used_.insert(name).second) {
                return name;
            }
        }
    }

    std::string numbered(const std::string& stem)
    {
        for (;;) {
            std::string name = stem + std::to_string(++counter_);
            if (used_.insert(name).second) {
                return name;
            }
        }
    }

   private:
    std::set<std::string> used_;
    int counter_ = 0;
};

}  // namespace detail

/// Each feature is its own site; each binary group gets two fresh trigger
/// sites named after its members.
inline EncodingPlan default_plan(const fm::FeatureModel& model)
{
    EncodingPlan plan;
    detail::Namer names;
    for (const auto& f : model.features()) {
        plan.feature_to_site[f] = f;
        names.reserve(f);
    }
    for (const auto& g : model.groups()) {
        if (g.members.size() == 2) {
            plan.trigger_sites[g.id] = {names.fresh("pick_" + g.members[0]), names.fresh("pick_" + g.members[1])};
        }
    }
    return plan;
}

/// Reads a plan from a flat JSON object: a string value maps a feature to a
/// site, a two-element array maps an alternative group id ("M,N") to its
/// trigger sites.
inline EncodingPlan plan_from_json(const nlohmann::json& j)
{
    if (!j.is_object()) {
        throw PlanMismatch("plan must be a JSON object");
    }
    EncodingPlan plan;
    for (const auto& [key, value] : j.items()) {
        if (value.is_string()) {
            plan.feature_to_site[key] = value.get<std::string>();
        } else if (value.is_array() && value.size() == 2 && value[0].is_string() && value[1].is_string()) {
            plan.trigger_sites[key] = {value[0].get<std::string>(), value[1].get<std::string>()};
        } else {
            throw PlanMismatch("plan entry '" + key + "' must be a site name or a pair of trigger sites");
        }
    }
    return plan;
}

inline nlohmann::json plan_to_json(const EncodingPlan& plan)
{
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [f, s] : plan.feature_to_site) {
        j[f] = s;
    }
    for (const auto& [g, t] : plan.trigger_sites) {
        j[g] = {t.first, t.second};
    }
    return j;
}

/// The mutual exclusion pattern
///
///   if(flag) >> m | if(noflag) >> n
///     <noflag< (if(flag) >> let(false) ; let(true))
///     <flag< (a >> let(true) | b >> let(false))
///
/// `flag` records whether a or b published first; `noflag` is its
/// complement, since the calculus has no negation.
inline orc::Expr encode_alternative(const orc::Expr& m, const orc::Expr& n, const orc::Expr& a, const orc::Expr& b,
                                    const std::string& flag = "flag", const std::string& noflag = "noflag")
{
    using namespace orc;
    const Expr branches = par(seq(site("if", {var(flag)}), m), seq(site("if", {var(noflag)}), n));
    const Expr negate = otherwise(seq(site("if", {var(flag)}), site("let", {lit(false)})), site("let", {lit(true)}));
    const Expr race = par(seq(a, site("let", {lit(true)})), seq(b, site("let", {lit(false)})));
    return asym(asym(branches, noflag, negate), flag, race);
}

namespace detail {

class Encoder
{
   public:
    Encoder(const fm::FeatureModel& model, const EncodingPlan& plan, std::vector<std::string>& notes)
        : fm_(model), plan_(plan), notes_(notes)
    {
        check_plan();
        for (const auto& [f, s] : plan.feature_to_site) {
            names_.reserve(f);
            names_.reserve(s);
        }
        for (const auto& [g, t] : plan.trigger_sites) {
            names_.reserve(t.first);
            names_.reserve(t.second);
        }
        for (const auto* builtin : {"if", "let", "Rtimer", "Signal"}) {
            names_.reserve(builtin);
        }
    }

    orc::Expr run()
    {
        auto goal = subtree(fm_.root());
        return goal ? *goal : orc::site(site_of(fm_.root()));
    }

   private:
    void check_plan() const
    {
        for (const auto& f : fm_.features()) {
            auto it = plan_.feature_to_site.find(f);
            if (it == plan_.feature_to_site.end()) {
                throw PlanMismatch("plan has no site for feature '" + f + "'");
            }
            if (!is_identifier(it->second)) {
                throw PlanMismatch("site name '" + it->second + "' for feature '" + f + "' is not an identifier");
            }
        }
        for (const auto& [f, s] : plan_.feature_to_site) {
            if (!fm_.contains(f)) {
                throw PlanMismatch("plan names unknown feature '" + f + "'");
            }
        }
        std::set<std::string> ids;
        for (const auto& g : fm_.groups()) {
            ids.insert(g.id);
            if (g.members.size() != 2) {
                throw UnsupportedGroupSize("alternative group {" + g.id + "} has " + std::to_string(g.members.size()) +
                                           " members; only binary groups are encoded");
            }
            auto it = plan_.trigger_sites.find(g.id);
            if (it == plan_.trigger_sites.end()) {
                throw MissingTrigger("no trigger sites for alternative group {" + g.id + "}");
            }
            if (!is_identifier(it->second.first) || !is_identifier(it->second.second)) {
                throw PlanMismatch("trigger sites for {" + g.id + "} must be identifiers");
            }
        }
        for (const auto& [g, t] : plan_.trigger_sites) {
            if (!ids.count(g)) {
                throw PlanMismatch("plan names unknown alternative group '" + g + "'");
            }
        }
    }

    const std::string& site_of(const fm::FeatureName& f) const { return plan_.feature_to_site.at(f); }

    // The feature's own site with its cross-tree constraints applied, or
    // nothing when an excludes constraint drops it.
    std::optional<orc::Expr> leaf(const fm::FeatureName& f)
    {
        for (const auto& k : fm_.constraints()) {
            if (k.kind == fm::Constraint::Excludes && k.b == f) {
                return std::nullopt;
            }
        }
        orc::Expr e = orc::site(site_of(f));
        for (const auto& k : fm_.constraints()) {
            if (k.kind == fm::Constraint::Requires && k.b == f) {
                const std::string x = names_.numbered("x");
                e = orc::seq(orc::site(site_of(k.a)), x, e);
                notes_.push_back("requires " + k.a + " " + k.b + ": sequential " + site_of(k.a) + "() >" + x + "> " +
                                 site_of(k.b) + "()");
            }
        }
        for (const auto& k : fm_.constraints()) {
            if (k.kind == fm::Constraint::Excludes && k.a == f) {
                e = orc::otherwise(e, orc::site(site_of(k.b)));
                notes_.push_back("excludes " + k.a + " " + k.b + ": otherwise " + site_of(k.a) + "() ; " +
                                 site_of(k.b) + "()");
            }
        }
        return e;
    }

    std::optional<orc::Expr> subtree(const fm::FeatureName& f)
    {
        const fm::Node& node = fm_.node(f);
        std::vector<orc::Expr> parts;
        std::vector<fm::FeatureName> mandatory;

        bool has_mandatory = false;
        for (const auto& c : node.children) {
            has_mandatory = has_mandatory || fm_.node(c).kind == fm::NodeKind::Mandatory;
        }
        if (node.parent || !has_mandatory) {
            if (auto own = leaf(f)) {
                parts.push_back(*own);
            }
        }

        std::set<std::string> groups_done;
        for (const auto& c : node.children) {
            const fm::Node& child = fm_.node(c);
            if (child.kind == fm::NodeKind::Mandatory) {
                if (auto e = subtree(c)) {
                    parts.push_back(*e);
                    mandatory.push_back(c);
                }
            } else if (child.kind == fm::NodeKind::AltMember && groups_done.insert(child.group).second) {
                parts.push_back(alternative(f, child.group));
            }
        }
        if (mandatory.size() > 1 || (mandatory.size() == 1 && parts.size() > 1)) {
            std::string list;
            for (const auto& m : mandatory) {
                list += (list.empty() ? "" : ", ") + m;
            }
            notes_.push_back("mandatory " + list + " under " + f + ": independent parallel |");
        }

        std::optional<orc::Expr> base;
        for (auto& p : parts) {
            base = base ? orc::par(*base, p) : p;
        }
        for (const auto& c : node.children) {
            if (fm_.node(c).kind != fm::NodeKind::Optional) {
                continue;
            }
            auto e = subtree(c);
            if (!e) {
                continue;
            }
            if (!base) {
                base = e;
                continue;
            }
            const std::string x = names_.numbered("x");
            base = orc::asym(*base, x, *e);
            notes_.push_back("optional " + c + " under " + f + ": asymmetric parallel <" + x + "<");
        }
        return base;
    }

    orc::Expr alternative(const fm::FeatureName& parent, const std::string& id)
    {
        std::vector<fm::FeatureName> members;
        for (const auto& c : fm_.node(parent).children) {
            if (fm_.node(c).kind == fm::NodeKind::AltMember && fm_.node(c).group == id) {
                members.push_back(c);
            }
        }
        auto branch = [&](const fm::FeatureName& m) {
            auto e = subtree(m);
            return e ? *e : orc::site(site_of(m));
        };
        const orc::Expr m = branch(members[0]);
        const orc::Expr n = branch(members[1]);
        const auto& [ta, tb] = plan_.trigger_sites.at(id);
        const std::string flag = names_.fresh("flag");
        const std::string noflag = names_.fresh("no" + flag);
        notes_.push_back("alternative " + id + ": flag pattern on " + flag + "/" + noflag + ", " + members[0] +
                         " if " + ta + " publishes first, " + members[1] + " if " + tb + " does");
        return encode_alternative(m, n, orc::site(ta), orc::site(tb), flag, noflag);
    }

    const fm::FeatureModel& fm_;
    const EncodingPlan& plan_;
    std::vector<std::string>& notes_;
    Namer names_;
};

}  // namespace detail

struct Encoded {
    orc::Program program;
    std::vector<std::string> notes;  // one per applied rule
};

inline Encoded encode(const fm::FeatureModel& model, const EncodingPlan& plan)
{
    Encoded out;
    out.program.goal = detail::Encoder(model, plan, out.notes).run();
    return out;
}

//=#=#==#==#===============+=+=+=+=++=++++++++++++++-++-+--+-+----+---------------
// Demand response fixtures. Stub sites publish their own names.

namespace detail {

inline void dr_sites(orc::Program& p, bool market_responsive)
{
    for (const char* s : {"real_time", "day_ahead"}) {
        p.sites[s] = orc::ExternalSite{{Value::string(s)}, true, 0};
    }
    for (const char* s : {"sell", "buy"}) {
        p.sites[s] = orc::ExternalSite{{Value::string(s)}, market_responsive, 0};
    }
}

}  // namespace detail

/// let(Load_shift, Agreement) <Load_shift< real_time | day_ahead <Agreement< sell | buy
inline orc::Program encode_dr_fixture(bool market_responsive = true)
{
    using namespace orc;
    Program p;
    detail::dr_sites(p, market_responsive);
    p.goal = asym(asym(site("let", {var("Load_shift"), var("Agreement")}), "Load_shift",
                       par(site("real_time"), site("day_ahead"))),
                  "Agreement", par(site("sell"), site("buy")));
    return p;
}

/// Load_shift and Agreement as alternatives, chosen by whichever market pair
/// publishes first.
inline orc::Program encode_dr_alternative_fixture()
{
    using namespace orc;
    Program p;
    detail::dr_sites(p, true);
    for (const char* s : {"Load_shift", "Agreement"}) {
        p.sites[s] = ExternalSite{{Value::string(s)}, true, 0};
    }
    p.goal = encode_alternative(site("Load_shift"), site("Agreement"), par(site("real_time"), site("day_ahead")),
                                par(site("buy"), site("sell")));
    return p;
}

}  // namespace orcline::encoding
