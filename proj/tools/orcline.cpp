// orcline: command-line front end.
//
//   orcline orc run FILE [--seed N] [--max-steps N] [--max-depth N]
//   orcline orc explore FILE [--format text|json|dot] [--max-states N] [--max-depth N]
//   orcline fm products|count FILE [--format text|json]
//   orcline fm validate FILE --select F1,F2,...
//   orcline mts check FAMILY PRODUCT [--format text|json]
//   orcline mts products FAMILY [--format text|json|dot]
//   orcline mts dot FILE
//   orcline encode FM [PLAN]
//
// Exit codes: 0 success, 1 bad input, 2 bound exceeded or truncated,
// 3 negative answer (invalid configuration, not a product).

#include <orcline/encoding.hpp>
#include <orcline/fm/format.hpp>
#include <orcline/mts/format.hpp>
#include <orcline/orc/explore.hpp>
#include <orcline/orc/parser.hpp>
#include <orcline/serialize.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

enum Exit { kOk = 0, kInput = 1, kBound = 2, kNegative = 3 };

struct Options {
    std::string file;
    std::string second;
    std::optional<std::uint64_t> seed;
    orcline::orc::Bounds bounds;
    std::string format = "text";
    std::vector<std::string> select;
    std::string out;
};

class InputError : public std::runtime_error
{
   public:
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot read '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

template <typename T>
T parsed_or_throw(orcline::ParseResult<T> r, const std::string& path)
{
    for (const auto& d : r.diagnostics) {
        std::cerr << path << ":" << d << "\n";
    }
    if (!r.ok()) {
        throw InputError("cannot parse '" + path + "'");
    }
    return std::move(*r.value);
}

void emit(const Options& o, const std::string& text)
{
    if (o.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(o.out, std::ios::binary);
    if (!f) {
        throw InputError("cannot write '" + o.out + "'");
    }
    f << text;
}

void require_format(const Options& o, std::initializer_list<const char*> allowed)
{
    for (const char* a : allowed) {
        if (o.format == a) {
            return;
        }
    }
    throw InputError("format '" + o.format + "' is not supported by this command");
}

//=#=#==#==#===============+=+=+=+=++=++++++++++++++-++-+--+-+----+---------------

int orc_run(const Options& o)
{
    using namespace orcline::orc;
    const Program p = parsed_or_throw(parse_program(read_file(o.file)), o.file);
    const auto policy = o.seed ? SchedulerPolicy::seeded(*o.seed) : SchedulerPolicy::deterministic();
    const Trace t = run(p, policy, o.bounds);
    emit(o, orcline::orc::trace_jsonl(t));
    switch (t.status) {
        case RunStatus::Halted:
            return kOk;
        case RunStatus::DepthTruncated:
            std::cerr << "truncated: definition depth bound " << o.bounds.max_depth << " reached\n";
            return kBound;
        case RunStatus::StepBoundExceeded:
            std::cerr << "truncated: step bound " << o.bounds.max_steps << " reached\n";
            return kBound;
    }
    return kOk;
}

std::string bag_text(const orcline::ValueBag& bag)
{
    std::string s = "{";
    for (std::size_t i = 0; i < bag.size(); ++i) {
        s += (i ? ", " : "") + bag[i].to_string();
    }
    return s + "}";
}

int orc_explore(const Options& o)
{
    using namespace orcline::orc;
    require_format(o, {"text", "json", "dot"});
    const Program p = parsed_or_throw(parse_program(read_file(o.file)), o.file);
    const ExploredLts lts = explore(p, o.bounds);
    if (o.format == "json") {
        emit(o, orcline::orc::explored_json(lts).dump(2) + "\n");
    } else if (o.format == "dot") {
        emit(o, orcline::mts::export_dot(lts.to_lts()));
    } else {
        std::string text = orcline::mts::render_lts(lts.to_lts());
        for (const auto& bag : lts.outcomes.complete) {
            text += "-- outcome " + bag_text(bag) + "\n";
        }
        for (const auto& bag : lts.outcomes.truncated) {
            text += "-- truncated " + bag_text(bag) + "\n";
        }
        emit(o, text);
    }
    std::cerr << lts.states.size() << " states, " << lts.transitions.size() << " transitions, "
              << lts.outcomes.complete.size() << " outcome classes\n";
    if (lts.truncated) {
        std::cerr << "truncated: exploration hit a bound (max-states " << o.bounds.max_states << ", max-depth "
                  << o.bounds.max_depth << ")\n";
        return kBound;
    }
    return kOk;
}

//=#=#==#==#===============+=+=+=+=++=++++++++++++++-++-+--+-+----+---------------

std::string config_text(const orcline::fm::Configuration& c)
{
    std::string s;
    for (const auto& f : c) {
        s += (s.empty() ? "" : ",") + f;
    }
    return s;
}

int fm_products(const Options& o)
{
    require_format(o, {"text", "json"});
    const auto model = parsed_or_throw(orcline::fm::parse_feature_model(read_file(o.file)), o.file);
    const auto products = orcline::fm::enumerate_products(model);
    if (o.format == "json") {
        emit(o, orcline::fm::configurations_json(products).dump() + "\n");
    } else {
        std::string text;
        for (const auto& c : products) {
            text += config_text(c) + "\n";
        }
        emit(o, text);
    }
    std::cerr << products.size() << " products\n";
    return kOk;
}

int fm_count(const Options& o)
{
    const auto model = parsed_or_throw(orcline::fm::parse_feature_model(read_file(o.file)), o.file);
    emit(o, std::to_string(orcline::fm::product_count(model)) + "\n");
    return kOk;
}

int fm_validate(const Options& o)
{
    const auto model = parsed_or_throw(orcline::fm::parse_feature_model(read_file(o.file)), o.file);
    const orcline::fm::Configuration c(o.select.begin(), o.select.end());
    std::vector<orcline::fm::Violation> violations;
    try {
        violations = orcline::fm::validate(model, c);
    } catch (const orcline::UnknownFeature& e) {
        throw InputError(e.what());
    }
    std::string text = violations.empty() ? "VALID\n" : "INVALID\n";
    for (const auto& v : violations) {
        text += "  " + v.message() + "\n";
    }
    emit(o, text);
    return violations.empty() ? kOk : kNegative;
}

//=#=#==#==#===============+=+=+=+=++=++++++++++++++-++-+--+-+----+---------------

orcline::mts::Mts load_family(const std::string& path)
{
    const std::string src = read_file(path);
    // An LTS is accepted wherever a family is expected.
    std::vector<orcline::ParseDiagnostic> ignored;
    const auto tokens = orcline::tokenize(src, ignored);
    if (!tokens.empty() && tokens.front().is_ident("lts")) {
        return orcline::mts::Mts::from_lts(parsed_or_throw(orcline::mts::parse_lts(src), path));
    }
    return parsed_or_throw(orcline::mts::parse_mts(src), path);
}

int mts_check(const Options& o)
{
    using namespace orcline::mts;
    require_format(o, {"text", "json"});
    const Mts family = load_family(o.file);
    const Lts product = parsed_or_throw(parse_lts(read_file(o.second)), o.second);
    ProductCheck check;
    try {
        check = is_product(product, family);
    } catch (const orcline::ActionMismatch& e) {
        throw InputError(e.what());
    }
    if (o.format == "json") {
        emit(o, product_check_json(check, product, family).dump(2) + "\n");
    } else {
        std::string text;
        if (check.holds) {
            text = "PRODUCT\nwitness";
            for (const auto& [qp, qf] : check.witness.pairs) {
                text += " (" + product.states().name(qp) + "," + family.states().name(qf) + ")";
            }
            text += "\n";
        } else {
            text = "NOT-A-PRODUCT\n";
            if (check.failure) {
                const auto& f = *check.failure;
                text += "clause " + std::string(clause_name(f.clause)) + " fails at (" +
                        product.states().name(f.product_state) + "," + family.states().name(f.family_state) +
                        ") on action " + f.action + "\n";
            }
            for (const auto& v : check.reachable_defects) {
                text += "  cause: clause " + std::string(clause_name(v.clause)) + " at (" +
                        product.states().name(v.product_state) + "," + family.states().name(v.family_state) +
                        ") on " + v.action + "\n";
            }
        }
        emit(o, text);
    }
    return check.holds ? kOk : kNegative;
}

int mts_products(const Options& o)
{
    using namespace orcline::mts;
    require_format(o, {"text", "json", "dot"});
    const Mts family = load_family(o.file);
    std::vector<Lts> products;
    try {
        products = derive_products(family);
    } catch (const orcline::BoundExceeded& e) {
        std::cerr << "bound exceeded: " << e.what() << "\n";
        return kBound;
    }
    std::string text;
    if (o.format == "json") {
        orcline::Json all = orcline::Json::array();
        for (const auto& p : products) {
            orcline::Json trans = orcline::Json::array();
            for (const auto& t : p.transitions()) {
                trans.push_back({p.states().name(t.source), t.action, p.states().name(t.target)});
            }
            all.push_back({{"name", p.name()},
                           {"states", p.states().names()},
                           {"init", p.states().name(p.initial())},
                           {"transitions", trans}});
        }
        text = all.dump(2) + "\n";
    } else {
        for (std::size_t i = 0; i < products.size(); ++i) {
            text += (i ? "\n" : "") + (o.format == "dot" ? export_dot(products[i]) : render_lts(products[i]));
        }
    }
    emit(o, text);
    std::cerr << products.size() << " products\n";
    return kOk;
}

int mts_dot(const Options& o)
{
    emit(o, orcline::mts::export_dot(load_family(o.file)));
    return kOk;
}

//=#=#==#==#===============+=+=+=+=++=++++++++++++++-++-+--+-+----+---------------

int encode_cmd(const Options& o)
{
    using namespace orcline::encoding;
    const auto model = parsed_or_throw(orcline::fm::parse_feature_model(read_file(o.file)), o.file);
    EncodingPlan plan = default_plan(model);
    if (!o.second.empty()) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(read_file(o.second));
        } catch (const nlohmann::json::parse_error& e) {
            throw InputError(o.second + ": " + e.what());
        }
        // Entries in the plan file override the defaults.
        const EncodingPlan given = plan_from_json(j);
        for (const auto& [f, s] : given.feature_to_site) {
            plan.feature_to_site[f] = s;
        }
        for (const auto& [g, t] : given.trigger_sites) {
            plan.trigger_sites[g] = t;
        }
    }
    Encoded enc;
    try {
        enc = encode(model, plan);
    } catch (const orcline::Error& e) {
        throw InputError(e.what());
    }
    std::string text;
    for (const auto& n : enc.notes) {
        text += "-- " + n + "\n";
    }
    emit(o, text + orcline::orc::render(enc.program));
    return kOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Orc orchestrations, feature models and modal transition systems"};
    app.require_subcommand(1);
    Options o;

    auto add_bounds = [&](CLI::App* cmd) {
        cmd->add_option("--max-states", o.bounds.max_states, "State bound for exploration")->capture_default_str();
        cmd->add_option("--max-depth", o.bounds.max_depth, "Definition call depth bound")->capture_default_str();
    };
    auto add_common = [&](CLI::App* cmd, bool with_format) {
        cmd->add_option("--out", o.out, "Write output to PATH instead of standard output");
        if (with_format) {
            cmd->add_option("--format", o.format, "Output format")
                ->check(CLI::IsMember({"text", "json", "dot"}))
                ->capture_default_str();
        }
    };

    int (*action)(const Options&) = nullptr;

    auto* orc = app.add_subcommand("orc", "Run or explore an Orc program");
    orc->require_subcommand(1);
    auto* run = orc->add_subcommand("run", "Execute once and print a JSON-lines trace");
    run->add_option("file", o.file, "Program file (.orc)")->required();
    run->add_option("--seed", o.seed, "Pick enabled transitions at random with this seed");
    run->add_option("--max-steps", o.bounds.max_steps, "Step bound")->capture_default_str();
    add_bounds(run);
    add_common(run, false);
    run->callback([&] { action = orc_run; });

    auto* explore = orc->add_subcommand("explore", "Explore every interleaving");
    explore->add_option("file", o.file, "Program file (.orc)")->required();
    add_bounds(explore);
    add_common(explore, true);
    explore->callback([&] { action = orc_explore; });

    auto* fm = app.add_subcommand("fm", "Feature model queries");
    fm->require_subcommand(1);
    auto* products = fm->add_subcommand("products", "List every valid configuration");
    products->add_option("file", o.file, "Feature model (.fm)")->required();
    add_common(products, true);
    products->callback([&] { action = fm_products; });
    auto* count = fm->add_subcommand("count", "Count valid configurations");
    count->add_option("file", o.file, "Feature model (.fm)")->required();
    add_common(count, false);
    count->callback([&] { action = fm_count; });
    auto* validate = fm->add_subcommand("validate", "Check one configuration");
    validate->add_option("file", o.file, "Feature model (.fm)")->required();
    validate->add_option("--select", o.select, "Selected features")->delimiter(',')->required();
    add_common(validate, false);
    validate->callback([&] { action = fm_validate; });

    auto* mts = app.add_subcommand("mts", "Modal transition system queries");
    mts->require_subcommand(1);
    auto* check = mts->add_subcommand("check", "Decide whether an LTS is a product of a family");
    check->add_option("family", o.file, "Family (.mts)")->required();
    check->add_option("product", o.second, "Product (.lts)")->required();
    add_common(check, true);
    check->callback([&] { action = mts_check; });
    auto* mprod = mts->add_subcommand("products", "Derive the products of a family");
    mprod->add_option("family", o.file, "Family (.mts)")->required();
    add_common(mprod, true);
    mprod->callback([&] { action = mts_products; });
    auto* dot = mts->add_subcommand("dot", "Export a family or LTS as DOT");
    dot->add_option("file", o.file, "Model (.mts or .lts)")->required();
    add_common(dot, false);
    dot->callback([&] { action = mts_dot; });

    auto* enc = app.add_subcommand("encode", "Encode a feature model as an Orc program");
    enc->add_option("fm", o.file, "Feature model (.fm)")->required();
    enc->add_option("plan", o.second, "JSON plan: feature -> site, \"M,N\" -> [triggerM, triggerN]");
    add_common(enc, false);
    enc->callback([&] { action = encode_cmd; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kInput;
    }

    try {
        return action ? action(o) : kInput;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInput;
    } catch (const orcline::BoundExceeded& e) {
        std::cerr << "bound exceeded: " << e.what() << "\n";
        return kBound;
    } catch (const orcline::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInput;
    }
}
