#include "soma/cli.hpp"

#include "soma/formats.hpp"
#include "soma/grounding.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <ostream>

namespace soma::cli {

namespace {

enum class Format { Text, Machine };

std::string number(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return ec == std::errc{} ? std::string(buf, end) : std::string("nan");
}

std::string fraction(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::string join(const std::set<std::string>& items) {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) out += ',';
        out += s;
    }
    return out;
}

/// Lookup failure of a name given on the command line.
struct NotFound {
    std::string what;
};

const Description& require_description(const Library& lib, const std::string& id) {
    const auto* d = lib.find(id);
    if (d == nullptr) throw NotFound{"no description '" + id + "'"};
    return *d;
}

/// A phase or defined-event ref, by ref id or by concept id or name.
const EventTypeRef& require_ref(const Library& lib, const Description& d, const std::string& name) {
    if (const auto* ref = d.find_ref(name)) return *ref;
    std::vector<const EventTypeRef*> refs{&d.defined_event()};
    for (const auto& p : d.phases()) refs.push_back(&p);
    const EventTypeRef* match = nullptr;
    for (const auto* ref : refs) {
        const bool hit = ref->concept_id == name ||
                         (lib.store->has_concept(ref->concept_id) && lib.store->concept_by_id(ref->concept_id).name == name);
        if (!hit) continue;
        if (match != nullptr) throw NotFound{"'" + name + "' is ambiguous in " + d.id};
        match = ref;
    }
    if (match == nullptr) throw NotFound{"no event type '" + name + "' in " + d.id};
    return *match;
}

/// A task for selection: a description id (its defined event) or any event
/// type ref id in the library.
const EventTypeRef& require_task(const Library& lib, const std::string& name) {
    if (const auto* d = lib.find(name)) return d->defined_event();
    for (const auto& d : lib.descriptions) {
        if (const auto* ref = d.find_ref(name)) return *ref;
    }
    throw NotFound{"no task '" + name + "'"};
}

void write_interpretations(std::ostream& out, Format format, const Episode& episode, const Library& lib,
                           const std::vector<Interpretation>& interps, std::size_t total, double eps) {
    std::map<std::string, const Token*> tokens;
    for (const auto& t : episode.tokens) tokens.emplace(t.id, &t);

    if (format == Format::Machine) {
        out << "episode=" << episode.id << "\n";
        out << "tokens=" << episode.tokens.size() << "\n";
        out << "interpretations=" << total << "\n";
    } else {
        out << "episode " << episode.id << ": " << episode.tokens.size() << " token(s)\n";
        out << "interpretations: " << total << "\n";
    }

    for (std::size_t n = 0; n < interps.size(); ++n) {
        const auto& i = interps[n];
        const Description& d = *lib.find(i.plan);
        const std::string tag = std::to_string(n + 1);
        if (format == Format::Machine) {
            out << "interp=" << tag << " plan=" << i.plan << " coverage=" << fraction(i.coverage)
                << " phases=" << i.phase_grounding.size() << " start=" << number(i.earliest_start) << "\n";
        } else {
            out << "[" << tag << "] plan " << i.plan << "  coverage " << fraction(i.coverage) << "  phases "
                << i.phase_grounding.size() << "  start " << number(i.earliest_start) << "\n";
        }
        for (const auto& phase : d.phases()) {
            const Token& t = *tokens.at(i.phase_grounding.at(phase.id));
            if (format == Format::Machine) {
                out << "interp=" << tag << " phase=" << phase.id << " token=" << t.id << " type=" << t.type_tag
                    << " start=" << number(t.interval.start) << " end=" << number(t.interval.end) << "\n";
            } else {
                out << "    phase " << phase.id << " <- " << t.id << " " << t.type_tag << " ["
                    << number(t.interval.start) << ", " << number(t.interval.end) << "]\n";
            }
        }
        const auto phases = d.phases();
        for (std::size_t a = 0; a < phases.size(); ++a) {
            for (std::size_t b = a + 1; b < phases.size(); ++b) {
                const auto& ta = *tokens.at(i.phase_grounding.at(phases[a].id));
                const auto& tb = *tokens.at(i.phase_grounding.at(phases[b].id));
                const auto rel = code(relation_from_endpoints(ta.interval, tb.interval, eps));
                if (format == Format::Machine) {
                    out << "interp=" << tag << " relation=" << phases[a].id << "," << phases[b].id << " value=" << rel
                        << "\n";
                } else {
                    out << "    relation " << phases[a].id << " " << rel << " " << phases[b].id << "\n";
                }
            }
        }
        for (const auto& [slot, entity] : i.role_grounding) {
            if (format == Format::Machine) {
                out << "interp=" << tag << " role=" << slot.phase << "." << slot.role << " entity=" << entity << "\n";
            } else {
                out << "    role " << slot.phase << "." << slot.role << " = " << entity << "\n";
            }
        }
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"soma-kit: activity models, interval reasoning and activity parsing"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string format_name = "text";
    app.add_option("--format", format_name, "Report format")
        ->check(CLI::IsMember({"text", "machine"}))
        ->capture_default_str();

    std::string lib_path;
    std::string episode_path;
    std::string plan_name;
    std::string phase_a;
    std::string phase_b;
    std::string task_name;
    double eps = kDefaultEps;
    std::size_t top = 0;
    std::string tendency;
    std::string stronger;

    auto* validate = app.add_subcommand("validate", "Validate a plan library");
    validate->add_option("library", lib_path)->required();

    auto* parse_cmd = app.add_subcommand("parse", "Interpret an episode against a plan library");
    parse_cmd->add_option("library", lib_path)->required();
    parse_cmd->add_option("episode", episode_path)->required();
    parse_cmd->add_option("--eps", eps, "Endpoint tolerance in seconds")->check(CLI::NonNegativeNumber);
    parse_cmd->add_option("--top", top, "Report at most N interpretations (0 = all)");

    auto* query = app.add_subcommand("query", "Propagated relation between two event types of a description");
    query->add_option("library", lib_path)->required();
    query->add_option("plan", plan_name)->required();
    query->add_option("a", phase_a)->required();
    query->add_option("b", phase_b)->required();

    auto* select = app.add_subcommand("select", "Scene objects that can play each role of a task");
    select->add_option("library", lib_path)->required();
    select->add_option("episode", episode_path)->required();
    select->add_option("task", task_name)->required();
    select->add_option("--eps", eps, "Endpoint tolerance in seconds")->check(CLI::NonNegativeNumber);

    auto* force = app.add_subcommand("force", "Outcome of a force-dynamical expression");
    force->add_option("--tendency", tendency, "Agonist tendency")
        ->required()
        ->check(CLI::IsMember({"motion", "rest"}, CLI::ignore_case));
    force->add_option("--stronger", stronger, "Stronger participant")
        ->required()
        ->check(CLI::IsMember({"agonist", "antagonist"}, CLI::ignore_case));

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInput;
    }

    const Format format = format_name == "machine" ? Format::Machine : Format::Text;

    try {
        if (force->parsed()) {
            std::transform(tendency.begin(), tendency.end(), tendency.begin(), ::tolower);
            std::transform(stronger.begin(), stronger.end(), stronger.begin(), ::tolower);
            const auto outcome = force_outcome(tendency == "motion" ? Tendency::TowardMotion : Tendency::TowardRest,
                                               stronger == "agonist" ? Stronger::Agonist : Stronger::Antagonist);
            if (format == Format::Machine) out << "outcome=";
            out << to_string(outcome) << "\n";
            return kExitOk;
        }

        if (validate->parsed()) {
            const auto doc = parse_library_document(read_file(lib_path));
            try {
                const auto lib = build_library(doc);
                if (format == Format::Machine) {
                    out << "issues=0\ndescriptions=" << lib.descriptions.size() << "\n";
                } else {
                    out << "ok: " << lib.descriptions.size() << " description(s), " << doc.concepts.size()
                        << " concept(s)\n";
                }
                return kExitOk;
            } catch (const ValidationFailed& e) {
                if (format == Format::Machine) out << "issues=" << e.issues().size() << "\n";
                for (const auto& issue : e.issues()) {
                    out << (format == Format::Machine ? "issue=" : "issue: ") << issue << "\n";
                }
                return kExitValidation;
            }
        }

        const Library lib = load_library(lib_path);

        if (query->parsed()) {
            const Description& d = require_description(lib, plan_name);
            const auto net = compile_constraints(d);
            const auto rel = net.query(require_ref(lib, d, phase_a).id, require_ref(lib, d, phase_b).id);
            if (format == Format::Machine) out << "relation=";
            out << to_string(rel) << "\n";
            return kExitOk;
        }

        const Episode episode = load_episode(episode_path, eps);
        const OntologyStore grounded = ground_scene(*lib.store, episode.scene);

        if (parse_cmd->parsed()) {
            const ActivityParser parser(lib.descriptions, *lib.store, eps);
            auto interps = parser.parse_grounded(episode, grounded);
            const std::size_t total = interps.size();
            if (top != 0 && interps.size() > top) interps.resize(top);
            write_interpretations(out, format, episode, lib, interps, total, eps);
            return kExitOk;
        }

        if (select->parsed()) {
            const EventTypeRef& task = require_task(lib, task_name);
            const auto ids = episode.scene.ids();
            for (const auto& [role, candidates] : select_objects(task, ids, grounded)) {
                if (format == Format::Machine) {
                    out << "role=" << role << " candidates=" << join(candidates) << "\n";
                } else {
                    out << role << ": " << join(candidates) << "\n";
                }
            }
            return kExitOk;
        }
    } catch (const NotFound& e) {
        err << "error: " << e.what << "\n";
        return kExitValidation;
    } catch (const ValidationFailed& e) {
        err << "error: validation failed\n";
        for (const auto& issue : e.issues()) err << "  " << issue << "\n";
        return kExitValidation;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        switch (e.code()) {
            case ErrorCode::IoError:
            case ErrorCode::ParseError:
            case ErrorCode::VersionMismatch:
            case ErrorCode::NegativeDuration:
            case ErrorCode::InvalidArgument: return kExitInput;
            default: return kExitValidation;
        }
    }
    return kExitInput;
}

}  // namespace soma::cli
