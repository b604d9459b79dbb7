#include "soma/formats.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace soma {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw Error(ErrorCode::ParseError, (path.empty() ? std::string("/") : path) + ": " + what);
}

const json& field(const json& obj, std::string_view key, const std::string& path) {
    if (!obj.is_object()) fail(path, "expected object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(path, "missing field '" + std::string(key) + "'");
    return *it;
}

const json* optional_field(const json& obj, std::string_view key) {
    auto it = obj.find(key);
    return it == obj.end() || it->is_null() ? nullptr : &*it;
}

std::string sub(const std::string& path, std::string_view key) { return path + "/" + std::string(key); }
std::string sub(const std::string& path, std::size_t index) { return path + "/" + std::to_string(index); }

std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected string");
    return j.get<std::string>();
}

double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "expected finite number");
    return v;
}

const json& as_array(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected array");
    return j;
}

std::string string_field(const json& obj, std::string_view key, const std::string& path) {
    return as_string(field(obj, key, path), sub(path, key));
}

std::string string_field_or(const json& obj, std::string_view key, const std::string& path, std::string fallback) {
    const json* f = optional_field(obj, key);
    return f == nullptr ? fallback : as_string(*f, sub(path, key));
}

std::vector<std::string> strings_field(const json& obj, std::string_view key, const std::string& path) {
    std::vector<std::string> out;
    const json* f = optional_field(obj, key);
    if (f == nullptr) return out;
    const std::string p = sub(path, key);
    as_array(*f, p);
    for (std::size_t i = 0; i < f->size(); ++i) out.push_back(as_string((*f)[i], sub(p, i)));
    return out;
}

template <typename T, typename Fn>
std::vector<T> list_field(const json& obj, std::string_view key, const std::string& path, Fn&& read) {
    std::vector<T> out;
    const json* f = optional_field(obj, key);
    if (f == nullptr) return out;
    const std::string p = sub(path, key);
    as_array(*f, p);
    for (std::size_t i = 0; i < f->size(); ++i) out.push_back(read((*f)[i], sub(p, i)));
    return out;
}

void check_version(const json& root) {
    const std::string version = string_field(root, "version", "");
    if (version != kFormatVersion) {
        throw Error(ErrorCode::VersionMismatch, "expected " + std::string(kFormatVersion) + ", found " + version);
    }
}

json parse_json(std::string_view text) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        // Byte offset to line:column.
        std::size_t line = 1;
        std::size_t column = 1;
        const std::size_t limit = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < limit; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ", column " + std::to_string(column) +
                                               ": " + e.what());
    }
}

// -- restrictions -------------------------------------------------------------

Restriction read_restriction(const json& j, const std::string& path) {
    if (!j.is_object() || j.size() != 1) fail(path, "restriction must be an object with exactly one key");
    const auto& [key, value] = *j.items().begin();
    const std::string p = sub(path, key);
    if (key == "kindIs") {
        auto kind = parse_entity_kind(as_string(value, p));
        if (!kind) fail(p, "unknown entity kind");
        return Restriction::kind_is(*kind);
    }
    if (key == "typeTagIn") {
        std::set<std::string> tags;
        as_array(value, p);
        for (std::size_t i = 0; i < value.size(); ++i) tags.insert(as_string(value[i], sub(p, i)));
        if (tags.empty()) fail(p, "empty tag list");
        return Restriction::type_tag_in(std::move(tags));
    }
    if (key == "hasDisposition") return Restriction::has_disposition(as_string(value, p));
    if (key == "regionWithin") {
        const double lo = as_number(field(value, "lo", p), sub(p, "lo"));
        const double hi = as_number(field(value, "hi", p), sub(p, "hi"));
        if (lo > hi) fail(p, "lo exceeds hi");
        return Restriction::region_within(lo, hi, string_field(value, "units", p));
    }
    if (key == "and" || key == "or") {
        std::vector<Restriction> terms;
        as_array(value, p);
        for (std::size_t i = 0; i < value.size(); ++i) terms.push_back(read_restriction(value[i], sub(p, i)));
        if (terms.empty()) fail(p, "empty term list");
        return key == "and" ? Restriction::all_of(std::move(terms)) : Restriction::any_of(std::move(terms));
    }
    fail(path, "unknown restriction '" + key + "'");
}

json write_restriction(const Restriction& r) {
    return std::visit(
        [](const auto& node) -> json {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, KindIs>) {
                return {{"kindIs", std::string(to_string(node.kind))}};
            } else if constexpr (std::is_same_v<T, TypeTagIn>) {
                return {{"typeTagIn", node.tags}};
            } else if constexpr (std::is_same_v<T, HasDisposition>) {
                return {{"hasDisposition", node.disposition_type}};
            } else if constexpr (std::is_same_v<T, RegionWithin>) {
                return {{"regionWithin", {{"lo", node.lo}, {"hi", node.hi}, {"units", node.units}}}};
            } else {
                json terms = json::array();
                for (const auto& t : node.terms) terms.push_back(write_restriction(t));
                return {{std::is_same_v<T, AllOf> ? "and" : "or", std::move(terms)}};
            }
        },
        r.node);
}

// -- library pieces -----------------------------------------------------------

Concept read_concept(const json& j, const std::string& path) {
    Concept c;
    c.id = string_field(j, "id", path);
    c.name = string_field_or(j, "name", path, c.id);
    const std::string kind = string_field(j, "kind", path);
    auto k = parse_concept_kind(kind);
    if (!k) fail(sub(path, "kind"), "unknown concept kind '" + kind + "'");
    c.kind = *k;
    for (auto& p : strings_field(j, "parents", path)) c.parents.insert(std::move(p));
    if (const json* r = optional_field(j, "restriction")) c.restriction = read_restriction(*r, sub(path, "restriction"));
    return c;
}

json write_concept(const Concept& c) {
    json j = {{"id", c.id},
              {"name", c.name},
              {"kind", std::string(to_string(c.kind))},
              {"parents", std::vector<std::string>(c.parents.begin(), c.parents.end())}};
    if (c.restriction) j["restriction"] = write_restriction(*c.restriction);
    return j;
}

EventTypeRef read_ref(const json& j, const std::string& path) {
    return {string_field(j, "id", path), string_field(j, "concept", path), strings_field(j, "roles", path),
            strings_field(j, "parameters", path)};
}

json write_ref(const EventTypeRef& r) {
    return {{"id", r.id}, {"concept", r.concept_id}, {"roles", r.uses_roles}, {"parameters", r.uses_parameters}};
}

RelationSet read_relation(const json& j, const std::string& path) {
    auto term = [&](const json& t, const std::string& p) {
        auto rel = parse_relation_term(as_string(t, p));
        if (!rel) fail(p, "unknown relation '" + t.get<std::string>() + "'");
        return *rel;
    };
    if (j.is_string()) return term(j, path);
    as_array(j, path);
    RelationSet out;
    for (std::size_t i = 0; i < j.size(); ++i) out = out | term(j[i], sub(path, i));
    return out;
}

json write_relation(RelationSet s) {
    json out = json::array();
    for (auto r : s.members()) out.push_back(std::string(code(r)));
    return out;
}

PhaseConstraint read_constraint(const json& j, const std::string& path) {
    return {string_field(j, "left", path), read_relation(field(j, "relation", path), sub(path, "relation")),
            string_field(j, "right", path)};
}

json write_constraint(const PhaseConstraint& c) {
    return {{"left", c.left}, {"relation", write_relation(c.relation)}, {"right", c.right}};
}

Binding read_binding(const json& j, const std::string& path) {
    Binding b;
    b.id = string_field(j, "id", path);
    b.slots = list_field<Slot>(j, "slots", path, [](const json& s, const std::string& p) {
        return Slot{string_field(s, "phase", p), string_field(s, "role", p)};
    });
    return b;
}

json write_binding(const Binding& b) {
    json slots = json::array();
    for (const auto& s : b.slots) slots.push_back({{"phase", s.phase}, {"role", s.role}});
    return {{"id", b.id}, {"slots", std::move(slots)}};
}

ConditionalSuccedence read_succedence(const json& j, const std::string& path) {
    ConditionalSuccedence cs{string_field(j, "id", path), string_field(j, "earlier", path),
                             string_field(j, "later", path), std::nullopt};
    if (const json* c = optional_field(j, "condition")) cs.condition = read_restriction(*c, sub(path, "condition"));
    return cs;
}

json write_succedence(const ConditionalSuccedence& cs) {
    json j = {{"id", cs.id}, {"earlier", cs.earlier}, {"later", cs.later}};
    if (cs.condition) j["condition"] = write_restriction(*cs.condition);
    return j;
}

Goal read_goal(const json& j, const std::string& path) {
    Goal g;
    g.id = string_field(j, "id", path);
    g.desired = list_field<DesiredState>(j, "desired", path, [](const json& d, const std::string& p) {
        return DesiredState{string_field(d, "stateType", p), strings_field(d, "roles", p)};
    });
    return g;
}

json write_goal(const Goal& g) {
    json desired = json::array();
    for (const auto& d : g.desired) desired.push_back({{"stateType", d.state_type}, {"roles", d.roles}});
    return {{"id", g.id}, {"desired", std::move(desired)}};
}

ConfigurationConstraint read_config_constraint(const json& j, const std::string& path) {
    if (optional_field(j, "relation") != nullptr) {
        const std::string rel = string_field(j, "relation", path);
        auto r = parse_state_relation(rel);
        if (!r) fail(sub(path, "relation"), "unknown state relation '" + rel + "'");
        return RelationConstraint{*r, string_field(j, "first", path), string_field(j, "second", path)};
    }
    return RegionConstraint{string_field(j, "role", path),
                            read_restriction(field(j, "restriction", path), sub(path, "restriction"))};
}

json write_config_constraint(const ConfigurationConstraint& c) {
    return std::visit(
        [](const auto& cc) -> json {
            using T = std::decay_t<decltype(cc)>;
            if constexpr (std::is_same_v<T, RegionConstraint>) {
                return {{"role", cc.role}, {"restriction", write_restriction(cc.restriction)}};
            } else {
                return {{"relation", std::string(to_string(cc.relation))}, {"first", cc.first}, {"second", cc.second}};
            }
        },
        c);
}

Description read_description(const json& j, const std::string& path) {
    Description d;
    d.id = string_field(j, "id", path);
    const std::string type = string_field(j, "type", path);
    auto phases = [&] { return list_field<EventTypeRef>(j, "phases", path, read_ref); };
    auto constraints = [&] { return list_field<PhaseConstraint>(j, "constraints", path, read_constraint); };
    auto bindings = [&] { return list_field<Binding>(j, "bindings", path, read_binding); };
    if (type == "plan") {
        Plan p;
        p.defines_task = read_ref(field(j, "defines", path), sub(path, "defines"));
        p.phases = phases();
        p.constraints = constraints();
        p.bindings = bindings();
        p.succedences = list_field<ConditionalSuccedence>(j, "succedences", path, read_succedence);
        if (const json* g = optional_field(j, "goal")) p.goal = read_goal(*g, sub(path, "goal"));
        d.body = std::move(p);
    } else if (type == "processFlow") {
        ProcessFlow f;
        f.defines_process = read_ref(field(j, "defines", path), sub(path, "defines"));
        f.phases = phases();
        f.constraints = constraints();
        f.bindings = bindings();
        d.body = std::move(f);
    } else if (type == "configuration") {
        Configuration c;
        c.describes_state = read_ref(field(j, "describes", path), sub(path, "describes"));
        c.constraints = list_field<ConfigurationConstraint>(j, "constraints", path, read_config_constraint);
        d.body = std::move(c);
    } else {
        fail(sub(path, "type"), "unknown description type '" + type + "'");
    }
    return d;
}

json write_refs(std::span<const EventTypeRef> refs) {
    json out = json::array();
    for (const auto& r : refs) out.push_back(write_ref(r));
    return out;
}

json write_description(const Description& d) {
    json j = {{"id", d.id}, {"type", std::string(to_string(d.kind()))}};
    std::visit(
        [&](const auto& body) {
            using T = std::decay_t<decltype(body)>;
            if constexpr (std::is_same_v<T, Configuration>) {
                j["describes"] = write_ref(body.describes_state);
                json cs = json::array();
                for (const auto& c : body.constraints) cs.push_back(write_config_constraint(c));
                j["constraints"] = std::move(cs);
            } else {
                j["defines"] = write_ref(d.defined_event());
                j["phases"] = write_refs(body.phases);
                json cs = json::array();
                for (const auto& c : body.constraints) cs.push_back(write_constraint(c));
                j["constraints"] = std::move(cs);
                json bs = json::array();
                for (const auto& b : body.bindings) bs.push_back(write_binding(b));
                j["bindings"] = std::move(bs);
                if constexpr (std::is_same_v<T, Plan>) {
                    json ss = json::array();
                    for (const auto& s : body.succedences) ss.push_back(write_succedence(s));
                    j["succedences"] = std::move(ss);
                    if (body.goal) j["goal"] = write_goal(*body.goal);
                }
            }
        },
        d.body);
    return j;
}

AffordanceSpec read_affordance(const json& j, const std::string& path) {
    AffordanceSpec a{string_field(j, "concept", path), string_field(j, "bearer", path),
                     string_field(j, "trigger", path), std::nullopt};
    if (const json* b = optional_field(j, "background")) a.background_role = as_string(*b, sub(path, "background"));
    return a;
}

json write_affordance(const AffordanceSpec& a) {
    json j = {{"concept", a.concept_id}, {"bearer", a.bearer_role}, {"trigger", a.trigger_role}};
    if (a.background_role) j["background"] = *a.background_role;
    return j;
}

DesignSpec read_design(const json& j, const std::string& path) {
    const std::string aspect = string_field(j, "aspect", path);
    auto a = parse_design_aspect(aspect);
    if (!a) fail(sub(path, "aspect"), "unknown design aspect '" + aspect + "'");
    return {string_field(j, "concept", path), *a,
            read_restriction(field(j, "restriction", path), sub(path, "restriction"))};
}

json write_design(const DesignSpec& d) {
    return {{"concept", d.concept_id},
            {"aspect", std::string(to_string(d.aspect))},
            {"restriction", write_restriction(d.quality_restriction)}};
}

// -- episode pieces -----------------------------------------------------------

SceneObject read_scene_object(const json& j, const std::string& path) {
    SceneObject so;
    so.object.id = string_field(j, "id", path);
    so.object.name = string_field_or(j, "name", path, so.object.id);
    so.object.kind = EntityKind::Object;
    so.object.type_tag = string_field(j, "type", path);
    so.dispositions = list_field<Disposition>(j, "dispositions", path, [&](const json& d, const std::string& p) {
        Disposition disp;
        disp.id = string_field_or(d, "id", p, "");
        disp.bearer = so.object.id;
        disp.disposition_type = string_field(d, "type", p);
        if (const json* a = optional_field(d, "affordance")) disp.affordance = as_string(*a, sub(p, "affordance"));
        return disp;
    });
    so.qualities = list_field<Entity>(j, "qualities", path, [](const json& q, const std::string& p) {
        Entity e;
        e.id = string_field_or(q, "id", p, "");
        e.kind = EntityKind::Quality;
        e.type_tag = string_field(q, "type", p);
        e.name = e.type_tag;
        e.value = Quantity{as_number(field(q, "value", p), sub(p, "value")), string_field(q, "units", p)};
        return e;
    });
    return so;
}

json write_scene_object(const SceneObject& so) {
    json dispositions = json::array();
    for (const auto& d : so.dispositions) {
        json dj = {{"type", d.disposition_type}};
        if (!d.id.empty()) dj["id"] = d.id;
        if (d.affordance) dj["affordance"] = *d.affordance;
        dispositions.push_back(std::move(dj));
    }
    json qualities = json::array();
    for (const auto& q : so.qualities) {
        json qj = {{"type", q.type_tag}};
        if (!q.id.empty()) qj["id"] = q.id;
        if (q.value) {
            qj["value"] = q.value->value;
            qj["units"] = q.value->units;
        }
        qualities.push_back(std::move(qj));
    }
    return {{"id", so.object.id},
            {"name", so.object.name},
            {"type", so.object.type_tag},
            {"dispositions", std::move(dispositions)},
            {"qualities", std::move(qualities)}};
}

RawEvent read_event(const json& j, const std::string& path) {
    RawEvent ev;
    const std::string cls = string_field(j, "class", path);
    auto c = parse_token_class(cls);
    if (!c) fail(sub(path, "class"), "unknown event class '" + cls + "'");
    ev.token_class = *c;
    ev.type = string_field(j, "type", path);
    ev.participants = strings_field(j, "participants", path);
    ev.start = as_number(field(j, "start", path), sub(path, "start"));
    ev.end = as_number(field(j, "end", path), sub(path, "end"));
    if (const json* h = optional_field(j, "holds")) {
        if (!h->is_boolean()) fail(sub(path, "holds"), "expected boolean");
        ev.holds = h->get<bool>();
    }
    return ev;
}

json write_event(const RawEvent& ev) {
    json j = {{"class", std::string(to_string(ev.token_class))},
              {"type", ev.type},
              {"participants", ev.participants},
              {"start", ev.start},
              {"end", ev.end}};
    if (!ev.holds) j["holds"] = false;
    return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

ValidationFailed::ValidationFailed(std::vector<std::string> issues)
    : Error(ErrorCode::ValidationFailed, std::to_string(issues.size()) + " issue(s)" +
                                             (issues.empty() ? std::string() : "; first: " + issues.front())),
      issues_(std::move(issues)) {}

LibraryDocument parse_library_document(std::string_view text) {
    const json root = parse_json(text);
    if (!root.is_object()) fail("", "expected object");
    check_version(root);
    LibraryDocument doc;
    doc.version = string_field(root, "version", "");
    doc.concepts = list_field<Concept>(root, "concepts", "", read_concept);
    doc.descriptions = list_field<Description>(root, "descriptions", "", read_description);
    doc.affordances = list_field<AffordanceSpec>(root, "affordances", "", read_affordance);
    doc.designs = list_field<DesignSpec>(root, "designs", "", read_design);
    return doc;
}

std::string serialize(const LibraryDocument& doc) {
    json concepts = json::array();
    for (const auto& c : doc.concepts) concepts.push_back(write_concept(c));
    json descriptions = json::array();
    for (const auto& d : doc.descriptions) descriptions.push_back(write_description(d));
    json affordances = json::array();
    for (const auto& a : doc.affordances) affordances.push_back(write_affordance(a));
    json designs = json::array();
    for (const auto& d : doc.designs) designs.push_back(write_design(d));
    return dump({{"version", doc.version},
                 {"concepts", std::move(concepts)},
                 {"descriptions", std::move(descriptions)},
                 {"affordances", std::move(affordances)},
                 {"designs", std::move(designs)}});
}

EpisodeDocument parse_episode_document(std::string_view text) {
    const json root = parse_json(text);
    if (!root.is_object()) fail("", "expected object");
    check_version(root);
    EpisodeDocument doc;
    doc.version = string_field(root, "version", "");
    doc.id = string_field_or(root, "id", "", "episode");
    if (const json* scene = optional_field(root, "scene")) {
        doc.scene.objects = list_field<SceneObject>(*scene, "objects", "/scene", read_scene_object);
    }
    doc.events = list_field<RawEvent>(root, "events", "", read_event);
    return doc;
}

std::string serialize(const EpisodeDocument& doc) {
    json objects = json::array();
    for (const auto& o : doc.scene.objects) objects.push_back(write_scene_object(o));
    json events = json::array();
    for (const auto& e : doc.events) events.push_back(write_event(e));
    return dump({{"version", doc.version},
                 {"id", doc.id},
                 {"scene", {{"objects", std::move(objects)}}},
                 {"events", std::move(events)}});
}

const Description* Library::find(std::string_view id) const {
    for (const auto& d : descriptions) {
        if (d.id == id) return &d;
    }
    return nullptr;
}

Library build_library(LibraryDocument doc) {
    std::vector<std::string> issues;
    auto store = std::make_shared<OntologyStore>();

    auto attempt = [&](const std::string& where, auto&& action) {
        try {
            action();
        } catch (const Error& e) {
            issues.push_back(where + ": " + e.what());
        }
    };

    // Concepts first without parents so that forward references resolve,
    // then the parent edges, each checked for kind and cycles.
    for (const auto& c : doc.concepts) {
        attempt("concept " + c.id, [&] {
            Concept bare = c;
            bare.parents.clear();
            if (c.parents.count(c.id) != 0) throw Error(ErrorCode::CycleError, c.id + " lists itself as parent");
            store->add_concept(std::move(bare));
        });
    }
    for (const auto& c : doc.concepts) {
        if (!store->has_concept(c.id)) continue;
        for (const auto& p : c.parents) {
            if (p == c.id) continue;
            attempt("concept " + c.id, [&] { store->add_parent(c.id, p); });
        }
    }
    for (const auto& a : doc.affordances) {
        attempt("affordance " + a.concept_id, [&] { store->add_affordance(a); });
    }
    for (const auto& d : doc.designs) {
        attempt("design " + d.concept_id, [&] { store->add_design(d); });
    }
    store->freeze();

    std::set<std::string> seen;
    for (const auto& d : doc.descriptions) {
        if (!seen.insert(d.id).second) issues.push_back("description " + d.id + ": duplicate id");
        for (const auto& issue : validate_description(d, *store)) {
            issues.push_back("description " + d.id + ": " + std::string(to_string(issue.code)) + ": " + issue.message);
        }
    }
    if (!issues.empty()) throw ValidationFailed(std::move(issues));

    Library lib;
    lib.descriptions = doc.descriptions;
    lib.document = std::move(doc);
    lib.store = std::move(store);
    return lib;
}

Episode build_episode(const EpisodeDocument& doc, double eps) {
    std::vector<std::string> issues;
    std::set<std::string> objects;
    for (const auto& o : doc.scene.objects) {
        if (!objects.insert(o.object.id).second) issues.push_back("scene object " + o.object.id + ": duplicate id");
    }
    for (std::size_t i = 0; i < doc.events.size(); ++i) {
        for (const auto& p : doc.events[i].participants) {
            if (objects.count(p) == 0) {
                issues.push_back("event " + std::to_string(i) + ": participant " + p + " is not a scene object");
            }
        }
    }
    if (!issues.empty()) throw ValidationFailed(std::move(issues));
    return Episode{doc.id, tokenize(doc.events, eps), doc.scene};
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

Library load_library(const std::filesystem::path& path) {
    return build_library(parse_library_document(read_file(path)));
}

Episode load_episode(const std::filesystem::path& path, double eps) {
    return build_episode(parse_episode_document(read_file(path)), eps);
}

}  // namespace soma
