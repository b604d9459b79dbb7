#include "soma/ontology.hpp"

#include "soma/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>

namespace soma {

namespace {

constexpr std::array<std::pair<ConceptKind, std::string_view>, 10> kConceptKindNames = {{
    {ConceptKind::Task, "Task"},
    {ConceptKind::ProcessType, "ProcessType"},
    {ConceptKind::StateType, "StateType"},
    {ConceptKind::Role, "Role"},
    {ConceptKind::Parameter, "Parameter"},
    {ConceptKind::AffordanceDescr, "AffordanceDescr"},
    {ConceptKind::DesignDescr, "DesignDescr"},
    {ConceptKind::PlanDescr, "PlanDescr"},
    {ConceptKind::ConfigurationDescr, "ConfigurationDescr"},
    {ConceptKind::ProcessFlowDescr, "ProcessFlowDescr"},
}};

constexpr std::array<std::pair<EntityKind, std::string_view>, 7> kEntityKindNames = {{
    {EntityKind::Object, "Object"},
    {EntityKind::Action, "Action"},
    {EntityKind::Process, "Process"},
    {EntityKind::State, "State"},
    {EntityKind::Quality, "Quality"},
    {EntityKind::Region, "Region"},
    {EntityKind::Situation, "Situation"},
}};

constexpr std::array<std::pair<DesignAspect, std::string_view>, 3> kAspectNames = {{
    {DesignAspect::Functional, "Functional"},
    {DesignAspect::Structural, "Structural"},
    {DesignAspect::Aesthetic, "Aesthetic"},
}};

template <typename Enum, std::size_t N>
std::string_view lookup_name(const std::array<std::pair<Enum, std::string_view>, N>& table, Enum value) {
    for (const auto& [e, n] : table) {
        if (e == value) return n;
    }
    return "?";
}

template <typename Enum, std::size_t N>
std::optional<Enum> lookup_value(const std::array<std::pair<Enum, std::string_view>, N>& table,
                                 std::string_view text) {
    for (const auto& [e, n] : table) {
        if (n == text) return e;
    }
    return std::nullopt;
}

bool in_region(const Quantity& q, const RegionWithin& r) {
    return q.units == r.units && q.value >= r.lo && q.value <= r.hi;
}

}  // namespace

std::string_view to_string(ConceptKind kind) { return lookup_name(kConceptKindNames, kind); }
std::string_view to_string(EntityKind kind) { return lookup_name(kEntityKindNames, kind); }
std::string_view to_string(DesignAspect aspect) { return lookup_name(kAspectNames, aspect); }

std::optional<ConceptKind> parse_concept_kind(std::string_view text) {
    return lookup_value(kConceptKindNames, text);
}
std::optional<EntityKind> parse_entity_kind(std::string_view text) {
    return lookup_value(kEntityKindNames, text);
}
std::optional<DesignAspect> parse_design_aspect(std::string_view text) {
    return lookup_value(kAspectNames, text);
}

void validate_restriction(const Restriction& r) {
    std::visit(
        [](const auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, AllOf> || std::is_same_v<T, AnyOf>) {
                if (node.terms.empty()) {
                    throw Error(ErrorCode::InvalidArgument, "empty conjunction or disjunction");
                }
                for (const auto& t : node.terms) validate_restriction(t);
            } else if constexpr (std::is_same_v<T, RegionWithin>) {
                if (!(node.lo <= node.hi) || !std::isfinite(node.lo) || !std::isfinite(node.hi)) {
                    throw Error(ErrorCode::InvalidArgument, "region bounds must be finite with lo <= hi");
                }
            } else if constexpr (std::is_same_v<T, TypeTagIn>) {
                if (node.tags.empty()) {
                    throw Error(ErrorCode::InvalidArgument, "empty type tag set");
                }
            }
        },
        r.node);
}

bool classifiable_kind(ConceptKind concept_kind, EntityKind entity_kind) {
    switch (concept_kind) {
        case ConceptKind::Task: return entity_kind == EntityKind::Action;
        case ConceptKind::ProcessType: return entity_kind == EntityKind::Process;
        case ConceptKind::StateType: return entity_kind == EntityKind::State;
        case ConceptKind::Role: return entity_kind == EntityKind::Object;
        case ConceptKind::Parameter: return entity_kind == EntityKind::Region || entity_kind == EntityKind::Quality;
        case ConceptKind::DesignDescr: return entity_kind == EntityKind::Object;
        case ConceptKind::AffordanceDescr:
        case ConceptKind::PlanDescr:
        case ConceptKind::ConfigurationDescr:
        case ConceptKind::ProcessFlowDescr: return entity_kind == EntityKind::Situation;
    }
    return false;
}

// ---------------------------------------------------------------------------
// build phase

void OntologyStore::require_mutable() const {
    if (frozen_) throw Error(ErrorCode::FrozenStore, "store is frozen");
}

void OntologyStore::require_unused_id(const std::string& id) const {
    if (id.empty()) throw Error(ErrorCode::InvalidArgument, "empty identifier");
    if (has_concept(id) || has_entity(id)) throw Error(ErrorCode::DuplicateId, id);
}

std::string OntologyStore::fresh_id(const std::string& base) const {
    const std::string stem = base.empty() ? std::string("id") : base;
    if (!has_concept(stem) && !has_entity(stem)) return stem;
    for (std::size_t n = 2;; ++n) {
        std::string candidate = stem + "#" + std::to_string(n);
        if (!has_concept(candidate) && !has_entity(candidate)) return candidate;
    }
}

std::string OntologyStore::add_concept(Concept c) {
    require_mutable();
    if (c.parents.count(c.id) != 0) {
        throw Error(ErrorCode::CycleError, c.id + " lists itself as parent");
    }
    require_unused_id(c.id);
    for (const auto& p : c.parents) {
        const Concept& parent = concept_by_id(p);
        if (parent.kind != c.kind) {
            throw Error(ErrorCode::KindMismatch, c.id + " (" + std::string(to_string(c.kind)) + ") under " + p +
                                                     " (" + std::string(to_string(parent.kind)) + ")");
        }
    }
    if (c.restriction) {
        if (c.kind != ConceptKind::Role && c.kind != ConceptKind::Parameter) {
            throw Error(ErrorCode::KindMismatch, "only roles and parameters carry restrictions: " + c.id);
        }
        validate_restriction(*c.restriction);
    }
    std::string id = c.id;
    concepts_.emplace(id, std::move(c));
    return id;
}

std::string OntologyStore::add_concept(const std::string& name, ConceptKind kind,
                                       const std::set<std::string>& parents,
                                       std::optional<Restriction> restriction) {
    require_mutable();
    return add_concept(Concept{fresh_id(name), name, kind, parents, std::move(restriction)});
}

void OntologyStore::add_parent(const std::string& child, const std::string& parent) {
    require_mutable();
    if (!has_concept(child)) throw Error(ErrorCode::UnknownId, child);
    const Concept& p = concept_by_id(parent);
    auto& c = concepts_.find(child)->second;
    if (p.kind != c.kind) {
        throw Error(ErrorCode::KindMismatch, child + " under " + parent);
    }
    if (!c.parents.insert(parent).second) return;
    if (!taxonomy_is_acyclic()) {
        c.parents.erase(parent);
        throw Error(ErrorCode::CycleError, "edge " + child + " -> " + parent + " closes a cycle");
    }
}

std::string OntologyStore::add_entity(Entity e) {
    require_mutable();
    require_unused_id(e.id);
    if (!e.qualities.empty() && e.kind != EntityKind::Object) {
        throw Error(ErrorCode::InvalidArgument, "only objects carry qualities: " + e.id);
    }
    if (!e.participants.empty() && !is_event_kind(e.kind)) {
        throw Error(ErrorCode::InvalidArgument, "only events carry participants: " + e.id);
    }
    for (const auto& q : e.qualities) {
        if (entity(q).kind != EntityKind::Quality) {
            throw Error(ErrorCode::KindMismatch, q + " is not a quality");
        }
    }
    for (const auto& p : e.participants) {
        (void)entity(p);
    }
    std::string id = e.id;
    entities_.emplace(id, std::move(e));
    return id;
}

std::string OntologyStore::add_disposition(Disposition d) {
    require_mutable();
    const Entity& bearer = entity(d.bearer);
    if (bearer.kind != EntityKind::Object) {
        throw Error(ErrorCode::KindMismatch, "disposition bearer must be an object: " + d.bearer);
    }
    if (d.affordance && concept_by_id(*d.affordance).kind != ConceptKind::AffordanceDescr) {
        throw Error(ErrorCode::KindMismatch, *d.affordance + " is not an affordance");
    }
    if (d.id.empty()) d.id = fresh_id(d.bearer + "." + d.disposition_type);
    require_unused_id(d.id);
    entities_.emplace(d.id, Entity{d.id, d.disposition_type, EntityKind::Quality, d.disposition_type, {}, {}, {}});
    entities_.find(d.bearer)->second.qualities.insert(d.id);
    dispositions_by_bearer_[d.bearer].push_back(d.id);
    std::string id = d.id;
    dispositions_.emplace(id, std::move(d));
    return id;
}

std::string OntologyStore::add_quality(const std::string& bearer, Entity quality) {
    require_mutable();
    if (entity(bearer).kind != EntityKind::Object) {
        throw Error(ErrorCode::KindMismatch, "quality bearer must be an object: " + bearer);
    }
    quality.kind = EntityKind::Quality;
    if (quality.id.empty()) quality.id = fresh_id(bearer + "." + quality.type_tag);
    const std::string id = add_entity(std::move(quality));
    entities_.find(bearer)->second.qualities.insert(id);
    return id;
}

void OntologyStore::add_affordance(AffordanceSpec spec) {
    require_mutable();
    if (concept_by_id(spec.concept_id).kind != ConceptKind::AffordanceDescr) {
        throw Error(ErrorCode::KindMismatch, spec.concept_id + " is not an affordance description");
    }
    auto require_role = [&](const std::string& id) {
        if (concept_by_id(id).kind != ConceptKind::Role) {
            throw Error(ErrorCode::KindMismatch, id + " is not a role");
        }
    };
    require_role(spec.bearer_role);
    require_role(spec.trigger_role);
    if (spec.background_role) require_role(*spec.background_role);
    if (spec.bearer_role == spec.trigger_role) {
        throw Error(ErrorCode::InvalidArgument, "bearer and trigger roles coincide in " + spec.concept_id);
    }
    if (affordances_.count(spec.concept_id) != 0) throw Error(ErrorCode::DuplicateId, spec.concept_id);
    std::string key = spec.concept_id;
    affordances_.emplace(std::move(key), std::move(spec));
}

void OntologyStore::add_design(DesignSpec spec) {
    require_mutable();
    if (concept_by_id(spec.concept_id).kind != ConceptKind::DesignDescr) {
        throw Error(ErrorCode::KindMismatch, spec.concept_id + " is not a design description");
    }
    if (spec.aspect != DesignAspect::Functional) {
        throw Error(ErrorCode::UnsupportedAspect,
                    std::string(to_string(spec.aspect)) + " design " + spec.concept_id);
    }
    validate_restriction(spec.quality_restriction);
    if (designs_.count(spec.concept_id) != 0) throw Error(ErrorCode::DuplicateId, spec.concept_id);
    std::string key = spec.concept_id;
    designs_.emplace(std::move(key), std::move(spec));
}

void OntologyStore::classify(Classification c) {
    require_mutable();
    auto verdict = check_classification(c.concept_id, c.entity_id);
    if (!verdict) {
        throw Error(ErrorCode::InvalidArgument, c.concept_id + " cannot classify " + c.entity_id + ": " + verdict.reason);
    }
    classifications_.push_back(std::move(c));
}

void OntologyStore::freeze() {
    if (frozen_) return;
    if (!taxonomy_is_acyclic()) throw Error(ErrorCode::CycleError, "taxonomy contains a cycle");
    ancestors_.clear();
    for (const auto& [id, c] : concepts_) {
        auto& closure = ancestors_[id];
        std::deque<std::string> pending{id};
        while (!pending.empty()) {
            std::string cur = std::move(pending.front());
            pending.pop_front();
            if (!closure.insert(cur).second) continue;
            for (const auto& p : concepts_.find(cur)->second.parents) pending.push_back(p);
        }
    }
    frozen_ = true;
}

OntologyStore OntologyStore::extended() const {
    OntologyStore copy = *this;
    copy.frozen_ = false;
    copy.ancestors_.clear();
    return copy;
}

// ---------------------------------------------------------------------------
// queries

bool OntologyStore::has_concept(std::string_view id) const { return concepts_.find(id) != concepts_.end(); }

bool OntologyStore::has_entity(std::string_view id) const { return entities_.find(id) != entities_.end(); }

const Concept& OntologyStore::concept_by_id(std::string_view id) const {
    auto it = concepts_.find(id);
    if (it == concepts_.end()) throw Error(ErrorCode::UnknownId, std::string(id));
    return it->second;
}

const Entity& OntologyStore::entity(std::string_view id) const {
    auto it = entities_.find(id);
    if (it == entities_.end()) throw Error(ErrorCode::UnknownId, std::string(id));
    return it->second;
}

std::vector<const Concept*> OntologyStore::concepts_named(std::string_view name) const {
    std::vector<const Concept*> out;
    for (const auto& [id, c] : concepts_) {
        if (c.name == name) out.push_back(&c);
    }
    return out;
}

const Disposition* OntologyStore::disposition(std::string_view quality_id) const {
    auto it = dispositions_.find(quality_id);
    return it == dispositions_.end() ? nullptr : &it->second;
}

std::vector<const Disposition*> OntologyStore::dispositions_of(std::string_view bearer) const {
    std::vector<const Disposition*> out;
    auto it = dispositions_by_bearer_.find(bearer);
    if (it == dispositions_by_bearer_.end()) return out;
    for (const auto& id : it->second) out.push_back(&dispositions_.find(id)->second);
    return out;
}

bool OntologyStore::is_subsumed_by(std::string_view a, std::string_view b) const {
    (void)concept_by_id(a);
    (void)concept_by_id(b);
    if (frozen_) {
        const auto& closure = ancestors_.find(a)->second;
        return closure.find(b) != closure.end();
    }
    std::set<std::string_view> seen;
    std::vector<std::string_view> stack{a};
    while (!stack.empty()) {
        auto cur = stack.back();
        stack.pop_back();
        if (cur == b) return true;
        if (!seen.insert(cur).second) continue;
        for (const auto& p : concepts_.find(cur)->second.parents) stack.emplace_back(p);
    }
    return false;
}

std::optional<std::string> OntologyStore::explain_failure(const Entity& e, const Restriction& r) const {
    return std::visit(
        [&](const auto& node) -> std::optional<std::string> {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, KindIs>) {
                if (e.kind == node.kind) return std::nullopt;
                return "kind " + std::string(to_string(e.kind)) + " is not " + std::string(to_string(node.kind));
            } else if constexpr (std::is_same_v<T, TypeTagIn>) {
                if (node.tags.count(e.type_tag) != 0) return std::nullopt;
                return "type " + e.type_tag + " not admitted";
            } else if constexpr (std::is_same_v<T, HasDisposition>) {
                for (const auto* d : dispositions_of(e.id)) {
                    if (d->disposition_type == node.disposition_type) return std::nullopt;
                }
                return "missing disposition " + node.disposition_type;
            } else if constexpr (std::is_same_v<T, RegionWithin>) {
                if (e.value && in_region(*e.value, node)) return std::nullopt;
                if (e.kind == EntityKind::Object) {
                    for (const auto& q : e.qualities) {
                        const Entity& quality = entity(q);
                        if (quality.value && in_region(*quality.value, node)) return std::nullopt;
                    }
                }
                return "no value within region";
            } else if constexpr (std::is_same_v<T, AllOf>) {
                for (const auto& term : node.terms) {
                    if (auto why = explain_failure(e, term)) return why;
                }
                return std::nullopt;
            } else {
                std::optional<std::string> first;
                for (const auto& term : node.terms) {
                    auto why = explain_failure(e, term);
                    if (!why) return std::nullopt;
                    if (!first) first = std::move(why);
                }
                return first;
            }
        },
        r.node);
}

bool OntologyStore::satisfies_restriction(std::string_view entity_id, const Restriction& r) const {
    return !explain_failure(entity(entity_id), r).has_value();
}

ClassificationVerdict OntologyStore::check_classification(std::string_view concept_id,
                                                          std::string_view entity_id) const {
    if (has_entity(concept_id)) {
        throw Error(ErrorCode::BranchViolation, std::string(concept_id) + " is a ground entity, not a concept");
    }
    if (has_concept(entity_id)) {
        throw Error(ErrorCode::BranchViolation, std::string(entity_id) + " is a concept, not a ground entity");
    }
    const Concept& c = concept_by_id(concept_id);
    const Entity& e = entity(entity_id);
    if (!classifiable_kind(c.kind, e.kind)) {
        return ClassificationVerdict::reject(std::string(to_string(c.kind)) + " cannot classify " +
                                             std::string(to_string(e.kind)));
    }
    if (c.restriction) {
        if (auto why = explain_failure(e, *c.restriction)) return ClassificationVerdict::reject(*why);
    }
    return ClassificationVerdict::accept();
}

bool OntologyStore::design_describes(const DesignSpec& design, std::string_view object_id) const {
    if (design.aspect != DesignAspect::Functional) {
        throw Error(ErrorCode::UnsupportedAspect, std::string(to_string(design.aspect)) + " design");
    }
    const Entity& e = entity(object_id);
    if (e.kind != EntityKind::Object) return false;
    return !explain_failure(e, design.quality_restriction).has_value();
}

std::vector<std::string> OntologyStore::classification_violations() const {
    std::vector<std::string> out;
    for (const auto& c : classifications_) {
        const std::string edge = c.concept_id + " -> " + c.entity_id;
        if (!has_concept(c.concept_id) || has_entity(c.concept_id)) {
            out.push_back(edge + ": classifier is not a social-branch concept");
            continue;
        }
        if (!has_entity(c.entity_id) || has_concept(c.entity_id)) {
            out.push_back(edge + ": classified item is not a ground-branch entity");
            continue;
        }
        auto verdict = check_classification(c.concept_id, c.entity_id);
        if (!verdict) out.push_back(edge + ": " + verdict.reason);
    }
    return out;
}

bool OntologyStore::taxonomy_is_acyclic() const {
    std::map<std::string_view, std::size_t> pending_parents;
    std::map<std::string_view, std::vector<std::string_view>> children;
    for (const auto& [id, c] : concepts_) {
        pending_parents[id] = c.parents.size();
        for (const auto& p : c.parents) children[p].push_back(id);
    }
    std::deque<std::string_view> ready;
    for (const auto& [id, n] : pending_parents) {
        if (n == 0) ready.push_back(id);
    }
    std::size_t visited = 0;
    while (!ready.empty()) {
        auto cur = ready.front();
        ready.pop_front();
        ++visited;
        for (auto child : children[cur]) {
            if (--pending_parents[child] == 0) ready.push_back(child);
        }
    }
    return visited == concepts_.size();
}

}  // namespace soma
