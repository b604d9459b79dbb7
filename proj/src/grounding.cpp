#include "soma/grounding.hpp"

#include "soma/error.hpp"

namespace soma {

namespace {

bool value_satisfies(const Quantity& value, const Restriction& r) {
    return std::visit(
        [&](const auto& node) -> bool {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, RegionWithin>) {
                if (node.units != value.units) {
                    throw Error(ErrorCode::UnitMismatch, "expected " + node.units + ", got " + value.units);
                }
                return value.value >= node.lo && value.value <= node.hi;
            } else if constexpr (std::is_same_v<T, KindIs>) {
                return node.kind == EntityKind::Region || node.kind == EntityKind::Quality;
            } else if constexpr (std::is_same_v<T, AllOf>) {
                for (const auto& t : node.terms) {
                    if (!value_satisfies(value, t)) return false;
                }
                return true;
            } else if constexpr (std::is_same_v<T, AnyOf>) {
                for (const auto& t : node.terms) {
                    if (value_satisfies(value, t)) return true;
                }
                return false;
            } else {
                // A bare number has no type tag and bears no dispositions.
                return false;
            }
        },
        r.node);
}

std::set<std::string> candidates_for(const std::string& role, std::span<const std::string> scene,
                                     const OntologyStore& store) {
    if (!store.has_concept(role) || store.concept_by_id(role).kind != ConceptKind::Role) {
        throw Error(ErrorCode::UnknownRole, role);
    }
    std::set<std::string> out;
    for (const auto& id : scene) {
        if (store.check_classification(role, id)) out.insert(id);
    }
    return out;
}

}  // namespace

std::vector<std::string> Scene::ids() const {
    std::vector<std::string> out;
    out.reserve(objects.size());
    for (const auto& o : objects) out.push_back(o.object.id);
    return out;
}

OntologyStore ground_scene(const OntologyStore& library, const Scene& scene) {
    OntologyStore store = library.extended();
    for (const auto& so : scene.objects) {
        Entity obj = so.object;
        obj.kind = EntityKind::Object;
        obj.qualities.clear();
        store.add_entity(std::move(obj));
    }
    for (const auto& so : scene.objects) {
        for (auto d : so.dispositions) {
            d.bearer = so.object.id;
            store.add_disposition(std::move(d));
        }
        for (const auto& q : so.qualities) store.add_quality(so.object.id, q);
    }
    store.freeze();
    return store;
}

RoleCandidates select_objects(const EventTypeRef& task, std::span<const std::string> scene,
                              const OntologyStore& store) {
    RoleCandidates out;
    for (const auto& role : task.uses_roles) out[role] = candidates_for(role, scene, store);
    return out;
}

RoleCandidates affordance_candidates(const AffordanceSpec& affordance, std::span<const std::string> scene,
                                     const OntologyStore& store) {
    RoleCandidates out;
    out[affordance.bearer_role] = candidates_for(affordance.bearer_role, scene, store);
    out[affordance.trigger_role] = candidates_for(affordance.trigger_role, scene, store);
    if (affordance.background_role) {
        out[*affordance.background_role] = candidates_for(*affordance.background_role, scene, store);
    }
    return out;
}

std::string_view to_string(ForceOutcome outcome) { return outcome == ForceOutcome::Motion ? "Motion" : "Rest"; }

ForceOutcome force_outcome(Tendency tendency, Stronger stronger) {
    const ForceOutcome realized = tendency == Tendency::TowardMotion ? ForceOutcome::Motion : ForceOutcome::Rest;
    if (stronger == Stronger::Agonist) return realized;
    return realized == ForceOutcome::Motion ? ForceOutcome::Rest : ForceOutcome::Motion;
}

ForceOutcome force_outcome(const ForceExpression& expr) {
    if (expr.agonist == expr.antagonist) {
        throw Error(ErrorCode::InvalidArgument, "agonist and antagonist must differ");
    }
    return force_outcome(expr.agonist_tendency, expr.stronger);
}

bool check_parameter(const OntologyStore& store, std::string_view parameter, const Quantity& value) {
    const Concept& c = store.concept_by_id(parameter);
    if (c.kind != ConceptKind::Parameter) {
        throw Error(ErrorCode::KindMismatch, std::string(parameter) + " is not a parameter");
    }
    if (!c.restriction) return true;
    return value_satisfies(value, *c.restriction);
}

}  // namespace soma
