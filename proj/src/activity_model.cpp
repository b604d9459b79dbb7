#include "soma/activity_model.hpp"

#include "soma/error.hpp"

#include <algorithm>

namespace soma {

namespace {

const std::vector<EventTypeRef> kNoPhases;
const std::vector<PhaseConstraint> kNoConstraints;
const std::vector<Binding> kNoBindings;
const std::vector<ConditionalSuccedence> kNoSuccedences;

EntityKind event_kind_for(ConceptKind k) {
    switch (k) {
        case ConceptKind::Task: return EntityKind::Action;
        case ConceptKind::ProcessType: return EntityKind::Process;
        default: return EntityKind::State;
    }
}

class IssueCollector {
public:
    void add(IssueCode code, std::string message) { issues_.push_back({code, std::move(message)}); }
    [[nodiscard]] bool empty() const { return issues_.empty(); }
    std::vector<ValidationIssue> take() { return std::move(issues_); }

private:
    std::vector<ValidationIssue> issues_;
};

void check_concept(IssueCollector& out, const OntologyStore& store, const std::string& where,
                   const std::string& id, std::initializer_list<ConceptKind> allowed) {
    if (!store.has_concept(id)) {
        out.add(IssueCode::UnknownConcept, where + ": unknown concept " + id);
        return;
    }
    const auto kind = store.concept_by_id(id).kind;
    if (std::find(allowed.begin(), allowed.end(), kind) == allowed.end()) {
        out.add(IssueCode::WrongConceptKind,
                where + ": " + id + " has kind " + std::string(to_string(kind)));
    }
}

void check_ref(IssueCollector& out, const OntologyStore& store, const EventTypeRef& ref,
               std::initializer_list<ConceptKind> allowed) {
    check_concept(out, store, ref.id, ref.concept_id, allowed);
    for (const auto& role : ref.uses_roles) {
        check_concept(out, store, ref.id + " role", role, {ConceptKind::Role});
    }
    for (const auto& param : ref.uses_parameters) {
        check_concept(out, store, ref.id + " parameter", param, {ConceptKind::Parameter});
    }
}

bool uses_slot(const EventTypeRef& ref, const std::string& role) {
    return std::find(ref.uses_roles.begin(), ref.uses_roles.end(), role) != ref.uses_roles.end() ||
           std::find(ref.uses_parameters.begin(), ref.uses_parameters.end(), role) != ref.uses_parameters.end();
}

void check_restriction(IssueCollector& out, const std::string& where, const Restriction& r) {
    try {
        validate_restriction(r);
    } catch (const Error& e) {
        out.add(IssueCode::InvalidRestriction, where + ": " + e.what());
    }
}

ConstraintNetwork build_network(const Description& d) {
    ConstraintNetwork net;
    const auto& whole = d.defined_event();
    net.add_variable(whole.id);
    for (const auto& phase : d.phases()) {
        net.add_variable(phase.id);
        net.constrain(phase.id, whole.id, kPhaseWithinWhole);
    }
    for (const auto& c : d.constraints()) {
        net.constrain(c.left, c.right, c.relation);
    }
    for (const auto& cs : d.succedences()) {
        net.constrain(cs.earlier, cs.later, kSuccedenceRelation);
    }
    return net;
}

}  // namespace

std::string_view to_string(StateRelation r) {
    switch (r) {
        case StateRelation::Contact: return "Contact";
        case StateRelation::Support: return "Support";
        case StateRelation::Containment: return "Containment";
    }
    return "?";
}

std::optional<StateRelation> parse_state_relation(std::string_view text) {
    for (auto r : {StateRelation::Contact, StateRelation::Support, StateRelation::Containment}) {
        if (to_string(r) == text) return r;
    }
    return std::nullopt;
}

std::string_view to_string(DescriptionKind kind) {
    switch (kind) {
        case DescriptionKind::Plan: return "plan";
        case DescriptionKind::Configuration: return "configuration";
        case DescriptionKind::ProcessFlow: return "processFlow";
    }
    return "?";
}

std::string_view to_string(IssueCode code) {
    switch (code) {
        case IssueCode::UnknownConcept: return "UnknownConcept";
        case IssueCode::WrongConceptKind: return "WrongConceptKind";
        case IssueCode::DuplicateRef: return "DuplicateRef";
        case IssueCode::UnknownPhase: return "UnknownPhase";
        case IssueCode::UnknownRole: return "UnknownRole";
        case IssueCode::EmptyRelation: return "EmptyRelation";
        case IssueCode::BindingTooSmall: return "BindingTooSmall";
        case IssueCode::InvalidSuccedence: return "InvalidSuccedence";
        case IssueCode::InvalidGoal: return "InvalidGoal";
        case IssueCode::InvalidRestriction: return "InvalidRestriction";
        case IssueCode::TemporallyInconsistent: return "TemporallyInconsistent";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Description accessors

const EventTypeRef& Description::defined_event() const {
    return std::visit(
        [](const auto& b) -> const EventTypeRef& {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, Plan>) return b.defines_task;
            else if constexpr (std::is_same_v<T, Configuration>) return b.describes_state;
            else return b.defines_process;
        },
        body);
}

std::span<const EventTypeRef> Description::phases() const {
    if (const auto* p = std::get_if<Plan>(&body)) return p->phases;
    if (const auto* f = std::get_if<ProcessFlow>(&body)) return f->phases;
    return kNoPhases;
}

std::span<const PhaseConstraint> Description::constraints() const {
    if (const auto* p = std::get_if<Plan>(&body)) return p->constraints;
    if (const auto* f = std::get_if<ProcessFlow>(&body)) return f->constraints;
    return kNoConstraints;
}

std::span<const Binding> Description::bindings() const {
    if (const auto* p = std::get_if<Plan>(&body)) return p->bindings;
    if (const auto* f = std::get_if<ProcessFlow>(&body)) return f->bindings;
    return kNoBindings;
}

std::span<const ConditionalSuccedence> Description::succedences() const {
    if (const auto* p = std::get_if<Plan>(&body)) return p->succedences;
    return kNoSuccedences;
}

const EventTypeRef* Description::find_ref(std::string_view ref_id) const {
    if (defined_event().id == ref_id) return &defined_event();
    for (const auto& phase : phases()) {
        if (phase.id == ref_id) return &phase;
    }
    return nullptr;
}

// ---------------------------------------------------------------------------
// validation and compilation

std::vector<ValidationIssue> validate_description(const Description& d, const OntologyStore& store) {
    IssueCollector out;
    const auto& whole = d.defined_event();

    switch (d.kind()) {
        case DescriptionKind::Plan:
            check_ref(out, store, whole, {ConceptKind::Task});
            for (const auto& p : d.phases()) {
                check_ref(out, store, p, {ConceptKind::Task, ConceptKind::ProcessType, ConceptKind::StateType});
            }
            break;
        case DescriptionKind::ProcessFlow:
            check_ref(out, store, whole, {ConceptKind::ProcessType});
            for (const auto& p : d.phases()) {
                check_ref(out, store, p, {ConceptKind::ProcessType, ConceptKind::StateType});
            }
            break;
        case DescriptionKind::Configuration:
            check_ref(out, store, whole, {ConceptKind::StateType});
            break;
    }

    std::set<std::string> ids{whole.id};
    for (const auto& p : d.phases()) {
        if (!ids.insert(p.id).second) out.add(IssueCode::DuplicateRef, "duplicate event type ref " + p.id);
    }

    for (const auto& c : d.constraints()) {
        for (const auto* end : {&c.left, &c.right}) {
            if (d.find_ref(*end) == nullptr) out.add(IssueCode::UnknownPhase, "constraint references " + *end);
        }
        if (c.relation.empty()) {
            out.add(IssueCode::EmptyRelation, "empty relation between " + c.left + " and " + c.right);
        }
    }

    for (const auto& b : d.bindings()) {
        if (b.slots.size() < 2) out.add(IssueCode::BindingTooSmall, "binding " + b.id + " has fewer than 2 slots");
        for (const auto& slot : b.slots) {
            const auto* ref = d.find_ref(slot.phase);
            if (ref == nullptr) {
                out.add(IssueCode::UnknownPhase, "binding " + b.id + " references " + slot.phase);
            } else if (!uses_slot(*ref, slot.role)) {
                out.add(IssueCode::UnknownRole, "binding " + b.id + ": " + slot.phase + " does not use " + slot.role);
            }
        }
    }

    for (const auto& cs : d.succedences()) {
        if (cs.earlier == cs.later) {
            out.add(IssueCode::InvalidSuccedence, "succedence " + cs.id + " relates " + cs.earlier + " to itself");
        }
        for (const auto* end : {&cs.earlier, &cs.later}) {
            if (d.find_ref(*end) == nullptr) out.add(IssueCode::UnknownPhase, "succedence " + cs.id + " references " + *end);
        }
        if (cs.condition) check_restriction(out, "succedence " + cs.id, *cs.condition);
    }

    if (const auto* plan = std::get_if<Plan>(&d.body); plan != nullptr && plan->goal) {
        for (const auto& ds : plan->goal->desired) {
            check_concept(out, store, "goal " + plan->goal->id, ds.state_type, {ConceptKind::StateType});
            for (const auto& role : ds.roles) {
                const bool known = uses_slot(whole, role) ||
                                   std::any_of(plan->phases.begin(), plan->phases.end(),
                                               [&](const EventTypeRef& p) { return uses_slot(p, role); });
                if (!known) out.add(IssueCode::InvalidGoal, "goal " + plan->goal->id + " names unused role " + role);
            }
        }
    }

    if (const auto* cfg = std::get_if<Configuration>(&d.body)) {
        for (const auto& c : cfg->constraints) {
            std::visit(
                [&](const auto& cc) {
                    using T = std::decay_t<decltype(cc)>;
                    if constexpr (std::is_same_v<T, RegionConstraint>) {
                        if (!uses_slot(whole, cc.role)) out.add(IssueCode::UnknownRole, "configuration constrains " + cc.role);
                        check_restriction(out, "configuration " + d.id, cc.restriction);
                    } else {
                        for (const auto* r : {&cc.first, &cc.second}) {
                            if (!uses_slot(whole, *r)) out.add(IssueCode::UnknownRole, "configuration relates " + *r);
                        }
                    }
                },
                c);
        }
    }

    if (out.empty()) {
        auto net = build_network(d);
        if (auto verdict = net.propagate(); !verdict.consistent) {
            out.add(IssueCode::TemporallyInconsistent,
                    "no consistent timeline: " + verdict.witness->first + " / " + verdict.witness->second);
        }
    }
    return out.take();
}

ConstraintNetwork compile_constraints(const Description& d) {
    auto net = build_network(d);
    if (auto verdict = net.propagate(); !verdict.consistent) {
        throw Error(ErrorCode::TemporallyInconsistent,
                    d.id + ": " + verdict.witness->first + " / " + verdict.witness->second);
    }
    return net;
}

bool check_bindings(const Description& d, const std::map<Slot, std::string>& grounding) {
    bool ok = true;
    for (const auto& b : d.bindings()) {
        const std::string* first = nullptr;
        for (const auto& slot : b.slots) {
            auto it = grounding.find(slot);
            if (it == grounding.end()) {
                throw Error(ErrorCode::MissingSlot, b.id + ": " + slot.phase + "." + slot.role);
            }
            if (first == nullptr) first = &it->second;
            else if (*first != it->second) ok = false;
        }
    }
    return ok;
}

// ---------------------------------------------------------------------------
// situations

GoalVerdict check_goal(const Goal& g, const Situation& s, const OntologyStore& store) {
    GoalVerdict verdict;
    auto type_matches = [&](const std::string& actual, const std::string& desired) {
        if (actual == desired) return true;
        return store.has_concept(actual) && store.has_concept(desired) && store.is_subsumed_by(actual, desired);
    };
    for (const auto& want : g.desired) {
        const bool found = std::any_of(s.terminal_states.begin(), s.terminal_states.end(), [&](const StateAssertion& st) {
            if (!type_matches(st.state_type, want.state_type) || st.participants.size() != want.roles.size()) {
                return false;
            }
            for (std::size_t i = 0; i < want.roles.size(); ++i) {
                auto it = s.role_grounding.find(want.roles[i]);
                if (it == s.role_grounding.end() || it->second != st.participants[i]) return false;
            }
            return true;
        });
        if (!found) {
            verdict.achieved = false;
            verdict.missing.push_back(want.state_type);
        }
    }
    return verdict;
}

bool check_configuration(const Configuration& c, const Situation& s, const OntologyStore& store) {
    auto grounded = [&](const std::string& role) -> const std::string* {
        auto it = s.role_grounding.find(role);
        return it == s.role_grounding.end() ? nullptr : &it->second;
    };
    for (const auto& constraint : c.constraints) {
        const bool ok = std::visit(
            [&](const auto& cc) {
                using T = std::decay_t<decltype(cc)>;
                if constexpr (std::is_same_v<T, RegionConstraint>) {
                    const auto* e = grounded(cc.role);
                    return e != nullptr && store.satisfies_restriction(*e, cc.restriction);
                } else {
                    const auto* a = grounded(cc.first);
                    const auto* b = grounded(cc.second);
                    if (a == nullptr || b == nullptr) return false;
                    const std::vector<std::string> want{*a, *b};
                    return std::any_of(s.included_events.begin(), s.included_events.end(), [&](const std::string& id) {
                        const Entity& ev = store.entity(id);
                        return ev.kind == EntityKind::State && ev.type_tag == to_string(cc.relation) &&
                               ev.participants == want;
                    });
                }
            },
            constraint);
        if (!ok) return false;
    }
    return true;
}

bool succedence_enabled(const ConditionalSuccedence& cs, std::string_view outcome_entity, const OntologyStore& store) {
    if (!cs.condition) return true;
    return store.satisfies_restriction(outcome_entity, *cs.condition);
}

Situation materialize_execution(OntologyStore& store, const Description& d, const std::string& situation_id,
                                const std::vector<ObservedEvent>& events,
                                std::map<std::string, std::string> role_grounding) {
    Situation s;
    s.id = situation_id;
    s.plan_execution = d.kind() == DescriptionKind::Plan;
    s.satisfies = d.id;
    s.role_grounding = std::move(role_grounding);
    for (const auto& ev : events) {
        const auto* ref = d.find_ref(ev.ref_id);
        if (ref == nullptr) throw Error(ErrorCode::DanglingReference, d.id + " has no event type " + ev.ref_id);
        Entity e = ev.event;
        e.kind = event_kind_for(store.concept_by_id(ref->concept_id).kind);
        const std::string id = store.add_entity(std::move(e));
        store.classify({ref->concept_id, id, std::nullopt});
        s.included_events.insert(id);
    }
    store.add_entity(Entity{situation_id, situation_id, EntityKind::Situation, "Situation", {}, {}, {}});
    return s;
}

std::vector<std::string> interpretation_square_violations(const OntologyStore& store,
                                                          std::span<const Description> descriptions,
                                                          std::span<const Situation> situations) {
    std::vector<std::string> out;
    std::set<std::string> settled;
    for (const auto& s : situations) settled.insert(s.included_events.begin(), s.included_events.end());

    for (const auto& s : situations) {
        if (!s.satisfies) {
            if (s.plan_execution) out.push_back(s.id + ": plan execution satisfies no plan");
            continue;
        }
        const auto it = std::find_if(descriptions.begin(), descriptions.end(),
                                     [&](const Description& d) { return d.id == *s.satisfies; });
        if (it == descriptions.end()) {
            out.push_back(s.id + ": satisfies unknown description " + *s.satisfies);
            continue;
        }
        if (s.plan_execution && it->kind() != DescriptionKind::Plan) {
            out.push_back(s.id + ": plan execution satisfies a non-plan " + it->id);
        }
        std::vector<const EventTypeRef*> refs{&it->defined_event()};
        for (const auto& p : it->phases()) refs.push_back(&p);
        for (const auto* ref : refs) {
            for (const auto& c : store.classifications()) {
                if (c.concept_id != ref->concept_id) continue;
                if (!store.has_entity(c.entity_id) || !is_event_kind(store.entity(c.entity_id).kind)) {
                    out.push_back(ref->concept_id + " classifies non-event " + c.entity_id);
                } else if (settled.count(c.entity_id) == 0) {
                    out.push_back("event " + c.entity_id + " has no setting");
                }
            }
        }
        for (const auto& ev : s.included_events) {
            if (!store.has_entity(ev) || !is_event_kind(store.entity(ev).kind)) {
                out.push_back(s.id + " includes non-event " + ev);
            }
        }
    }
    return out;
}

}  // namespace soma
