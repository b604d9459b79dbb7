#pragma once

// Descriptions of activities (plans, configurations, process flows), their
// compilation into interval constraint networks, and the checks that relate
// descriptions to situations: bindings, goals, configurations and the
// situation/description/event-type/event square.

#include "soma/interval_algebra.hpp"
#include "soma/ontology.hpp"

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace soma {

/// An event type used inside a description: a phase, or the event the
/// description defines as a whole.
struct EventTypeRef {
    std::string id;
    std::string concept_id;
    std::vector<std::string> uses_roles;
    std::vector<std::string> uses_parameters;

    friend bool operator==(const EventTypeRef&, const EventTypeRef&) = default;
};

struct PhaseConstraint {
    std::string left;
    RelationSet relation;
    std::string right;

    friend bool operator==(const PhaseConstraint&, const PhaseConstraint&) = default;
};

/// (event type ref id, role-or-parameter id)
struct Slot {
    std::string phase;
    std::string role;

    friend auto operator<=>(const Slot&, const Slot&) = default;
};

/// Identity constraint: every slot is grounded by the same entity.
struct Binding {
    std::string id;
    std::vector<Slot> slots;

    friend bool operator==(const Binding&, const Binding&) = default;
};

/// `later` may only start once `earlier` has ended, and only if the outcome
/// of `earlier` satisfies `condition`.
struct ConditionalSuccedence {
    std::string id;
    std::string earlier;
    std::string later;
    std::optional<Restriction> condition;

    friend bool operator==(const ConditionalSuccedence&, const ConditionalSuccedence&) = default;
};

struct DesiredState {
    std::string state_type;
    /// Role ids whose groundings must be the state's participants, in order.
    std::vector<std::string> roles;

    friend bool operator==(const DesiredState&, const DesiredState&) = default;
};

struct Goal {
    std::string id;
    std::vector<DesiredState> desired;

    friend bool operator==(const Goal&, const Goal&) = default;
};

struct Plan {
    EventTypeRef defines_task;
    std::vector<EventTypeRef> phases;
    std::vector<PhaseConstraint> constraints;
    std::vector<Binding> bindings;
    std::vector<ConditionalSuccedence> succedences;
    std::optional<Goal> goal;

    friend bool operator==(const Plan&, const Plan&) = default;
};

enum class StateRelation { Contact, Support, Containment };

std::string_view to_string(StateRelation r);
std::optional<StateRelation> parse_state_relation(std::string_view text);

struct RegionConstraint {
    std::string role;
    Restriction restriction;

    friend bool operator==(const RegionConstraint&, const RegionConstraint&) = default;
};

struct RelationConstraint {
    StateRelation relation = StateRelation::Contact;
    std::string first;
    std::string second;

    friend bool operator==(const RelationConstraint&, const RelationConstraint&) = default;
};

using ConfigurationConstraint = std::variant<RegionConstraint, RelationConstraint>;

struct Configuration {
    EventTypeRef describes_state;
    std::vector<ConfigurationConstraint> constraints;

    friend bool operator==(const Configuration&, const Configuration&) = default;
};

struct ProcessFlow {
    EventTypeRef defines_process;
    std::vector<EventTypeRef> phases;
    std::vector<PhaseConstraint> constraints;
    std::vector<Binding> bindings;

    friend bool operator==(const ProcessFlow&, const ProcessFlow&) = default;
};

enum class DescriptionKind { Plan, Configuration, ProcessFlow };

std::string_view to_string(DescriptionKind kind);

struct Description {
    std::string id;
    std::variant<Plan, Configuration, ProcessFlow> body;

    [[nodiscard]] DescriptionKind kind() const { return static_cast<DescriptionKind>(body.index()); }
    [[nodiscard]] const EventTypeRef& defined_event() const;
    /// Empty for configurations.
    [[nodiscard]] std::span<const EventTypeRef> phases() const;
    [[nodiscard]] std::span<const PhaseConstraint> constraints() const;
    [[nodiscard]] std::span<const Binding> bindings() const;
    [[nodiscard]] std::span<const ConditionalSuccedence> succedences() const;
    /// The defined event or a phase with this id.
    [[nodiscard]] const EventTypeRef* find_ref(std::string_view ref_id) const;

    friend bool operator==(const Description&, const Description&) = default;
};

/// Relation of every phase to the event it is a phase of.
inline constexpr RelationSet kPhaseWithinWhole{BaseRelation::Starts, BaseRelation::During,
                                               BaseRelation::Finishes, BaseRelation::Equals};
/// Import of a conditional succedence between earlier and later task.
inline constexpr RelationSet kSuccedenceRelation{BaseRelation::Before, BaseRelation::Meets};

enum class IssueCode {
    UnknownConcept,
    WrongConceptKind,
    DuplicateRef,
    UnknownPhase,
    UnknownRole,
    EmptyRelation,
    BindingTooSmall,
    InvalidSuccedence,
    InvalidGoal,
    InvalidRestriction,
    TemporallyInconsistent,
};

std::string_view to_string(IssueCode code);

struct ValidationIssue {
    IssueCode code;
    std::string message;

    friend bool operator==(const ValidationIssue&, const ValidationIssue&) = default;
};

/// All structural and temporal problems of a description, in a fixed order.
std::vector<ValidationIssue> validate_description(const Description& d, const OntologyStore& store);

/// One interval variable per phase plus one for the defined event, labelled
/// and propagated. Throws TemporallyInconsistent.
ConstraintNetwork compile_constraints(const Description& d);

/// True iff every binding's slots map to one entity. Throws MissingSlot
/// when a bound slot is absent from the grounding.
bool check_bindings(const Description& d, const std::map<Slot, std::string>& grounding);

struct StateAssertion {
    std::string state_type;
    std::vector<std::string> participants;

    friend bool operator==(const StateAssertion&, const StateAssertion&) = default;
};

struct Situation {
    std::string id;
    bool plan_execution = false;
    std::set<std::string> included_events;
    std::optional<std::string> satisfies;
    std::vector<StateAssertion> terminal_states;
    /// Role id -> grounding entity for the execution.
    std::map<std::string, std::string> role_grounding;
};

struct GoalVerdict {
    bool achieved = true;
    std::vector<std::string> missing;
    explicit operator bool() const { return achieved; }
};

/// Achieved iff each desired state appears among the terminal states, with
/// state types matched up to subsumption and participants matching the role
/// groundings.
GoalVerdict check_goal(const Goal& g, const Situation& s, const OntologyStore& store);

/// Region constraints check the grounded entity against the restriction;
/// relation constraints need an included state event of that relation type
/// over the grounded participants.
bool check_configuration(const Configuration& c, const Situation& s, const OntologyStore& store);

/// Evaluates a succedence's condition against the earlier task's outcome.
bool succedence_enabled(const ConditionalSuccedence& cs, std::string_view outcome_entity,
                        const OntologyStore& store);

/// Event observed as the realization of one event type of a description.
struct ObservedEvent {
    std::string ref_id;
    Entity event;
};

/// Records an execution of `d` in `store`: adds the events, classifies each
/// by its event type's concept and adds a situation entity that includes
/// them. Returns the situation.
Situation materialize_execution(OntologyStore& store, const Description& d, const std::string& situation_id,
                                const std::vector<ObservedEvent>& events,
                                std::map<std::string, std::string> role_grounding = {});

/// Walks situation -> description -> event type -> event -> situation and
/// reports each broken edge.
std::vector<std::string> interpretation_square_violations(const OntologyStore& store,
                                                          std::span<const Description> descriptions,
                                                          std::span<const Situation> situations);

}  // namespace soma
