#pragma once

// Two-branch concept model. The descriptive (social) branch holds Concepts:
// tasks, roles, parameters and descriptions, organized in subsumption DAGs.
// The ground (physical) branch holds Entities: objects, events, qualities,
// regions and situations. The only edge between the branches is
// classification of an entity by a concept.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace soma {

enum class ConceptKind {
    Task,
    ProcessType,
    StateType,
    Role,
    Parameter,
    AffordanceDescr,
    DesignDescr,
    PlanDescr,
    ConfigurationDescr,
    ProcessFlowDescr,
};

enum class EntityKind { Object, Action, Process, State, Quality, Region, Situation };

std::string_view to_string(ConceptKind kind);
std::string_view to_string(EntityKind kind);
std::optional<ConceptKind> parse_concept_kind(std::string_view text);
std::optional<EntityKind> parse_entity_kind(std::string_view text);

inline bool is_event_kind(EntityKind k) {
    return k == EntityKind::Action || k == EntityKind::Process || k == EntityKind::State;
}

inline bool is_event_type_kind(ConceptKind k) {
    return k == ConceptKind::Task || k == ConceptKind::ProcessType || k == ConceptKind::StateType;
}

struct Quantity {
    double value = 0.0;
    std::string units;

    friend bool operator==(const Quantity&, const Quantity&) = default;
};

// Restriction language: selectional restrictions on what a role or
// parameter may classify.

struct Restriction;

struct KindIs {
    EntityKind kind;
    friend bool operator==(const KindIs&, const KindIs&) = default;
};

struct TypeTagIn {
    std::set<std::string> tags;
    friend bool operator==(const TypeTagIn&, const TypeTagIn&) = default;
};

struct HasDisposition {
    std::string disposition_type;
    friend bool operator==(const HasDisposition&, const HasDisposition&) = default;
};

/// Closed numeric range [lo, hi] tagged with units.
struct RegionWithin {
    double lo = 0.0;
    double hi = 0.0;
    std::string units;
    friend bool operator==(const RegionWithin&, const RegionWithin&) = default;
};

struct AllOf {
    std::vector<Restriction> terms;
    friend bool operator==(const AllOf&, const AllOf&);
};

struct AnyOf {
    std::vector<Restriction> terms;
    friend bool operator==(const AnyOf&, const AnyOf&);
};

struct Restriction {
    using Node = std::variant<KindIs, TypeTagIn, HasDisposition, RegionWithin, AllOf, AnyOf>;
    Node node;

    static Restriction kind_is(EntityKind k) { return {KindIs{k}}; }
    static Restriction type_tag_in(std::set<std::string> tags) { return {TypeTagIn{std::move(tags)}}; }
    static Restriction has_disposition(std::string type) { return {HasDisposition{std::move(type)}}; }
    static Restriction region_within(double lo, double hi, std::string units) {
        return {RegionWithin{lo, hi, std::move(units)}};
    }
    static Restriction all_of(std::vector<Restriction> terms) { return {AllOf{std::move(terms)}}; }
    static Restriction any_of(std::vector<Restriction> terms) { return {AnyOf{std::move(terms)}}; }

    friend bool operator==(const Restriction&, const Restriction&) = default;
};

inline bool operator==(const AllOf& a, const AllOf& b) { return a.terms == b.terms; }
inline bool operator==(const AnyOf& a, const AnyOf& b) { return a.terms == b.terms; }

/// Throws InvalidArgument for empty And/Or lists or inverted regions.
void validate_restriction(const Restriction& r);

struct Concept {
    std::string id;
    std::string name;
    ConceptKind kind = ConceptKind::Task;
    std::set<std::string> parents;
    std::optional<Restriction> restriction;

    friend bool operator==(const Concept&, const Concept&) = default;
};

struct Entity {
    std::string id;
    std::string name;
    EntityKind kind = EntityKind::Object;
    /// Single ground type label, e.g. "Pot" or "Contact".
    std::string type_tag;
    /// Quality ids; objects only.
    std::set<std::string> qualities;
    /// Participant ids; events only.
    std::vector<std::string> participants;
    /// Numeric value of a region or of a measurable quality.
    std::optional<Quantity> value;

    friend bool operator==(const Entity&, const Entity&) = default;
};

struct Disposition {
    std::string id;
    std::string bearer;
    std::string disposition_type;
    /// AffordanceDescr concept realized by the disposition, when known.
    std::optional<std::string> affordance;

    friend bool operator==(const Disposition&, const Disposition&) = default;
};

struct AffordanceSpec {
    std::string concept_id;
    std::string bearer_role;
    std::string trigger_role;
    std::optional<std::string> background_role;

    friend bool operator==(const AffordanceSpec&, const AffordanceSpec&) = default;
};

enum class DesignAspect { Functional, Structural, Aesthetic };

std::string_view to_string(DesignAspect aspect);
std::optional<DesignAspect> parse_design_aspect(std::string_view text);

struct DesignSpec {
    std::string concept_id;
    DesignAspect aspect = DesignAspect::Functional;
    Restriction quality_restriction;

    friend bool operator==(const DesignSpec&, const DesignSpec&) = default;
};

struct Classification {
    std::string concept_id;
    std::string entity_id;
    std::optional<std::string> during;

    friend bool operator==(const Classification&, const Classification&) = default;
};

struct ClassificationVerdict {
    bool accepted = false;
    std::string reason;

    static ClassificationVerdict accept() { return {true, {}}; }
    static ClassificationVerdict reject(std::string why) { return {false, std::move(why)}; }
    explicit operator bool() const { return accepted; }
};

/// In-memory store for both branches.
///
/// Built by mutation, then frozen. A frozen store rejects mutation with
/// FrozenStore and all queries are const, so it can be shared by concurrent
/// readers. Identifiers are unique across both branches.
class OntologyStore {
public:
    // -- build phase --------------------------------------------------------

    /// Adds a concept with an explicit id. Parents must exist, have the same
    /// kind and keep the taxonomy acyclic.
    std::string add_concept(Concept concept_decl);
    /// Adds a concept under a fresh id derived from its name.
    std::string add_concept(const std::string& name, ConceptKind kind, const std::set<std::string>& parents,
                            std::optional<Restriction> restriction = std::nullopt);
    /// Adds a parent edge after the fact; rolled back on CycleError.
    void add_parent(const std::string& child, const std::string& parent);

    std::string add_entity(Entity entity);
    /// Records a disposition and attaches it to its bearer as a quality.
    std::string add_disposition(Disposition disposition);
    /// Adds a measurable quality entity and attaches it to `bearer`.
    std::string add_quality(const std::string& bearer, Entity quality);
    void add_affordance(AffordanceSpec spec);
    void add_design(DesignSpec spec);
    /// Records a classification after checking branch and restriction.
    void classify(Classification c);

    void freeze();
    [[nodiscard]] bool frozen() const { return frozen_; }
    /// Unfrozen deep copy, used to layer episode scenes over a library.
    [[nodiscard]] OntologyStore extended() const;

    // -- queries ------------------------------------------------------------

    [[nodiscard]] bool has_concept(std::string_view id) const;
    [[nodiscard]] bool has_entity(std::string_view id) const;
    [[nodiscard]] const Concept& concept_by_id(std::string_view id) const;
    [[nodiscard]] const Entity& entity(std::string_view id) const;
    [[nodiscard]] std::vector<const Concept*> concepts_named(std::string_view name) const;
    [[nodiscard]] const std::map<std::string, Concept, std::less<>>& concepts() const { return concepts_; }
    [[nodiscard]] const std::map<std::string, Entity, std::less<>>& entities() const { return entities_; }
    [[nodiscard]] const std::map<std::string, AffordanceSpec, std::less<>>& affordances() const {
        return affordances_;
    }
    [[nodiscard]] const std::map<std::string, DesignSpec, std::less<>>& designs() const { return designs_; }
    [[nodiscard]] const std::vector<Classification>& classifications() const { return classifications_; }
    [[nodiscard]] const Disposition* disposition(std::string_view quality_id) const;
    [[nodiscard]] std::vector<const Disposition*> dispositions_of(std::string_view bearer) const;

    /// Reflexive-transitive reachability along parent edges.
    [[nodiscard]] bool is_subsumed_by(std::string_view a, std::string_view b) const;

    [[nodiscard]] ClassificationVerdict check_classification(std::string_view concept_id,
                                                             std::string_view entity_id) const;
    [[nodiscard]] bool satisfies_restriction(std::string_view entity_id, const Restriction& r) const;
    /// First reason the entity fails the restriction, or empty when it holds.
    [[nodiscard]] std::optional<std::string> explain_failure(const Entity& e, const Restriction& r) const;

    /// Functional designs only; other aspects throw UnsupportedAspect.
    [[nodiscard]] bool design_describes(const DesignSpec& design, std::string_view object_id) const;

    /// Full scan for classifications that cross branches the wrong way or
    /// violate their concept's restriction. Empty on a healthy store.
    [[nodiscard]] std::vector<std::string> classification_violations() const;

    /// Kahn's algorithm over parent edges; false if any cycle exists.
    [[nodiscard]] bool taxonomy_is_acyclic() const;

private:
    void require_mutable() const;
    void require_unused_id(const std::string& id) const;
    std::string fresh_id(const std::string& base) const;

    std::map<std::string, Concept, std::less<>> concepts_;
    std::map<std::string, Entity, std::less<>> entities_;
    std::map<std::string, Disposition, std::less<>> dispositions_;
    std::map<std::string, std::vector<std::string>, std::less<>> dispositions_by_bearer_;
    std::map<std::string, AffordanceSpec, std::less<>> affordances_;
    std::map<std::string, DesignSpec, std::less<>> designs_;
    std::vector<Classification> classifications_;
    /// Ancestor closure, filled on freeze.
    std::map<std::string, std::set<std::string, std::less<>>, std::less<>> ancestors_;
    bool frozen_ = false;
};

/// Entity kinds a concept of the given kind may classify.
bool classifiable_kind(ConceptKind concept_kind, EntityKind entity_kind);

}  // namespace soma
