#pragma once

// Realization-direction reasoning: dispositional object selection for task
// roles, force-dynamics outcomes and parameter knowledge pre-conditions.

#include "soma/activity_model.hpp"
#include "soma/ontology.hpp"

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace soma {

struct SceneObject {
    Entity object;
    std::vector<Disposition> dispositions;
    /// Measurable qualities (kind is forced to Quality when grounded).
    std::vector<Entity> qualities;

    friend bool operator==(const SceneObject&, const SceneObject&) = default;
};

/// Objects present in an episode, with their dispositions and qualities.
struct Scene {
    std::vector<SceneObject> objects;

    [[nodiscard]] std::vector<std::string> ids() const;
    friend bool operator==(const Scene&, const Scene&) = default;
};

/// Frozen copy of `library` with the scene's objects added.
OntologyStore ground_scene(const OntologyStore& library, const Scene& scene);

using RoleCandidates = std::map<std::string, std::set<std::string>>;

/// For every role the task uses, the scene objects the role can classify.
/// `scene` lists object ids already present in `store`. Throws UnknownRole.
RoleCandidates select_objects(const EventTypeRef& task, std::span<const std::string> scene,
                              const OntologyStore& store);

/// Candidates for the bearer, trigger and (when present) background roles
/// of an affordance.
RoleCandidates affordance_candidates(const AffordanceSpec& affordance, std::span<const std::string> scene,
                                     const OntologyStore& store);

enum class Tendency { TowardMotion, TowardRest };
enum class Stronger { Agonist, Antagonist };
enum class ForceOutcome { Motion, Rest };

std::string_view to_string(ForceOutcome outcome);

/// Force-dynamical expression. By convention the manipulated object is the
/// agonist; the antagonist is the opposing force.
struct ForceExpression {
    std::string agonist;
    std::string antagonist;
    Tendency agonist_tendency = Tendency::TowardRest;
    Stronger stronger = Stronger::Agonist;
};

/// The agonist's tendency is realized iff the agonist is stronger.
ForceOutcome force_outcome(Tendency tendency, Stronger stronger);
/// Same, after checking agonist != antagonist (InvalidArgument).
ForceOutcome force_outcome(const ForceExpression& expr);

/// True iff `value` lies in the parameter's region. Unrestricted parameters
/// accept everything; a region in other units throws UnitMismatch.
bool check_parameter(const OntologyStore& store, std::string_view parameter, const Quantity& value);

}  // namespace soma
