#pragma once

// Activity parsing with a plan library as grammar. Raw observations become
// tokens; each plan's phases are matched against tokens so that event types,
// temporal labels, bindings and role restrictions all hold.

#include "soma/activity_model.hpp"
#include "soma/grounding.hpp"
#include "soma/interval_algebra.hpp"
#include "soma/ontology.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace soma {

inline constexpr double kDefaultEps = 0.01;

enum class TokenClass { ContactEvent, MotionEvent, StateChange };

std::string_view to_string(TokenClass c);
std::optional<TokenClass> parse_token_class(std::string_view text);

/// One observation as logged. A StateChange record with `holds == false`
/// marks the moment the state stops holding; a point StateChange record
/// inside a state interval marks it holding again.
struct RawEvent {
    TokenClass token_class = TokenClass::MotionEvent;
    std::string type;
    std::vector<std::string> participants;
    double start = 0.0;
    double end = 0.0;
    bool holds = true;

    friend bool operator==(const RawEvent&, const RawEvent&) = default;
};

struct Token {
    std::string id;
    TokenClass token_class = TokenClass::MotionEvent;
    std::string type_tag;
    std::vector<std::string> participants;
    ConcreteInterval interval;

    friend bool operator==(const Token&, const Token&) = default;
};

struct Episode {
    std::string id;
    /// Sorted by interval start.
    std::vector<Token> tokens;
    Scene scene;
};

/// Widens point events to [t, t + eps], cuts state intervals at the
/// transitions that interrupt them, sorts and numbers the tokens.
/// Throws NegativeDuration for end < start.
std::vector<Token> tokenize(std::span<const RawEvent> raw, double eps = kDefaultEps);

struct Interpretation {
    std::string plan;
    /// Phase ref id -> token id.
    std::map<std::string, std::string> phase_grounding;
    /// (ref id, role id) -> entity id, including slots filled through bindings.
    std::map<Slot, std::string> role_grounding;
    /// Fraction of episode tokens grounding some phase.
    double coverage = 0.0;
    double earliest_start = 0.0;

    friend bool operator==(const Interpretation&, const Interpretation&) = default;
};

/// Ranking key: coverage desc, phase count desc, earliest start asc, plan id asc.
struct RankKey {
    double coverage;
    std::size_t phase_count;
    double earliest_start;
    std::string plan;
};

RankKey score(const Interpretation& i);
bool ranks_before(const RankKey& a, const RankKey& b);

/// Stable sort by RankKey.
std::vector<Interpretation> rank(std::vector<Interpretation> interps);

/// True if some concept named or identified by `tag` is subsumed by
/// `concept_id`.
bool tag_classified_by(const OntologyStore& store, std::string_view tag, std::string_view concept_id);

/// Plan library prepared for matching: compiled networks per description.
class ActivityParser {
public:
    ActivityParser(std::span<const Description> library, const OntologyStore& store, double eps = kDefaultEps);

    /// All interpretations of every plan and process flow in the library,
    /// ranked. The scene is layered onto the library store first.
    [[nodiscard]] std::vector<Interpretation> parse(const Episode& episode) const;

    /// Same, against a store that already holds the episode's objects.
    [[nodiscard]] std::vector<Interpretation> parse_grounded(const Episode& episode,
                                                             const OntologyStore& grounded) const;

    [[nodiscard]] double eps() const { return eps_; }

private:
    struct CompiledPlan {
        const Description* description;
        ConstraintNetwork network;
        std::size_t whole_var;
        std::vector<std::size_t> phase_vars;
    };

    void match_plan(const CompiledPlan& plan, const Episode& episode, const OntologyStore& store,
                    std::vector<Interpretation>& out) const;

    std::vector<CompiledPlan> plans_;
    const OntologyStore* store_;
    double eps_;
};

std::vector<Interpretation> parse(const Episode& episode, std::span<const Description> library,
                                  const OntologyStore& store, double eps = kDefaultEps);

/// Re-checks an interpretation from scratch: phase event types, pairwise
/// temporal labels (including the defined event spanning its phases),
/// bindings and role restrictions. `store` is the library store; the scene
/// is layered on as in parse(). Throws DanglingReference.
bool verify_interpretation(const Interpretation& i, const Episode& episode, std::span<const Description> library,
                           const OntologyStore& store, double eps = kDefaultEps);

/// verify_interpretation against a store that already holds the scene.
bool verify_interpretation_grounded(const Interpretation& i, const Episode& episode,
                                    std::span<const Description> library, const OntologyStore& grounded,
                                    double eps = kDefaultEps);

}  // namespace soma
