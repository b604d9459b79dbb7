#pragma once

// Allen's interval algebra: the 13 base relations, relation sets, converse and
// composition, qualitative extraction from timestamps, and path-consistency
// propagation over a network of interval variables.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace soma {

enum class BaseRelation : std::uint8_t {
    Before,        // b
    After,         // bi
    Meets,         // m
    MetBy,         // mi
    Overlaps,      // o
    OverlappedBy,  // oi
    Starts,        // s
    StartedBy,     // si
    During,        // d
    Contains,      // di
    Finishes,      // f
    FinishedBy,    // fi
    Equals,        // eq
};

inline constexpr int kBaseRelationCount = 13;

inline constexpr std::array<BaseRelation, kBaseRelationCount> kAllBaseRelations = {
    BaseRelation::Before,   BaseRelation::After,        BaseRelation::Meets,
    BaseRelation::MetBy,    BaseRelation::Overlaps,     BaseRelation::OverlappedBy,
    BaseRelation::Starts,   BaseRelation::StartedBy,    BaseRelation::During,
    BaseRelation::Contains, BaseRelation::Finishes,     BaseRelation::FinishedBy,
    BaseRelation::Equals,
};

constexpr BaseRelation converse(BaseRelation r) {
    if (r == BaseRelation::Equals) {
        return r;
    }
    // Converse pairs sit next to each other in the enumeration.
    const auto i = static_cast<std::uint8_t>(r);
    return static_cast<BaseRelation>(i ^ 1U);
}

/// Short code ("b", "mi", "eq", ...).
std::string_view code(BaseRelation r);
/// Allen-style name ("before", "metBy", ...).
std::string_view name(BaseRelation r);
/// Accepts either a short code or a name; empty if unrecognized.
std::optional<BaseRelation> parse_base_relation(std::string_view text);

/// A subset of the 13 base relations. Empty means inconsistent, full means
/// no information.
class RelationSet {
public:
    using Bits = std::uint16_t;
    static constexpr Bits kFullBits = (1U << kBaseRelationCount) - 1U;

    constexpr RelationSet() = default;
    constexpr RelationSet(std::initializer_list<BaseRelation> rels) {
        for (auto r : rels) {
            bits_ |= bit(r);
        }
    }

    static constexpr RelationSet from_bits(Bits bits) {
        RelationSet s;
        s.bits_ = static_cast<Bits>(bits & kFullBits);
        return s;
    }
    static constexpr RelationSet full() { return from_bits(kFullBits); }
    static constexpr RelationSet empty_set() { return {}; }
    static constexpr RelationSet single(BaseRelation r) { return from_bits(bit(r)); }

    [[nodiscard]] constexpr Bits bits() const { return bits_; }
    [[nodiscard]] constexpr bool empty() const { return bits_ == 0; }
    [[nodiscard]] constexpr bool is_full() const { return bits_ == kFullBits; }
    [[nodiscard]] constexpr bool contains(BaseRelation r) const { return (bits_ & bit(r)) != 0; }
    [[nodiscard]] constexpr bool subset_of(RelationSet other) const {
        return (bits_ & ~other.bits_) == 0;
    }
    [[nodiscard]] constexpr int size() const {
        int n = 0;
        for (Bits b = bits_; b != 0; b &= static_cast<Bits>(b - 1)) {
            ++n;
        }
        return n;
    }

    constexpr void insert(BaseRelation r) { bits_ |= bit(r); }

    [[nodiscard]] constexpr RelationSet converse() const {
        RelationSet out;
        for (auto r : kAllBaseRelations) {
            if (contains(r)) {
                out.insert(soma::converse(r));
            }
        }
        return out;
    }

    [[nodiscard]] std::vector<BaseRelation> members() const;

    friend constexpr RelationSet operator&(RelationSet a, RelationSet b) {
        return from_bits(static_cast<Bits>(a.bits_ & b.bits_));
    }
    friend constexpr RelationSet operator|(RelationSet a, RelationSet b) {
        return from_bits(static_cast<Bits>(a.bits_ | b.bits_));
    }
    friend constexpr bool operator==(RelationSet, RelationSet) = default;

private:
    static constexpr Bits bit(BaseRelation r) {
        return static_cast<Bits>(1U << static_cast<unsigned>(r));
    }

    Bits bits_ = 0;
};

/// Comma-separated short codes in enumeration order, e.g. "b,m,o".
std::string to_string(RelationSet s);

/// Parses a relation vocabulary term: a base relation code or name, or one of
/// the aliases used by plan descriptions ("overlapsWith", "metBy", ...).
std::optional<RelationSet> parse_relation_term(std::string_view text);

/// Composition of two base relations, read from the table generated at build
/// time by point-algebra reasoning over the six endpoints.
RelationSet compose(BaseRelation r1, BaseRelation r2);
/// Union over all member pairs.
RelationSet compose(RelationSet r1, RelationSet r2);

struct ConcreteInterval {
    double start = 0.0;
    double end = 0.0;

    friend bool operator==(const ConcreteInterval&, const ConcreteInterval&) = default;
};

/// Qualitative relation of `a` to `b`. Endpoints closer than `eps` count as
/// coincident. Throws DegenerateInterval when either interval is no longer
/// than 2*eps and InvalidArgument for a negative eps.
BaseRelation relation_from_endpoints(ConcreteInterval a, ConcreteInterval b, double eps);

/// True when the interval keeps distinct endpoints under eps-coarsening.
bool resolvable(ConcreteInterval a, double eps);

struct PropagationResult {
    bool consistent = true;
    /// First pair whose label became empty (variable ids).
    std::optional<std::pair<std::string, std::string>> witness;
};

/// Qualitative constraint network over named interval variables.
///
/// Labels are kept converse-closed: label(j, i) is always the converse of
/// label(i, j), and label(i, i) is {eq}. Every mutation marks the network
/// stale; query() requires a propagation since the last mutation.
class ConstraintNetwork {
public:
    /// Returns the index of the variable, creating it if needed.
    std::size_t add_variable(const std::string& id);

    /// Intersects label(a, b) with `rel` (and label(b, a) with its converse).
    void constrain(const std::string& a, const std::string& b, RelationSet rel);

    /// Path-consistency fixpoint with a work queue of revised pairs.
    PropagationResult propagate();

    /// Propagated label between two variables.
    [[nodiscard]] RelationSet query(const std::string& a, const std::string& b) const;

    /// Raw current label, no staleness check.
    [[nodiscard]] RelationSet label(std::size_t i, std::size_t j) const { return labels_[i * size() + j]; }

    [[nodiscard]] std::size_t size() const { return ids_.size(); }
    [[nodiscard]] const std::vector<std::string>& variables() const { return ids_; }
    [[nodiscard]] std::optional<std::size_t> index_of(std::string_view id) const;
    [[nodiscard]] bool propagated() const { return propagated_; }
    [[nodiscard]] bool consistent() const { return consistent_; }

    friend bool operator==(const ConstraintNetwork& a, const ConstraintNetwork& b) {
        return a.ids_ == b.ids_ && a.labels_ == b.labels_;
    }

private:
    RelationSet& at(std::size_t i, std::size_t j) { return labels_[i * size() + j]; }
    std::size_t require(std::string_view id) const;

    std::vector<std::string> ids_;
    std::vector<RelationSet> labels_;
    bool propagated_ = false;
    bool consistent_ = true;
};

/// Free-function form: propagates a copy and returns it with the verdict.
std::pair<ConstraintNetwork, PropagationResult> propagate(ConstraintNetwork net);

/// Propagated label between two variables; see ConstraintNetwork::query.
RelationSet query_relation(const ConstraintNetwork& net, const std::string& a, const std::string& b);

}  // namespace soma
