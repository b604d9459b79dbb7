#pragma once

// On-disk documents: plan libraries and episodes, both JSON trees tagged
// with the format version. Serialization is canonical (sorted keys, fixed
// indentation), so serialize(parse(x)) is byte-stable.

#include "soma/activity_model.hpp"
#include "soma/activity_parser.hpp"
#include "soma/error.hpp"
#include "soma/grounding.hpp"
#include "soma/ontology.hpp"

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace soma {

inline constexpr std::string_view kFormatVersion = "soma-kit/1";

struct LibraryDocument {
    std::string version{kFormatVersion};
    std::vector<Concept> concepts;
    std::vector<Description> descriptions;
    std::vector<AffordanceSpec> affordances;
    std::vector<DesignSpec> designs;

    friend bool operator==(const LibraryDocument&, const LibraryDocument&) = default;
};

struct EpisodeDocument {
    std::string version{kFormatVersion};
    std::string id;
    Scene scene;
    std::vector<RawEvent> events;

    friend bool operator==(const EpisodeDocument&, const EpisodeDocument&) = default;
};

/// Thrown when a document is well-formed but its content does not hold
/// together; carries every issue found.
class ValidationFailed : public Error {
public:
    explicit ValidationFailed(std::vector<std::string> issues);
    [[nodiscard]] const std::vector<std::string>& issues() const { return issues_; }

private:
    std::vector<std::string> issues_;
};

/// Throws ParseError (with line:column or document path) or VersionMismatch.
LibraryDocument parse_library_document(std::string_view text);
EpisodeDocument parse_episode_document(std::string_view text);

std::string serialize(const LibraryDocument& doc);
std::string serialize(const EpisodeDocument& doc);

/// A loaded plan library: frozen store plus validated descriptions.
struct Library {
    LibraryDocument document;
    std::shared_ptr<const OntologyStore> store;
    std::vector<Description> descriptions;

    [[nodiscard]] const Description* find(std::string_view id) const;
};

/// Builds the store and validates every description. Throws ValidationFailed
/// listing all issues.
Library build_library(LibraryDocument doc);

/// Tokenizes the events and checks that participants are scene objects.
Episode build_episode(const EpisodeDocument& doc, double eps = kDefaultEps);

std::string read_file(const std::filesystem::path& path);

Library load_library(const std::filesystem::path& path);
Episode load_episode(const std::filesystem::path& path, double eps = kDefaultEps);

}  // namespace soma
