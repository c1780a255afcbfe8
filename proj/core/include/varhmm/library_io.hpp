#pragma once

#include <filesystem>
#include <string>

#include "varhmm/skill_library.hpp"

namespace varhmm {

/// Self-describing versioned text format with a whole-file checksum; the
/// round trip load(save(x)) reproduces every numeric field exactly.
void save_library(const SkillLibrary& library, const std::filesystem::path& path);
SkillLibrary load_library(const std::filesystem::path& path);

/// The exact bytes save_library writes (deterministic given the library).
std::string library_to_string(const SkillLibrary& library);
SkillLibrary library_from_string(const std::string& text);

}  // namespace varhmm
