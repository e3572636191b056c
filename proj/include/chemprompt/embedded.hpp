#pragma once

// Byte-exact copies of the files under fixtures/, generated at build time.
namespace chemprompt::embedded {

extern const char* const kTaskRegistryJson;
extern const char* const kPromptLibraryJson;
extern const char* const kRefusalLexiconText;
extern const char* const kGradingRubricText;

}  // namespace chemprompt::embedded
