#pragma once

#include <stdexcept>
#include <string>

namespace wordbound {

// Base for every error this library raises on purpose.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define WORDBOUND_DEFINE_ERROR(Name)                                   \
    struct Name : Error {                                              \
        explicit Name(const std::string& msg) : Error(msg) {}          \
    }

WORDBOUND_DEFINE_ERROR(InvalidUtf8);
WORDBOUND_DEFINE_ERROR(IoError);

// tokenizer
WORDBOUND_DEFINE_ERROR(EmptyCorpus);
WORDBOUND_DEFINE_ERROR(VocabSizeTooSmall);
WORDBOUND_DEFINE_ERROR(UnknownTokenId);
WORDBOUND_DEFINE_ERROR(InvalidVocabulary);

// boundary
WORDBOUND_DEFINE_ERROR(MalformedWordIds);
WORDBOUND_DEFINE_ERROR(MissingWBSpecial);
WORDBOUND_DEFINE_ERROR(LengthMismatch);

// morphological evaluation
WORDBOUND_DEFINE_ERROR(MissingPrediction);
WORDBOUND_DEFINE_ERROR(EmptyGold);
WORDBOUND_DEFINE_ERROR(EmptyInput);

// encoder
WORDBOUND_DEFINE_ERROR(InvalidConfig);
WORDBOUND_DEFINE_ERROR(IndexOutOfRange);
WORDBOUND_DEFINE_ERROR(ShapeMismatch);
WORDBOUND_DEFINE_ERROR(NoMaskedPositions);

// training
WORDBOUND_DEFINE_ERROR(NothingToMask);
WORDBOUND_DEFINE_ERROR(StepOutOfRange);
WORDBOUND_DEFINE_ERROR(CorpusTooSmall);
WORDBOUND_DEFINE_ERROR(SchemaConflict);
WORDBOUND_DEFINE_ERROR(LabelMismatch);
WORDBOUND_DEFINE_ERROR(BadCheckpoint);

#undef WORDBOUND_DEFINE_ERROR

}  // namespace wordbound
