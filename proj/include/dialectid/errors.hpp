#pragma once

#include <stdexcept>
#include <string>

namespace dialectid {

// Root of every exception thrown by the library. Subclasses exist so callers
// and tests can tell failure kinds apart; the message carries the detail.
class Error : public std::runtime_error {
 public:
  Error(const std::string& kind, const std::string& detail)
      : std::runtime_error(kind + ": " + detail), detail_(detail) {}

  // The message without the "Kind: " prefix.
  const std::string& detail() const { return detail_; }

 private:
  std::string detail_;
};

#define DIALECTID_ERROR(Name)                                          \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& detail) : Error(#Name, detail) {} \
  }

// textgrid
DIALECTID_ERROR(MalformedTextGrid);
DIALECTID_ERROR(EncodingError);
DIALECTID_ERROR(InvariantViolation);
DIALECTID_ERROR(UnknownTier);
DIALECTID_ERROR(AliasTableError);

// audio
DIALECTID_ERROR(UnsupportedFormat);
DIALECTID_ERROR(CorruptContainer);
DIALECTID_ERROR(OutOfRange);
DIALECTID_ERROR(EmptySignal);
DIALECTID_ERROR(IoError);

// acoustics
DIALECTID_ERROR(DegenerateFrame);
DIALECTID_ERROR(NoConvergence);

// features
DIALECTID_ERROR(EmptyTrack);
DIALECTID_ERROR(SegmentTooShort);
DIALECTID_ERROR(NoValidFormantFrames);
DIALECTID_ERROR(ManifestError);
DIALECTID_ERROR(CsvFormatError);

// synth
DIALECTID_ERROR(SpecInvalid);

// forest
DIALECTID_ERROR(EmptyNode);
DIALECTID_ERROR(DegenerateData);
DIALECTID_ERROR(DimensionMismatch);
DIALECTID_ERROR(InsufficientClassSamples);
DIALECTID_ERROR(ModelFormatError);

// eval
DIALECTID_ERROR(ClassTooSmall);
DIALECTID_ERROR(LengthMismatch);
DIALECTID_ERROR(EmptyMatrix);

// cli
DIALECTID_ERROR(ConfigError);

#undef DIALECTID_ERROR

}  // namespace dialectid
