#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mosaic {

/// Failure categories surfaced by the library. Every throwing API raises
/// mosaic::Error carrying one of these.
enum class ErrorKind {
  DegenerateProjection,
  DegenerateConfiguration,
  DegenerateHomography,
  InsufficientCorrespondences,
  NoConsensus,
  SingularMatrix,
  DescriptorKindMismatch,
  EmptyTrain,
  IndexOutOfRange,
  OutputTooSmall,
  ImageTooSmall,
  EmptyCanvas,
  ShapeMismatch,
  CanvasSizeLimit,
  FrameTooSmall,
  EmptyInput,
  PoseEscapesSource,
  MalformedHeader,
  TruncatedData,
  UnsupportedMaxval,
  UnsupportedPngFeature,
  CorruptPng,
  ParseError,
  UnknownKey,
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mosaic
