#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace comfort {

enum class Errc {
  // schema / io
  MalformedRow,
  NonMonotonicTimestamp,
  OutOfBoundsValue,
  UnknownCategory,
  Io,
  // pmv
  InputOutOfEnvelope,
  UnknownGarment,
  // data availability
  MissingFeature,
  MissingData,
  NoLabels,
  EmptyDataset,
  // models
  EmptyNode,
  UntrainedModel,
  ShapeMismatch,
  // evaluation
  LengthMismatch,
  Empty,
  IndivisibleFolds,
  BadSizes,
  // simulator
  InfeasibleProfile,
  // sessions
  InvalidDemographics,
  UnknownSession,
  SessionClosed,
  SessionOpen,
  InvalidLabel,
  // configuration
  InvalidConfig,
};

constexpr std::string_view errc_name(Errc c) noexcept {
  switch (c) {
    case Errc::MalformedRow: return "MalformedRow";
    case Errc::NonMonotonicTimestamp: return "NonMonotonicTimestamp";
    case Errc::OutOfBoundsValue: return "OutOfBoundsValue";
    case Errc::UnknownCategory: return "UnknownCategory";
    case Errc::Io: return "Io";
    case Errc::InputOutOfEnvelope: return "InputOutOfEnvelope";
    case Errc::UnknownGarment: return "UnknownGarment";
    case Errc::MissingFeature: return "MissingFeature";
    case Errc::MissingData: return "MissingData";
    case Errc::NoLabels: return "NoLabels";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::EmptyNode: return "EmptyNode";
    case Errc::UntrainedModel: return "UntrainedModel";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::Empty: return "Empty";
    case Errc::IndivisibleFolds: return "IndivisibleFolds";
    case Errc::BadSizes: return "BadSizes";
    case Errc::InfeasibleProfile: return "InfeasibleProfile";
    case Errc::InvalidDemographics: return "InvalidDemographics";
    case Errc::UnknownSession: return "UnknownSession";
    case Errc::SessionClosed: return "SessionClosed";
    case Errc::SessionOpen: return "SessionOpen";
    case Errc::InvalidLabel: return "InvalidLabel";
    case Errc::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

/// Every failure in the library is reported as an Error carrying a code.
/// Row-level CSV errors also carry the 1-based data row number.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what, std::optional<std::size_t> row = std::nullopt)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code), row_(row) {}

  Errc code() const noexcept { return code_; }
  std::optional<std::size_t> row() const noexcept { return row_; }

 private:
  Errc code_;
  std::optional<std::size_t> row_;
};

}  // namespace comfort
