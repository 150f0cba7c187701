#include "vstkit/error.hpp"

namespace vstkit {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::SessionComplete: return "SessionComplete";
    case Errc::SessionNotComplete: return "SessionNotComplete";
    case Errc::NoPendingStimulus: return "NoPendingStimulus";
    case Errc::WindowClosed: return "WindowClosed";
    case Errc::TimeWentBackwards: return "TimeWentBackwards";
    case Errc::MalformedCsv: return "MalformedCsv";
    case Errc::NonUniformSampling: return "NonUniformSampling";
    case Errc::TooShort: return "TooShort";
    case Errc::AliasedFrequency: return "AliasedFrequency";
    case Errc::BadChannel: return "BadChannel";
    case Errc::BadBand: return "BadBand";
    case Errc::UnstableDesign: return "UnstableDesign";
    case Errc::EmptySignal: return "EmptySignal";
    case Errc::EmptyBand: return "EmptyBand";
    case Errc::TooFewTrials: return "TooFewTrials";
    case Errc::SampleRateMismatch: return "SampleRateMismatch";
    case Errc::ZeroMeanAmplitude: return "ZeroMeanAmplitude";
    case Errc::SequenceGap: return "SequenceGap";
    case Errc::SessionClosed: return "SessionClosed";
    case Errc::CorruptLog: return "CorruptLog";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

namespace {

std::string describe(const std::vector<ConfigIssue>& issues) {
  std::string out;
  for (const auto& issue : issues) {
    if (!out.empty()) out += "; ";
    out += issue.field + " " + issue.message;
  }
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : Error(Errc::InvalidConfig, describe(issues)), issues_(std::move(issues)) {}

CorruptLogError::CorruptLogError(long long seq, const std::string& message)
    : Error(Errc::CorruptLog,
            seq >= 0 ? "seq " + std::to_string(seq) + ": " + message : message),
      seq_(seq) {}

}  // namespace vstkit
