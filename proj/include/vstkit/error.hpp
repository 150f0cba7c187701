#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace vstkit {

enum class Errc {
  InvalidConfig,
  InvalidArgument,
  SessionComplete,
  SessionNotComplete,
  NoPendingStimulus,
  WindowClosed,
  TimeWentBackwards,
  MalformedCsv,
  NonUniformSampling,
  TooShort,
  AliasedFrequency,
  BadChannel,
  BadBand,
  UnstableDesign,
  EmptySignal,
  EmptyBand,
  TooFewTrials,
  SampleRateMismatch,
  ZeroMeanAmplitude,
  SequenceGap,
  SessionClosed,
  CorruptLog,
};

const char* to_string(Errc code);

// Every failure the library reports carries one of the codes above; callers
// that need to branch (HTTP status mapping, CLI exit codes) switch on code().
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

struct ConfigIssue {
  std::string field;
  std::string message;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues);

  const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

class CorruptLogError : public Error {
 public:
  CorruptLogError(long long seq, const std::string& message);

  // Sequence number of the first offending event, or -1 when the log ended
  // early.
  long long seq() const noexcept { return seq_; }

 private:
  long long seq_;
};

}  // namespace vstkit
