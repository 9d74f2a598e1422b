#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace privapi {

enum class Errc {
  MalformedRecord,
  DuplicateApiId,
  EmptyFile,
  InvalidSignals,
  EmptyStore,
  EmptyIndex,
  FingerprintMismatch,
  EmptyGolden,
  UnknownApiId,
  BudgetTooSmall,
  InvalidConfig,
  BackendUnavailable,
  BackendMalformedResponse,
  UnknownProblem,
  InvalidArgs,
  RunnerUnavailable,
  EmptyResults,
  JoinFailure,
  MissingIdTranslation,
  InvalidKeywordMap,
  EmbeddingProvider,
  Io,
};

std::string_view errc_name(Errc code) noexcept;

// Validation errors are caused by bad input; everything else is a runtime
// failure. The CLI maps these to exit codes 1 and 2.
bool is_validation_error(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, std::optional<std::size_t> line = std::nullopt);

  Errc code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }
  // what() without the "<code>: " prefix
  const std::string& message() const noexcept { return message_; }

 private:
  Errc code_;
  std::string message_;
  std::optional<std::size_t> line_;
};

}  // namespace privapi
