#include "privapi/error.hpp"

namespace privapi {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::MalformedRecord: return "MalformedRecord";
    case Errc::DuplicateApiId: return "DuplicateApiId";
    case Errc::EmptyFile: return "EmptyFile";
    case Errc::InvalidSignals: return "InvalidSignals";
    case Errc::EmptyStore: return "EmptyStore";
    case Errc::EmptyIndex: return "EmptyIndex";
    case Errc::FingerprintMismatch: return "FingerprintMismatch";
    case Errc::EmptyGolden: return "EmptyGolden";
    case Errc::UnknownApiId: return "UnknownApiId";
    case Errc::BudgetTooSmall: return "BudgetTooSmall";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::BackendUnavailable: return "BackendUnavailable";
    case Errc::BackendMalformedResponse: return "BackendMalformedResponse";
    case Errc::UnknownProblem: return "UnknownProblem";
    case Errc::InvalidArgs: return "InvalidArgs";
    case Errc::RunnerUnavailable: return "RunnerUnavailable";
    case Errc::EmptyResults: return "EmptyResults";
    case Errc::JoinFailure: return "JoinFailure";
    case Errc::MissingIdTranslation: return "MissingIdTranslation";
    case Errc::InvalidKeywordMap: return "InvalidKeywordMap";
    case Errc::EmbeddingProvider: return "EmbeddingProvider";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

bool is_validation_error(Errc code) noexcept {
  switch (code) {
    case Errc::BackendUnavailable:
    case Errc::BackendMalformedResponse:
    case Errc::RunnerUnavailable:
    case Errc::EmbeddingProvider:
    case Errc::Io:
      return false;
    default:
      return true;
  }
}

Error::Error(Errc code, const std::string& message, std::optional<std::size_t> line)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code), message_(message), line_(line) {}

}  // namespace privapi
