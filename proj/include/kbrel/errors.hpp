#pragma once

#include <stdexcept>
#include <string>

namespace kbrel {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// corpus
struct UnknownTemplate : Error { using Error::Error; };
struct EmptyPlaceholder : Error { using Error::Error; };
struct CountExceedsSpace : Error { using Error::Error; };
struct DuplicatePoolEntries : Error { using Error::Error; };
struct PoolTooSmall : Error { using Error::Error; };
struct DuplicateQuestionText : Error { using Error::Error; };
struct InsufficientSurvivors : Error { using Error::Error; };

// prompting
struct DimensionMismatch : Error { using Error::Error; };
struct KTooLarge : Error { using Error::Error; };
struct MissingRepository : Error { using Error::Error; };
struct EmbedderUnavailable : Error { using Error::Error; };
struct WrongOptionCount : Error { using Error::Error; };

// backends
struct EndpointTimeout : Error { using Error::Error; };
struct RateLimited : Error { using Error::Error; };
struct MalformedResponse : Error { using Error::Error; };
struct BackendUnreachable : Error { using Error::Error; };
struct JudgeUnavailable : Error { using Error::Error; };
struct JudgeUnparseable : Error { using Error::Error; };
struct TooFewDistractors : Error { using Error::Error; };

// consistency
struct LengthMismatch : Error { using Error::Error; };

// metrics
struct EmptyDataset : Error { using Error::Error; };
struct MissingRecords : Error { using Error::Error; };
struct InconsistentAbsence : Error { using Error::Error; };

// analysis
struct ConstantSeries : Error { using Error::Error; };
struct TooFewPoints : Error { using Error::Error; };
struct UnknownMetric : Error { using Error::Error; };
struct UnlabeledRecords : Error { using Error::Error; };
struct MissingMetadata : Error { using Error::Error; };

// harness
struct CacheWriteFailed : Error { using Error::Error; };
struct MissingReports : Error { using Error::Error; };
struct PartialRun : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace kbrel
