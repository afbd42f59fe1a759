#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace claimflow {

/// Seconds-resolution UTC point in time. All timestamps in the system use it.
using Timestamp = std::chrono::sys_seconds;
using Clock = std::function<Timestamp()>;

enum class Language { de, en };
enum class MediaKind { image, audio, other };
enum class Formality { informal, formal };
enum class Sentiment { positive, neutral, negative };

// Mood is the sentiment last observed from the user.
using Mood = Sentiment;

std::string_view to_string(Language lang);
std::string_view to_string(MediaKind kind);
std::string_view to_string(Formality formality);
std::string_view to_string(Sentiment sentiment);

std::optional<Language> language_from_string(std::string_view s);
std::optional<MediaKind> media_kind_from_string(std::string_view s);
std::optional<Formality> formality_from_string(std::string_view s);
std::optional<Sentiment> sentiment_from_string(std::string_view s);

/// "2024-05-10T09:00:00Z"
std::string format_timestamp(Timestamp t);
/// "2024-05-10"
std::string format_date(Timestamp t);
/// Accepts "YYYY-MM-DDTHH:MM:SSZ" and "YYYY-MM-DD" (midnight).
std::optional<Timestamp> parse_timestamp(std::string_view s);

Clock system_clock();
Clock fixed_clock(Timestamp t);

// Error types. Anything derived from Error is a recoverable runtime condition;
// violated preconditions are reported as std::logic_error.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MalformedPayload : public Error {
public:
    using Error::Error;
};

class EmptyMessage : public Error {
public:
    using Error::Error;
};

class ContentPackMissing : public Error {
public:
    using Error::Error;
};

class ContentError : public Error {
public:
    using Error::Error;
};

class UnknownTemplateKey : public Error {
public:
    using Error::Error;
};

class MissingRequiredParam : public Error {
public:
    using Error::Error;
};

class StorageUnavailable : public Error {
public:
    using Error::Error;
};

class ScriptError : public Error {
public:
    using Error::Error;
};

} // namespace claimflow
