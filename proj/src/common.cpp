#include "claimflow/common.hpp"

#include <charconv>
#include <cstdio>

namespace claimflow {

std::string_view to_string(Language lang) {
    return lang == Language::de ? "de" : "en";
}

std::string_view to_string(MediaKind kind) {
    switch (kind) {
    case MediaKind::image: return "image";
    case MediaKind::audio: return "audio";
    case MediaKind::other: return "other";
    }
    return "other";
}

std::string_view to_string(Formality formality) {
    return formality == Formality::formal ? "formal" : "informal";
}

std::string_view to_string(Sentiment sentiment) {
    switch (sentiment) {
    case Sentiment::positive: return "positive";
    case Sentiment::neutral: return "neutral";
    case Sentiment::negative: return "negative";
    }
    return "neutral";
}

std::optional<Language> language_from_string(std::string_view s) {
    if (s == "de") return Language::de;
    if (s == "en") return Language::en;
    return std::nullopt;
}

std::optional<MediaKind> media_kind_from_string(std::string_view s) {
    if (s == "image") return MediaKind::image;
    if (s == "audio") return MediaKind::audio;
    if (s == "other") return MediaKind::other;
    return std::nullopt;
}

std::optional<Formality> formality_from_string(std::string_view s) {
    if (s == "formal") return Formality::formal;
    if (s == "informal") return Formality::informal;
    return std::nullopt;
}

std::optional<Sentiment> sentiment_from_string(std::string_view s) {
    if (s == "positive") return Sentiment::positive;
    if (s == "neutral") return Sentiment::neutral;
    if (s == "negative") return Sentiment::negative;
    return std::nullopt;
}

std::string format_timestamp(Timestamp t) {
    using namespace std::chrono;
    const auto day = floor<days>(t);
    const year_month_day ymd{day};
    const hh_mm_ss hms{t - day};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", int(ymd.year()),
                  unsigned(ymd.month()), unsigned(ymd.day()), int(hms.hours().count()),
                  int(hms.minutes().count()), int(hms.seconds().count()));
    return buf;
}

std::string format_date(Timestamp t) {
    return format_timestamp(t).substr(0, 10);
}

namespace {

bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    auto sub = s.substr(pos, len);
    for (char c : sub) {
        if (c < '0' || c > '9') return false;
    }
    auto [p, ec] = std::from_chars(sub.data(), sub.data() + sub.size(), out);
    return ec == std::errc{} && p == sub.data() + sub.size();
}

} // namespace

std::optional<Timestamp> parse_timestamp(std::string_view s) {
    using namespace std::chrono;
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
    if (s.size() != 10 && s.size() != 20) return std::nullopt;
    if (!read_int(s, 0, 4, y) || s[4] != '-' || !read_int(s, 5, 2, mo) || s[7] != '-' ||
        !read_int(s, 8, 2, d)) {
        return std::nullopt;
    }
    if (s.size() == 20) {
        if (s[10] != 'T' || !read_int(s, 11, 2, h) || s[13] != ':' || !read_int(s, 14, 2, mi) ||
            s[16] != ':' || !read_int(s, 17, 2, sec) || s[19] != 'Z') {
            return std::nullopt;
        }
        if (h > 23 || mi > 59 || sec > 59) return std::nullopt;
    }
    const year_month_day ymd{year{y}, month{unsigned(mo)}, day{unsigned(d)}};
    if (!ymd.ok()) return std::nullopt;
    return sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec};
}

Clock system_clock() {
    return [] { return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()); };
}

Clock fixed_clock(Timestamp t) {
    return [t] { return t; };
}

} // namespace claimflow
