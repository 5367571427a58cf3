#include "credrag/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/locid.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "credrag/error.hpp"

namespace credrag::text {

namespace {

const icu::Normalizer2& nfc_instance() {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status) || n == nullptr) {
        throw Error("ICU NFC normalizer unavailable");
    }
    return *n;
}

icu::UnicodeString from_utf8(std::string_view s) {
    return icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
}

std::string to_utf8(const icu::UnicodeString& u) {
    std::string out;
    u.toUTF8String(out);
    return out;
}

bool is_ascii_punct(char c) {
    return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') || (c >= '[' && c <= '`') ||
           (c >= '{' && c <= '~');
}

}  // namespace

std::string nfc(std::string_view utf8) {
    UErrorCode status = U_ZERO_ERROR;
    icu::UnicodeString out = nfc_instance().normalize(from_utf8(utf8), status);
    if (U_FAILURE(status)) throw Error("NFC normalization failed");
    return to_utf8(out);
}

bool is_nfc(std::string_view utf8) {
    UErrorCode status = U_ZERO_ERROR;
    bool ok = nfc_instance().isNormalized(from_utf8(utf8), status);
    return U_SUCCESS(status) && ok;
}

std::string lower(std::string_view utf8) {
    icu::UnicodeString u = from_utf8(utf8);
    u.toLower(icu::Locale::getRoot());
    return to_utf8(u);
}

std::string collapse_whitespace(std::string_view utf8) {
    icu::UnicodeString u = from_utf8(utf8);
    icu::UnicodeString out;
    bool pending_space = false;
    for (int32_t i = 0; i < u.length();) {
        UChar32 c = u.char32At(i);
        i += U16_LENGTH(c);
        if (u_isUWhiteSpace(c)) {
            pending_space = !out.isEmpty();
            continue;
        }
        if (pending_space) out.append(static_cast<UChar>(u' '));
        pending_space = false;
        out.append(c);
    }
    return to_utf8(out);
}

std::string trim(std::string_view s) {
    const auto* ws = " \t\r\n\f\v";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> tokenize(std::string_view utf8) {
    std::string low = lower(utf8);
    std::vector<std::string> out;
    std::string cur;
    for (char c : low) {
        bool sep = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v' ||
                   is_ascii_punct(c);
        if (sep) {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out.append(sep);
        out.append(parts[i]);
    }
    return out;
}

std::string substitute(std::string_view format,
                       const std::vector<std::pair<std::string, std::string>>& values) {
    std::string out;
    out.reserve(format.size());
    std::size_t i = 0;
    while (i < format.size()) {
        if (format[i] == '{') {
            auto close = format.find('}', i + 1);
            if (close != std::string_view::npos) {
                std::string_view key = format.substr(i + 1, close - i - 1);
                bool replaced = false;
                for (const auto& [k, v] : values) {
                    if (k == key) {
                        out.append(v);
                        replaced = true;
                        break;
                    }
                }
                if (replaced) {
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(format[i]);
        ++i;
    }
    return out;
}

bool contains_placeholder(std::string_view format, std::string_view key) {
    std::string needle = "{" + std::string(key) + "}";
    return format.find(needle) != std::string_view::npos;
}

}  // namespace credrag::text
