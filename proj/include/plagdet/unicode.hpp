#pragma once

// Thin ICU wrappers: NFC normalization, general-category tests and
// extended grapheme cluster segmentation on UTF-8 strings.

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/brkiter.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "plagdet/common.hpp"

namespace plagdet::unicode {

inline std::string nfc(std::string_view utf8)
{
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status))
        throw Error("ICU NFC normalizer unavailable");
    icu::UnicodeString src = icu::UnicodeString::fromUTF8(
        icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
    if (norm->isNormalized(src, status) && U_SUCCESS(status))
        return std::string(utf8);
    status = U_ZERO_ERROR;
    icu::UnicodeString dst = norm->normalize(src, status);
    if (U_FAILURE(status))
        throw Error("NFC normalization failed");
    std::string out;
    dst.toUTF8String(out);
    return out;
}

inline bool is_punctuation(UChar32 c)
{
    return (U_GET_GC_MASK(c) & U_GC_P_MASK) != 0;
}

inline bool is_digit(UChar32 c) { return u_charType(c) == U_DECIMAL_DIGIT_NUMBER; }

inline bool is_space(UChar32 c) { return u_isUWhiteSpace(c) != 0; }

/// Decodes UTF-8 into code points; invalid sequences become U+FFFD.
inline std::vector<UChar32> code_points(std::string_view utf8)
{
    std::vector<UChar32> out;
    out.reserve(utf8.size());
    const auto* s = reinterpret_cast<const uint8_t*>(utf8.data());
    const int32_t len = static_cast<int32_t>(utf8.size());
    int32_t i = 0;
    while (i < len) {
        UChar32 c;
        U8_NEXT(s, i, len, c);
        out.push_back(c < 0 ? 0xFFFD : c);
    }
    return out;
}

inline void append_utf8(std::string& out, UChar32 c)
{
    char buf[U8_MAX_LENGTH];
    int32_t n = 0;
    UBool err = false;
    U8_APPEND(buf, n, U8_MAX_LENGTH, c, err);
    if (!err)
        out.append(buf, static_cast<size_t>(n));
}

inline size_t code_point_count(std::string_view utf8)
{
    size_t n = 0;
    for (unsigned char ch : utf8)
        if ((ch & 0xC0) != 0x80)
            ++n;
    return n;
}

/// Splits into extended grapheme clusters.
inline std::vector<std::string> graphemes(std::string_view utf8)
{
    std::vector<std::string> out;
    if (utf8.empty())
        return out;

    thread_local std::unique_ptr<icu::BreakIterator> iter = [] {
        UErrorCode status = U_ZERO_ERROR;
        std::unique_ptr<icu::BreakIterator> it(
            icu::BreakIterator::createCharacterInstance(icu::Locale::getRoot(), status));
        if (U_FAILURE(status))
            throw Error("ICU character break iterator unavailable");
        return it;
    }();

    icu::UnicodeString text = icu::UnicodeString::fromUTF8(
        icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
    iter->setText(text);
    int32_t start = iter->first();
    for (int32_t end = iter->next(); end != icu::BreakIterator::DONE; start = end, end = iter->next()) {
        std::string piece;
        text.tempSubStringBetween(start, end).toUTF8String(piece);
        out.push_back(std::move(piece));
    }
    return out;
}

inline size_t grapheme_count(std::string_view utf8) { return graphemes(utf8).size(); }

} // namespace plagdet::unicode
