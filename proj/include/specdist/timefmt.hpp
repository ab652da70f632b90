#ifndef SPECDIST_TIMEFMT_HPP
#define SPECDIST_TIMEFMT_HPP

#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace specdist {

namespace detail {
inline std::optional<int> digits(std::string_view s, std::size_t pos, std::size_t count) {
    if (pos + count > s.size())
        return std::nullopt;
    int v = 0;
    for (std::size_t i = pos; i < pos + count; ++i) {
        if (s[i] < '0' || s[i] > '9')
            return std::nullopt;
        v = v * 10 + (s[i] - '0');
    }
    return v;
}
} // namespace detail

/// Parses `YYYY-MM-DDTHH:MM:SS[.fff][Z|+hh:mm|-hh:mm]` into UTC milliseconds since epoch.
inline std::optional<std::int64_t> parse_rfc3339(std::string_view s) {
    using namespace std::chrono;
    const auto y = detail::digits(s, 0, 4), mo = detail::digits(s, 5, 2), d = detail::digits(s, 8, 2);
    const auto hh = detail::digits(s, 11, 2), mi = detail::digits(s, 14, 2), ss = detail::digits(s, 17, 2);
    if (!y || !mo || !d || !hh || !mi || !ss || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') ||
        s[13] != ':' || s[16] != ':')
        return std::nullopt;
    const year_month_day ymd{year{*y}, month{static_cast<unsigned>(*mo)}, day{static_cast<unsigned>(*d)}};
    if (!ymd.ok() || *hh > 23 || *mi > 59 || *ss > 60)
        return std::nullopt;

    std::size_t pos = 19;
    std::int64_t ms = 0;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        int scale = 100, count = 0;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
            ms += (s[pos] - '0') * scale;
            scale /= 10;
            ++pos;
            ++count;
        }
        if (count == 0)
            return std::nullopt;
    }
    std::int64_t offset_min = 0;
    if (pos < s.size() && (s[pos] == 'Z' || s[pos] == 'z')) {
        ++pos;
    } else if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
        const auto oh = detail::digits(s, pos + 1, 2), om = detail::digits(s, pos + 4, 2);
        if (!oh || !om || s[pos + 3] != ':')
            return std::nullopt;
        offset_min = (*oh * 60 + *om) * (s[pos] == '-' ? -1 : 1);
        pos += 6;
    } else {
        return std::nullopt;
    }
    if (pos != s.size())
        return std::nullopt;

    const auto days = sys_days{ymd}.time_since_epoch().count();
    const std::int64_t secs = days * 86400LL + *hh * 3600LL + *mi * 60LL + *ss - offset_min * 60LL;
    return secs * 1000 + ms;
}

/// Accepts RFC-3339 text or a bare integer count of epoch milliseconds.
inline std::optional<std::int64_t> parse_timestamp(std::string_view s) {
    if (s.empty())
        return std::nullopt;
    std::int64_t ms = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), ms);
    if (ec == std::errc{} && ptr == s.data() + s.size())
        return ms;
    return parse_rfc3339(s);
}

/// UTC RFC-3339 with a `Z` suffix; milliseconds are printed only when nonzero.
inline std::string format_rfc3339(std::int64_t ms) {
    using namespace std::chrono;
    const sys_time<milliseconds> tp{milliseconds{ms}};
    const auto day_point = floor<days>(tp);
    const year_month_day ymd{day_point};
    const auto rem = tp - day_point;
    const auto h = duration_cast<hours>(rem).count();
    const auto m = duration_cast<minutes>(rem).count() % 60;
    const auto s = duration_cast<seconds>(rem).count() % 60;
    const auto frac = rem.count() % 1000;
    char buf[96];
    if (frac == 0)
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", static_cast<int>(ymd.year()),
                      static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), static_cast<long long>(h),
                      static_cast<long long>(m), static_cast<long long>(s));
    else
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lld.%03lldZ", static_cast<int>(ymd.year()),
                      static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), static_cast<long long>(h),
                      static_cast<long long>(m), static_cast<long long>(s), static_cast<long long>(frac));
    return buf;
}

} // namespace specdist

#endif // SPECDIST_TIMEFMT_HPP
