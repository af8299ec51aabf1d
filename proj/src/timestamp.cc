#include "equiride/timestamp.h"

#include <charconv>
#include <cstdio>

#include "equiride/csv.h"

namespace equiride {

namespace {

bool read_int(std::string_view s, std::size_t& pos, std::size_t width, int& out) {
  if (pos + width > s.size()) return false;
  auto const* first = s.data() + pos;
  auto const [ptr, ec] = std::from_chars(first, first + width, out);
  if (ec != std::errc{} || ptr != first + width) return false;
  pos += width;
  return true;
}

bool expect(std::string_view s, std::size_t& pos, char c) {
  if (pos >= s.size() || s[pos] != c) return false;
  ++pos;
  return true;
}

std::optional<Timestamp> make(int y, int mo, int d, int h, int mi, int sec) {
  using namespace std::chrono;
  auto const ymd = year{y} / month{static_cast<unsigned>(mo)} / day{static_cast<unsigned>(d)};
  if (!ymd.ok() || h < 0 || h > 23 || mi < 0 || mi > 59 || sec < 0 || sec > 60) {
    return std::nullopt;
  }
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec};
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view s) {
  s = trim(s);
  std::size_t pos = 0;
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  if (s.size() >= 19 && s[4] == '-') {
    if (!read_int(s, pos, 4, y) || !expect(s, pos, '-') || !read_int(s, pos, 2, mo) ||
        !expect(s, pos, '-') || !read_int(s, pos, 2, d) ||
        !(expect(s, pos, 'T') || expect(s, pos, ' ')) || !read_int(s, pos, 2, h) ||
        !expect(s, pos, ':') || !read_int(s, pos, 2, mi) || !expect(s, pos, ':') ||
        !read_int(s, pos, 2, sec)) {
      return std::nullopt;
    }
    return make(y, mo, d, h, mi, sec);
  }
  if (!read_int(s, pos, 2, mo) || !expect(s, pos, '/') || !read_int(s, pos, 2, d) ||
      !expect(s, pos, '/') || !read_int(s, pos, 4, y) || !expect(s, pos, ' ') ||
      !read_int(s, pos, 2, h) || !expect(s, pos, ':') || !read_int(s, pos, 2, mi) ||
      !expect(s, pos, ':') || !read_int(s, pos, 2, sec) || !expect(s, pos, ' ')) {
    return std::nullopt;
  }
  auto const meridiem = s.substr(pos);
  if (h < 1 || h > 12) return std::nullopt;
  if (meridiem == "AM") {
    h = h == 12 ? 0 : h;
  } else if (meridiem == "PM") {
    h = h == 12 ? 12 : h + 12;
  } else {
    return std::nullopt;
  }
  return make(y, mo, d, h, mi, sec);
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  auto const day_start = floor<days>(t);
  year_month_day const ymd{day_start};
  hh_mm_ss const hms{t - day_start};
  int h = static_cast<int>(hms.hours().count());
  char const* meridiem = h < 12 ? "AM" : "PM";
  h %= 12;
  if (h == 0) h = 12;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%02u/%02u/%04d %02d:%02d:%02d %s",
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(ymd.year()), h, static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()), meridiem);
  return buf;
}

std::optional<Timestamp> parse_date(std::string_view s) {
  s = trim(s);
  std::size_t pos = 0;
  int y = 0, mo = 0, d = 0;
  if (!read_int(s, pos, 4, y) || !expect(s, pos, '-') || !read_int(s, pos, 2, mo) ||
      !expect(s, pos, '-') || !read_int(s, pos, 2, d) || pos != s.size()) {
    return std::nullopt;
  }
  return make(y, mo, d, 0, 0, 0);
}

int hour_of_day(Timestamp t) {
  using namespace std::chrono;
  return static_cast<int>(duration_cast<hours>(t - floor<days>(t)).count());
}

}  // namespace equiride
