#pragma once

// Exact fixed-point decimal formatting with round-half-away-from-zero.
//
// printf-style formatting rounds the exact binary value half-to-even, which
// differs from half-away-from-zero on binary-exact ties such as 0.0078125 at
// six places. The serializer promises the latter, so the rounding is done
// here on the exact binary expansion.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>

namespace crystalign {

inline std::string format_fixed(double x, int places) {
  if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
  if (places < 0 || places > 18) places = places < 0 ? 0 : 18;
  const bool negative = std::signbit(x);
  const double ax = std::fabs(x);

  // Beyond ~1e17 every double is an integer; plain printing is exact.
  if (ax >= 1e17) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%.*f", places, x);
    return buf;
  }

  int exp2 = 0;
  const double mant = std::frexp(ax, &exp2);  // ax = mant * 2^exp2, mant in [0.5,1)
  const auto m = static_cast<unsigned __int128>(std::ldexp(mant, 53));  // exact 53-bit integer
  const int e = exp2 - 53;  // ax = m * 2^e

  unsigned __int128 pow5 = 1;
  unsigned __int128 pow10 = 1;
  for (int i = 0; i < places; ++i) {
    pow5 *= 5;
    pow10 *= 10;
  }

  // ax * 10^places = m * 5^places * 2^(e + places)
  unsigned __int128 scaled = m * pow5;
  const int shift = e + places;
  unsigned __int128 n = 0;
  if (shift >= 0) {
    n = scaled << shift;
  } else if (-shift >= 127) {
    n = 0;  // far below half a unit in the last place
  } else {
    const int s = -shift;
    const unsigned __int128 one = 1;
    const unsigned __int128 q = scaled >> s;
    const unsigned __int128 rem = scaled & ((one << s) - 1);
    const unsigned __int128 half = one << (s - 1);
    n = q + (rem >= half ? 1 : 0);
  }

  const unsigned __int128 ip = n / pow10;
  unsigned __int128 fp = n % pow10;

  std::string int_digits;
  if (ip == 0) {
    int_digits = "0";
  } else {
    for (unsigned __int128 v = ip; v > 0; v /= 10) int_digits.insert(int_digits.begin(), char('0' + int(v % 10)));
  }
  std::string out;
  if (negative && n != 0) out += '-';
  out += int_digits;
  if (places > 0) {
    std::string frac(static_cast<std::size_t>(places), '0');
    for (int i = places - 1; i >= 0; --i) {
      frac[static_cast<std::size_t>(i)] = char('0' + int(fp % 10));
      fp /= 10;
    }
    out += '.';
    out += frac;
  }
  return out;
}

// Round to `places` decimals with the same rule, returned as a double.
inline double round_half_away(double x, int places) {
  const std::string s = format_fixed(x, places);
  double v = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

}  // namespace crystalign
