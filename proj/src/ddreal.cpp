#include "vnwlab/ddreal.hpp"

#include <cctype>
#include <cstdio>
#include <string>

#include "vnwlab/errors.hpp"

namespace vnwlab {

namespace {

DD pow10(int k) {
  // 10^k is exact in binary64 for 0 <= k <= 22.
  DD base(10.0);
  DD result(1.0);
  int n = k < 0 ? -k : k;
  while (n > 0) {
    if (n & 1) result *= base;
    base *= base;
    n >>= 1;
  }
  return k < 0 ? DD(1.0) / result : result;
}

/// x * 10^k, applied in chunks so intermediate powers stay finite.
DD scale_pow10(DD x, int k) {
  while (k > 200) {
    x = x * pow10(200);
    k -= 200;
  }
  while (k < -200) {
    x = x / pow10(200);
    k += 200;
  }
  if (k > 0) return x * pow10(k);
  if (k < 0) return x / pow10(-k);
  return x;
}

}  // namespace

std::string to_string(DD x, int digits) {
  if (digits < 1) digits = 1;
  if (std::isnan(x.hi)) return "nan";
  if (std::isinf(x.hi)) return x.hi > 0 ? "inf" : "-inf";
  if (x.hi == 0.0) {
    std::string s = "0.";
    s.append(static_cast<std::size_t>(digits - 1), '0');
    return s + "e+00";
  }

  const bool negative = x.hi < 0.0;
  DD r = abs(x);
  int e = static_cast<int>(std::floor(std::log10(r.hi)));
  r = scale_pow10(r, -e);
  if (r >= DD(10.0)) {
    r = r / DD(10.0);
    ++e;
  } else if (r < DD(1.0)) {
    r = mul(r, 10.0);
    --e;
  }

  // One guard digit for rounding.
  std::string d(static_cast<std::size_t>(digits + 1), '0');
  for (int i = 0; i <= digits; ++i) {
    double q = std::floor(r.hi);
    if (r - DD(q) < DD(0.0)) q -= 1.0;
    if (q < 0.0) q = 0.0;
    if (q > 9.0) q = 9.0;
    d[static_cast<std::size_t>(i)] = static_cast<char>('0' + static_cast<int>(q));
    r = mul(r - DD(q), 10.0);
  }
  const bool round_up = d.back() >= '5';
  d.pop_back();
  if (round_up) {
    int i = digits - 1;
    while (i >= 0) {
      if (d[static_cast<std::size_t>(i)] == '9') {
        d[static_cast<std::size_t>(i)] = '0';
        --i;
      } else {
        ++d[static_cast<std::size_t>(i)];
        break;
      }
    }
    if (i < 0) {
      d.insert(d.begin(), '1');
      d.pop_back();
      ++e;
    }
  }

  std::string out;
  if (negative) out.push_back('-');
  out.push_back(d[0]);
  out.push_back('.');
  out.append(d, 1, std::string::npos);
  char buf[16];
  std::snprintf(buf, sizeof buf, "e%+03d", e);
  out += buf;
  return out;
}

DD parse_dd(std::string_view text) {
  std::size_t i = 0;
  auto fail = [&](const char* why) {
    throw Error(ErrorCode::ParseError, std::string(why) + " in '" + std::string(text) + "'");
  };
  while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  bool negative = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
    negative = text[i] == '-';
    ++i;
  }
  DD value(0.0);
  int scale = 0;
  int ndigits = 0;
  bool seen_point = false;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (c >= '0' && c <= '9') {
      value = mul(value, 10.0) + DD(static_cast<double>(c - '0'));
      if (seen_point) --scale;
      ++ndigits;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (ndigits == 0) fail("no digits");
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    bool eneg = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
      eneg = text[i] == '-';
      ++i;
    }
    int ex = 0;
    int edigits = 0;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      ex = ex * 10 + (text[i] - '0');
      if (ex > 100000) fail("exponent out of range");
      ++i;
      ++edigits;
    }
    if (edigits == 0) fail("empty exponent");
    scale += eneg ? -ex : ex;
  }
  while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  if (i != text.size()) fail("trailing characters");

  value = scale_pow10(value, scale);
  return negative ? -value : value;
}

}  // namespace vnwlab
