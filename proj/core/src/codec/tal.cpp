// Copyright 2026 The eegcare Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "eegcare/codec/tal.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

namespace eegcare::codec {

namespace {

[[noreturn]] void fail(std::string code, std::int64_t offset, std::string message) {
  throw CodecError({Finding{std::move(code), "annotations", offset, std::move(message)}});
}

bool is_reserved(char c) {
  const auto b = static_cast<std::uint8_t>(c);
  return b == kTalEnd || b == kTalTextEnd || b == kTalOnsetEnd;
}

double parse_tal_number(std::string_view s, std::int64_t offset, bool allow_sign) {
  if (s.empty()) fail("bad-number", offset, "empty number in TAL");
  std::string_view digits = s;
  bool negative = false;
  if (allow_sign && (s.front() == '+' || s.front() == '-')) {
    negative = s.front() == '-';
    digits.remove_prefix(1);
  }
  if (digits.empty() || digits.front() == '+' || digits.front() == '-') {
    fail("bad-number", offset, "malformed number '" + std::string(s) + "' in TAL");
  }
  double v = 0.0;
  const auto [ptr, ec] =
      std::from_chars(digits.data(), digits.data() + digits.size(), v, std::chars_format::fixed);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
    fail("bad-number", offset, "malformed number '" + std::string(s) + "' in TAL");
  }
  return negative ? -v : v;
}

}  // namespace

std::string format_decimal(double value) {
  if (value == 0.0) return "0";
  char buf[512];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

std::string encode_tal_entry(const Annotation& a) {
  if (!std::isfinite(a.onset)) fail("bad-number", -1, "annotation onset is not finite");
  std::string out;
  out += a.onset < 0 ? "" : "+";
  out += format_decimal(a.onset);
  if (a.duration) {
    if (!std::isfinite(*a.duration) || *a.duration < 0) {
      fail("bad-number", -1, "annotation duration must be finite and non-negative");
    }
    out += static_cast<char>(kTalOnsetEnd);
    out += format_decimal(*a.duration);
  }
  out += static_cast<char>(kTalTextEnd);
  for (const auto& text : a.texts) {
    for (char c : text) {
      if (is_reserved(c)) {
        fail("reserved-byte", -1, "annotation text contains a reserved control byte");
      }
    }
    out += text;
    out += static_cast<char>(kTalTextEnd);
  }
  out += static_cast<char>(kTalEnd);
  return out;
}

std::vector<std::uint8_t> encode_tal(std::span<const Annotation> annotations) {
  std::vector<std::uint8_t> out;
  for (const auto& a : annotations) {
    const auto entry = encode_tal_entry(a);
    out.insert(out.end(), entry.begin(), entry.end());
  }
  return out;
}

std::vector<Annotation> decode_tal(std::span<const std::uint8_t> bytes, std::int64_t base_offset) {
  std::vector<Annotation> out;
  const std::string_view view(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  std::size_t pos = 0;
  while (pos < view.size() && static_cast<std::uint8_t>(view[pos]) != kTalEnd) {
    const std::int64_t tal_offset = base_offset + static_cast<std::int64_t>(pos);
    if (view[pos] != '+' && view[pos] != '-') {
      fail("bad-tal", tal_offset, "TAL does not start with '+' or '-'");
    }
    const std::size_t onset_end = view.find_first_of("\x14\x15", pos);
    if (onset_end == std::string_view::npos) {
      fail("bad-tal", tal_offset, "unterminated TAL onset");
    }
    Annotation a;
    a.onset = parse_tal_number(view.substr(pos, onset_end - pos), tal_offset, true);
    pos = onset_end;
    if (static_cast<std::uint8_t>(view[pos]) == kTalOnsetEnd) {
      const std::size_t dur_end = view.find(static_cast<char>(kTalTextEnd), pos + 1);
      if (dur_end == std::string_view::npos) {
        fail("bad-tal", tal_offset, "unterminated TAL duration");
      }
      a.duration = parse_tal_number(view.substr(pos + 1, dur_end - pos - 1),
                                    base_offset + static_cast<std::int64_t>(pos + 1), false);
      pos = dur_end;
    }
    ++pos;  // past the 0x14 closing onset/duration
    while (true) {
      if (pos >= view.size()) fail("truncated", tal_offset, "TAL missing 0x00 terminator");
      if (static_cast<std::uint8_t>(view[pos]) == kTalEnd) {
        ++pos;
        break;
      }
      const std::size_t text_end = view.find_first_of(std::string_view("\x14\x15\x00", 3), pos);
      if (text_end == std::string_view::npos) {
        fail("truncated", tal_offset, "unterminated TAL text");
      }
      if (static_cast<std::uint8_t>(view[text_end]) != kTalTextEnd) {
        fail("reserved-byte", base_offset + static_cast<std::int64_t>(text_end),
             "reserved control byte inside TAL text");
      }
      a.texts.emplace_back(view.substr(pos, text_end - pos));
      pos = text_end + 1;
    }
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace eegcare::codec
