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

#include "eegcare/codec/codec.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <iterator>
#include <system_error>

#include "eegcare/codec/tal.hpp"
#include "codec/allocate.hpp"
#include "codec/layout.hpp"

namespace eegcare::codec {

namespace {

using layout::FixedField;
using layout::SignalField;

std::string pad(std::string_view s, std::int64_t width) {
  std::string out(s.substr(0, static_cast<std::size_t>(width)));
  out.resize(static_cast<std::size_t>(width), ' ');
  return out;
}

std::string_view trim_right(std::string_view s) {
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  return s;
}

std::string_view trim(std::string_view s) {
  s = trim_right(s);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

std::string reserved_field(const FileHeader& h) {
  const bool bdf = h.width == SampleWidth::kBdf24;
  switch (h.continuity) {
    case Continuity::kPlain:
      return bdf ? "24BIT" : "";
    case Continuity::kContinuous:
      return bdf ? "BDF+C" : "EDF+C";
    case Continuity::kDiscontinuous:
      return bdf ? "BDF+D" : "EDF+D";
  }
  return "";
}

SignalHeader annotation_signal_header(const SignalFileModel& m) {
  SignalHeader s;
  s.label = std::string(annotations_label(m.header.width));
  s.physical_min = -1;
  s.physical_max = 1;
  s.digital_min = format_digital_min(m.header.width);
  s.digital_max = format_digital_max(m.header.width);
  s.samples_per_record = m.annotation_samples_per_record;
  return s;
}

void put_le(std::uint8_t* dst, std::int32_t v, int width) {
  const auto u = static_cast<std::uint32_t>(v);
  for (int b = 0; b < width; ++b) dst[b] = static_cast<std::uint8_t>((u >> (8 * b)) & 0xFF);
}

std::int32_t get_le(const std::uint8_t* src, int width) {
  std::uint32_t u = 0;
  for (int b = 0; b < width; ++b) u |= static_cast<std::uint32_t>(src[b]) << (8 * b);
  const std::uint32_t sign = 1u << (8 * width - 1);
  if (u & sign) u |= ~((sign << 1) - 1);  // sign-extend
  return static_cast<std::int32_t>(u);
}

// ---------------------------------------------------------------------------
// Validation

class Checker {
 public:
  explicit Checker(const SignalFileModel& m) : m_(m), ns_(m.signal_count()) {}

  std::vector<Finding> run() {
    check_header();
    check_signals();
    check_records();
    check_annotations();
    check_continuity();
    return std::move(findings_);
  }

 private:
  void add(std::string code, std::string field, std::int64_t offset, std::string message) {
    findings_.push_back({std::move(code), std::move(field), offset, std::move(message)});
  }

  void text_field(std::string_view value, std::string field, std::int64_t offset,
                  std::int64_t width) {
    if (static_cast<std::int64_t>(value.size()) > width) {
      add("field-overflow", field, offset,
          field + " is " + std::to_string(value.size()) + " chars, field holds " +
              std::to_string(width));
    }
    if (!layout::printable_ascii(value)) {
      add("non-ascii", field, offset, field + " must be printable US-ASCII");
    }
    if (!value.empty() && value.back() == ' ') {
      add("trailing-space", field, offset, field + " has trailing spaces lost on padding");
    }
  }

  void text_field(std::string_view value, const FixedField& f) {
    text_field(value, std::string(f.name), f.offset, f.width);
  }

  void numeric_width(const std::string& formatted, std::string field, std::int64_t offset,
                     std::int64_t width) {
    if (static_cast<std::int64_t>(formatted.size()) > width) {
      add("field-overflow", field, offset,
          field + " value '" + formatted + "' does not fit in " + std::to_string(width) +
              " chars");
    }
  }

  static bool dotted_triplet(std::string_view s, int max0, int max1, int max2, int min0,
                             int min1) {
    if (s.size() != 8 || s[2] != '.' || s[5] != '.') return false;
    int parts[3];
    for (int i = 0; i < 3; ++i) {
      const char a = s[static_cast<std::size_t>(3 * i)];
      const char b = s[static_cast<std::size_t>(3 * i + 1)];
      if (a < '0' || a > '9' || b < '0' || b > '9') return false;
      parts[i] = (a - '0') * 10 + (b - '0');
    }
    return parts[0] >= min0 && parts[0] <= max0 && parts[1] >= min1 && parts[1] <= max1 &&
           parts[2] <= max2;
  }

  void check_header() {
    const auto& h = m_.header;
    text_field(h.patient_id, layout::kPatientId);
    text_field(h.recording_id, layout::kRecordingId);
    if (!dotted_triplet(h.start_date, 31, 12, 99, 1, 1)) {
      add("bad-date", "start-date", layout::kStartDate.offset, "start-date must be dd.mm.yy");
    }
    if (!dotted_triplet(h.start_time, 23, 59, 59, 0, 0)) {
      add("bad-time", "start-time", layout::kStartTime.offset, "start-time must be hh.mm.ss");
    }
    if (!(std::isfinite(h.record_duration) && h.record_duration > 0)) {
      add("bad-duration", "record-duration", layout::kRecordDuration.offset,
          "record-duration must be positive");
    } else {
      numeric_width(format_decimal(h.record_duration), "record-duration",
                    layout::kRecordDuration.offset, layout::kRecordDuration.width);
    }
    if (h.record_count != -1 && h.record_count != static_cast<std::int64_t>(m_.records.size())) {
      add("record-count-mismatch", "record-count", layout::kRecordCount.offset,
          "record-count " + std::to_string(h.record_count) + " but " +
              std::to_string(m_.records.size()) + " records held");
    }
    numeric_width(std::to_string(h.record_count), "record-count", layout::kRecordCount.offset,
                  layout::kRecordCount.width);
    if (ns_ < 1) {
      add("no-signals", "signal-count", layout::kSignalCount.offset, "signal-count must be >= 1");
    }
    numeric_width(std::to_string(ns_), "signal-count", layout::kSignalCount.offset,
                  layout::kSignalCount.width);
    if (m_.has_annotation_signal()) {
      const std::int64_t capacity =
          static_cast<std::int64_t>(m_.annotation_samples_per_record) * bytes_per_sample(m_.header.width);
      if (m_.annotation_samples_per_record < 1) {
        add("bad-annotation-size", "annotation-samples-per-record", -1,
            "annotation signal needs at least one sample per record");
      } else if (capacity > 99999999) {
        add("field-overflow", "annotation-samples-per-record", -1,
            "annotation signal too large");
      }
    }
  }

  void check_signals() {
    const auto width = m_.header.width;
    for (int i = 0; i < static_cast<int>(m_.signals.size()); ++i) {
      const auto& s = m_.signals[static_cast<std::size_t>(i)];
      auto off = [&](SignalField f) { return layout::signal_field_offset(f, i, ns_); };
      auto name = [&](SignalField f) { return layout::signal_field_name(f, i); };
      text_field(s.label, name(layout::kLabel), off(layout::kLabel), 16);
      if (trim(s.label) == kEdfAnnotationsLabel || trim(s.label) == kBdfAnnotationsLabel) {
        add("reserved-label", name(layout::kLabel), off(layout::kLabel),
            "label reserved for the annotation signal");
      }
      text_field(s.transducer, name(layout::kTransducer), off(layout::kTransducer), 80);
      text_field(s.physical_dimension, name(layout::kPhysicalDimension),
                 off(layout::kPhysicalDimension), 8);
      text_field(s.prefiltering, name(layout::kPrefiltering), off(layout::kPrefiltering), 80);

      const bool finite = std::isfinite(s.physical_min) && std::isfinite(s.physical_max);
      if (!finite) {
        add("bad-number", name(layout::kPhysicalMin), off(layout::kPhysicalMin),
            "physical bounds must be finite");
      } else {
        numeric_width(format_decimal(s.physical_min), name(layout::kPhysicalMin),
                      off(layout::kPhysicalMin), 8);
        numeric_width(format_decimal(s.physical_max), name(layout::kPhysicalMax),
                      off(layout::kPhysicalMax), 8);
      }
      if (finite && s.physical_min == s.physical_max) {
        add("degenerate-calibration", name(layout::kPhysicalMin), off(layout::kPhysicalMin),
            "degenerate calibration: physical-min equals physical-max");
      }
      if (s.digital_min >= s.digital_max) {
        add("degenerate-calibration", name(layout::kDigitalMin), off(layout::kDigitalMin),
            "degenerate calibration: digital-min must be below digital-max");
      }
      if (s.digital_min < format_digital_min(width) || s.digital_max > format_digital_max(width)) {
        add("exceeds-format-width", name(layout::kDigitalMin), off(layout::kDigitalMin),
            "digital bounds exceed format width of " +
                std::to_string(8 * bytes_per_sample(width)) + " bits");
      }
      if (s.samples_per_record < 1) {
        add("bad-samples-per-record", name(layout::kSamplesPerRecord),
            off(layout::kSamplesPerRecord), "samples-per-record must be >= 1");
      } else {
        numeric_width(std::to_string(s.samples_per_record), name(layout::kSamplesPerRecord),
                      off(layout::kSamplesPerRecord), 8);
      }
    }
  }

  void check_records() {
    const auto header_bytes = m_.header_byte_count();
    const auto record_bytes = m_.record_byte_count();
    const int bps = bytes_per_sample(m_.header.width);
    for (std::size_t r = 0; r < m_.records.size(); ++r) {
      const auto& rec = m_.records[r];
      const std::int64_t rec_off = header_bytes + static_cast<std::int64_t>(r) * record_bytes;
      if (rec.size() != m_.signals.size()) {
        add("record-shape", "record[" + std::to_string(r) + "]", rec_off,
            "record holds " + std::to_string(rec.size()) + " signals, expected " +
                std::to_string(m_.signals.size()));
        continue;
      }
      std::int64_t sig_off = rec_off;
      for (std::size_t i = 0; i < rec.size(); ++i) {
        const auto& s = m_.signals[i];
        const auto& block = rec[i];
        const std::string field = "record[" + std::to_string(r) + "].signal[" + std::to_string(i) + "]";
        if (static_cast<std::int64_t>(block.size()) != s.samples_per_record) {
          add("record-shape", field, sig_off,
              "holds " + std::to_string(block.size()) + " samples, expected " +
                  std::to_string(s.samples_per_record));
        } else {
          const auto bad = std::find_if(block.begin(), block.end(), [&](std::int32_t v) {
            return v < s.digital_min || v > s.digital_max;
          });
          if (bad != block.end()) {
            add("sample-out-of-range", field, sig_off + (bad - block.begin()) * bps,
                "sample " + std::to_string(*bad) + " outside digital range");
          }
        }
        sig_off += static_cast<std::int64_t>(std::max(0, s.samples_per_record)) * bps;
      }
    }
  }

  void check_annotations() {
    if (m_.annotations.empty()) return;
    if (!m_.has_annotation_signal()) {
      add("annotations-unsupported", "annotations", -1,
          "annotations need an EDF+/BDF+ continuity flag");
      return;
    }
    for (std::size_t k = 0; k < m_.annotations.size(); ++k) {
      try {
        (void)encode_tal_entry(m_.annotations[k]);
      } catch (const CodecError& e) {
        for (auto f : e.findings()) {
          f.field = "annotations[" + std::to_string(k) + "]";
          findings_.push_back(std::move(f));
        }
      }
    }
  }

  void check_continuity() {
    const auto& starts = m_.record_starts;
    const double dur = m_.header.record_duration;
    switch (m_.header.continuity) {
      case Continuity::kPlain:
        if (!starts.empty()) {
          add("continuity", "record-starts", -1, "plain files have no record start list");
        }
        break;
      case Continuity::kContinuous:
        if (!starts.empty()) {
          add("continuity", "record-starts", -1,
              "continuous files derive record starts from record-duration");
        }
        break;
      case Continuity::kDiscontinuous:
        if (starts.size() != m_.records.size()) {
          add("continuity", "record-starts", -1, "discontinuous files need one start per record");
          break;
        }
        for (std::size_t r = 0; r < starts.size(); ++r) {
          if (!std::isfinite(starts[r]) || (r > 0 && starts[r] < starts[r - 1] + dur)) {
            add("continuity", "record-starts[" + std::to_string(r) + "]", -1,
                "record starts must increase by at least record-duration");
            break;
          }
        }
        break;
    }
  }

  const SignalFileModel& m_;
  int ns_;
  std::vector<Finding> findings_;
};

// ---------------------------------------------------------------------------
// Decoding helpers

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : b_(bytes) {}

  std::string_view field(std::int64_t offset, std::int64_t width) const {
    return {reinterpret_cast<const char*>(b_.data()) + offset, static_cast<std::size_t>(width)};
  }

  template <typename T>
  T number(std::int64_t offset, std::int64_t width, const std::string& name,
           std::vector<Finding>& findings) const {
    const auto raw = trim(field(offset, width));
    std::string_view digits = raw;
    if (!digits.empty() && digits.front() == '+') digits.remove_prefix(1);
    double v = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v,
                                           std::chars_format::fixed);
    if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size()) {
      findings.push_back({"bad-number", name, offset,
                          name + " is not a number: '" + std::string(raw) + "'"});
      return T{};
    }
    if constexpr (std::is_integral_v<T>) {
      if (v != std::floor(v)) {
        findings.push_back({"bad-number", name, offset, name + " must be an integer"});
        return T{};
      }
    }
    return static_cast<T>(v);
  }

 private:
  std::span<const std::uint8_t> b_;
};

[[noreturn]] void fail(std::vector<Finding> findings) { throw CodecError(std::move(findings)); }

}  // namespace

// ---------------------------------------------------------------------------

std::string_view annotations_label(SampleWidth w) {
  return w == SampleWidth::kEdf16 ? kEdfAnnotationsLabel : kBdfAnnotationsLabel;
}

std::int64_t SignalFileModel::record_byte_count() const {
  std::int64_t samples = 0;
  for (const auto& s : signals) samples += std::max(0, s.samples_per_record);
  if (has_annotation_signal()) samples += std::max(0, annotation_samples_per_record);
  return samples * bytes_per_sample(header.width);
}

double SignalFileModel::record_start(std::size_t r) const {
  if (r < record_starts.size()) return record_starts[r];
  return static_cast<double>(r) * header.record_duration;
}

std::string Finding::to_string() const {
  std::string out = code;
  if (!field.empty()) out += " [" + field + "]";
  if (offset >= 0) out += " @" + std::to_string(offset);
  out += ": " + message;
  return out;
}

namespace {
std::string join_findings(const std::vector<Finding>& findings) {
  std::string out;
  for (const auto& f : findings) {
    if (!out.empty()) out += "; ";
    out += f.to_string();
  }
  return out;
}
}  // namespace

CodecError::CodecError(std::vector<Finding> findings)
    : std::runtime_error(join_findings(findings)), findings_(std::move(findings)) {}

std::vector<Finding> validate(const SignalFileModel& model) {
  auto findings = Checker(model).run();
  if (findings.empty() && model.has_annotation_signal()) {
    try {
      (void)detail::allocate_annotations(model);
    } catch (const CodecError& e) {
      findings.insert(findings.end(), e.findings().begin(), e.findings().end());
    }
  }
  return findings;
}

void finalize_record_count(SignalFileModel& model) {
  model.header.record_count = static_cast<std::int64_t>(model.records.size());
}

namespace detail {

std::string timekeeping_tal(double record_start) {
  return encode_tal_entry(Annotation{record_start, std::nullopt, {""}});
}

std::vector<std::string> allocate_annotations(const SignalFileModel& m) {
  const std::size_t n = m.records.size();
  const auto capacity = static_cast<std::size_t>(m.annotation_samples_per_record) *
                        static_cast<std::size_t>(bytes_per_sample(m.header.width));
  std::vector<std::string> per_record(n);
  for (std::size_t r = 0; r < n; ++r) {
    per_record[r] = timekeeping_tal(m.record_start(r));
    if (per_record[r].size() > capacity) {
      fail({{"annotation-overflow", "annotation-samples-per-record", -1,
             "timekeeping annotation of record " + std::to_string(r) +
                 " does not fit the annotation signal"}});
    }
  }
  std::size_t cursor = 0;
  for (std::size_t k = 0; k < m.annotations.size(); ++k) {
    const auto& a = m.annotations[k];
    const std::string tal = encode_tal_entry(a);
    std::size_t home = 0;
    if (m.record_starts.empty()) {
      const double idx = std::floor(a.onset / m.header.record_duration);
      home = idx <= 0 ? 0 : static_cast<std::size_t>(std::min<double>(idx, static_cast<double>(n)));
    } else {
      const auto it = std::upper_bound(m.record_starts.begin(), m.record_starts.end(), a.onset);
      home = it == m.record_starts.begin() ? 0 : static_cast<std::size_t>(it - m.record_starts.begin() - 1);
    }
    if (n > 0) home = std::min(home, n - 1);
    // Never move backwards, so the decoded list keeps the original order.
    cursor = std::max(cursor, home);
    while (cursor < n && per_record[cursor].size() + tal.size() > capacity) ++cursor;
    if (cursor >= n) {
      fail({{"annotation-overflow", "annotations[" + std::to_string(k) + "]", -1,
             "annotation does not fit the remaining annotation signal capacity"}});
    }
    per_record[cursor] += tal;
  }
  return per_record;
}

}  // namespace detail

Bytes encode_file(const SignalFileModel& model) {
  auto findings = Checker(model).run();
  if (!findings.empty()) fail(std::move(findings));
  std::vector<std::string> tals;
  if (model.has_annotation_signal()) tals = detail::allocate_annotations(model);

  const auto& h = model.header;
  const int ns = model.signal_count();
  std::vector<SignalHeader> all = model.signals;
  if (model.has_annotation_signal()) all.push_back(annotation_signal_header(model));

  Bytes out;
  out.reserve(static_cast<std::size_t>(model.header_byte_count() +
                                       model.record_byte_count() *
                                           static_cast<std::int64_t>(model.records.size())));
  auto append = [&](std::string_view s) { out.insert(out.end(), s.begin(), s.end()); };

  if (h.width == SampleWidth::kBdf24) {
    out.push_back(0xFF);
    append("BIOSEMI");
  } else {
    append(pad("0", 8));
  }
  append(pad(h.patient_id, 80));
  append(pad(h.recording_id, 80));
  append(pad(h.start_date, 8));
  append(pad(h.start_time, 8));
  append(pad(std::to_string(model.header_byte_count()), 8));
  append(pad(reserved_field(h), 44));
  append(pad(std::to_string(h.record_count), 8));
  append(pad(format_decimal(h.record_duration), 8));
  append(pad(std::to_string(ns), 4));

  for (const auto& s : all) append(pad(s.label, 16));
  for (const auto& s : all) append(pad(s.transducer, 80));
  for (const auto& s : all) append(pad(s.physical_dimension, 8));
  for (const auto& s : all) append(pad(format_decimal(s.physical_min), 8));
  for (const auto& s : all) append(pad(format_decimal(s.physical_max), 8));
  for (const auto& s : all) append(pad(std::to_string(s.digital_min), 8));
  for (const auto& s : all) append(pad(std::to_string(s.digital_max), 8));
  for (const auto& s : all) append(pad(s.prefiltering, 80));
  for (const auto& s : all) append(pad(std::to_string(s.samples_per_record), 8));
  for (std::size_t i = 0; i < all.size(); ++i) append(pad("", 32));

  const int bps = bytes_per_sample(h.width);
  for (std::size_t r = 0; r < model.records.size(); ++r) {
    for (const auto& block : model.records[r]) {
      const std::size_t at = out.size();
      out.resize(at + block.size() * static_cast<std::size_t>(bps));
      for (std::size_t k = 0; k < block.size(); ++k) {
        put_le(out.data() + at + k * static_cast<std::size_t>(bps), block[k], bps);
      }
    }
    if (model.has_annotation_signal()) {
      const std::size_t capacity =
          static_cast<std::size_t>(model.annotation_samples_per_record) * static_cast<std::size_t>(bps);
      const std::string& tal = tals[r];
      append(tal);
      out.resize(out.size() + capacity - tal.size(), 0x00);
    }
  }
  return out;
}

SignalFileModel decode_file(std::span<const std::uint8_t> bytes) {
  const auto size = static_cast<std::int64_t>(bytes.size());
  if (size < 256) {
    fail({{"truncated", "header", size,
           "file is " + std::to_string(size) + " bytes, shorter than the 256-byte header"}});
  }
  const Reader rd(bytes);
  std::vector<Finding> findings;
  SignalFileModel m;

  const auto version = rd.field(0, 8);
  if (bytes[0] == 0xFF && version.substr(1) == "BIOSEMI") {
    m.header.width = SampleWidth::kBdf24;
  } else if (trim(version) == "0") {
    m.header.width = SampleWidth::kEdf16;
  } else {
    fail({{"bad-version", "version", 0, "unknown version marker"}});
  }
  for (std::int64_t i = 8; i < 256; ++i) {
    const auto b = bytes[static_cast<std::size_t>(i)];
    if (b < 0x20 || b > 0x7E) {
      fail({{"non-ascii", "header", i, "non-ASCII byte in header"}});
    }
  }

  m.header.patient_id = std::string(trim_right(rd.field(8, 80)));
  m.header.recording_id = std::string(trim_right(rd.field(88, 80)));
  m.header.start_date = std::string(trim_right(rd.field(168, 8)));
  m.header.start_time = std::string(trim_right(rd.field(176, 8)));
  const auto header_bytes = rd.number<std::int64_t>(184, 8, "header-byte-count", findings);
  const auto reserved = trim(rd.field(192, 44));
  if (reserved.starts_with("EDF+C") || reserved.starts_with("BDF+C")) {
    m.header.continuity = Continuity::kContinuous;
  } else if (reserved.starts_with("EDF+D") || reserved.starts_with("BDF+D")) {
    m.header.continuity = Continuity::kDiscontinuous;
  } else {
    m.header.continuity = Continuity::kPlain;
  }
  m.header.record_count = rd.number<std::int64_t>(236, 8, "record-count", findings);
  m.header.record_duration = rd.number<double>(244, 8, "record-duration", findings);
  const auto ns = rd.number<int>(252, 4, "signal-count", findings);
  if (!findings.empty()) fail(std::move(findings));
  if (ns < 1) fail({{"no-signals", "signal-count", 252, "signal-count must be >= 1"}});
  if (!(m.header.record_duration > 0) && m.header.record_count != 0) {
    fail({{"bad-duration", "record-duration", 244, "record-duration must be positive"}});
  }

  const std::int64_t expected_header = 256LL * (ns + 1);
  if (size < expected_header) {
    fail({{"truncated", "header", size,
           "file ends inside the signal headers (" + std::to_string(expected_header) +
               " bytes expected)"}});
  }
  if (header_bytes != expected_header) {
    fail({{"header-size", "header-byte-count", 184,
           "header-byte-count " + std::to_string(header_bytes) + " != 256 * (signal-count + 1)"}});
  }
  for (std::int64_t i = 256; i < expected_header; ++i) {
    const auto b = bytes[static_cast<std::size_t>(i)];
    if (b < 0x20 || b > 0x7E) fail({{"non-ascii", "signal-headers", i, "non-ASCII byte in header"}});
  }

  std::vector<SignalHeader> all(static_cast<std::size_t>(ns));
  for (int i = 0; i < ns; ++i) {
    auto off = [&](SignalField f) { return layout::signal_field_offset(f, i, ns); };
    auto name = [&](SignalField f) { return layout::signal_field_name(f, i); };
    auto width = [&](SignalField f) { return layout::kSignalWidths[static_cast<std::size_t>(f)]; };
    auto& s = all[static_cast<std::size_t>(i)];
    s.label = std::string(trim_right(rd.field(off(layout::kLabel), 16)));
    s.transducer = std::string(trim_right(rd.field(off(layout::kTransducer), 80)));
    s.physical_dimension = std::string(trim_right(rd.field(off(layout::kPhysicalDimension), 8)));
    s.physical_min = rd.number<double>(off(layout::kPhysicalMin), width(layout::kPhysicalMin),
                                       name(layout::kPhysicalMin), findings);
    s.physical_max = rd.number<double>(off(layout::kPhysicalMax), width(layout::kPhysicalMax),
                                       name(layout::kPhysicalMax), findings);
    s.digital_min = rd.number<std::int32_t>(off(layout::kDigitalMin), 8, name(layout::kDigitalMin), findings);
    s.digital_max = rd.number<std::int32_t>(off(layout::kDigitalMax), 8, name(layout::kDigitalMax), findings);
    s.prefiltering = std::string(trim_right(rd.field(off(layout::kPrefiltering), 80)));
    s.samples_per_record = rd.number<std::int32_t>(off(layout::kSamplesPerRecord), 8,
                                                   name(layout::kSamplesPerRecord), findings);
    if (s.digital_min < format_digital_min(m.header.width) ||
        s.digital_max > format_digital_max(m.header.width)) {
      findings.push_back({"exceeds-format-width", name(layout::kDigitalMin), off(layout::kDigitalMin),
                          "digital bounds exceed format width"});
    }
    if (s.samples_per_record < 1) {
      findings.push_back({"bad-samples-per-record", name(layout::kSamplesPerRecord),
                          off(layout::kSamplesPerRecord), "samples-per-record must be >= 1"});
    }
  }
  if (!findings.empty()) fail(std::move(findings));

  std::vector<bool> is_annotation(static_cast<std::size_t>(ns), false);
  std::int32_t annotation_samples = 0;
  for (int i = 0; i < ns; ++i) {
    const auto& label = all[static_cast<std::size_t>(i)].label;
    if (m.header.continuity != Continuity::kPlain &&
        (label == kEdfAnnotationsLabel || label == kBdfAnnotationsLabel)) {
      is_annotation[static_cast<std::size_t>(i)] = true;
      if (annotation_samples == 0) annotation_samples = all[static_cast<std::size_t>(i)].samples_per_record;
    } else {
      m.signals.push_back(all[static_cast<std::size_t>(i)]);
    }
  }
  if (m.header.continuity != Continuity::kPlain && annotation_samples == 0) {
    fail({{"missing-annotation-signal", "signal-headers", 256,
           "EDF+/BDF+ file without an annotation signal"}});
  }
  if (annotation_samples > 0) m.annotation_samples_per_record = annotation_samples;

  const int bps = bytes_per_sample(m.header.width);
  std::int64_t record_bytes = 0;
  for (const auto& s : all) record_bytes += static_cast<std::int64_t>(s.samples_per_record) * bps;
  const std::int64_t data_bytes = size - expected_header;
  const std::int64_t whole = data_bytes / record_bytes;
  std::int64_t count = m.header.record_count;
  if (count < -1) fail({{"bad-number", "record-count", 236, "record-count must be >= -1"}});
  if (count == -1) {
    count = whole;
    if (data_bytes % record_bytes != 0) {
      fail({{"truncated", "record[" + std::to_string(whole) + "]",
             expected_header + whole * record_bytes,
             "file truncated mid-record; last complete record index " + std::to_string(whole - 1)}});
    }
  } else if (whole < count) {
    fail({{"truncated", "record[" + std::to_string(whole) + "]",
           expected_header + whole * record_bytes,
           "file truncated in record " + std::to_string(whole) + " of " + std::to_string(count) +
               "; last complete record index " + std::to_string(whole - 1)}});
  }

  m.records.resize(static_cast<std::size_t>(count));
  std::vector<double> starts;
  starts.reserve(static_cast<std::size_t>(count));
  for (std::int64_t r = 0; r < count; ++r) {
    const std::int64_t rec_off = expected_header + r * record_bytes;
    const std::uint8_t* p = bytes.data() + rec_off;
    auto& rec = m.records[static_cast<std::size_t>(r)];
    rec.reserve(m.signals.size());
    bool timekeeping_seen = false;
    for (int i = 0; i < ns; ++i) {
      const auto& s = all[static_cast<std::size_t>(i)];
      const auto n = static_cast<std::size_t>(s.samples_per_record);
      if (is_annotation[static_cast<std::size_t>(i)]) {
        const std::span<const std::uint8_t> area(p, n * static_cast<std::size_t>(bps));
        auto tals = decode_tal(area, p - bytes.data());
        auto it = tals.begin();
        if (!timekeeping_seen) {
          if (tals.empty()) {
            fail({{"missing-timekeeping", "record[" + std::to_string(r) + "]", p - bytes.data(),
                   "data record without a timekeeping annotation"}});
          }
          timekeeping_seen = true;
          starts.push_back(it->onset);
          if (!it->texts.empty() && it->texts.front().empty()) it->texts.erase(it->texts.begin());
          if (it->texts.empty()) ++it;  // pure timekeeping entry
        }
        m.annotations.insert(m.annotations.end(), std::make_move_iterator(it),
                             std::make_move_iterator(tals.end()));
      } else {
        std::vector<std::int32_t> block(n);
        for (std::size_t k = 0; k < n; ++k) block[k] = get_le(p + k * static_cast<std::size_t>(bps), bps);
        rec.push_back(std::move(block));
      }
      p += n * static_cast<std::size_t>(bps);
    }
  }

  if (m.header.continuity == Continuity::kContinuous) {
    for (std::size_t r = 0; r < starts.size(); ++r) {
      const double expected = static_cast<double>(r) * m.header.record_duration;
      if (std::abs(starts[r] - expected) > 1e-6 * std::max(1.0, std::abs(expected))) {
        fail({{"continuity", "record[" + std::to_string(r) + "]",
               expected_header + static_cast<std::int64_t>(r) * record_bytes,
               "continuous file but record starts at " + format_decimal(starts[r]) + " s"}});
      }
    }
  } else if (m.header.continuity == Continuity::kDiscontinuous) {
    m.record_starts = std::move(starts);
  }
  return m;
}

Bytes read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path);
}

// ---------------------------------------------------------------------------

RecordStreamWriter::RecordStreamWriter(const std::string& path, SignalFileModel layout)
    : layout_(std::move(layout)) {
  layout_.records.clear();
  layout_.annotations.clear();
  layout_.record_starts.clear();
  layout_.header.record_count = 0;
  if (auto findings = validate(layout_); !findings.empty()) fail(std::move(findings));
  if (layout_.header.continuity == Continuity::kDiscontinuous) {
    fail({{"continuity", "header", -1, "stream writer only produces continuous files"}});
  }
  layout_.header.record_count = -1;
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw std::runtime_error("cannot write " + path);
  const Bytes header = encode_file(layout_);
  out_.write(reinterpret_cast<const char*>(header.data()), static_cast<std::streamsize>(header.size()));
}

RecordStreamWriter::~RecordStreamWriter() {
  if (!finished_) {
    try {
      finish();
    } catch (...) {
    }
  }
}

void RecordStreamWriter::append(const DataRecord& record, std::span<const Annotation> annotations) {
  if (finished_) throw std::logic_error("RecordStreamWriter already finished");
  // Encode a one-record model and keep only its data area; the timekeeping
  // entry is patched to this record's start.
  SignalFileModel one = layout_;
  one.header.record_count = 1;
  one.header.record_duration = layout_.header.record_duration;
  one.records = {record};
  one.annotations.assign(annotations.begin(), annotations.end());
  if (auto findings = Checker(one).run(); !findings.empty()) fail(std::move(findings));

  const double start = static_cast<double>(written_) * layout_.header.record_duration;
  const int bps = bytes_per_sample(layout_.header.width);
  Bytes data;
  for (const auto& block : record) {
    const std::size_t at = data.size();
    data.resize(at + block.size() * static_cast<std::size_t>(bps));
    for (std::size_t k = 0; k < block.size(); ++k) {
      put_le(data.data() + at + k * static_cast<std::size_t>(bps), block[k], bps);
    }
  }
  if (layout_.has_annotation_signal()) {
    const std::size_t capacity =
        static_cast<std::size_t>(layout_.annotation_samples_per_record) * static_cast<std::size_t>(bps);
    std::string tal = detail::timekeeping_tal(start);
    for (const auto& a : annotations) tal += encode_tal_entry(a);
    if (tal.size() > capacity) {
      fail({{"annotation-overflow", "record[" + std::to_string(written_) + "]", -1,
             "annotations do not fit this record's annotation signal"}});
    }
    data.insert(data.end(), tal.begin(), tal.end());
    data.resize(data.size() + capacity - tal.size(), 0x00);
  }
  out_.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out_) throw std::runtime_error("write failed");
  ++written_;
}

std::int64_t RecordStreamWriter::finish() {
  if (finished_) return written_;
  finished_ = true;
  out_.seekp(layout::kRecordCount.offset);
  const std::string count = pad(std::to_string(written_), layout::kRecordCount.width);
  out_.write(count.data(), static_cast<std::streamsize>(count.size()));
  out_.close();
  if (!out_) throw std::runtime_error("failed to finalize record count");
  return written_;
}

}  // namespace eegcare::codec
