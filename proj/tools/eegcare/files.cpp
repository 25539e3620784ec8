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

// inspect, convert

#include <cmath>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "eegcare/codec/calibration.hpp"
#include "eegcare/codec/codec.hpp"
#include "eegcare/codec/tal.hpp"

namespace eegcare::cli {

namespace {

using nlohmann::json;

std::string format_name(const codec::SignalFileModel& m) {
  std::string f = m.header.width == codec::SampleWidth::kEdf16 ? "EDF" : "BDF";
  if (m.has_annotation_signal()) f += "+";
  return f;
}

std::string_view continuity_name(codec::Continuity c) {
  switch (c) {
    case codec::Continuity::kPlain:
      return "plain";
    case codec::Continuity::kContinuous:
      return "continuous";
    case codec::Continuity::kDiscontinuous:
      return "discontinuous";
  }
  return "?";
}

json annotation_json(const codec::Annotation& a) {
  return {{"onset", a.onset}, {"duration", a.duration ? json(*a.duration) : json(nullptr)}, {"texts", a.texts}};
}

double duration_of(const codec::SignalFileModel& m) {
  return static_cast<double>(m.records.size()) * m.header.record_duration;
}

json summary_json(const codec::SignalFileModel& m, const std::vector<codec::Finding>& findings,
                  bool with_annotations) {
  json signals = json::array();
  for (const auto& s : m.signals) {
    signals.push_back({{"label", s.label},
                       {"transducer", s.transducer},
                       {"physical_dimension", s.physical_dimension},
                       {"physical_min", s.physical_min},
                       {"physical_max", s.physical_max},
                       {"digital_min", s.digital_min},
                       {"digital_max", s.digital_max},
                       {"prefiltering", s.prefiltering},
                       {"samples_per_record", s.samples_per_record},
                       {"rate", s.samples_per_record / m.header.record_duration}});
  }
  json problems = json::array();
  for (const auto& f : findings) {
    problems.push_back({{"code", f.code}, {"field", f.field}, {"offset", f.offset}, {"message", f.message}});
  }
  json out{{"format", format_name(m)},
           {"continuity", continuity_name(m.header.continuity)},
           {"patient", m.header.patient_id},
           {"recording", m.header.recording_id},
           {"start_date", m.header.start_date},
           {"start_time", m.header.start_time},
           {"records", m.header.record_count},
           {"record_duration", m.header.record_duration},
           {"duration_s", duration_of(m)},
           {"signals", signals},
           {"annotation_count", m.annotations.size()},
           {"valid", findings.empty()},
           {"findings", problems}};
  if (with_annotations) {
    json list = json::array();
    for (const auto& a : m.annotations) list.push_back(annotation_json(a));
    out["annotations"] = list;
  }
  return out;
}

void print_summary(const codec::SignalFileModel& m, const std::string& path, bool with_annotations) {
  std::cout << path << ": " << format_name(m) << ", " << continuity_name(m.header.continuity) << "\n"
            << "  patient    " << m.header.patient_id << "\n"
            << "  recording  " << m.header.recording_id << "\n"
            << "  start      " << m.header.start_date << " " << m.header.start_time << "\n"
            << "  records    " << m.header.record_count << " x " << codec::format_decimal(m.header.record_duration)
            << " s\n"
            << "  duration   " << codec::format_decimal(duration_of(m)) << " s\n"
            << "  signals    " << m.signals.size() << "\n";
  for (const auto& s : m.signals) {
    std::cout << "    " << std::left << std::setw(16) << s.label << std::right << std::setw(8)
              << s.samples_per_record / m.header.record_duration << " Hz  [" << s.physical_min << ", "
              << s.physical_max << "] " << s.physical_dimension << "  digital [" << s.digital_min << ", "
              << s.digital_max << "]\n";
  }
  std::cout << "  annotations " << m.annotations.size() << "\n";
  if (with_annotations) {
    for (const auto& a : m.annotations) {
      std::cout << "    +" << a.onset;
      if (a.duration) std::cout << " (" << *a.duration << " s)";
      for (const auto& t : a.texts) std::cout << " " << t;
      std::cout << "\n";
    }
  }
}

struct InspectOptions {
  std::string path;
  bool json = false;
  bool annotations = false;
  std::uint64_t seed = 0;
};

int run_inspect(const InspectOptions& o) {
  const auto bytes = codec::read_file_bytes(o.path);
  codec::SignalFileModel m;
  try {
    m = codec::decode_file(bytes);
  } catch (const codec::CodecError& e) {
    if (!o.json) throw;
    json problems = json::array();
    for (const auto& f : e.findings()) {
      problems.push_back({{"code", f.code}, {"field", f.field}, {"offset", f.offset}, {"message", f.message}});
    }
    std::cout << json{{"valid", false}, {"findings", problems}}.dump(2) << "\n";
    return kInvalid;
  }
  const auto findings = codec::validate(m);
  if (o.json) {
    std::cout << summary_json(m, findings, o.annotations).dump(2) << "\n";
  } else {
    print_summary(m, o.path, o.annotations);
    if (findings.empty()) {
      std::cout << "  valid\n";
    } else {
      std::cout << "  INVALID\n";
      for (const auto& f : findings) std::cout << "    " << f.to_string() << "\n";
    }
  }
  return findings.empty() ? kOk : kInvalid;
}

// Requantizes a signal whose digital range does not fit the target width.
void fit_signal(codec::SignalFileModel& m, std::size_t c, codec::SampleWidth to) {
  auto& s = m.signals[c];
  const auto lo = codec::format_digital_min(to), hi = codec::format_digital_max(to);
  if (s.digital_min >= lo && s.digital_max <= hi) return;
  const auto from = codec::Calibration::of(s);
  s.digital_min = lo;
  s.digital_max = hi;
  const auto cal = codec::Calibration::of(s);
  for (auto& rec : m.records) {
    for (auto& v : rec[c]) v = codec::phys_to_dig(codec::dig_to_phys(v, from).value, cal).value;
  }
}

struct ConvertOptions {
  std::string in, out;
  std::string to;
  bool anonymize = false;
  std::uint64_t seed = 0;
};

int run_convert(const ConvertOptions& o) {
  auto m = codec::decode_file(codec::read_file_bytes(o.in));
  auto findings = codec::validate(m);
  if (!findings.empty()) {
    std::cerr << o.in << ": invalid input\n";
    for (const auto& f : findings) std::cerr << "  " << f.to_string() << "\n";
    return kInvalid;
  }
  const auto width = o.to == "edf" ? codec::SampleWidth::kEdf16 : codec::SampleWidth::kBdf24;
  bool requantized = false;
  if (width != m.header.width) {
    if (m.has_annotation_signal()) {
      // Keep the same number of annotation bytes per record.
      const int bytes = m.annotation_samples_per_record * codec::bytes_per_sample(m.header.width);
      const int per = codec::bytes_per_sample(width);
      m.annotation_samples_per_record = (bytes + per - 1) / per;
    }
    for (std::size_t c = 0; c < m.signals.size(); ++c) {
      const auto before = m.signals[c];
      fit_signal(m, c, width);
      requantized |= !(before == m.signals[c]);
    }
    m.header.width = width;
  }
  if (o.anonymize) {
    std::istringstream in(m.header.patient_id);
    std::vector<std::string> tok;
    for (std::string t; in >> t;) tok.push_back(t);
    if (tok.size() >= 4) {
      tok.resize(4);
      tok[3] = "X";
      m.header.patient_id = tok[0] + " " + tok[1] + " " + tok[2] + " " + tok[3];
    } else {
      m.header.patient_id = "X X X X";
    }
  }
  findings = codec::validate(m);
  if (!findings.empty()) {
    std::cerr << "conversion produced an invalid file\n";
    for (const auto& f : findings) std::cerr << "  " << f.to_string() << "\n";
    return kInvalid;
  }
  codec::write_file_bytes(o.out, codec::encode_file(m));
  std::cout << o.in << " -> " << o.out << " (" << format_name(m) << ", " << m.records.size() << " records)\n";
  if (requantized) std::cout << "note: signals rescaled to the 16-bit digital range\n";
  return kOk;
}

}  // namespace

Command add_inspect(CLI::App& app) {
  auto o = std::make_shared<InspectOptions>();
  auto* sub = app.add_subcommand("inspect", "Summarize and validate an EDF/BDF file");
  sub->add_option("file", o->path, "EDF, EDF+, BDF or BDF+ file")->required();
  sub->add_flag("--json", o->json, "Machine-readable summary");
  sub->add_flag("--annotations", o->annotations, "List annotations");
  add_seed(sub, o->seed);
  return {sub, [o] { return run_inspect(*o); }};
}

Command add_convert(CLI::App& app) {
  auto o = std::make_shared<ConvertOptions>();
  auto* sub = app.add_subcommand("convert", "Rewrite a file as EDF or BDF");
  sub->add_option("input", o->in)->required();
  sub->add_option("output", o->out)->required();
  sub->add_option("--to", o->to, "Target sample width")->required()->check(CLI::IsMember({"edf", "bdf"}));
  sub->add_flag("--anonymize", o->anonymize, "Replace the patient name with X");
  add_seed(sub, o->seed);
  return {sub, [o] { return run_convert(*o); }};
}

}  // namespace eegcare::cli
