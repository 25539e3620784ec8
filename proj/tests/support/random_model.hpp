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

// Random generators shared by the property tests and the acceptance suite.

#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "eegcare/codec/codec.hpp"
#include "eegcare/codec/model.hpp"

namespace eegcare::testing {

inline std::string random_token(std::mt19937_64& rng, std::size_t max_len, bool allow_inner_space) {
  static const std::string alphabet =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789_-.:/+()";
  std::uniform_int_distribution<std::size_t> len_dist(0, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::string s(len_dist(rng), 'x');
  for (auto& c : s) c = alphabet[pick(rng)];
  if (allow_inner_space && s.size() > 2) s[s.size() / 2] = ' ';
  return s;
}

// UTF-8 text without the TAL control bytes.
inline std::string random_annotation_text(std::mt19937_64& rng, std::size_t max_len) {
  static const std::vector<std::string> pieces = {"a", "Z", "7", " ", "-", "\xC3\xA9", "\xE2\x82\xAC", "blink", "GAP",
                                                  "\x01", "\x7F", "\x13", "\x16"};
  std::uniform_int_distribution<std::size_t> n_dist(0, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
  std::string s;
  for (std::size_t n = n_dist(rng); n > 0; --n) s += pieces[pick(rng)];
  return s;
}

// Decimal with at most `frac` fractional digits; exactly representable as
// the shortest round-trip string of the resulting double.
inline double random_decimal(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi, int frac) {
  std::int64_t scale = 1;
  for (int i = 0; i < frac; ++i) scale *= 10;
  std::uniform_int_distribution<std::int64_t> d(lo * scale, hi * scale);
  return static_cast<double>(d(rng)) / static_cast<double>(scale);
}

inline std::vector<codec::Annotation> random_annotations(std::mt19937_64& rng, std::size_t max_count,
                                                          double max_onset) {
  std::uniform_int_distribution<std::size_t> count(0, max_count);
  std::bernoulli_distribution has_duration(0.5);
  std::uniform_int_distribution<int> text_count(0, 2);
  std::vector<codec::Annotation> out(count(rng));
  for (auto& a : out) {
    a.onset = random_decimal(rng, static_cast<std::int64_t>(-max_onset / 10), static_cast<std::int64_t>(max_onset), 3);
    if (has_duration(rng)) a.duration = random_decimal(rng, 0, 30, 2);
    for (int t = text_count(rng); t > 0; --t) a.texts.push_back(random_annotation_text(rng, 4));
  }
  return out;
}

// A valid model: random width, continuity, signal count, calibrations,
// record layout, samples and annotations.
inline codec::SignalFileModel random_model(std::mt19937_64& rng) {
  using namespace eegcare::codec;
  SignalFileModel m;
  std::bernoulli_distribution coin(0.5);
  m.header.width = coin(rng) ? SampleWidth::kBdf24 : SampleWidth::kEdf16;
  const int cont = std::uniform_int_distribution<int>(0, 9)(rng);
  m.header.continuity = cont == 0 ? Continuity::kPlain : (cont == 1 ? Continuity::kDiscontinuous : Continuity::kContinuous);
  auto trimmed = [](std::string s) {
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s;
  };
  m.header.patient_id = trimmed(random_token(rng, 80, true));
  m.header.recording_id = trimmed(random_token(rng, 80, true));
  auto two = [&](int lo, int hi) {
    const int v = std::uniform_int_distribution<int>(lo, hi)(rng);
    return std::string(v < 10 ? "0" : "") + std::to_string(v);
  };
  m.header.start_date = two(1, 28) + "." + two(1, 12) + "." + two(0, 99);
  m.header.start_time = two(0, 23) + "." + two(0, 59) + "." + two(0, 59);
  const double durations[] = {1.0, 0.5, 2.0, 0.25, 10.0, 0.046875};
  m.header.record_duration = durations[std::uniform_int_distribution<int>(0, 5)(rng)];

  const int ns = std::uniform_int_distribution<int>(1, 6)(rng);
  const std::int32_t fmin = format_digital_min(m.header.width);
  const std::int32_t fmax = format_digital_max(m.header.width);
  for (int i = 0; i < ns; ++i) {
    SignalHeader s;
    s.label = trimmed(random_token(rng, 16, true));
    s.transducer = trimmed(random_token(rng, 40, true));
    s.physical_dimension = trimmed(random_token(rng, 8, false));
    s.prefiltering = trimmed(random_token(rng, 40, true));
    do {
      s.physical_min = random_decimal(rng, -9999, 9999, 2);
      s.physical_max = random_decimal(rng, -9999, 9999, 2);
    } while (s.physical_min == s.physical_max);
    std::uniform_int_distribution<std::int32_t> dig(fmin, fmax);
    do {
      s.digital_min = coin(rng) ? fmin : dig(rng);
      s.digital_max = coin(rng) ? fmax : dig(rng);
    } while (s.digital_min >= s.digital_max);
    s.samples_per_record = std::uniform_int_distribution<std::int32_t>(1, 40)(rng);
    m.signals.push_back(std::move(s));
  }

  const int records = std::uniform_int_distribution<int>(0, 8)(rng);
  for (int r = 0; r < records; ++r) {
    codec::DataRecord rec;
    for (const auto& s : m.signals) {
      std::uniform_int_distribution<std::int32_t> v(s.digital_min, s.digital_max);
      std::vector<std::int32_t> block(static_cast<std::size_t>(s.samples_per_record));
      for (auto& x : block) x = v(rng);
      rec.push_back(std::move(block));
    }
    m.records.push_back(std::move(rec));
  }
  m.header.record_count = std::bernoulli_distribution(0.1)(rng) ? -1 : records;

  if (m.header.continuity == Continuity::kDiscontinuous) {
    double t = random_decimal(rng, 0, 5, 1);
    for (int r = 0; r < records; ++r) {
      m.record_starts.push_back(t);
      t += m.header.record_duration + random_decimal(rng, 0, 3, 1);
    }
  }
  if (m.has_annotation_signal()) {
    m.annotation_samples_per_record = std::uniform_int_distribution<std::int32_t>(40, 80)(rng);
    const double span = std::max(1.0, records * m.header.record_duration);
    if (records > 0) m.annotations = random_annotations(rng, static_cast<std::size_t>(records), span);
    // Forward spilling can still run out of room at the end of the file.
    while (!m.annotations.empty() && !codec::validate(m).empty()) m.annotations.pop_back();
  }
  return m;
}

}  // namespace eegcare::testing
