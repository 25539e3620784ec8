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

#pragma once

#include <string>
#include <vector>

#include "eegcare/codec/model.hpp"

namespace eegcare::codec::detail {

std::string timekeeping_tal(double record_start);

// TAL bytes for each record's annotation signal: the timekeeping entry
// followed by the user annotations placed there. Annotations go to the
// record containing their onset, spilling forward in list order when that
// record is full. Throws CodecError("annotation-overflow").
std::vector<std::string> allocate_annotations(const SignalFileModel& model);

}  // namespace eegcare::codec::detail
