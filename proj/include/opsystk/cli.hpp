// Copyright 2026 the opsystk authors
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

#include <iosfwd>
#include <string>
#include <vector>

namespace opsystk::cli {

// Exit codes: 0 MEMBER/agreement, 1 NON_MEMBER/witness-found, 2 UNDECIDED,
// 64 usage error, 65 malformed input. A JSON report goes to stdout (or
// --out) on success paths.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace opsystk::cli
