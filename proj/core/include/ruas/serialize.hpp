// Copyright 2026 The RUAS Authors. All rights reserved.
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

// File formats. Genotypes and checkpoints are line-oriented text; weight
// values are hexadecimal floating point, so write -> read -> write is
// byte-identical.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ruas/bilevel.hpp"
#include "ruas/cell.hpp"
#include "ruas/metrics.hpp"
#include "ruas/trainer.hpp"

namespace ruas {

std::string genotype_to_text(const Genotype& g);
Genotype genotype_from_text(const std::string& text);
void write_genotype(const std::filesystem::path& path, const Genotype& g);
Genotype read_genotype(const std::filesystem::path& path);

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ck);
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// Search telemetry as line-delimited JSON records.
void write_history(const std::filesystem::path& path, const std::vector<StepRecord>& history);

std::string metric_report_to_json(const MetricReport& report);
void write_metric_report(const std::filesystem::path& path, const MetricReport& report);

}  // namespace ruas
