/*
 * Copyright 2026 The edslab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <iosfwd>
#include <string>

#include "edslab/experiment.hpp"

namespace edslab {

inline constexpr int kCsvSchemaVersion = 1;

/// printf %.17g, so values round-trip exactly.
std::string format_double(double v);

void write_base_solution_csv(std::ostream& os, const RunResult& run);
void write_profiles_csv(std::ostream& os, const RunResult& run);
void write_fit_csv(std::ostream& os, const RunResult& run);
void write_certificates(std::ostream& os, const RunResult& run);
void write_summary(std::ostream& os, const ExperimentConfig& config, const RunResult& run);

/// Writes every artifact plus manifest.txt into `dir`.
void write_run_outputs(const std::string& dir, const ExperimentConfig& config, const RunResult& run);

}  // namespace edslab
