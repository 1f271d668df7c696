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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edslab/eds.hpp"

namespace edslab {

struct DecayPanel {
  std::string title;
  std::vector<SensitivityProfile> profiles;
  std::optional<DecayFit> fit;
};

/// Semilog plot of s_i against stage i with the envelope Upsilon rho^|i-j| magnitude
/// and a vertical marker at each perturbed stage. Throws ConfigurationError when
/// there is nothing to plot.
std::string plot_decay(std::span<const SensitivityProfile> profiles, const std::optional<DecayFit>& fit,
                       const std::string& title = "");

/// Panels stacked vertically in one document.
std::string plot_decay_panels(std::span<const DecayPanel> panels);

}  // namespace edslab
