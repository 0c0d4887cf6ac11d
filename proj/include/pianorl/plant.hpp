// Copyright 2026 The pianorl Authors
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

#ifndef PIANORL_PLANT_HPP_
#define PIANORL_PLANT_HPP_

#include <cstdint>
#include <optional>
#include <string>

#include "pianorl/physics.hpp"
#include "pianorl/song.hpp"

namespace pianorl {

// What the controlled system reports after a command.
struct PlantReading {
  // Control step this state belongs to: 0 after reset, t + 1 after command t.
  std::uint64_t t = 0;
  KeyVector pressed{};
  std::optional<JointVector> joints;
  // Deadline missed; the last known state was reused.
  bool stale = false;
};

class Plant {
 public:
  virtual ~Plant() = default;
  virtual PlantReading reset(std::uint64_t seed) = 0;
  // Applies joint targets for one control period.
  virtual PlantReading command(std::uint64_t t, const JointVector& targets) = 0;
  virtual std::string describe() const = 0;
};

// A second simulator instance. Throws PlantError on an integration fault.
class InternalPlant final : public Plant {
 public:
  explicit InternalPlant(PhysicalParams params);

  PlantReading reset(std::uint64_t seed) override;
  PlantReading command(std::uint64_t t, const JointVector& targets) override;
  std::string describe() const override;

  const PlantState& state() const { return state_; }
  const PhysicalParams& params() const { return params_; }

 private:
  PlantReading reading(std::uint64_t t) const;

  PhysicalParams params_;
  PlantState state_;
};

// Fixed perturbation of the nominal parameters standing in for the gap
// between simulator and hardware. scale = 0 returns `nominal` unchanged.
enum class PerturbationProfile { kProxy, kThresholdOnly };

PhysicalParams perturbed_params(const PhysicalParams& nominal, double scale,
                                PerturbationProfile profile = PerturbationProfile::kProxy);

}  // namespace pianorl

#endif  // PIANORL_PLANT_HPP_
