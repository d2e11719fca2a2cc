#pragma once

#include <filesystem>
#include <string>

#include "deltacharger/dataset.hpp"
#include "deltacharger/dockfsm.hpp"
#include "deltacharger/kinematics.hpp"
#include "deltacharger/train.hpp"

namespace deltacharger {

/// Every tunable of a run. Loaded from JSON; keys that are absent keep their defaults.
struct GlobalConfig {
    kinematics::DeltaGeometry<double> geometry;
    GenerationConfig generation;  // includes the electrode plan and sensor noise
    dock::DockParams dock;        // includes the current model
    nn::TrainConfig train;
    std::string data_dir = "data";
    std::string model_dir = "models";

    /// Canonical pretty-printed JSON with every field.
    std::string to_json() const;
    /// Throws InvalidArgument on unknown keys or wrong types.
    static GlobalConfig from_json(const std::string& text);
    static GlobalConfig load(const std::filesystem::path& path);

    void validate() const;
};

}  // namespace deltacharger
