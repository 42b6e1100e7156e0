#pragma once

#include <string>

#include "lodbs/experiments.hpp"

namespace lodbs {

/// Read an experiment config from TOML (the flat subset below) or JSON; the
/// format is sniffed from the extension and content. Unknown keys are
/// rejected. Keys present in the file override the preset selected by the
/// `experiment` and `paper_scale` entries.
///
///   experiment = "exp1-smooth"
///   epsilon = 0.015625
///   h_levels = [2, 3, 4]
///   variants = ["uniform", "lod"]
ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, bool is_json);

/// Inverse of the parser (TOML); parse(serialize(cfg)) reproduces cfg.
std::string serialize_config(const ExperimentConfig& cfg);

}  // namespace lodbs
