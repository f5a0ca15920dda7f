#pragma once

#include <optional>
#include <string>

#include "lvr/encoder.hpp"
#include "lvr/losses.hpp"

namespace lvr {

// Single-file checkpoint: one JSON header line (config, payload layout, omega,
// init flags) followed by the raw little-endian float64 payload — flattened
// parameters, then the center matrix when present. Round-trips bit for bit.

struct Checkpoint {
    EncoderConfig config;
    Parameters params;
    std::optional<CenterState> state;
};

void save_checkpoint(const std::string& path, const EncoderConfig& config,
                     const Parameters& params, const CenterState* state = nullptr);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace lvr
