// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "divbar/model.hpp"

namespace divbar {

/**
 * Parse a JSON config document into ModelParams.
 *
 * Keys: n, drift, vol, corr (optional, identity when absent), discount,
 * weights, intensity. `intensity` is either
 *   {"table": {"<bits>": [lambda_1, ..., lambda_n], ...}}
 * with one row per state that has a survivor (entries of defaulted
 * subsidiaries may be null), or
 *   {"rule": {"base": [...], "factor": f}}.
 *
 * Structural problems (unknown keys, wrong types, missing rows) throw
 * ConfigError with a JSON-pointer location. Model invariants are not checked
 * here; run validate() on the result.
 */
ModelParams parse_config(std::string_view text);
ModelParams load_config(std::filesystem::path const& path);

/// Round-trippable JSON text with the intensity written as a full table.
std::string params_to_json(ModelParams const& params, int indent = 2);

}  // namespace divbar
