#pragma once

#include <string>
#include <string_view>
#include <variant>

#include "hybridnet/cc4.hpp"
#include "hybridnet/fc.hpp"
#include "hybridnet/mlp.hpp"

namespace hybridnet {

using Model = std::variant<Cc4Network, Cc4Regressor, FcNetwork, Mlp>;

std::string_view model_kind(const Model& m) noexcept;

/// JSON text with a "kind" tag ("cc4", "fc" or "mlp"). A CC4 model carries
/// its quantizers when it is an analog regressor. Doubles round-trip exactly;
/// infinite radii are written as the string "inf".
std::string dump_model(const Model& m, int indent = -1);

/// Throws Error naming the offending field on malformed input.
Model parse_model(std::string_view text);

void save_model(const Model& m, const std::string& path);
Model load_model(const std::string& path);

}  // namespace hybridnet
