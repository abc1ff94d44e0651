#pragma once

#include <string>

#include "relnet/analysis.hpp"

namespace relnet {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  AnyModel model;
  std::string manifest_hash;
};

/// Single JSON document: format tag, version, model kind, config, index,
/// and every tensor as {rows, cols, data}. Doubles are written in shortest
/// round-trip form, so save/load is lossless.
void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
std::string checkpoint_json(const Checkpoint& checkpoint);

/// Throws MissingArtifactError if the file does not exist and InputError
/// when it is malformed or a tensor shape disagrees with the config.
Checkpoint load_checkpoint(const std::string& path);
Checkpoint parse_checkpoint(const std::string& text);

}  // namespace relnet
