#pragma once

#include <cstdint>
#include <string>

#include "trajflow/dataset.hpp"
#include "trajflow/optim.hpp"
#include "trajflow/params.hpp"
#include "trajflow/sampler.hpp"

#include <json.hpp>

namespace trajflow {

// On-disk container: magic, format version, a JSON metadata string, named
// float64 blobs, and a trailing FNV-1a checksum of everything before it.
// All integers and doubles are little-endian. Writing is deterministic, so
// save -> load -> save reproduces the file byte for byte.
struct CheckpointBlob {
    std::string meta_json;
    ParamSet blobs;
};

void save_checkpoint_blob(const std::string& path, const CheckpointBlob& blob);
// Throws SchemaError on bad magic/version/structure, DataError on checksum
// mismatch, IoError if unreadable.
CheckpointBlob load_checkpoint_blob(const std::string& path);

nlohmann::json net_config_to_json(const NetConfig& cfg);
NetConfig net_config_from_json(const nlohmann::json& j);

// Everything needed to resume training or to sample: the model, the data
// normalization it was trained with, optimizer moments and the resolved run
// configuration snapshot.
struct ModelCheckpoint {
    GenerativeModel model;
    NormStats stats;
    ContextLayout layout;
    AdamState opt;
    std::int64_t trained_steps = 0;
    nlohmann::json run_config;  // may be null
};

void save_model_checkpoint(const std::string& path, const ModelCheckpoint& ckpt);
ModelCheckpoint load_model_checkpoint(const std::string& path);

}  // namespace trajflow
